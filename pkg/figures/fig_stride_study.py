#!/usr/bin/env python3
"""Colored-noise bookkeeping study: (a) analytic versus spectrally fitted
noise amplitudes drive indistinguishable relaxation; (b) refreshing the fitted
amplitude every 1, 10 or 50 steps leaves the dynamics unchanged."""
import figspec

SOURCE_PANEL = figspec.Panel(
    title="(a) amplitude source",
    curves=tuple(
        figspec.Curve(
            csv=f"stride_study_a-G{gamma:g}-{source}_ke_nm-ed.csv",
            label=f"$\\Gamma = {gamma:g}$ {source}",
            color=color,
            linestyle="-" if source == "analytic" else "--",
        )
        for gamma, color in ((0.001, "#1f77b4"), (0.01, "#d62728"))
        for source in ("analytic", "fitted")
    ),
    x_label="time",
    y_label="average kinetic energy",
    ref_y=figspec.HALF_KT,
)

STRIDE_PANEL = figspec.Panel(
    title=r"(b) update stride at $\Gamma = 0.01$",
    curves=tuple(
        figspec.Curve(csv=f"stride_study_b-s{stride}_ke_nm-ed.csv",
                      label=f"stride {stride}", color=color)
        for stride, color in ((1, "#000000"), (10, "#1f77b4"), (50, "#d62728"))
    ),
    x_label="time",
    y_label="average kinetic energy",
    ref_y=figspec.HALF_KT,
)

SPEC = figspec.FigureSpec(
    figure_id="stride_study",
    layout=(1, 2),
    panels=(SOURCE_PANEL, STRIDE_PANEL),
)

if __name__ == "__main__":
    raise SystemExit(figspec.main(SPEC, __doc__))
