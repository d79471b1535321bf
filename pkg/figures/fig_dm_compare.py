#!/usr/bin/env python3
"""Analytic versus spectrally fitted noise amplitude: D_M(x) on the top row
and the fitted memory decay rate on the bottom row, one column per
hybridization strength."""
import figspec

GAMMAS = (0.001, 0.01)

SPEC = figspec.FigureSpec(
    figure_id="dm_compare",
    layout=(2, 2),
    panels=tuple(
        figspec.Panel(
            title=f"$\\Gamma = {gamma:g}$",
            curves=(figspec.Curve(csv=f"dm_compare_G{gamma:g}_{tag}.csv",
                                  label=label, color="#1f77b4"),),
            x_label="x",
            y_label=y_label,
            kind="pair",
        )
        for tag, label, y_label in (("dm", r"$D_M$", r"$D_M(x)$"),
                                    ("rate", "decay rate", r"decay rate $\Gamma'/\hbar$"))
        for gamma in GAMMAS
    ),
)

if __name__ == "__main__":
    raise SystemExit(figspec.main(SPEC, __doc__))
