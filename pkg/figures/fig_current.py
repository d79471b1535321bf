#!/usr/bin/env python3
"""Left-lead electron current through the biased junction: one panel per
(bias, hybridization) combination, five methods per panel."""
import figspec

PANEL_AXES = (("a", r"$\mu_L = 0.05$"), ("b", r"$\mu_L = 0.2$"))
GAMMAS = (0.001, 0.01)

SPEC = figspec.FigureSpec(
    figure_id="current",
    layout=(2, 2),
    panels=tuple(
        figspec.Panel(
            title=f"{bias_title}, $\\Gamma = {gamma:g}$",
            curves=figspec.method_curves("current", f"{letter}-G{gamma:g}", "cur"),
            x_label="time",
            y_label="left-lead current",
        )
        for letter, bias_title in PANEL_AXES
        for gamma in GAMMAS
    ),
)

if __name__ == "__main__":
    raise SystemExit(figspec.main(SPEC, __doc__))
