#!/usr/bin/env python3
"""Impurity-level population for the biased junction (symmetric leads at
+-mu_L): one panel per (bias, hybridization) combination, five methods each."""
import figspec

PANEL_AXES = (("a", r"$\mu_L = 0.05$"), ("b", r"$\mu_L = 0.2$"))
GAMMAS = (0.001, 0.01)

SPEC = figspec.FigureSpec(
    figure_id="neq_pop",
    layout=(2, 2),
    panels=tuple(
        figspec.Panel(
            title=f"{bias_title}, $\\Gamma = {gamma:g}$",
            curves=figspec.method_curves("neq_pop", f"{letter}-G{gamma:g}", "pop"),
            x_label="time",
            y_label="impurity population",
        )
        for letter, bias_title in PANEL_AXES
        for gamma in GAMMAS
    ),
)

if __name__ == "__main__":
    raise SystemExit(figspec.main(SPEC, __doc__))
