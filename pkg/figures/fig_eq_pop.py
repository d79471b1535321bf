#!/usr/bin/env python3
"""Impurity-level population for the single-lead junction: one panel per
(impurity level, hybridization) combination, five methods per panel."""
import figspec

PANEL_AXES = (("a", r"$E_d = g^2/\hbar\omega$"), ("b", r"$E_d = g^2/2\hbar\omega$"))
GAMMAS = (0.001, 0.01)

SPEC = figspec.FigureSpec(
    figure_id="eq_pop",
    layout=(2, 2),
    panels=tuple(
        figspec.Panel(
            title=f"{level_title}, $\\Gamma = {gamma:g}$",
            curves=figspec.method_curves("eq_pop", f"{letter}-G{gamma:g}", "pop"),
            x_label="time",
            y_label="impurity population",
        )
        for letter, level_title in PANEL_AXES
        for gamma in GAMMAS
    ),
)

if __name__ == "__main__":
    raise SystemExit(figspec.main(SPEC, __doc__))
