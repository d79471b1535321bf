#!/usr/bin/env python3
"""Kinetic energy and impurity population at extremely weak hybridization
(Gamma = 1e-4), where only the colored-noise and hopping methods agree."""
import figspec

SPEC = figspec.FigureSpec(
    figure_id="small_gamma",
    layout=(1, 2),
    panels=(
        figspec.Panel(
            title=r"$\Gamma = 10^{-4}$",
            curves=figspec.method_curves("small_gamma", "G0.0001", "ke"),
            x_label="time",
            y_label="average kinetic energy",
            ref_y=figspec.HALF_KT,
        ),
        figspec.Panel(
            title=r"$\Gamma = 10^{-4}$",
            curves=figspec.method_curves("small_gamma", "G0.0001", "pop"),
            x_label="time",
            y_label="impurity population",
        ),
    ),
)

if __name__ == "__main__":
    raise SystemExit(figspec.main(SPEC, __doc__))
