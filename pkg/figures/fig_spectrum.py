#!/usr/bin/env python3
"""Power spectrum of the force-fluctuation correlation function at the charged
minimum, for three hybridization strengths — each a Lorentzian of width
Gamma/hbar on the shared log-log axes."""
import figspec

CURVES = (
    figspec.Curve(csv="spectrum_G0.0001.csv", label=r"$\Gamma = 10^{-4}$",
                  color="#1f77b4"),
    figspec.Curve(csv="spectrum_G0.001.csv", label=r"$\Gamma = 10^{-3}$",
                  color="#d62728"),
    figspec.Curve(csv="spectrum_G0.01.csv", label=r"$\Gamma = 10^{-2}$",
                  color="#2ca02c"),
)

SPEC = figspec.FigureSpec(
    figure_id="spectrum",
    layout=(1, 1),
    panels=(
        figspec.Panel(
            title="force-correlation power spectrum",
            curves=CURVES,
            x_label=r"$\omega$",
            y_label=r"$\mathcal{K}(\omega)$",
            kind="spectrum",
            log_x=True,
            log_y=True,
        ),
    ),
)

if __name__ == "__main__":
    raise SystemExit(figspec.main(SPEC, __doc__))
