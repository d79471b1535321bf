"""Recover the noise amplitude from the force power spectrum.

The fluctuating part of the electronic force on the oscillator has an
exponentially decaying autocorrelation, so its power spectrum is a
Lorentzian.  Fitting that Lorentzian returns two numbers with direct
physical meaning: the zero-frequency weight (the momentum diffusion
coefficient D_M) and the half width (the level broadening Gamma / hbar).

Both have closed forms for a single lead, so the fit can be checked
exactly.  This script runs the chain

    correlation_trace -> power_spectrum -> fit_lorentzian

at the charged minimum of the potential for two hybridization strengths
and prints fitted vs analytic values.

Run:  python3 demos/noise_spectroscopy.py
"""

from __future__ import annotations

from ahdyn import (
    BathSpec,
    Lead,
    ModelParams,
    charged_minimum,
    correlation_trace,
    fit_lorentzian,
    friction,
    noise_amplitude_analytic,
    power_spectrum,
)

OMEGA = 0.003
KT = 0.05
G = 0.02


def main() -> None:
    params = ModelParams(omega=OMEGA, g=G, e_d=G**2 / (2.0 * OMEGA))
    x = charged_minimum(params)
    print(f"probe point: charged minimum x = {x:.3f}")
    print()
    header = (
        f"{'Gamma':>7} | {'D_M fit':>10} {'D_M exact':>10} {'err':>7} | "
        f"{'rate fit':>10} {'rate exact':>10} {'err':>7}"
    )
    print(header)
    print("-" * len(header))

    for gamma in (0.001, 0.01):
        bath = BathSpec(leads=(Lead(gamma=gamma),), kT=KT)
        trace = correlation_trace(params, bath, x)
        omega_grid, values = power_spectrum(trace)
        fit = fit_lorentzian(omega_grid, values)

        dm_exact = float(noise_amplitude_analytic(params, bath, x))
        rate_exact = gamma / params.hbar
        dm_err = abs(fit.d_m - dm_exact) / dm_exact
        rate_err = abs(fit.gamma - rate_exact) / rate_exact
        print(
            f"{gamma:7.3f} | {fit.d_m:10.3e} {dm_exact:10.3e} {dm_err:6.2%} | "
            f"{fit.gamma:10.3e} {rate_exact:10.3e} {rate_err:6.2%}"
        )

    print()
    # The same pair of numbers fixes the Langevin friction through the
    # fluctuation-dissipation relation D_M = friction * kT.
    bath = BathSpec(leads=(Lead(gamma=0.01),), kT=KT)
    dm = float(noise_amplitude_analytic(params, bath, x))
    gam = float(friction(params, bath, x))
    print(f"fluctuation-dissipation at Gamma=0.01: D_M = {dm:.4e}, "
          f"friction*kT = {gam * KT:.4e}")


if __name__ == "__main__":
    main()
