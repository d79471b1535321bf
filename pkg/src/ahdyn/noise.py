"""Random forces for the trajectory methods.

Three layers:

* Markovian white noise xi_M ~ N(0, 2 D_M/dt) — the electronic-friction limit.
* The non-Markovian colored force xi_N, an Ornstein-Uhlenbeck-type process
  driven by xi_M through the explicit update

      xi_N  <-  xi_N - decay_rate * dt * (xi_N - xi_M),

  stationary with variance (lam dt)^2 (2 D_M/dt) / (2 lam dt - (lam dt)^2)
  (-> D_M * lam for small lam dt) and exponential memory at rate decay_rate,
  so its total integrated power equals 2 D_M exactly — the same power the
  white force carries.
* The general spectral route: propagate the surface-resolved force
  fluctuations against the steady state under the two-state master equation
  to get the correlation trace C(tau), Fourier transform the even extension,
  and fit the Lorentzian K(omega) = 2 D'_M Gamma'^2 / (omega^2 + Gamma'^2).
  For this model C(tau) = f(1-f) (dh/dx)^2 exp(-Gamma tau/hbar), so the fit
  recovers the analytic D_M and the hybridization decay rate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len
from scipy.optimize import least_squares
from scipy.signal import lfilter

from ._csvio import write_columns
from .errors import ConfigError, FitError, StabilityError
from .model import BathSpec, ModelParams, fermi_effective, level

__all__ = [
    "NoiseAmplitude",
    "ColoredNoiseState",
    "CorrelationTrace",
    "SpectralFit",
    "OUCheckResult",
    "FittedAmplitudeTable",
    "sample_white",
    "ou_step",
    "ou_stationary_std",
    "generate_ou_trace",
    "ou_autocorrelation_check",
    "force_fluctuations",
    "correlation_trace",
    "power_spectrum",
    "fit_lorentzian",
    "multi_peak_kernel",
    "amplitude_grid",
    "fit_amplitude_table",
    "spectrum_to_csv",
]


@dataclass(frozen=True)
class NoiseAmplitude:
    """A cached noise strength: D_M plus memory decay rate, with staleness metadata."""

    d_m: float
    decay_rate: float
    source: str  # "analytic" | "fitted"
    x: float  # position the amplitude was evaluated at
    age_steps: int = 0

    def __post_init__(self):
        if self.d_m < 0 or not np.isfinite(self.d_m):
            raise ConfigError("D_M must be finite and non-negative")
        if not self.decay_rate > 0:
            raise ConfigError("decay_rate must be positive")
        if self.source not in ("analytic", "fitted"):
            raise ConfigError(f"unknown amplitude source {self.source!r}")


@dataclass(frozen=True)
class ColoredNoiseState:
    """Current value of the colored random force."""

    xi_n: float


@dataclass(frozen=True)
class CorrelationTrace:
    """Force-fluctuation autocorrelation C(tau) on a tau grid starting at 0."""

    tau: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "values", values)
        if tau.ndim != 1 or tau.shape != values.shape:
            raise ConfigError("tau and values must be 1-d arrays of equal length")
        if tau.size < 2 or tau[0] != 0.0 or np.any(np.diff(tau) <= 0):
            raise ConfigError("tau grid must strictly increase from 0")
        if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(values))):
            raise ConfigError("trace must be finite")

    def to_csv(self, path) -> None:
        write_columns(path, "tau,value", self.tau, self.values)


@dataclass(frozen=True)
class SpectralFit:
    """Lorentzian fit result: noise strength, half-width, and log-domain residual."""

    d_m: float
    gamma: float
    residual: float


@dataclass(frozen=True)
class OUCheckResult:
    """Empirical diagnostics of a colored-noise trace."""

    rate: float
    zero_lag: float
    integrated_power: float
    fitted: bool


def sample_white(d_m: float, dt: float, rng, size=None):
    """Draw the Markovian random force, Gaussian with variance 2 D_M/dt."""
    if not dt > 0:
        raise ConfigError("dt must be positive")
    if d_m < 0:
        raise ConfigError("D_M must be non-negative")
    if d_m == 0.0:
        return 0.0 if size is None else np.zeros(size)
    sigma = np.sqrt(2.0 * d_m / dt)
    return rng.normal(0.0, sigma) if size is None else rng.normal(0.0, sigma, size)


def _require_stable(decay_rate: float, dt: float) -> float:
    if not (decay_rate > 0 and dt > 0):
        raise ConfigError("decay_rate and dt must be positive")
    lamdt = decay_rate * dt
    if lamdt >= 1.0:
        raise StabilityError(
            f"decay_rate*dt = {lamdt:.3g} >= 1: explicit colored-noise update is unstable"
        )
    return lamdt


def ou_step(state: ColoredNoiseState, xi_m: float, decay_rate: float, dt: float) -> ColoredNoiseState:
    """Advance the colored force one step: xi_N <- xi_N - decay_rate*dt*(xi_N - xi_M)."""
    _require_stable(decay_rate, dt)
    return ColoredNoiseState(state.xi_n - decay_rate * dt * (state.xi_n - xi_m))


def ou_stationary_std(d_m: float, decay_rate: float, dt: float) -> float:
    """Stationary standard deviation of the discrete update driven by white xi_M."""
    lamdt = _require_stable(decay_rate, dt)
    if d_m < 0:
        raise ConfigError("D_M must be non-negative")
    var = lamdt * lamdt * (2.0 * d_m / dt) / (2.0 * lamdt - lamdt * lamdt)
    return float(np.sqrt(var))


def generate_ou_trace(d_m: float, decay_rate: float, dt: float, n: int, rng) -> np.ndarray:
    """Generate n steps of the stationary colored force (vectorized recursion)."""
    lamdt = _require_stable(decay_rate, dt)
    xi_m = sample_white(d_m, dt, rng, size=n)
    if d_m == 0.0:
        return np.zeros(n)
    xi0 = rng.normal(0.0, ou_stationary_std(d_m, decay_rate, dt))
    y, _ = lfilter([lamdt], [1.0, -(1.0 - lamdt)], xi_m, zi=[(1.0 - lamdt) * xi0])
    return y


def _autocovariance(x: np.ndarray, maxlag: int) -> np.ndarray:
    x = x - x.mean()
    n = x.size
    nfft = next_fast_len(2 * n)
    spec = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(spec * np.conj(spec), nfft)[: maxlag + 1]
    return acov / (n - np.arange(maxlag + 1))


def ou_autocorrelation_check(samples, decay_rate: float, d_m: float, dt: float = 1.0) -> OUCheckResult:
    """Fit the empirical autocorrelation of a colored-force trace.

    Returns the fitted exponential rate, the zero-lag variance, and the total
    (two-sided) integrated power.  Raises on non-stationary input or when
    decay_rate*dt is too close to the stability boundary for a meaningful fit.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 100_000:
        raise ConfigError("need a stationary segment of at least 1e5 samples")
    lamdt = _require_stable(decay_rate, dt)
    if lamdt >= 0.95:
        raise StabilityError("decay_rate*dt too close to 1 for an exponential fit")
    if d_m == 0.0 or np.all(x == 0.0):
        return OUCheckResult(rate=float("nan"), zero_lag=0.0, integrated_power=0.0, fitted=False)

    # compare first/last decile means on the locally stationary scale, so a
    # slow ramp cannot hide inside the std it inflates
    tenth = x.size // 10
    drift = abs(x[-tenth:].mean() - x[:tenth].mean())
    scale = 0.5 * (x[:tenth].std() + x[-tenth:].std())
    if drift > 5.0 * scale:
        raise FitError("trace mean drifts beyond 5 sigma of the stationary spread")

    maxlag = int(min(10.0 / lamdt, x.size / 10))
    acov = _autocovariance(x, maxlag)
    zero_lag = float(acov[0])

    # exponential rate from the log of the positive head of the autocovariance
    head = acov > 0.05 * zero_lag
    run = np.argmin(head) if not head.all() else head.size  # first False
    if run < 3:
        raise FitError("autocovariance decays too fast to fit an exponential")
    lags = np.arange(run) * dt
    slope = np.polyfit(lags, np.log(acov[:run]), 1)[0]

    integrated = float(dt * (acov[0] + 2.0 * acov[1:].sum()))
    return OUCheckResult(rate=float(-slope), zero_lag=zero_lag, integrated_power=integrated, fitted=True)


def force_fluctuations(params: ModelParams, bath: BathSpec, x):
    """Surface-resolved force fluctuations about the steady-state mean force.

    deltaF_0 = (dh/dx) f,  deltaF_1 = -(dh/dx)(1-f); their population-weighted
    mean vanishes identically.
    """
    slope = params.level_slope
    f = fermi_effective(bath, level(params, x))
    return slope * f, -slope * (1.0 - f)


def _master_equation_traces(params: ModelParams, bath: BathSpec, xs: np.ndarray,
                            tau_max: float | None, dt: float | None):
    """Propagate deltaF * rho_ss under the two-state master equation for many x at once."""
    hbar_over_gamma = params.hbar / bath.gamma
    if dt is None:
        dt = hbar_over_gamma / 50.0
    if tau_max is None:
        tau_max = 8.0 * hbar_over_gamma
    if dt > hbar_over_gamma / 10.0:
        raise StabilityError(
            f"correlation dt = {dt:.3g} under-resolves the electronic time hbar/Gamma = {hbar_over_gamma:.3g}"
        )
    lam = bath.gamma / params.hbar
    n = int(round(tau_max / dt))
    tau = np.arange(n + 1) * dt

    f = np.asarray(fermi_effective(bath, level(params, xs)), dtype=float)
    df0, df1 = force_fluctuations(params, bath, xs)
    df0 = np.asarray(df0, dtype=float)
    df1 = np.asarray(df1, dtype=float)
    g0 = df0 * (1.0 - f)
    g1 = df1 * f
    kf = lam * f
    kb = lam * (1.0 - f)

    c = np.empty((xs.size, n + 1))
    c[:, 0] = df0 * g0 + df1 * g1
    for k in range(1, n + 1):
        # classical RK4 on the linear pair (g0, g1)
        a0 = -kf * g0 + kb * g1
        a1 = kf * g0 - kb * g1
        b0 = -kf * (g0 + 0.5 * dt * a0) + kb * (g1 + 0.5 * dt * a1)
        b1 = kf * (g0 + 0.5 * dt * a0) - kb * (g1 + 0.5 * dt * a1)
        c0 = -kf * (g0 + 0.5 * dt * b0) + kb * (g1 + 0.5 * dt * b1)
        c1 = kf * (g0 + 0.5 * dt * b0) - kb * (g1 + 0.5 * dt * b1)
        d0 = -kf * (g0 + dt * c0) + kb * (g1 + dt * c1)
        d1 = kf * (g0 + dt * c0) - kb * (g1 + dt * c1)
        g0 = g0 + dt / 6.0 * (a0 + 2 * b0 + 2 * c0 + d0)
        g1 = g1 + dt / 6.0 * (a1 + 2 * b1 + 2 * c1 + d1)
        c[:, k] = df0 * g0 + df1 * g1
    return tau, c


def correlation_trace(params: ModelParams, bath: BathSpec, x: float,
                      tau_max: float | None = None, dt: float | None = None) -> CorrelationTrace:
    """Force-fluctuation autocorrelation at frozen x via master-equation propagation."""
    tau, c = _master_equation_traces(params, bath, np.atleast_1d(float(x)), tau_max, dt)
    return CorrelationTrace(tau=tau, values=c[0])


def power_spectrum(trace: CorrelationTrace):
    """DFT of the even-extended correlation trace: (omega_grid, K(omega))."""
    tau, c = trace.tau, trace.values
    steps = np.diff(tau)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ConfigError("power spectrum requires a uniform tau grid")
    dt = tau[1] - tau[0]
    n = c.size - 1
    ext = np.concatenate([c, c[-2:0:-1]])
    k = dt * np.fft.rfft(ext).real
    omega = 2.0 * np.pi * np.fft.rfftfreq(2 * n, dt)
    return omega, k


def fit_lorentzian(omega, values) -> SpectralFit:
    """Fit K(omega) = 2 D'_M Gamma'^2/(omega^2 + Gamma'^2) on the log-spectrum.

    Damped Gauss-Newton (Levenberg-Marquardt) with positivity enforced by
    optimizing the square roots of (D'_M, Gamma'); initial guesses are
    D'_M = K(0)/2 and Gamma' = half-width at half-maximum.
    """
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values, dtype=float)
    if omega.shape != values.shape or omega.ndim != 1:
        raise ConfigError("omega and values must be 1-d arrays of equal length")
    k0 = values[0]
    if omega[0] != 0.0 or k0 <= 0.0 or int(np.argmax(values)) != 0:
        raise FitError("spectrum must have its single maximum at omega = 0")

    # log-domain fit over the region that still carries Lorentzian signal
    mask = values >= 1e-3 * k0
    w = omega[mask]
    k = values[mask]

    below = np.nonzero(values < 0.5 * k0)[0]
    if below.size:
        i = below[0]
        frac = (0.5 * k0 - values[i - 1]) / (values[i] - values[i - 1])
        hwhm = omega[i - 1] + frac * (omega[i] - omega[i - 1])
    else:
        hwhm = omega[-1]

    logk = np.log(k)

    def resid(theta):
        d, gam = theta[0] ** 2, theta[1] ** 2
        model = 2.0 * d * gam * gam / (w * w + gam * gam)
        return np.log(np.maximum(model, 1e-300)) - logk

    sol = least_squares(resid, x0=[np.sqrt(k0 / 2.0), np.sqrt(hwhm)],
                        method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    d_m = float(sol.x[0] ** 2)
    gamma = float(sol.x[1] ** 2)
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    if rms > 0.1:
        raise FitError(f"spectrum is not Lorentzian (log-residual rms {rms:.3g} > 0.1)")
    return SpectralFit(d_m=d_m, gamma=gamma, residual=rms)


def multi_peak_kernel(omega, peaks):
    """Evaluate the multi-peak spectral model sum 2 D_M Gamma w_n^3/((w^2-w_n^2)^2+(w Gamma)^2)."""
    omega = np.asarray(omega, dtype=float)
    total = np.zeros_like(omega)
    for w_n, gam, d_m in peaks:
        if not (w_n > 0 and gam > 0):
            raise ConfigError("every peak needs omega_n > 0 and Gamma > 0")
        if d_m < 0:
            raise ConfigError("peak D_M must be non-negative")
        total = total + 2.0 * d_m * gam * w_n**3 / ((omega**2 - w_n**2) ** 2 + (omega * gam) ** 2)
    return total


@dataclass(frozen=True)
class FittedAmplitudeTable:
    """Spectrally fitted D'_M(x) and decay rate on an x-grid, linearly interpolated."""

    x_grid: np.ndarray
    d_m_values: np.ndarray
    rate_values: np.ndarray

    def d_m(self, x):
        return np.interp(x, self.x_grid, self.d_m_values)

    def decay_rate(self, x):
        return np.interp(x, self.x_grid, self.rate_values)


def amplitude_grid(params: ModelParams, bath: BathSpec, step_kt: float = 0.25,
                   margin_kt: float = 35.0) -> np.ndarray:
    """Default x-grid for amplitude fitting: every level crossing plus a margin.

    The grid spans every crossing h(x) = mu_lead plus ``margin_kt`` thermal
    energies on either side, at a spacing of ``step_kt`` thermal energies. The
    default 35 kT margin leaves the clamped endpoint amplitudes below 1e-12 of
    the peak, so extrapolation beyond the grid is quiet.
    """
    slope = params.level_slope
    if slope == 0.0:
        return np.array([-1.0, 1.0])
    width = margin_kt * bath.kT / abs(slope)
    crossings = [(lead.mu - params.e_d) / slope for lead in bath.leads]
    lo, hi = min(crossings) - width, max(crossings) + width
    step = step_kt * bath.kT / abs(slope)
    return np.linspace(lo, hi, int(np.ceil((hi - lo) / step)) + 1)


def fit_amplitude_table(params: ModelParams, bath: BathSpec, x_grid=None) -> FittedAmplitudeTable:
    """Run the spectral route on a grid of positions and tabulate the fits."""
    lam = bath.gamma / params.hbar
    if x_grid is None:
        x_grid = amplitude_grid(params, bath)
    x_grid = np.asarray(x_grid, dtype=float)

    tau, traces = _master_equation_traces(params, bath, x_grid, tau_max=None, dt=None)
    d_m = np.zeros(x_grid.size)
    rates = np.full(x_grid.size, lam)
    floor = 1e-250
    for i in range(x_grid.size):
        if traces[i, 0] <= floor:
            continue
        fit = fit_lorentzian(*power_spectrum(CorrelationTrace(tau=tau, values=traces[i])))
        d_m[i] = fit.d_m
        rates[i] = fit.gamma / params.hbar
    return FittedAmplitudeTable(x_grid=x_grid, d_m_values=d_m, rate_values=rates)


def spectrum_to_csv(path, omega, values) -> None:
    """Write a power spectrum as a two-column CSV."""
    write_columns(path, "omega,K", omega, values)
