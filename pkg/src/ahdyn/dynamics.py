"""Single-trajectory steppers for the five dynamics methods.

Methods (string names used throughout the package and the CLI):

* ``ed``    — mean-field (Ehrenfest) dynamics: nuclei feel the
  population-weighted force, the population relaxes toward f(h(x)) at rate
  Gamma/hbar.
* ``ef-ld`` — electronic-friction Langevin dynamics: mean force,
  position-dependent friction, and a white random force.
* ``m-ed``  — mean-field plus the Markovian white random force of strength
  D_M(x).
* ``nm-ed`` — mean-field plus the non-Markovian colored random force, an
  explicitly integrated Ornstein-Uhlenbeck process with memory rate
  Gamma/hbar.
* ``sh``    — surface hopping between the neutral and charged adiabats with
  first-order hop probabilities (Gamma/hbar) f dt and (Gamma/hbar)(1-f) dt.

Every stepper is a pure state-in/state-out transition: RK4 for the
deterministic drift, then a single additive momentum kick for the random
force.  Hops never rescale momentum — the electron bath absorbs the energy.
Steppers never share mutable state, so they are safe to drive from any number
of workers, each with its own RNG.
"""
from __future__ import annotations

import difflib
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ConfigError, StabilityError
from .model import (
    BathSpec,
    ModelParams,
    Surface,
    fermi,
    fermi_effective,
    level,
    noise_amplitude_analytic,
)
from .noise import (
    ColoredNoiseState,
    FittedAmplitudeTable,
    NoiseAmplitude,
    ou_stationary_std,
    ou_step,
    sample_white,
)

__all__ = [
    "METHODS",
    "MethodConfig",
    "TrajectoryState",
    "constants_vector",
    "current_contribution",
    "hop_probabilities",
    "kinetic_energy",
    "make_state",
    "population",
    "run_frozen_hop_chain",
    "step_ed",
    "step_efld",
    "step_med",
    "step_nmed",
    "step_sh",
    "validate_stability",
]

METHODS = ("ed", "ef-ld", "m-ed", "nm-ed", "sh")
METHOD_IDS = {name: i for i, name in enumerate(METHODS)}
_NOISE_METHODS = frozenset({"ef-ld", "m-ed", "nm-ed"})
_AMPLITUDE_SOURCES = ("analytic", "fitted")

# electronic RK4 stability edge for dr/dt = -(Gamma/hbar)(r - f)
_RK4_LAMBDA_DT_MAX = 2.5


@dataclass(frozen=True)
class TrajectoryState:
    """Phase-space point plus whichever electronic/noise variables the chosen
    method keeps alive (unused ones stay None)."""

    x: float
    p: float
    t: float = 0.0
    rho1: float | None = None
    surface: Surface | None = None
    noise: ColoredNoiseState | None = None
    amplitude: NoiseAmplitude | None = None


@dataclass(frozen=True)
class MethodConfig:
    """Method selection plus the stepper's numerical knobs."""

    method: str
    dt: float = 1.0
    amplitude_source: str = "analytic"
    update_stride: int = 1
    amplitude_table: FittedAmplitudeTable | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            hint = difflib.get_close_matches(self.method, METHODS, n=1)
            extra = f"; did you mean {hint[0]!r}?" if hint else ""
            raise ConfigError(
                f"unknown method {self.method!r} (choose from {', '.join(METHODS)}){extra}"
            )
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not (isinstance(self.update_stride, (int, np.integer)) and self.update_stride >= 1):
            raise ConfigError("update_stride must be an integer >= 1")
        if self.amplitude_source not in _AMPLITUDE_SOURCES:
            raise ConfigError(
                f"amplitude_source must be one of {_AMPLITUDE_SOURCES}, "
                f"got {self.amplitude_source!r}"
            )
        if self.amplitude_source == "fitted" and self.amplitude_table is None:
            raise ConfigError("amplitude_source='fitted' requires an amplitude_table")


def validate_stability(cfg: MethodConfig, params: ModelParams, bath: BathSpec) -> None:
    """Check the (Gamma/hbar) dt bounds for the chosen method up front."""
    lam_dt = bath.gamma / params.hbar * cfg.dt
    if cfg.method == "sh" and lam_dt >= 0.1:
        raise StabilityError(
            f"surface hopping needs (Gamma/hbar) dt < 0.1 for first-order hop "
            f"probabilities; got {lam_dt:.3g}"
        )
    if cfg.method == "nm-ed" and lam_dt >= 1.0:
        raise StabilityError(
            f"the explicit colored-noise update needs (Gamma/hbar) dt < 1; got {lam_dt:.3g}"
        )
    if lam_dt >= _RK4_LAMBDA_DT_MAX:
        raise StabilityError(
            f"(Gamma/hbar) dt = {lam_dt:.3g} exceeds the RK4 stability range "
            f"of the electronic relaxation (< {_RK4_LAMBDA_DT_MAX})"
        )


def constants_vector(params: ModelParams, bath: BathSpec) -> np.ndarray:
    """Pack model and bath parameters into the compiled kernels' layout."""
    c = np.zeros(_kernels.N_CONSTS)
    slope = params.level_slope
    lead_l = bath.leads[0]
    c[0] = params.mass
    c[1] = params.mass * params.omega**2
    c[2] = slope
    c[3] = params.e_d
    c[4] = params.hbar
    c[5] = bath.gamma / params.hbar
    c[6] = bath.kT
    c[7] = lead_l.gamma / bath.gamma
    c[8] = lead_l.mu
    if bath.two_lead:
        c[9] = bath.leads[1].gamma / bath.gamma
        c[10] = bath.leads[1].mu
    c[11] = lead_l.gamma / params.hbar
    c[12] = bath.gamma
    c[13] = params.hbar * slope**2 / (bath.gamma * bath.kT)
    c[14] = params.hbar * slope**2 / bath.gamma
    return c


def make_state(params: ModelParams, bath: BathSpec, cfg: MethodConfig,
               x: float, p: float, rng=None, population=None) -> TrajectoryState:
    """Build a fresh state at t=0 with the method's electronic variable set.

    By default the electronic degree of freedom starts in instantaneous
    equilibrium: rho1 = f(h(x)) for the mean-field family, and surface 1 with
    probability f(h(x)) for surface hopping.  ``population`` overrides that
    value (or probability).
    """
    if population is not None and not 0.0 <= population <= 1.0:
        raise ConfigError("population override must lie in [0, 1]")
    f0 = population
    if f0 is None:
        f0 = float(fermi_effective(bath, level(params, x)))
    if cfg.method == "sh":
        if rng is None:
            raise ConfigError("surface hopping initialization draws the surface: pass rng")
        surface = Surface.CHARGED if rng.random() < f0 else Surface.NEUTRAL
        return TrajectoryState(x=float(x), p=float(p), surface=surface)
    if cfg.method == "ef-ld":
        return TrajectoryState(x=float(x), p=float(p))
    return TrajectoryState(x=float(x), p=float(p), rho1=f0)


def _check_method(cfg: MethodConfig, expected: str) -> None:
    if cfg.method != expected:
        raise ConfigError(f"stepper for {expected!r} called with a {cfg.method!r} config")


def _resolve_amplitude(state: TrajectoryState, cfg: MethodConfig,
                       params: ModelParams, bath: BathSpec) -> NoiseAmplitude:
    """Return the cached amplitude, refreshing it at the current x when stale."""
    amp = state.amplitude
    if amp is not None and amp.source == cfg.amplitude_source \
            and amp.age_steps < cfg.update_stride:
        return amp
    if cfg.amplitude_source == "analytic":
        d_m = float(noise_amplitude_analytic(params, bath, state.x))
        rate = bath.gamma / params.hbar
    else:
        d_m = float(cfg.amplitude_table.d_m(state.x))
        rate = float(cfg.amplitude_table.decay_rate(state.x))
    return NoiseAmplitude(d_m=d_m, decay_rate=rate, source=cfg.amplitude_source,
                          x=float(state.x), age_steps=0)


def _require_rho(state: TrajectoryState) -> float:
    if state.rho1 is None:
        raise ConfigError("state carries no electronic population (rho1 is None)")
    return state.rho1


def step_ed(state: TrajectoryState, params: ModelParams, bath: BathSpec,
            cfg: MethodConfig, rng=None) -> TrajectoryState:
    """One deterministic mean-field step."""
    _check_method(cfg, "ed")
    c = constants_vector(params, bath)
    x, p, r = _kernels.drift_mean_field(c, state.x, state.p, _require_rho(state), cfg.dt)
    return replace(state, x=x, p=p, rho1=r, t=state.t + cfg.dt)


def step_efld(state: TrajectoryState, params: ModelParams, bath: BathSpec,
              cfg: MethodConfig, rng) -> TrajectoryState:
    """One Langevin step: friction-damped drift plus a white momentum kick."""
    _check_method(cfg, "ef-ld")
    amp = _resolve_amplitude(state, cfg, params, bath)
    xi = sample_white(amp.d_m, cfg.dt, rng)
    c = constants_vector(params, bath)
    x, p = _kernels.drift_langevin(c, state.x, state.p, cfg.dt)
    return replace(state, x=x, p=p + xi * cfg.dt, t=state.t + cfg.dt,
                   amplitude=replace(amp, age_steps=amp.age_steps + 1))


def step_med(state: TrajectoryState, params: ModelParams, bath: BathSpec,
             cfg: MethodConfig, rng) -> TrajectoryState:
    """One mean-field step plus the Markovian white random kick."""
    _check_method(cfg, "m-ed")
    amp = _resolve_amplitude(state, cfg, params, bath)
    xi = sample_white(amp.d_m, cfg.dt, rng)
    c = constants_vector(params, bath)
    x, p, r = _kernels.drift_mean_field(c, state.x, state.p, _require_rho(state), cfg.dt)
    return replace(state, x=x, p=p + xi * cfg.dt, rho1=r, t=state.t + cfg.dt,
                   amplitude=replace(amp, age_steps=amp.age_steps + 1))


def step_nmed(state: TrajectoryState, params: ModelParams, bath: BathSpec,
              cfg: MethodConfig, rng) -> TrajectoryState:
    """One mean-field step plus the colored (memory-carrying) random kick."""
    _check_method(cfg, "nm-ed")
    amp = _resolve_amplitude(state, cfg, params, bath)
    noise = state.noise
    if noise is None:
        # start the colored force in its stationary distribution
        noise = ColoredNoiseState(
            rng.normal(0.0, ou_stationary_std(amp.d_m, amp.decay_rate, cfg.dt)))
    xi_m = sample_white(amp.d_m, cfg.dt, rng)
    noise = ou_step(noise, xi_m, amp.decay_rate, cfg.dt)
    c = constants_vector(params, bath)
    x, p, r = _kernels.drift_mean_field(c, state.x, state.p, _require_rho(state), cfg.dt)
    return replace(state, x=x, p=p + noise.xi_n * cfg.dt, rho1=r, t=state.t + cfg.dt,
                   noise=noise, amplitude=replace(amp, age_steps=amp.age_steps + 1))


def step_sh(state: TrajectoryState, params: ModelParams, bath: BathSpec,
            cfg: MethodConfig, rng) -> TrajectoryState:
    """One surface-hopping step: drift on the active adiabat, then a
    first-order hop test at the new position."""
    _check_method(cfg, "sh")
    if state.surface is None:
        raise ConfigError("state carries no active surface")
    c = constants_vector(params, bath)
    x, p = _kernels.drift_surface(c, state.x, state.p, float(state.surface), cfg.dt)
    new = _kernels._hop_update(float(state.surface),
                               float(fermi_effective(bath, level(params, x))),
                               bath.gamma / params.hbar * cfg.dt, rng.random())
    return replace(state, x=x, p=p, t=state.t + cfg.dt, surface=Surface(int(new)))


def hop_probabilities(params: ModelParams, bath: BathSpec, x: float, dt: float):
    """First-order per-step hop probabilities (0->1, 1->0) at position x."""
    if not dt > 0:
        raise ConfigError("dt must be positive")
    f = float(fermi_effective(bath, level(params, x)))
    lam_dt = bath.gamma / params.hbar * dt
    return lam_dt * f, lam_dt * (1.0 - f)


def run_frozen_hop_chain(params: ModelParams, bath: BathSpec, x: float,
                         n_steps: int, dt: float, seed: int,
                         start_occupied: bool = False):
    """Drive the hop chain at fixed x for n_steps; returns (upward hops,
    downward hops, steps spent on the charged surface).  A diagnostic for
    checking the hop generator against its nominal rates."""
    cfg = MethodConfig(method="sh", dt=dt)
    validate_stability(cfg, params, bath)
    c = constants_vector(params, bath)
    up, down, occupied = _kernels.frozen_hop_chain(
        c, float(x), int(n_steps), float(dt), int(seed), bool(start_occupied))
    return int(up), int(down), int(occupied)


def kinetic_energy(state: TrajectoryState, params: ModelParams) -> float:
    """p^2 / 2m."""
    return 0.5 * state.p * state.p / params.mass


def population(state: TrajectoryState, method: str, params: ModelParams,
               bath: BathSpec) -> float:
    """The method's impurity-occupation estimator: rho1 for the mean-field
    family, f(h(x)) for friction-Langevin, the surface indicator for hopping."""
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")
    if method == "ef-ld":
        return float(fermi_effective(bath, level(params, state.x)))
    if method == "sh":
        if state.surface is None:
            raise ConfigError("surface-hopping population needs a state with a surface")
        return float(state.surface)
    if state.rho1 is None:
        raise ConfigError(f"{method!r} population needs a state with rho1")
    return state.rho1


def current_contribution(state: TrajectoryState, params: ModelParams,
                         bath: BathSpec, method: str) -> float:
    """Per-trajectory left-lead current estimator
    (Gamma_L/hbar) [f_L(h)(1-n) - (1-f_L(h)) n] = (Gamma_L/hbar)(f_L(h) - n).

    Only meaningful for a biased junction; single-lead baths are rejected.
    """
    if not bath.two_lead:
        raise ConfigError("the current observable needs a two-lead bath")
    lead_l = bath.leads[0]
    n = population(state, method, params, bath)
    f_l = float(fermi(level(params, state.x), lead_l.mu, bath.kT))
    return lead_l.gamma / params.hbar * (f_l - n)
