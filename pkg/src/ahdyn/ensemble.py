"""Trajectory ensembles: initial sampling, the parallel runner, and the
reduction of per-step observables into time series with statistical errors.

Determinism contract: every trajectory owns a random stream derived from
(seed, trajectory index), trajectories are grouped into fixed blocks of 64,
and per-frame sums are accumulated block-by-block in index order.  The final
reduction sums the per-block partials in block order, so the result is
bit-for-bit identical for any number of workers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.optimize import least_squares

from . import _kernels
from .dynamics import (
    METHOD_IDS,
    MethodConfig,
    constants_vector,
    make_state,
    validate_stability,
)
from .errors import ConfigError, FitError, TrajectoryError
from .model import BathSpec, ModelParams

__all__ = [
    "EnsembleConfig",
    "ObservableFrame",
    "sample_initial",
    "run_ensemble",
    "relaxation_time",
]

_MAX_AUTO_FRAMES = 2000


@dataclass(frozen=True)
class EnsembleConfig:
    """How many trajectories, how long, how densely recorded, and from what
    seed and initial temperature."""

    n_traj: int
    t_final: float
    init_temperature: float
    record_stride: int | None = None  # None: auto, at most 2000 frames
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.n_traj, (int, np.integer)) and self.n_traj >= 1):
            raise ConfigError("n_traj must be an integer >= 1")
        if not self.t_final > 0:
            raise ConfigError("t_final must be positive")
        if not self.init_temperature > 0:
            raise ConfigError("init_temperature must be positive")
        if self.record_stride is not None and not (
                isinstance(self.record_stride, (int, np.integer)) and self.record_stride >= 1):
            raise ConfigError("record_stride must be an integer >= 1 (or None for auto)")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ConfigError("seed must be an integer in [0, 2^64)")


@dataclass(frozen=True)
class ObservableFrame:
    """Ensemble means and standard errors at one recorded time."""

    t: float
    mean_ke: float
    sem_ke: float
    mean_pop: float
    sem_pop: float
    mean_current: float | None = None
    sem_current: float | None = None

    def __post_init__(self):
        for sem in (self.sem_ke, self.sem_pop, self.sem_current):
            if sem is not None and sem < 0:
                raise ConfigError("standard errors cannot be negative")


def initial_spreads(params: ModelParams, cfg: EnsembleConfig) -> tuple[float, float]:
    """Gaussian widths of the thermal initial distribution: (std_x, std_p)."""
    std_x = np.sqrt(cfg.init_temperature / (params.mass * params.omega**2))
    std_p = np.sqrt(params.mass * cfg.init_temperature)
    return float(std_x), float(std_p)


def sample_initial(params: ModelParams, bath: BathSpec, method_cfg: MethodConfig,
                   cfg: EnsembleConfig, rng):
    """Draw one thermal initial state: x ~ N(0, T/m w^2), p ~ N(0, m T),
    electronic variable per the stepper module's equilibrium policy."""
    std_x, std_p = initial_spreads(params, cfg)
    return make_state(params, bath, method_cfg,
                      x=rng.normal(0.0, std_x), p=rng.normal(0.0, std_p), rng=rng)


def _plan_steps(method_cfg: MethodConfig, cfg: EnsembleConfig) -> tuple[int, int]:
    """Number of steps and the recording stride; steps are rounded up so the
    final frame lands exactly on the last step."""
    n_steps = max(1, int(np.ceil(cfg.t_final / method_cfg.dt - 1e-12)))
    stride = cfg.record_stride
    if stride is None:
        stride = max(1, int(np.ceil(n_steps / (_MAX_AUTO_FRAMES - 1))))
    n_steps = int(np.ceil(n_steps / stride)) * stride
    return n_steps, stride


def run_ensemble(params: ModelParams, bath: BathSpec, method_cfg: MethodConfig,
                 cfg: EnsembleConfig, n_workers: int | None = None) -> list[ObservableFrame]:
    """Run the full ensemble and reduce it to ObservableFrame time series.

    Results are reproducible bit-for-bit from (seed, configs) alone; n_workers
    only sets the thread count for this call and cannot change the output.
    """
    validate_stability(method_cfg, params, bath)
    n_steps, stride = _plan_steps(method_cfg, cfg)
    n_frames = n_steps // stride + 1
    n_blocks = -(-cfg.n_traj // _kernels.BLOCK)
    std_x, std_p = initial_spreads(params, cfg)

    constants = constants_vector(params, bath)
    if method_cfg.amplitude_source == "fitted":
        table = method_cfg.amplitude_table
        use_fitted = True
        gx, gd, gr = table.x_grid, table.d_m_values, table.rate_values
    else:
        use_fitted = False
        gx = gd = np.zeros(2)
        gr = np.full(2, bath.gamma / params.hbar)

    sums = np.zeros((n_blocks, n_frames, _kernels.N_CHANNELS))
    flags = np.zeros(n_blocks, dtype=np.int64)

    old_threads = numba.get_num_threads()
    if n_workers is not None:
        if not 1 <= n_workers <= numba.config.NUMBA_NUM_THREADS:
            raise ConfigError(
                f"n_workers must be in [1, {numba.config.NUMBA_NUM_THREADS}]")
        numba.set_num_threads(n_workers)
    try:
        _kernels.run_trajectories(
            METHOD_IDS[method_cfg.method], cfg.n_traj, n_steps, stride,
            method_cfg.update_stride, method_cfg.dt, cfg.seed,
            0.0, std_x, std_p, -1.0,
            constants, use_fitted, gx, gd, gr, sums, flags)
    finally:
        if n_workers is not None:
            numba.set_num_threads(old_threads)

    bad = flags[flags > 0]
    if bad.size:
        idx = int(bad.min() - 1)
        raise TrajectoryError(
            f"trajectory {idx} left the finite range (NaN/overflow); "
            f"check (Gamma/hbar) dt and the time step", traj_index=idx)

    total = sums.sum(axis=0)
    n = cfg.n_traj
    frames = []
    two_lead = bath.two_lead
    for f in range(n_frames):
        t = f * stride * method_cfg.dt
        means = total[f, 0::2] / n
        if n > 1:
            var = np.maximum(total[f, 1::2] / n - means**2, 0.0) * (n / (n - 1))
            sems = np.sqrt(var / n)
        else:
            sems = np.zeros(3)
        frames.append(ObservableFrame(
            t=t,
            mean_ke=means[0], sem_ke=sems[0],
            mean_pop=means[1], sem_pop=sems[1],
            mean_current=means[2] if two_lead else None,
            sem_current=sems[2] if two_lead else None,
        ))
    return frames


def relaxation_time(frames: list[ObservableFrame]) -> float:
    """Fit mean KE(t) = KE_inf + (KE_0 - KE_inf) exp(-t/tau); returns tau.

    Raises FitError for non-decaying input (e.g. a heating run).
    """
    if len(frames) < 8:
        raise ConfigError("need at least 8 frames to fit a relaxation time")
    t = np.array([f.t for f in frames])
    ke = np.array([f.mean_ke for f in frames])
    tail = ke[-max(1, ke.size // 10):].mean()
    if tail >= ke[0]:
        raise FitError("kinetic energy does not decay over the run")

    gap0 = ke[0] - tail
    below = np.nonzero(ke - tail < gap0 / np.e)[0]
    tau0 = t[below[0]] if below.size and below[0] > 0 else t[-1] / 3.0

    def resid(theta):
        a, b, logtau = theta
        return a + b * np.exp(-t / np.exp(logtau)) - ke

    sol = least_squares(resid, x0=[tail, gap0, np.log(tau0)], method="lm",
                        xtol=1e-15, ftol=1e-15)
    tau = float(np.exp(sol.x[2]))
    if not np.isfinite(tau) or tau <= 0 or tau > 100 * t[-1]:
        raise FitError("relaxation fit did not converge to a meaningful timescale")
    return tau
