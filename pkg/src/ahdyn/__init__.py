"""Trajectory-ensemble nonadiabatic dynamics for the Anderson-Holstein model.

Five propagation methods over a shared trajectory state — Ehrenfest dynamics
(ED), electronic-friction Langevin dynamics (EF-LD), Ehrenfest plus Markovian
random force (M-ED), Ehrenfest plus non-Markovian colored random force (NM-ED),
and surface hopping (SH) — with analytic or spectrally fitted noise amplitudes,
a deterministic parallel ensemble runner, and a CLI of figure-reproduction
presets.
"""

__version__ = "0.1.0"

from .errors import ConfigError, FitError, StabilityError, TrajectoryError
from .model import (
    BathSpec,
    Lead,
    ModelParams,
    Surface,
    fermi,
    fermi_effective,
    friction,
    level,
    level_slope,
    mean_force,
    noise_amplitude_analytic,
    potential,
)
from .noise import (
    ColoredNoiseState,
    CorrelationTrace,
    FittedAmplitudeTable,
    NoiseAmplitude,
    OUCheckResult,
    SpectralFit,
    amplitude_grid,
    correlation_trace,
    fit_amplitude_table,
    fit_lorentzian,
    generate_ou_trace,
    ou_autocorrelation_check,
    power_spectrum,
    sample_white,
)
from .dynamics import (
    METHODS,
    MethodConfig,
    TrajectoryState,
    current_contribution,
    hop_probabilities,
    kinetic_energy,
    make_state,
    population,
    run_frozen_hop_chain,
    step_ed,
    step_efld,
    step_med,
    step_nmed,
    step_sh,
    validate_stability,
)
from .ensemble import EnsembleConfig, ObservableFrame, relaxation_time, run_ensemble
from .presets import PRESETS, ExperimentPreset, PanelSpec, charged_minimum
