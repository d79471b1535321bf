"""Anderson-Holstein model quantities.

A single nuclear mode with neutral/charged diabatic surfaces

    U0(x) = 1/2 m omega^2 x^2
    U1(x) = U0(x) + h(x),   h(x) = E_d + g x sqrt(2 m omega / hbar)

coupled to one or two wide-band fermionic leads (hybridization Gamma per lead,
chemical potential mu per lead, common temperature kT).  This module holds the
static quantities: potentials, level energy, Fermi occupations, and the analytic
electronic-friction triple (mean force, friction coefficient gamma, Markovian
noise amplitude D_M) of the adiabatic Langevin limit:

    Fbar  = -dU0/dx - h'(x) f(h)
    gamma = -(hbar/Gamma) (df(h)/dx) h'(x)  = (hbar/(Gamma kT)) f(1-f) h'(x)^2
    D_M   = (hbar/Gamma) f(1-f) h'(x)^2     = gamma kT   (single lead)

With two leads every f(h) is replaced by the hybridization-weighted effective
Fermi function f_eff = (Gamma_L f_L + Gamma_R f_R)/Gamma; the friction keeps the
exact derivative form (a weighted sum of per-lead f(1-f) terms), so the
fluctuation-dissipation identity D_M = gamma kT holds exactly only in
equilibrium (single lead or zero bias).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.special import expit

from .errors import ConfigError

__all__ = [
    "ModelParams",
    "Lead",
    "BathSpec",
    "Surface",
    "potential",
    "level",
    "level_slope",
    "fermi",
    "fermi_effective",
    "mean_force",
    "friction",
    "noise_amplitude_analytic",
]


class Surface(IntEnum):
    """Diabatic surface label: 0 = neutral (level empty), 1 = charged (occupied)."""

    NEUTRAL = 0
    CHARGED = 1


@dataclass(frozen=True)
class ModelParams:
    """Static parameters of the impurity-plus-oscillator model (hbar = m = 1 defaults)."""

    omega: float
    g: float
    e_d: float
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.mass > 0 and self.omega > 0 and self.hbar > 0):
            raise ConfigError("mass, omega and hbar must all be positive")
        if not (math.isfinite(self.g) and math.isfinite(self.e_d)):
            raise ConfigError("g and e_d must be finite")

    @property
    def level_slope(self) -> float:
        """dh/dx = g sqrt(2 m omega / hbar); constant because h is linear in x."""
        return self.g * math.sqrt(2.0 * self.mass * self.omega / self.hbar)


@dataclass(frozen=True)
class Lead:
    """One wide-band fermionic lead: hybridization gamma, chemical potential mu."""

    gamma: float
    mu: float = 0.0


@dataclass(frozen=True)
class BathSpec:
    """One or two leads plus a common temperature."""

    leads: tuple[Lead, ...]
    kT: float

    def __post_init__(self):
        if not 1 <= len(self.leads) <= 2:
            raise ConfigError(f"need 1 or 2 leads, got {len(self.leads)}")
        if any(lead.gamma <= 0 for lead in self.leads):
            raise ConfigError("every lead hybridization must be positive")
        if any(not math.isfinite(lead.mu) for lead in self.leads):
            raise ConfigError("lead chemical potentials must be finite")
        if not (self.kT > 0 and math.isfinite(self.kT)):
            raise ConfigError("kT must be positive and finite")

    @classmethod
    def single(cls, gamma: float, kT: float, mu: float = 0.0) -> "BathSpec":
        return cls(leads=(Lead(gamma, mu),), kT=kT)

    @classmethod
    def symmetric_bias(cls, gamma: float, mu: float, kT: float) -> "BathSpec":
        """Symmetric junction: Gamma/2 per lead, chemical potentials +mu / -mu."""
        return cls(leads=(Lead(gamma / 2.0, mu), Lead(gamma / 2.0, -mu)), kT=kT)

    @classmethod
    def from_leads(cls, pairs, kT: float) -> "BathSpec":
        """Build from an iterable of (gamma, mu) pairs."""
        return cls(leads=tuple(Lead(g, m) for g, m in pairs), kT=kT)

    @property
    def gamma(self) -> float:
        """Total hybridization, the sum over leads."""
        return sum(lead.gamma for lead in self.leads)

    @property
    def two_lead(self) -> bool:
        return len(self.leads) == 2


def potential(params: ModelParams, surface, x):
    """Diabatic potential U_surface(x); surface 1 adds the level energy h(x)."""
    u0 = 0.5 * params.mass * params.omega**2 * np.square(x)
    if int(surface) == Surface.NEUTRAL:
        return u0
    return u0 + level(params, x)


def level(params: ModelParams, x):
    """Impurity level energy h(x) = E_d + (dh/dx) x."""
    return params.e_d + params.level_slope * np.asarray(x) if np.ndim(x) else params.e_d + params.level_slope * x


def level_slope(params: ModelParams) -> float:
    """dh/dx, constant in x."""
    return params.level_slope


def fermi(eps, mu: float, kT: float):
    """Fermi-Dirac occupation 1/(exp((eps-mu)/kT)+1), overflow-safe in the tails."""
    if not kT > 0:
        raise ConfigError("kT must be positive")
    return expit(-(np.asarray(eps, dtype=float) - mu) / kT) if np.ndim(eps) else float(expit(-(eps - mu) / kT))


def fermi_effective(bath: BathSpec, eps):
    """Hybridization-weighted lead occupation (Gamma_L f_L + Gamma_R f_R)/Gamma."""
    if not bath.two_lead:
        return fermi(eps, bath.leads[0].mu, bath.kT)
    total = bath.gamma
    acc = 0.0
    for lead in bath.leads:
        acc = acc + (lead.gamma / total) * fermi(eps, lead.mu, bath.kT)
    return acc


def _weighted_f_one_minus_f(bath: BathSpec, eps):
    """Sum over leads of (Gamma_l/Gamma) f_l (1-f_l); the exact -kT d f_eff/d eps."""
    total = bath.gamma
    acc = 0.0
    for lead in bath.leads:
        f = fermi(eps, lead.mu, bath.kT)
        w = lead.gamma / total if bath.two_lead else 1.0
        acc = acc + w * f * (1.0 - f)
    return acc


def mean_force(params: ModelParams, bath: BathSpec, x):
    """Adiabatic mean force -m omega^2 x - (dh/dx) f_eff(h(x))."""
    occ = fermi_effective(bath, level(params, x))
    return -params.mass * params.omega**2 * np.asarray(x) - params.level_slope * occ \
        if np.ndim(x) else -params.mass * params.omega**2 * x - params.level_slope * occ


def friction(params: ModelParams, bath: BathSpec, x):
    """Electronic friction gamma(x) = -(hbar/Gamma) (d f_eff(h)/dx) (dh/dx) >= 0."""
    slope = params.level_slope
    q = _weighted_f_one_minus_f(bath, level(params, x))
    return (params.hbar / (bath.gamma * bath.kT)) * q * slope * slope


def noise_amplitude_analytic(params: ModelParams, bath: BathSpec, x):
    """Markovian noise strength D_M(x) = (hbar/Gamma) f_eff(1-f_eff) (dh/dx)^2."""
    slope = params.level_slope
    fe = fermi_effective(bath, level(params, x))
    return (params.hbar / bath.gamma) * fe * (1.0 - fe) * slope * slope
