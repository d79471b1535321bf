"""Preset experiment definitions for the command-line runner.

Each preset bundles model parameters, bath specifications, a method list and an
ensemble budget into a tuple of panels; the CLI expands panels into ensemble
runs (or spectral fits) and writes one CSV per output. Panel labels become CSV
name fields, so they use only ``[A-Za-z0-9.+-]`` (underscores separate the fields
of a CSV name).

All dynamics presets share one base parameter set: ``hbar*omega = 0.003``,
``kT = 0.05``, coupling ``g = 0.02``, on-site level ``e_d = g^2/(2 hbar omega)``
(``e_d = g^2/(hbar omega)`` panels where noted), trajectories drawn from a
Boltzmann distribution at ``5 kT``, ``dt = 1``.

Ensemble lengths are chosen from desk-scale relaxation measurements
(exponential fits to the ensemble kinetic-energy decay at ``dt = 1``, 5 kT
initial temperature, slowest of the five methods):

    gamma = 0.01    ->  tau ~ 3.5e3
    gamma = 0.001   ->  tau ~ 4.8e3
    gamma = 0.0001  ->  tau ~ 5.1e4   (surface hopping; colored noise ~2.1e4)

so ``t_final = 6e4`` covers >= 12 relaxation times for gamma >= 0.001, and the
weak-coupling preset uses ``t_final = 4e5`` (~8 relaxation times). Electronic
populations settle on the faster scale ``hbar/gamma`` and are plateaued well
before these horizons.
"""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, fields

from .dynamics import METHODS, MethodConfig
from .ensemble import EnsembleConfig
from .errors import ConfigError
from .model import BathSpec, ModelParams

__all__ = [
    "AMPLITUDE_SOURCES",
    "DESK_TRAJECTORIES",
    "KINDS",
    "OBSERVABLES",
    "PAPER_TRAJECTORIES",
    "PRESETS",
    "ExperimentPreset",
    "PanelSpec",
    "charged_minimum",
    "preset_from_dict",
    "preset_to_dict",
]

# Shared base parameters of every preset (hbar = m = 1 units).
HBAR_OMEGA = 0.003
KT = 0.05
COUPLING = 0.02
E_D_FULL = COUPLING**2 / HBAR_OMEGA        # level offset equal to twice the polaron shift
E_D_HALF = COUPLING**2 / (2 * HBAR_OMEGA)  # level offset equal to the polaron shift (default)

DESK_TRAJECTORIES = 5_000
PAPER_TRAJECTORIES = 50_000

KINDS = ("dynamics", "spectrum", "amplitude")
OBSERVABLES = ("ke", "pop", "cur")
AMPLITUDE_SOURCES = ("analytic", "fitted")

_LABEL_RE = re.compile(r"[A-Za-z0-9.+-]+")


@dataclass(frozen=True)
class PanelSpec:
    """One panel of a preset: a (gamma, e_d, mu) point plus what to run and record.

    ``mu = 0`` selects a single lead at zero chemical potential; a nonzero
    ``mu`` selects the symmetric two-lead junction (gamma/2 per lead at +-mu).
    """

    label: str
    gamma: float
    e_d: float
    mu: float = 0.0
    methods: tuple[str, ...] = METHODS
    observables: tuple[str, ...] = ("ke",)
    amplitude_source: str = "analytic"
    update_stride: int = 1


@dataclass(frozen=True)
class ExperimentPreset:
    """A fully resolved experiment: model constants, panels, and ensemble budget.

    ``kind`` selects the execution path: "dynamics" runs trajectory ensembles,
    "spectrum" evaluates frozen-position force-correlation power spectra, and
    "amplitude" tabulates the spectrally fitted noise amplitude against the
    analytic one.
    """

    name: str
    kind: str
    description: str
    panels: tuple[PanelSpec, ...]
    omega: float = HBAR_OMEGA
    kt: float = KT
    g: float = COUPLING
    mass: float = 1.0
    hbar: float = 1.0
    dt: float = 1.0
    n_traj: int = DESK_TRAJECTORIES
    t_final: float = 6e4
    init_temperature_factor: float = 5.0
    record_stride: int | None = None
    seed: int = 0
    amplitude_grid_step_kt: float = 0.25  # "amplitude" kind: fit-grid spacing in kT/|slope|

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"preset kind must be one of {KINDS}, got {self.kind!r}")
        if not self.name or not re.fullmatch(r"[a-z0-9_]+", self.name):
            raise ConfigError(f"preset name must match [a-z0-9_]+, got {self.name!r}")
        if not self.panels:
            raise ConfigError("preset needs at least one panel")
        labels = [p.label for p in self.panels]
        if len(set(labels)) != len(labels):
            dup = sorted({l for l in labels if labels.count(l) > 1})
            raise ConfigError(f"panel labels must be unique; repeated: {', '.join(dup)}")
        for panel in self.panels:
            self._validate_panel(panel)
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("dt must be positive and finite")
        if not (self.init_temperature_factor > 0 and math.isfinite(self.init_temperature_factor)):
            raise ConfigError("init_temperature_factor must be positive and finite")
        if not (self.amplitude_grid_step_kt > 0 and math.isfinite(self.amplitude_grid_step_kt)):
            raise ConfigError("amplitude_grid_step_kt must be positive and finite")
        if self.kind == "dynamics":
            self.ensemble_config()  # validates n_traj, t_final, record_stride, seed

    def _validate_panel(self, panel: PanelSpec) -> None:
        where = f"panel {panel.label!r}"
        if not _LABEL_RE.fullmatch(panel.label):
            raise ConfigError(f"panel label {panel.label!r} may use only [A-Za-z0-9.+-]")
        if self.kind == "dynamics":
            unknown = [m for m in panel.methods if m not in METHODS]
            if unknown or not panel.methods:
                raise ConfigError(
                    f"{where}: methods must be a non-empty subset of {METHODS}"
                    + (f"; unknown: {', '.join(unknown)}" if unknown else "")
                )
            bad = [o for o in panel.observables if o not in OBSERVABLES]
            if bad or not panel.observables:
                raise ConfigError(
                    f"{where}: observables must be a non-empty subset of {OBSERVABLES}"
                    + (f"; unknown: {', '.join(bad)}" if bad else "")
                )
            if "cur" in panel.observables and panel.mu == 0:
                raise ConfigError(f"{where}: the 'cur' observable needs a two-lead junction (mu != 0)")
            if panel.amplitude_source not in AMPLITUDE_SOURCES:
                raise ConfigError(
                    f"{where}: amplitude_source must be one of {AMPLITUDE_SOURCES}, "
                    f"got {panel.amplitude_source!r}"
                )
            if not (isinstance(panel.update_stride, int) and panel.update_stride >= 1):
                raise ConfigError(f"{where}: update_stride must be an integer >= 1")
        elif panel.methods != () or panel.observables != ():
            raise ConfigError(f"{where}: {self.kind} panels take no methods or observables")
        # Constructing the model and bath validates the numeric fields.
        self.params_for(panel)
        self.bath_for(panel)

    # -- concretization helpers used by the runner ------------------------------------
    def params_for(self, panel: PanelSpec) -> ModelParams:
        return ModelParams(omega=self.omega, g=self.g, e_d=panel.e_d,
                           mass=self.mass, hbar=self.hbar)

    def bath_for(self, panel: PanelSpec) -> BathSpec:
        if panel.mu == 0:
            return BathSpec.single(panel.gamma, self.kt)
        return BathSpec.symmetric_bias(panel.gamma, panel.mu, self.kt)

    def ensemble_config(self) -> EnsembleConfig:
        return EnsembleConfig(
            n_traj=self.n_traj,
            t_final=self.t_final,
            init_temperature=self.init_temperature_factor * self.kt,
            record_stride=self.record_stride,
            seed=self.seed,
        )

    def method_config(self, panel: PanelSpec, method: str, table=None) -> MethodConfig:
        return MethodConfig(
            method=method,
            dt=self.dt,
            amplitude_source=panel.amplitude_source,
            update_stride=panel.update_stride,
            amplitude_table=table,
        )


def charged_minimum(params: ModelParams) -> float:
    """Minimum of the charged surface U0 + h: x = -h'(x) / (m omega^2)."""
    return -params.level_slope / (params.mass * params.omega**2)


# -- serialization (manifest round trip) ----------------------------------------------

_PANEL_FLOATS = ("gamma", "e_d", "mu")
_PANEL_INTS = ("update_stride",)
_PANEL_TUPLES = ("methods", "observables")
_PRESET_FLOATS = ("omega", "kt", "g", "mass", "hbar", "dt", "t_final",
                  "init_temperature_factor", "amplitude_grid_step_kt")
_PRESET_INTS = ("n_traj", "seed")


def preset_to_dict(preset: ExperimentPreset) -> dict:
    """Plain-data form of a preset (JSON-friendly after tuple -> list)."""
    return asdict(preset)


def _coerce(raw: dict, floats, ints, tuples, path: str, errors: list[str]) -> dict:
    out = dict(raw)
    for key in floats:
        if key in out:
            try:
                out[key] = float(out[key])
            except (TypeError, ValueError):
                errors.append(f"{path}.{key}: expected a number, got {out[key]!r}")
    for key in ints:
        if key in out:
            try:
                out[key] = int(out[key])
            except (TypeError, ValueError):
                errors.append(f"{path}.{key}: expected an integer, got {out[key]!r}")
    for key in tuples:
        if key in out:
            if not isinstance(out[key], (list, tuple)):
                errors.append(f"{path}.{key}: expected a list, got {out[key]!r}")
            else:
                out[key] = tuple(out[key])
    return out


def preset_from_dict(data: dict) -> ExperimentPreset:
    """Rebuild a preset from its plain-data form; unknown fields are rejected."""
    if not isinstance(data, dict):
        raise ConfigError(f"preset must be a mapping, got {type(data).__name__}")
    errors: list[str] = []
    allowed = {f.name for f in fields(ExperimentPreset)}
    unknown = sorted(set(data) - allowed)
    errors += [f"preset.{key}: unknown field" for key in unknown]

    top = {k: v for k, v in data.items() if k in allowed}
    top = _coerce(top, _PRESET_FLOATS, _PRESET_INTS, (), "preset", errors)
    if top.get("record_stride") is not None:
        try:
            top["record_stride"] = int(top["record_stride"])
        except (TypeError, ValueError):
            errors.append("preset.record_stride: expected an integer or null")

    panel_fields = {f.name for f in fields(PanelSpec)}
    panels = []
    for i, raw in enumerate(top.pop("panels", ()) or ()):
        path = f"preset.panels[{i}]"
        if not isinstance(raw, dict):
            errors.append(f"{path}: expected a mapping")
            continue
        errors += [f"{path}.{key}: unknown field" for key in sorted(set(raw) - panel_fields)]
        raw = {k: v for k, v in raw.items() if k in panel_fields}
        raw = _coerce(raw, _PANEL_FLOATS, _PANEL_INTS, _PANEL_TUPLES, path, errors)
        if not errors:
            panels.append(PanelSpec(**raw))
    if errors:
        raise ConfigError("invalid preset data:\n  " + "\n  ".join(errors))
    if not panels:
        raise ConfigError("preset.panels: at least one panel is required")
    return ExperimentPreset(panels=tuple(panels), **top)


# -- the preset catalogue --------------------------------------------------------------

def _grid(letter_values, gammas, *, by: str, observables, e_d=E_D_HALF) -> tuple[PanelSpec, ...]:
    """Panels labelled '<letter>-G<gamma>' where the letter steps e_d or mu."""
    panels = []
    for letter, value in letter_values:
        for gamma in gammas:
            panels.append(PanelSpec(
                label=f"{letter}-G{gamma:g}",
                gamma=gamma,
                e_d=value if by == "e_d" else e_d,
                mu=value if by == "mu" else 0.0,
                observables=observables,
            ))
    return tuple(panels)


_EQ_LETTERS = (("a", E_D_FULL), ("b", E_D_HALF))   # letter encodes the level offset
_NEQ_LETTERS = (("a", 0.05), ("b", 0.2))           # letter encodes the bias mu
_GAMMAS = (0.001, 0.01)

_PRESET_LIST = (
    ExperimentPreset(
        name="eq_ke",
        kind="dynamics",
        description=(
            "Kinetic-energy relaxation to equilibrium, five methods, single lead: "
            "gamma in {0.001, 0.01}; panels a-* use e_d = g^2/(hbar omega), "
            "b-* use g^2/(2 hbar omega). ~7 min desk scale."
        ),
        panels=_grid(_EQ_LETTERS, _GAMMAS, by="e_d", observables=("ke",)),
        # t_final = 6e4 >= 12x the slowest fitted KE relaxation time (~4.8e3).
        t_final=6e4,
    ),
    ExperimentPreset(
        name="eq_pop",
        kind="dynamics",
        description=(
            "Impurity-population relaxation companion to eq_ke (same grid, population "
            "observable). ~7 min desk scale."
        ),
        panels=_grid(_EQ_LETTERS, _GAMMAS, by="e_d", observables=("pop",)),
        t_final=6e4,
    ),
    ExperimentPreset(
        name="small_gamma",
        kind="dynamics",
        description=(
            "Extremely weak coupling gamma = 1e-4, single lead: kinetic energy and "
            "population for all five methods; the Markovian random force overheats "
            "while the colored force tracks surface hopping. ~12 min desk scale."
        ),
        panels=(PanelSpec(label="G0.0001", gamma=1e-4, e_d=E_D_HALF,
                          observables=("ke", "pop")),),
        # Surface hopping relaxes with tau ~ 5.1e4 here; 4e5 covers ~8 relaxation times.
        t_final=4e5,
    ),
    ExperimentPreset(
        name="neq_ke",
        kind="dynamics",
        description=(
            "Kinetic-energy relaxation under bias (two leads, gamma/2 each at +-mu): "
            "panels a-* use mu = 0.05, b-* mu = 0.2; gamma in {0.001, 0.01}. "
            "~9 min desk scale."
        ),
        panels=_grid(_NEQ_LETTERS, _GAMMAS, by="mu", observables=("ke",)),
        # Bias widens the f(1-f) window, so relaxation is at least equilibrium-fast;
        # the equilibrium horizon 6e4 carries over.
        t_final=6e4,
    ),
    ExperimentPreset(
        name="neq_pop",
        kind="dynamics",
        description=(
            "Impurity-population companion to neq_ke (same biased grid, population "
            "observable). ~9 min desk scale."
        ),
        panels=_grid(_NEQ_LETTERS, _GAMMAS, by="mu", observables=("pop",)),
        t_final=6e4,
    ),
    ExperimentPreset(
        name="current",
        kind="dynamics",
        description=(
            "Left-lead electron current under bias: panels a-* use mu = 0.05, b-* "
            "mu = 0.2; gamma in {0.001, 0.01}; five methods. ~9 min desk scale."
        ),
        panels=_grid(_NEQ_LETTERS, _GAMMAS, by="mu", observables=("cur",)),
        # The current settles on the electronic scale hbar/gamma but keeps drifting
        # with the nuclear coordinate until the kinetic energy plateaus; reuse 6e4.
        t_final=6e4,
    ),
    ExperimentPreset(
        name="spectrum",
        kind="spectrum",
        description=(
            "Power spectrum of the frozen-position force-fluctuation correlation at "
            "the charged-surface minimum, gamma in {1e-4, 1e-3, 1e-2}: Lorentzians "
            "of width gamma/hbar. Seconds."
        ),
        panels=tuple(PanelSpec(label=f"G{g:g}", gamma=g, e_d=E_D_HALF,
                               methods=(), observables=()) for g in (1e-4, 1e-3, 1e-2)),
    ),
    ExperimentPreset(
        name="dm_compare",
        kind="amplitude",
        description=(
            "White-noise amplitude versus position: analytic value against the "
            "spectral-fit route (and the fitted decay rate against gamma/hbar), "
            "gamma in {0.001, 0.01}. Seconds."
        ),
        panels=tuple(PanelSpec(label=f"G{g:g}", gamma=g, e_d=E_D_HALF,
                               methods=(), observables=()) for g in _GAMMAS),
    ),
    ExperimentPreset(
        name="stride_study",
        kind="dynamics",
        description=(
            "Colored-noise integration economics: panels a-* compare analytic vs "
            "spectrally fitted amplitudes at gamma in {0.001, 0.01}; panels b-* "
            "refresh the fitted amplitude every {1, 10, 50} steps at gamma = 0.01. "
            "~4 min desk scale."
        ),
        panels=tuple(
            [PanelSpec(label=f"a-G{g:g}-{src}", gamma=g, e_d=E_D_HALF,
                       methods=("nm-ed",), observables=("ke",), amplitude_source=src)
             for g in _GAMMAS for src in AMPLITUDE_SOURCES]
            + [PanelSpec(label=f"b-s{n}", gamma=0.01, e_d=E_D_HALF,
                         methods=("nm-ed",), observables=("ke",),
                         amplitude_source="fitted", update_stride=n)
               for n in (1, 10, 50)]
        ),
        t_final=6e4,
    ),
)

PRESETS: dict[str, ExperimentPreset] = {p.name: p for p in _PRESET_LIST}
