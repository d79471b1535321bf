"""Command-line front end: presets, config files, CSV outputs, run manifests.

Verbs::

    ahdyn run <preset|config.ini|manifest.json> [flags]
    ahdyn list-presets
    ahdyn validate <preset|config.ini|manifest.json>

Flags for ``run``: ``--out-dir``, ``--seed``, ``--n-traj``, ``--paper-scale``,
``--quick``, ``--method``, ``--update-stride``, ``--workers``. Exit codes:
0 success, 2 configuration error, 3 numerical (stability/fit/trajectory) error.

Output files
------------
Everything lands in the run directory (default ``./<preset name>``) next to
``manifest.json``. CSV names are underscore-joined fields — preset name, panel
label, and for trajectory runs the observable and method; the fields themselves
never contain underscores::

    dynamics   <preset>_<panel>_<obs>_<method>.csv   header t,mean,sem
    spectrum   <preset>_<panel>.csv                  header omega,K
    amplitude  <preset>_<panel>_dm.csv               header x,analytic,fitted
               <preset>_<panel>_rate.csv             header x,analytic,fitted

The manifest records the fully resolved preset, package version, wall time and
a SHA-256 per file; ``ahdyn run <dir>/manifest.json`` re-runs it and reproduces
the CSVs byte for byte (same seed, any ``--workers`` value).

Config files
------------
INI syntax, sections ``[model] [bath] [method] [ensemble] [output]``; every key
optional. An empty file is the full default study: single lead, gamma swept
over {0.001, 0.01}, all five methods, kinetic energy observable, 5000
trajectories. Comma lists in ``bath.gamma``, ``bath.mu`` and
``method.update_stride`` sweep panels; ``bath.mu`` entries of 0 select a single
lead, nonzero entries the symmetric two-lead junction (gamma/2 per lead at
+-mu). Unknown sections or keys are rejected with the nearest valid name.

::

    [model]                       [ensemble]
    mass = 1.0                    n_traj = 5000
    hbar_omega = 0.003            t_final = 60000
    kt = 0.05                     init_temperature_factor = 5.0
    coupling = 0.02               record_stride = auto
    e_d = 0.066666666666666666    seed = 0

    [bath]                        [method]
    gamma = 0.001, 0.01           methods = ed, ef-ld, m-ed, nm-ed, sh
    mu = 0                        dt = 1.0
                                  update_stride = 1
    [output]                      amplitude_source = analytic
    observables = ke
    name = custom
"""
from __future__ import annotations

import argparse
import configparser
import difflib
import hashlib
import json
import math
import os
import re
import subprocess
import sys
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._csvio import write_columns
from .dynamics import METHODS, MethodConfig, validate_stability
from .ensemble import run_ensemble
from .errors import ConfigError, FitError, StabilityError, TrajectoryError
from .model import noise_amplitude_analytic
from .noise import amplitude_grid, correlation_trace, fit_amplitude_table, power_spectrum
from .presets import (
    AMPLITUDE_SOURCES,
    DESK_TRAJECTORIES,
    OBSERVABLES,
    PAPER_TRAJECTORIES,
    PRESETS,
    ExperimentPreset,
    PanelSpec,
    charged_minimum,
    preset_from_dict,
    preset_to_dict,
)
from .presets import E_D_HALF, HBAR_OMEGA, KT, COUPLING

__all__ = ["main", "run_preset", "validate_config", "plan_jobs"]

_QUICK_TRAJECTORIES = 400
_QUICK_T_FINAL = 2e4
_QUICK_GRID_STEP_KT = 2.0

_SCHEMA = {
    "model": ("mass", "hbar_omega", "kt", "coupling", "e_d"),
    "bath": ("gamma", "mu"),
    "method": ("methods", "dt", "update_stride", "amplitude_source"),
    "ensemble": ("n_traj", "t_final", "init_temperature_factor", "record_stride", "seed"),
    "output": ("observables", "name"),
}


# -- config parsing --------------------------------------------------------------------

def _hint(word: str, candidates) -> str:
    close = difflib.get_close_matches(word, list(candidates), n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


class _ConfigReader:
    """Typed accessors over a parsed INI file that accumulate path-tagged errors."""

    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser
        self.errors: list[str] = []

    def raw(self, section: str, key: str) -> str | None:
        value = self.parser.get(section, key, fallback=None)
        if value is None or value.strip() == "":
            return None
        return value.strip()

    def _convert(self, path: str, text: str, kind):
        try:
            value = kind(text)
        except ValueError:
            self.errors.append(f"{path}: expected {'an integer' if kind is int else 'a number'}, "
                               f"got {text!r}")
            return None
        if not math.isfinite(value):
            self.errors.append(f"{path}: must be finite, got {text!r}")
            return None
        return value

    def _check_range(self, path: str, value, minimum, exclusive, maximum=None):
        if value is None:
            return None
        if minimum is not None and (value <= minimum if exclusive else value < minimum):
            bound = ">" if exclusive else ">="
            self.errors.append(f"{path}: must be {bound} {minimum}, got {value}")
            return None
        if maximum is not None and value > maximum:
            self.errors.append(f"{path}: must be <= {maximum}, got {value}")
            return None
        return value

    def number(self, section, key, default, *, kind=float, minimum=None,
               exclusive=True, maximum=None):
        text = self.raw(section, key)
        if text is None:
            return default
        path = f"{section}.{key}"
        value = self._convert(path, text, kind)
        value = self._check_range(path, value, minimum, exclusive, maximum)
        return default if value is None else value

    def number_list(self, section, key, default, *, kind=float, minimum=None, exclusive=True):
        text = self.raw(section, key)
        if text is None:
            return default
        path = f"{section}.{key}"
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            self.errors.append(f"{path}: expected at least one value")
            return default
        values = []
        for part in parts:
            value = self._convert(path, part, kind)
            value = self._check_range(path, value, minimum, exclusive)
            if value is not None:
                values.append(value)
        return tuple(values) if len(values) == len(parts) else default

    def choice_list(self, section, key, default, *, allowed):
        text = self.raw(section, key)
        if text is None:
            return default
        path = f"{section}.{key}"
        parts = tuple(p.strip() for p in text.split(",") if p.strip())
        if not parts:
            self.errors.append(f"{path}: expected at least one value")
            return default
        ok = True
        for part in parts:
            if part not in allowed:
                self.errors.append(f"{path}: unknown value {part!r} "
                                   f"(allowed: {', '.join(allowed)}){_hint(part, allowed)}")
                ok = False
        return parts if ok else default

    def choice(self, section, key, default, *, allowed):
        values = self.choice_list(section, key, (default,), allowed=allowed)
        if len(values) != 1:
            self.errors.append(f"{section}.{key}: expected exactly one value")
            return default
        return values[0]


def validate_config(path) -> ExperimentPreset:
    """Parse an INI config into a fully resolved preset; collect errors with field paths."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    reader = _ConfigReader(parser)
    for section in parser.sections():
        if section not in _SCHEMA:
            reader.errors.append(f"unknown section [{section}]{_hint(section, _SCHEMA)}")
            continue
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                reader.errors.append(f"unknown key {section}.{key}{_hint(key, _SCHEMA[section])}")

    mass = reader.number("model", "mass", 1.0, minimum=0.0)
    omega = reader.number("model", "hbar_omega", HBAR_OMEGA, minimum=0.0)
    kt = reader.number("model", "kt", KT, minimum=0.0)
    coupling = reader.number("model", "coupling", COUPLING)
    e_d = reader.number("model", "e_d", E_D_HALF)

    gammas = reader.number_list("bath", "gamma", (0.001, 0.01), minimum=0.0)
    mus = reader.number_list("bath", "mu", (0.0,))

    methods = reader.choice_list("method", "methods", METHODS, allowed=METHODS)
    dt = reader.number("method", "dt", 1.0, minimum=0.0)
    strides = reader.number_list("method", "update_stride", (1,), kind=int, minimum=1,
                                 exclusive=False)
    source = reader.choice("method", "amplitude_source", "analytic", allowed=AMPLITUDE_SOURCES)

    n_traj = reader.number("ensemble", "n_traj", DESK_TRAJECTORIES, kind=int,
                           minimum=1, exclusive=False)
    t_final = reader.number("ensemble", "t_final", 6e4, minimum=0.0)
    init_factor = reader.number("ensemble", "init_temperature_factor", 5.0, minimum=0.0)
    seed = reader.number("ensemble", "seed", 0, kind=int, minimum=0,
                         exclusive=False, maximum=2**64 - 1)
    stride_text = reader.raw("ensemble", "record_stride")
    if stride_text is None or stride_text.lower() in ("auto", "none"):
        record_stride = None
    else:
        record_stride = reader.number("ensemble", "record_stride", None, kind=int,
                                      minimum=1, exclusive=False)

    observables = reader.choice_list("output", "observables", ("ke",), allowed=OBSERVABLES)
    name = reader.raw("output", "name") or "custom"
    if not re.fullmatch(r"[a-z0-9_]+", name):
        reader.errors.append(f"output.name: must match [a-z0-9_]+, got {name!r}")

    if reader.errors:
        raise ConfigError(f"invalid config {path}:\n  " + "\n  ".join(reader.errors))

    panels = []
    for mu in mus:
        for gamma in gammas:
            for stride in strides:
                pieces = []
                if len(mus) > 1 or mu != 0:
                    pieces.append(f"mu{mu:g}")
                pieces.append(f"G{gamma:g}")
                if len(strides) > 1:
                    pieces.append(f"s{stride}")
                panels.append(PanelSpec(
                    label="-".join(pieces), gamma=gamma, e_d=e_d, mu=mu,
                    methods=methods, observables=observables,
                    amplitude_source=source, update_stride=stride,
                ))
    try:
        return ExperimentPreset(
            name=name, kind="dynamics",
            description=f"custom configuration ({os.path.basename(str(path))})",
            panels=tuple(panels), omega=omega, kt=kt, g=coupling, mass=mass,
            dt=dt, n_traj=n_traj, t_final=t_final,
            init_temperature_factor=init_factor, record_stride=record_stride, seed=seed,
        )
    except ConfigError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from None


def _load_manifest(path) -> ExperimentPreset:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict) or "preset" not in data:
        raise ConfigError(f"{path}: not a run manifest (no 'preset' entry)")
    return preset_from_dict(data["preset"])


def _load_target(target: str) -> ExperimentPreset:
    if target in PRESETS:
        return PRESETS[target]
    if os.path.exists(target):
        if str(target).endswith(".json"):
            return _load_manifest(target)
        return validate_config(target)
    raise ConfigError(
        f"no preset or config file named {target!r} "
        f"(presets: {', '.join(PRESETS)}){_hint(target, PRESETS)}"
    )


# -- planning and execution --------------------------------------------------------------

@dataclass(frozen=True)
class OutputSpec:
    """One CSV to be produced: its filename, role, and (for time series) observable."""

    filename: str
    role: str  # "timeseries" | "spectrum" | "amplitude" | "rate"
    observable: str | None = None


@dataclass(frozen=True)
class JobSpec:
    """One unit of computation (an ensemble run or a spectral fit) and its outputs."""

    panel: PanelSpec
    method: str | None
    outputs: tuple[OutputSpec, ...]


def plan_jobs(preset: ExperimentPreset) -> list[JobSpec]:
    """Expand a preset into jobs; filenames follow the grammar in the module docstring."""
    jobs = []
    if preset.kind == "dynamics":
        for panel in preset.panels:
            for method in panel.methods:
                outputs = tuple(
                    OutputSpec(f"{preset.name}_{panel.label}_{obs}_{method}.csv",
                               "timeseries", obs)
                    for obs in panel.observables)
                jobs.append(JobSpec(panel, method, outputs))
    elif preset.kind == "spectrum":
        for panel in preset.panels:
            jobs.append(JobSpec(panel, None, (
                OutputSpec(f"{preset.name}_{panel.label}.csv", "spectrum"),)))
    else:  # amplitude
        for panel in preset.panels:
            jobs.append(JobSpec(panel, None, (
                OutputSpec(f"{preset.name}_{panel.label}_dm.csv", "amplitude"),
                OutputSpec(f"{preset.name}_{panel.label}_rate.csv", "rate"),
            )))
    return jobs


def check_stability(preset: ExperimentPreset) -> None:
    """Validate every (panel, method) stability bound before any run starts."""
    if preset.kind != "dynamics":
        return
    for panel in preset.panels:
        params, bath = preset.params_for(panel), preset.bath_for(panel)
        for method in panel.methods:
            validate_stability(
                MethodConfig(method=method, dt=preset.dt, update_stride=panel.update_stride),
                params, bath)


_FRAME_FIELDS = {"ke": ("mean_ke", "sem_ke"), "pop": ("mean_pop", "sem_pop"),
                 "cur": ("mean_current", "sem_current")}


def _observable_columns(frames, observable: str):
    mean_field, sem_field = _FRAME_FIELDS[observable]
    mean = [getattr(f, mean_field) for f in frames]
    sem = [getattr(f, sem_field) for f in frames]
    return mean, sem


def _execute(preset: ExperimentPreset, job: JobSpec, tables: dict, n_workers):
    """Run one job; return [(OutputSpec, header, columns), ...]."""
    panel = job.panel
    params, bath = preset.params_for(panel), preset.bath_for(panel)
    if preset.kind == "dynamics":
        table = None
        if panel.amplitude_source == "fitted":
            key = (panel.gamma, panel.mu, panel.e_d)
            if key not in tables:
                tables[key] = fit_amplitude_table(
                    params, bath,
                    x_grid=amplitude_grid(params, bath, step_kt=preset.amplitude_grid_step_kt))
            table = tables[key]
        frames = run_ensemble(params, bath, preset.method_config(panel, job.method, table),
                              preset.ensemble_config(), n_workers=n_workers)
        t = [f.t for f in frames]
        results = []
        for spec in job.outputs:
            mean, sem = _observable_columns(frames, spec.observable)
            results.append((spec, "t,mean,sem", (t, mean, sem)))
        return results
    if preset.kind == "spectrum":
        omega, values = power_spectrum(correlation_trace(params, bath, charged_minimum(params)))
        return [(job.outputs[0], "omega,K", (omega, values))]
    # amplitude: analytic curve and spectral fit on a shared grid
    grid = amplitude_grid(params, bath, step_kt=preset.amplitude_grid_step_kt)
    table = fit_amplitude_table(params, bath, x_grid=grid)
    analytic_dm = noise_amplitude_analytic(params, bath, grid)
    analytic_rate = np.full(grid.size, bath.gamma / params.hbar)
    dm_spec, rate_spec = job.outputs
    return [(dm_spec, "x,analytic,fitted", (grid, analytic_dm, table.d_m_values)),
            (rate_spec, "x,analytic,fitted", (grid, analytic_rate, table.rate_values))]


def _version_string() -> str:
    """Package version, suffixed with the source revision when available."""
    here = Path(__file__).resolve().parent
    try:
        proc = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=here,
                              capture_output=True, text=True, timeout=5)
        rev = proc.stdout.strip()
        if proc.returncode == 0 and rev:
            return f"{__version__}+g{rev}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def run_preset(preset: ExperimentPreset | str, out_dir=None, *,
               n_workers: int | None = None, echo=None) -> dict:
    """Execute a preset (or preset name): write all CSVs plus manifest.json.

    Returns the manifest dict. CSV bytes depend only on the resolved preset
    (seed included), never on n_workers or wall-clock state.
    """
    if isinstance(preset, str):
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r} "
                              f"(presets: {', '.join(PRESETS)}){_hint(preset, PRESETS)}")
        preset = PRESETS[preset]
    check_stability(preset)
    say = echo if echo is not None else (lambda line: None)

    out = Path(out_dir if out_dir is not None else preset.name)
    out.mkdir(parents=True, exist_ok=True)
    jobs = plan_jobs(preset)
    n_files = sum(len(job.outputs) for job in jobs)
    say(f"{preset.name}: {len(jobs)} jobs, {n_files} files -> {out}")

    t_start = time.perf_counter()
    records = []
    tables: dict = {}
    for job in jobs:
        t_job = time.perf_counter()
        for spec, header, columns in _execute(preset, job, tables, n_workers):
            path = out / spec.filename
            write_columns(path, header, *columns)
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            records.append({
                "path": spec.filename,
                "role": spec.role,
                "panel": job.panel.label,
                "method": job.method,
                "observable": spec.observable,
                "rows": len(columns[0]),
                "sha256": digest,
            })
            say(f"  wrote {spec.filename} ({len(columns[0])} rows) "
                f"[{time.perf_counter() - t_job:.1f} s]")

    manifest = {
        "tool": "ahdyn",
        "version": _version_string(),
        "created": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "wall_time_s": round(time.perf_counter() - t_start, 3),
        "n_workers": n_workers,
        "preset": preset_to_dict(preset),
        "files": records,
    }
    manifest_path = out / "manifest.json"
    tmp = str(manifest_path) + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, manifest_path)
    say(f"manifest: {manifest_path}")
    return manifest


# -- verbs -----------------------------------------------------------------------------

def _apply_overrides(preset: ExperimentPreset, args) -> ExperimentPreset:
    changes = {}
    if args.quick:
        changes["n_traj"] = min(preset.n_traj, _QUICK_TRAJECTORIES)
        changes["t_final"] = min(preset.t_final, _QUICK_T_FINAL)
        changes["amplitude_grid_step_kt"] = max(preset.amplitude_grid_step_kt,
                                                _QUICK_GRID_STEP_KT)
    if args.paper_scale:
        changes["n_traj"] = PAPER_TRAJECTORIES
    if args.n_traj is not None:
        changes["n_traj"] = args.n_traj
    if args.seed is not None:
        changes["seed"] = args.seed
    panels = preset.panels
    if args.method is not None:
        if preset.kind != "dynamics":
            raise ConfigError(f"--method does not apply to the {preset.kind} "
                              f"preset {preset.name!r}")
        panels = tuple(replace(p, methods=(args.method,)) for p in panels)
    if args.update_stride is not None:
        if preset.kind != "dynamics":
            raise ConfigError(f"--update-stride does not apply to the {preset.kind} "
                              f"preset {preset.name!r}")
        panels = tuple(replace(p, update_stride=args.update_stride) for p in panels)
    if panels is not preset.panels:
        changes["panels"] = panels
    return replace(preset, **changes) if changes else preset


def _cmd_run(args) -> int:
    preset = _apply_overrides(_load_target(args.target), args)
    out_dir = args.out_dir if args.out_dir is not None else preset.name
    run_preset(preset, out_dir, n_workers=args.workers, echo=print)
    return 0


def _cmd_list(args) -> int:
    width = max(len(name) for name in PRESETS)
    for preset in PRESETS.values():
        n_files = sum(len(job.outputs) for job in plan_jobs(preset))
        print(f"{preset.name:<{width}}  {preset.kind:<9} {n_files:>2} files  "
              f"{preset.description}")
    return 0


def _cmd_validate(args) -> int:
    preset = _load_target(args.config)
    check_stability(preset)
    outputs = [spec.filename for job in plan_jobs(preset) for spec in job.outputs]
    print(json.dumps({"preset": preset_to_dict(preset), "outputs": outputs}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ahdyn",
        description="Trajectory-ensemble nonadiabatic dynamics: run presets or "
                    "config files and write CSV time series plus a run manifest.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    run_parser = sub.add_parser("run", help="run a preset, config file, or manifest")
    run_parser.add_argument("target", help="preset name, config .ini path, or manifest .json")
    run_parser.add_argument("--out-dir", help="output directory (default: ./<preset name>)")
    run_parser.add_argument("--seed", type=int, help="override the ensemble seed")
    run_parser.add_argument("--n-traj", type=int, help="override the trajectory count")
    scale = run_parser.add_mutually_exclusive_group()
    scale.add_argument("--paper-scale", action="store_true",
                       help=f"restore the {PAPER_TRAJECTORIES}-trajectory publication scale")
    scale.add_argument("--quick", action="store_true",
                       help="smoke-test scale: <=400 trajectories, t_final <= 2e4, coarse grids")
    run_parser.add_argument("--method", choices=METHODS,
                            help="restrict every panel to one method")
    run_parser.add_argument("--update-stride", type=int,
                            help="override the noise-amplitude refresh stride")
    run_parser.add_argument("--workers", type=int,
                            help="thread count (outputs are identical for any value)")
    run_parser.set_defaults(func=_cmd_run)

    list_parser = sub.add_parser("list-presets", help="list the available presets")
    list_parser.set_defaults(func=_cmd_list)

    validate_parser = sub.add_parser(
        "validate", help="check a config/preset and print its resolved form")
    validate_parser.add_argument("config", help="preset name, config .ini path, or manifest .json")
    validate_parser.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StabilityError as exc:
        print(f"stability error: {exc}", file=sys.stderr)
        return 3
    except (FitError, TrajectoryError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
