"""Shared plumbing for the figure scripts.

Each script builds a FigureSpec — a declarative description of one figure:
which CSV files from a simulation output directory feed which panel, how the
curves are labelled, and how the panels are laid out.  ``render`` turns a spec
plus a CSV directory into a PNG.  Everything is driven by the CSV content
alone; no physics is recomputed here.

CSV schemas (matching the simulator's output contract):
  timeseries  t,mean,sem          one curve per file, optional 2-sem band
  spectrum    omega,K             one curve per file
  pair        x,analytic,fitted   one file yields an analytic line plus
                                  fitted markers
"""
import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

METHODS = ("ed", "ef-ld", "m-ed", "nm-ed", "sh")
METHOD_LABELS = {"ed": "ED", "ef-ld": "EF-LD", "m-ed": "M-ED",
                 "nm-ed": "NM-ED", "sh": "SH"}
METHOD_COLORS = {"ed": "#999999", "ef-ld": "#1f77b4", "m-ed": "#2ca02c",
                 "nm-ed": "#d62728", "sh": "#000000"}

SCHEMAS = {"timeseries": "t,mean,sem", "spectrum": "omega,K", "pair": "x,analytic,fitted"}

HALF_KT = 0.025  # equilibrium kinetic-energy reference, kT/2 at kT = 0.05


class FigureError(Exception):
    """Any input problem a figure script must fail loudly on."""


@dataclass(frozen=True)
class Curve:
    csv: str                # file name inside --csv-dir
    label: str              # legend entry
    color: str
    linestyle: str = "-"


@dataclass(frozen=True)
class Panel:
    title: str
    curves: tuple
    x_label: str
    y_label: str
    kind: str = "timeseries"
    ref_y: float | None = None   # horizontal reference line (e.g. kT/2)
    log_x: bool = False
    log_y: bool = False


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    layout: tuple
    panels: tuple
    band: bool = True            # shade mean +- 2 sem on timeseries panels

    def __post_init__(self):
        rows, cols = self.layout
        if rows * cols < len(self.panels):
            raise FigureError(f"{self.figure_id}: layout {self.layout} cannot "
                              f"hold {len(self.panels)} panels")
        for panel in self.panels:
            if panel.kind not in SCHEMAS:
                raise FigureError(f"{self.figure_id}: unknown panel kind {panel.kind!r}")
            labels = [curve.label for curve in panel.curves]
            if not all(labels):
                raise FigureError(f"{self.figure_id}: every curve needs a legend label")
            if len(set(labels)) != len(labels):
                raise FigureError(f"{self.figure_id}: duplicate legend labels in "
                                  f"panel {panel.title!r}")

    def referenced(self):
        """All CSV file names this figure reads, in drawing order."""
        return [curve.csv for panel in self.panels for curve in panel.curves]


def method_curves(preset, panel_label, observable):
    """The standard five-method curve set for one dynamics panel."""
    return tuple(
        Curve(csv=f"{preset}_{panel_label}_{observable}_{method}.csv",
              label=METHOD_LABELS[method], color=METHOD_COLORS[method])
        for method in METHODS
    )


def load_columns(path, kind):
    """Read one CSV, enforcing the schema for the given panel kind."""
    if not path.is_file():
        raise FigureError(f"missing input CSV: {path}")
    expected = SCHEMAS[kind]
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != expected:
            raise FigureError(f"{path}: expected columns '{expected}', "
                              f"found '{header}'")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise FigureError(f"{path}: unreadable numeric body ({exc})") from None
    if data.shape[0] == 0 or data.shape[1] != len(expected.split(",")):
        raise FigureError(f"{path}: expected {len(expected.split(','))} columns "
                          f"of data, found shape {data.shape}")
    return data


def _draw_timeseries(ax, panel, data, curve, band):
    t, mean, sem = data.T
    ax.plot(t, mean, color=curve.color, linestyle=curve.linestyle,
            label=curve.label)
    if band and np.any(sem > 0):
        ax.fill_between(t, mean - 2 * sem, mean + 2 * sem,
                        color=curve.color, alpha=0.18, linewidth=0)


def _draw_spectrum(ax, panel, data, curve):
    omega, k = data.T
    if panel.log_x or panel.log_y:  # omega = 0 cannot sit on a log axis
        keep = omega > 0
        omega, k = omega[keep], k[keep]
    ax.plot(omega, k, color=curve.color, linestyle=curve.linestyle,
            label=curve.label)


def _draw_pair(ax, panel, data, curve):
    x, analytic, fitted = data.T
    ax.plot(x, analytic, color=curve.color, linestyle="-",
            label=f"{curve.label} analytic")
    every = max(1, len(x) // 40)
    ax.plot(x[::every], fitted[::every], linestyle="none", marker="o",
            markersize=4, markerfacecolor="none", markeredgecolor=curve.color,
            label=f"{curve.label} fitted")


def render(spec, csv_dir, out_path):
    """Draw the figure from csv_dir's files and write a PNG to out_path."""
    csv_dir = Path(csv_dir)
    out_path = Path(out_path)
    if not csv_dir.is_dir():
        raise FigureError(f"CSV directory not found: {csv_dir}")

    plt.rcParams.update({
        "figure.constrained_layout.use": True,
        "font.size": 9.5,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "lines.linewidth": 1.4,
        "legend.framealpha": 0.85,
        "svg.hashsalt": spec.figure_id,
    })

    rows, cols = spec.layout
    fig, axes = plt.subplots(rows, cols, figsize=(4.6 * cols, 3.4 * rows),
                             squeeze=False)
    flat = axes.ravel()
    for ax in flat[len(spec.panels):]:
        ax.set_visible(False)

    for ax, panel in zip(flat, spec.panels):
        for curve in panel.curves:
            data = load_columns(csv_dir / curve.csv, panel.kind)
            if panel.kind == "timeseries":
                _draw_timeseries(ax, panel, data, curve, spec.band)
            elif panel.kind == "spectrum":
                _draw_spectrum(ax, panel, data, curve)
            else:
                _draw_pair(ax, panel, data, curve)
        if panel.ref_y is not None:
            ax.axhline(panel.ref_y, color="#444444", linestyle=":",
                       linewidth=1.0, label=None)
        if panel.log_x:
            ax.set_xscale("log")
        if panel.log_y:
            ax.set_yscale("log")
        ax.set_title(panel.title)
        ax.set_xlabel(panel.x_label)
        ax.set_ylabel(panel.y_label)
        ax.legend(fontsize=8)

    out_path.parent.mkdir(parents=True, exist_ok=True)
    # strip mutable metadata so identical inputs give identical bytes
    fig.savefig(out_path, dpi=130, format="png",
                metadata={"Software": None})
    plt.close(fig)
    return out_path


def main(spec, description, argv=None):
    """Standard entry point for every figure script."""
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--csv-dir", required=True,
                        help="directory holding the matching preset's CSV output")
    parser.add_argument("--out", required=True, help="PNG file to write")
    args = parser.parse_args(argv)
    try:
        render(spec, Path(args.csv_dir), Path(args.out))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0
