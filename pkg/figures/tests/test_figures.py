"""Figure scripts: spec integrity, rendering from CSVs alone, loud failures."""
import importlib
import subprocess
import sys
from pathlib import Path

import pytest

import figspec

FIGURES_DIR = Path(__file__).resolve().parents[1]
FIGURE_NAMES = ("eq_ke", "eq_pop", "small_gamma", "neq_ke", "neq_pop",
                "current", "spectrum", "dm_compare", "stride_study")
SPECS = {name: importlib.import_module(f"fig_{name}").SPEC for name in FIGURE_NAMES}

SYNTHETIC_ROWS = {
    "timeseries": ["t,mean,sem"] + [f"{10 * i},{0.1 / (1 + i)},0.004" for i in range(8)],
    "spectrum": ["omega,K"] + [f"{i / 10},{1.0 / (1 + i * i)}" for i in range(8)],
    "pair": ["x,analytic,fitted"] + [f"{i - 4},{1 + i * i},{1 + i * i}" for i in range(8)],
}


def synthesize(spec, directory):
    """Write schema-correct placeholder CSVs for every file the figure reads."""
    directory.mkdir(parents=True, exist_ok=True)
    for panel in spec.panels:
        for curve in panel.curves:
            (directory / curve.csv).write_text(
                "\n".join(SYNTHETIC_ROWS[panel.kind]) + "\n", encoding="utf-8")


class TestSpecs:
    @pytest.mark.parametrize("name", FIGURE_NAMES)
    def test_figure_id_matches_preset_and_files_are_prefixed(self, name):
        spec = SPECS[name]
        assert spec.figure_id == name
        for csv in spec.referenced():
            assert csv.startswith(f"{name}_") and csv.endswith(".csv")

    @pytest.mark.parametrize("name", FIGURE_NAMES)
    def test_legend_covers_all_input_methods(self, name):
        # in panels that compare methods, every method's curve is labelled as
        # that method; single-method panels label by what they vary instead
        for panel in SPECS[name].panels:
            methods = [m for m in (c.csv[:-4].rsplit("_", 1)[-1] for c in panel.curves)
                       if m in figspec.METHODS]
            if len(set(methods)) < 2:
                continue
            labels = {curve.label for curve in panel.curves}
            assert {figspec.METHOD_LABELS[m] for m in methods} <= labels

    def test_five_curves_per_dynamics_panel(self):
        for name in ("eq_ke", "eq_pop", "small_gamma", "neq_ke", "neq_pop", "current"):
            for panel in SPECS[name].panels:
                assert len(panel.curves) == len(figspec.METHODS)

    def test_layout_validation_rejects_overflow(self):
        with pytest.raises(figspec.FigureError, match="layout"):
            figspec.FigureSpec(figure_id="broken", layout=(1, 1),
                               panels=SPECS["eq_ke"].panels)

    def test_duplicate_labels_rejected(self):
        panel = SPECS["eq_ke"].panels[0]
        twice = figspec.Panel(title="t", x_label="x", y_label="y",
                              curves=(panel.curves[0], panel.curves[0]))
        with pytest.raises(figspec.FigureError, match="duplicate"):
            figspec.FigureSpec(figure_id="broken", layout=(1, 1), panels=(twice,))


class TestRendering:
    @pytest.mark.parametrize("name", FIGURE_NAMES)
    def test_renders_from_synthetic_csvs(self, name, tmp_path):
        spec = SPECS[name]
        synthesize(spec, tmp_path / "csv")
        out = figspec.render(spec, tmp_path / "csv", tmp_path / f"{name}.png")
        assert out.is_file() and out.stat().st_size > 0

    def test_rendering_is_deterministic(self, tmp_path):
        spec = SPECS["small_gamma"]
        synthesize(spec, tmp_path / "csv")
        a = figspec.render(spec, tmp_path / "csv", tmp_path / "a.png")
        b = figspec.render(spec, tmp_path / "csv", tmp_path / "b.png")
        assert a.read_bytes() == b.read_bytes()

    def test_missing_csv_names_the_file(self, tmp_path):
        spec = SPECS["eq_ke"]
        synthesize(spec, tmp_path / "csv")
        victim = spec.referenced()[3]
        (tmp_path / "csv" / victim).unlink()
        with pytest.raises(figspec.FigureError, match=victim):
            figspec.render(spec, tmp_path / "csv", tmp_path / "x.png")
        assert not (tmp_path / "x.png").exists()

    def test_malformed_header_reports_columns(self, tmp_path):
        spec = SPECS["spectrum"]
        synthesize(spec, tmp_path / "csv")
        victim = spec.referenced()[0]
        (tmp_path / "csv" / victim).write_text("time,value\n0,1\n", encoding="utf-8")
        with pytest.raises(figspec.FigureError) as exc:
            figspec.render(spec, tmp_path / "csv", tmp_path / "x.png")
        message = str(exc.value)
        assert "omega,K" in message and "time,value" in message

    def test_empty_directory_is_a_hard_error(self, tmp_path):
        (tmp_path / "csv").mkdir()
        with pytest.raises(figspec.FigureError, match="missing input CSV"):
            figspec.render(SPECS["eq_ke"], tmp_path / "csv", tmp_path / "x.png")
        assert not (tmp_path / "x.png").exists()

    def test_missing_directory_is_a_hard_error(self, tmp_path):
        with pytest.raises(figspec.FigureError, match="directory"):
            figspec.render(SPECS["eq_ke"], tmp_path / "nowhere", tmp_path / "x.png")


class TestScriptInterface:
    def test_missing_inputs_exit_nonzero_with_named_file(self, tmp_path):
        (tmp_path / "csv").mkdir()
        proc = subprocess.run(
            [sys.executable, str(FIGURES_DIR / "fig_eq_ke.py"),
             "--csv-dir", str(tmp_path / "csv"), "--out", str(tmp_path / "x.png")],
            capture_output=True, text=True)
        assert proc.returncode == 2
        assert "missing input CSV" in proc.stderr and ".csv" in proc.stderr

    def test_argument_parsing_requires_flags(self):
        proc = subprocess.run(
            [sys.executable, str(FIGURES_DIR / "fig_eq_ke.py")],
            capture_output=True, text=True)
        assert proc.returncode == 2
        assert "--csv-dir" in proc.stderr

    def test_no_physics_recomputation(self):
        for source in sorted(FIGURES_DIR.glob("*.py")):
            assert "ahdyn" not in source.read_text(encoding="utf-8"), source.name
