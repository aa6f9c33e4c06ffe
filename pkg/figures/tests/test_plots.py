import json

import numpy as np
import pytest

from zkfigures import (FigureSpec, SchemaError, load_report, plot_convergence,
                       plot_decay, plot_gap_envelope, plot_lemma_table, render)

from artifact_helpers import SERIES_COLUMNS, write_decay_report, write_series


class TestPlotDecay:
    def test_annotations_match_report_digits(self, synthetic_decay_dir):
        d = synthetic_decay_dir
        out = d / "decay.png"
        res = plot_decay(d / "series.csv", d / "report.json", out)
        assert out.exists()
        report = json.loads((d / "report.json").read_text())
        for name, fit in report["fits"].items():
            assert res.annotations[name] == f"{fit['fitted_rate']:.6g}"

    def test_byte_identical_rerun(self, synthetic_decay_dir):
        d = synthetic_decay_dir
        plot_decay(d / "series.csv", d / "report.json", d / "a.png")
        plot_decay(d / "series.csv", d / "report.json", d / "b.png")
        assert (d / "a.png").read_bytes() == (d / "b.png").read_bytes()

    def test_zero_series_clipped_but_rendered(self, tmp_path):
        t = np.linspace(0.0, 5.0, 30)
        write_series(tmp_path / "series.csv", t)  # all-zero functionals
        write_decay_report(tmp_path / "report.json", {}, {"weighted": 0.5},
                           degenerate=True)
        out = tmp_path / "decay.png"
        res = plot_decay(tmp_path / "series.csv", tmp_path / "report.json", out)
        assert out.exists()
        assert res.annotations == {}

    def test_missing_column_named(self, tmp_path):
        header = ",".join(c for c in SERIES_COLUMNS if c != "weighted")
        (tmp_path / "series.csv").write_text(header + "\n" + "0," * 8 + "0\n")
        write_decay_report(tmp_path / "report.json", {}, {})
        with pytest.raises(SchemaError) as err:
            plot_decay(tmp_path / "series.csv", tmp_path / "report.json",
                       tmp_path / "decay.png")
        assert "weighted" in str(err.value)
        assert not (tmp_path / "decay.png").exists()

    def test_schema_version_checked(self, tmp_path, synthetic_decay_dir):
        doc = json.loads((synthetic_decay_dir / "report.json").read_text())
        doc["schema_version"] = 2
        (tmp_path / "report.json").write_text(json.dumps(doc))
        write_series(tmp_path / "series.csv", np.linspace(0, 1, 12))
        with pytest.raises(SchemaError):
            plot_decay(tmp_path / "series.csv", tmp_path / "report.json",
                       tmp_path / "decay.png")
        assert not (tmp_path / "decay.png").exists()


def write_convergence_report(path, values, errors, order, degenerate=False):
    doc = {
        "schema_version": 1,
        "kind": "epsilon-convergence",
        "generated_at": "1970-01-01T00:00:00+00:00",
        "config": None,
        "convergence": {"parameter": "epsilon", "values": list(values),
                        "errors": list(errors), "fitted_order": order,
                        "degenerate": degenerate},
    }
    path.write_text(json.dumps(doc))


class TestPlotConvergence:
    def test_exact_first_order_annotated(self, tmp_path):
        values = [1e-3, 2e-3, 4e-3]
        errors = [2e-6, 4e-6, 8e-6]  # exact slope 1
        write_convergence_report(tmp_path / "report.json", values, errors, 1.0)
        res = plot_convergence(tmp_path / "report.json", tmp_path / "conv.png")
        assert not res.skipped
        assert res.annotations["fitted_order"] == "1.000"
        # redundant cross-check: refit slope within 0.01 of the report's
        assert abs(float(res.annotations["refit_order"]) - 1.0) <= 0.01

    def test_degenerate_skipped_with_notice(self, tmp_path):
        write_convergence_report(tmp_path / "report.json", [1e-3, 2e-3, 4e-3],
                                 [0.0, 0.0, 0.0], None, degenerate=True)
        res = plot_convergence(tmp_path / "report.json", tmp_path / "conv.png")
        assert res.skipped
        assert res.notice
        assert not (tmp_path / "conv.png").exists()

    def test_refit_matches_report_on_solver_output(self, tmp_path, solver_decay_dir):
        # build a convergence report from a real sweep through the solver CLI
        import subprocess
        import sys
        outdir = tmp_path / "eps-out"
        cfg = tmp_path / "eps.toml"
        cfg.write_text(f"""
[grid]
Nx = 32
Ny = 16
[profile]
amplitude = 1e-4
[integrator]
T = 0.1
[experiment]
kind = "epsilon-convergence"
epsilon_list = [4e-3, 2e-3, 1e-3]
[output]
directory = "{outdir}"
""")
        proc = subprocess.run([sys.executable, "-m", "zkstrip.cli", "run", str(cfg)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        res = plot_convergence(outdir / "report.json", outdir / "conv.png")
        report = load_report(outdir / "report.json")
        assert not res.skipped
        fitted = report["convergence"]["fitted_order"]
        assert abs(float(res.annotations["refit_order"]) - fitted) <= 0.01


class TestPlotGapEnvelope:
    def test_renders_gap_and_envelope(self, tmp_path):
        t = np.linspace(0.0, 2.0, 50)
        gap = 1e-8 * np.exp(-3 * t)
        env = 1e-8 * np.exp(-2.5 * t)
        doc = {
            "schema_version": 1, "kind": "perturbation",
            "generated_at": "x", "config": None,
            "perturbation": {"delta": 1e-3, "initial_gap": 1e-8,
                             "times": t.tolist(), "gap": gap.tolist(),
                             "envelope": env.tolist(),
                             "quartic_integral": (0 * t).tolist(),
                             "calibration_constant": -1.0,
                             "gronwall_constant": 1.0,
                             "bound_satisfied": True, "tol": 0.1},
        }
        (tmp_path / "report.json").write_text(json.dumps(doc))
        res = plot_gap_envelope(tmp_path / "report.json", tmp_path / "gap.png")
        assert (tmp_path / "gap.png").exists()
        assert res.annotations["bound_satisfied"] == "True"


class TestPlotLemmaTable:
    def test_table_scores(self, tmp_path):
        doc = {
            "schema_version": 1, "kind": "lemmas", "generated_at": "x",
            "config": None,
            "lemmas": {
                "steklov": [{"passed": True}, {"passed": True}],
                "interpolation": [{"passed": True}],
                "comparison_ode": [{"passed": True}, {"passed": False}],
                "n_pass": 4, "n_total": 5,
            },
        }
        (tmp_path / "report.json").write_text(json.dumps(doc))
        res = plot_lemma_table(tmp_path / "report.json", tmp_path / "lemmas.png")
        assert res.annotations["steklov"] == "2/2"
        assert res.annotations["comparison_ode"] == "1/2"
        assert res.annotations["total"] == "4/5"


class TestFigureSpec:
    def test_render_dispatch(self, synthetic_decay_dir):
        d = synthetic_decay_dir
        spec = FigureSpec(kind="decay-semilog",
                          inputs=(d / "series.csv", d / "report.json"),
                          output=str(d / "spec.png"), title="demo")
        res = render(spec)
        assert res.path == str(d / "spec.png")

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            FigureSpec(kind="pie-chart", inputs=(), output="x.png")
