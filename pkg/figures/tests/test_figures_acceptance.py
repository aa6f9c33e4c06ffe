"""Secondary acceptance: figures produced from real solver artifacts."""

import subprocess
import sys

from zkfigures import build_summary, load_report, plot_decay
from zkfigures.cli import main as make_figures_main


def test_decay_figure_annotation_matches_report(solver_decay_dir):
    d = solver_decay_dir
    res = plot_decay(d / "series.csv", d / "report.json", d / "decay.png")
    report = load_report(d / "report.json", kind="decay")
    assert report["fits"], "reference run must produce fits"
    for name, fit in report["fits"].items():
        assert res.annotations[name] == f"{fit['fitted_rate']:.6g}"
    print("\n[ACCEPTANCE-SECONDARY] decay figure annotations match report: PASS")


def test_summary_has_all_sections_and_rerun_is_identical(solver_decay_dir, tmp_path):
    d = solver_decay_dir
    # lemma report through the solver CLI so every section has a source
    lemma_dir = tmp_path / "lemmas"
    cfg = tmp_path / "lemmas.toml"
    cfg.write_text(f'[experiment]\nkind = "lemmas"\n[output]\ndirectory = "{lemma_dir}"\n')
    proc = subprocess.run([sys.executable, "-m", "zkstrip.cli", "run", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    import shutil
    shutil.copy(lemma_dir / "report.json", d / "lemmas.json")

    assert make_figures_main([str(d)]) == 0
    text1 = (d / "summary.md").read_text()
    png1 = (d / "decay.png").read_bytes()
    assert make_figures_main([str(d)]) == 0
    text2 = (d / "summary.md").read_text()
    png2 = (d / "decay.png").read_bytes()

    for section in ("## Smallness verdict", "## Decay rates",
                    "## Lemma suite", "## Figures"):
        assert section in text1
    assert text1 == text2
    assert png1 == png2
    print("\n[ACCEPTANCE-SECONDARY] summary sections + byte-identical rerun: PASS")
