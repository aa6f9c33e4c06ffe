import json
import subprocess
import sys

import numpy as np
import pytest

from artifact_helpers import write_decay_report, write_series

RUN_CONFIG = """
[grid]
Nx = 48
Ny = 32

[profile]
amplitude = 2e-5

[integrator]
T = 6.0
diagnostic_stride = 2

[experiment]
kind = "decay"
fit_start_frac = 0.01
fit_end_frac = 0.05

[output]
directory = "{outdir}"
"""


@pytest.fixture(scope="session")
def solver_decay_dir(tmp_path_factory):
    """Real decay-run artifacts produced through the solver CLI."""
    outdir = tmp_path_factory.mktemp("solver-out")
    cfg = tmp_path_factory.mktemp("cfg") / "decay.toml"
    cfg.write_text(RUN_CONFIG.format(outdir=outdir))
    proc = subprocess.run([sys.executable, "-m", "zkstrip.cli", "run", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (outdir / "series.csv").exists()
    assert (outdir / "report.json").exists()
    assert (outdir / "smallness.json").exists()
    return outdir


@pytest.fixture()
def synthetic_decay_dir(tmp_path):
    t = np.linspace(0.0, 10.0, 60)
    columns = {}
    for name, rate in (("weighted", 0.5), ("ut_weighted", 0.25),
                       ("h1", 0.25), ("h2_partial", 0.125), ("ut_l2", 0.125),
                       ("l2", 0.5), ("bracket2", 0.3), ("trace0", 0.4)):
        columns[name] = 3.0 * np.exp(-rate * t)
    write_series(tmp_path / "series.csv", t, columns)
    fits = {}
    predicted = {"weighted": 0.5, "ut_weighted": 0.25, "h1": 0.25, "h2_composite": 0.25}
    for name in ("weighted", "ut_weighted", "h1", "h2_composite"):
        fits[name] = {"functional_name": name, "window": [1.0, 9.0],
                      "fitted_rate": 0.512345678, "r_squared": 0.9999,
                      "predicted_rate": predicted[name], "margin": 2.0}
    write_decay_report(tmp_path / "report.json", fits, predicted)
    return tmp_path
