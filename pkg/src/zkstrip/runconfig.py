"""Run-configuration file: TOML sections, validation, defaults.

Sections and keys:

  [grid]        L, dim, Nx, Ny, Nz, half_width
  [profile]     family, amplitude, transverse_scale, table_path
  [integrator]  dt, T, scheme, epsilon, diagnostic_stride, energy_tol,
                nonlinear, dealias, x_order
  [experiment]  kind (decay | epsilon-convergence | perturbation | lemmas |
                single-run), fit_start_frac, fit_end_frac,
                allow_outside_theorem, epsilon_list, delta, perturb_family,
                perturb_amplitude, perturb_transverse_scale, seed
  [output]      directory, formats

Unknown sections or keys are rejected (with a nearest-key suggestion);
validation reports every violation, not just the first.  Missing keys take
the documented defaults: dim=2 grids default to 128x128 and dim=3 to 64^3;
half_width defaults to 6x the profile's transverse scale; dt defaults to
0.25*dx.
"""

from __future__ import annotations

import dataclasses
import difflib
import math

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .grid import Grid, ProfileSpec, build_grid, read_profile_table
from .integrator import SCHEMES, IntegratorConfig
from .operators import OperatorSet

EXPERIMENT_KINDS = ("decay", "epsilon-convergence", "perturbation", "lemmas", "single-run")

_SCHEMA: dict[str, dict[str, tuple]] = {
    "grid": {
        "L": (float, int),
        "dim": (int,),
        "Nx": (int,),
        "Ny": (int,),
        "Nz": (int,),
        "half_width": (float, int),
    },
    "profile": {
        "family": (str,),
        "amplitude": (float, int),
        "transverse_scale": (float, int),
        "table_path": (str,),
    },
    "integrator": {
        "dt": (float, int),
        "T": (float, int),
        "scheme": (str,),
        "epsilon": (float, int),
        "diagnostic_stride": (int,),
        "energy_tol": (float, int),
        "nonlinear": (bool,),
        "dealias": (bool,),
        "x_order": (int,),
    },
    "experiment": {
        "kind": (str,),
        "fit_start_frac": (float, int),
        "fit_end_frac": (float, int),
        "allow_outside_theorem": (bool,),
        "epsilon_list": (list,),
        "delta": (float, int),
        "perturb_family": (str,),
        "perturb_amplitude": (float, int),
        "perturb_transverse_scale": (float, int),
        "seed": (int,),
    },
    "output": {
        "directory": (str,),
        "formats": (list,),
    },
}


class ConfigError(Exception):
    """Carries the full list of validation violations."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


@dataclasses.dataclass
class RunConfig:
    """A fully validated configuration with defaults resolved."""

    raw_text: str
    L: float
    dim: int
    Nx: int
    Ny: int
    Nz: int | None
    half_width: float
    family: str
    amplitude: float
    transverse_scale: float
    table_path: str | None
    dt: float
    T: float
    scheme: str
    epsilon: float
    diagnostic_stride: int
    energy_tol: float
    nonlinear: bool
    dealias: bool
    x_order: int
    kind: str
    fit_start_frac: float
    fit_end_frac: float
    allow_outside_theorem: bool
    epsilon_list: list[float]
    delta: float
    perturb_family: str
    perturb_amplitude: float
    perturb_transverse_scale: float
    seed: int
    directory: str
    formats: list[str]

    def build_grid(self) -> Grid:
        return build_grid(self.L, self.dim, self.Nx, self.Ny, self.Nz, self.half_width)

    def build_operators(self, grid: Grid | None = None) -> OperatorSet:
        return OperatorSet(grid or self.build_grid(), x_order=self.x_order,
                           dealias=self.dealias)

    def profile_spec(self, grid: Grid | None = None) -> ProfileSpec:
        table = None
        if self.family == "custom-table":
            table = read_profile_table(self.table_path, grid or self.build_grid())
        return ProfileSpec(self.family, amplitude=self.amplitude,
                           transverse_scale=self.transverse_scale, table=table)

    def perturb_spec(self) -> ProfileSpec:
        return ProfileSpec(self.perturb_family, amplitude=self.perturb_amplitude,
                           transverse_scale=self.perturb_transverse_scale)

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, T=self.T, scheme=self.scheme,
                                epsilon=self.epsilon,
                                diagnostic_stride=self.diagnostic_stride,
                                energy_tol=self.energy_tol,
                                include_nonlinear=self.nonlinear)

    def fit_window(self) -> tuple[float, float]:
        return (self.fit_start_frac * self.T, self.fit_end_frac * self.T)


def _suggest(key: str, candidates) -> str:
    close = difflib.get_close_matches(key, list(candidates), n=1)
    return f" (did you mean {close[0]!r}?)" if close else ""


def _check_unknown(doc: dict, violations: list[str]) -> None:
    for section in doc:
        if section not in _SCHEMA:
            violations.append(f"unknown section [{section}]{_suggest(section, _SCHEMA)}")
            continue
        if not isinstance(doc[section], dict):
            violations.append(f"[{section}] must be a table of keys")
            continue
        for key, value in doc[section].items():
            if key not in _SCHEMA[section]:
                violations.append(
                    f"unknown key {section}.{key}{_suggest(key, _SCHEMA[section])}")
                continue
            types = _SCHEMA[section][key]
            if not isinstance(value, types) or isinstance(value, bool) and bool not in types:
                want = types[0].__name__
                violations.append(f"{section}.{key} must be of type {want}")


def _get(doc, section, key, default):
    return doc.get(section, {}).get(key, default)


def parse_config_text(text: str) -> RunConfig:
    """Validate a TOML document and resolve defaults; raises ConfigError."""
    violations: list[str] = []
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML parse error: {exc}"]) from None

    _check_unknown(doc, violations)

    kind = _get(doc, "experiment", "kind", None)
    if kind is None:
        violations.append("experiment.kind is required")
    elif kind not in EXPERIMENT_KINDS:
        violations.append(
            f"experiment.kind must be one of {EXPERIMENT_KINDS}{_suggest(str(kind), EXPERIMENT_KINDS)}")

    dim = _get(doc, "grid", "dim", 2)
    if dim not in (2, 3):
        violations.append("grid.dim must be 2 or 3")
        dim = 2
    L = float(_get(doc, "grid", "L", math.pi / 2))
    if L <= 0:
        violations.append("grid.L must be positive")
    default_n = 128 if dim == 2 else 64
    Nx = _get(doc, "grid", "Nx", default_n)
    Ny = _get(doc, "grid", "Ny", default_n)
    Nz = _get(doc, "grid", "Nz", default_n if dim == 3 else None)
    if isinstance(Nx, int) and Nx < 8:
        violations.append("grid.Nx must be >= 8")
    for name, val in (("Ny", Ny), ("Nz", Nz)):
        if val is None:
            continue
        if isinstance(val, int) and not (val >= 8 and (val & (val - 1)) == 0):
            violations.append(f"grid.{name} must be a power of two >= 8")

    family = _get(doc, "profile", "family", "separable-sine-gauss")
    amplitude = float(_get(doc, "profile", "amplitude", 1e-4))
    sigma = float(_get(doc, "profile", "transverse_scale", 1.0))
    if sigma <= 0:
        violations.append("profile.transverse_scale must be positive")
    table_path = _get(doc, "profile", "table_path", None)
    from .grid import PROFILE_FAMILIES
    if family not in PROFILE_FAMILIES:
        violations.append(
            f"profile.family must be one of {PROFILE_FAMILIES}{_suggest(str(family), PROFILE_FAMILIES)}")
    if family == "custom-table" and not table_path:
        violations.append("profile.table_path is required for the custom-table family")

    half_width = float(_get(doc, "grid", "half_width", 6.0 * sigma))
    if half_width <= 0:
        violations.append("grid.half_width must be positive")

    dx = L / (int(Nx) + 1) if isinstance(Nx, int) and L > 0 else 0.01
    dt = float(_get(doc, "integrator", "dt", 0.25 * dx))
    T = float(_get(doc, "integrator", "T", 20.0))
    if dt <= 0:
        violations.append("integrator.dt must be positive")
    elif T < dt:
        violations.append("integrator.T must be at least one step")
    scheme = _get(doc, "integrator", "scheme", "imex-cn-ab2")
    if scheme not in SCHEMES:
        violations.append(
            f"integrator.scheme must be one of {SCHEMES}{_suggest(str(scheme), SCHEMES)}")
    epsilon = float(_get(doc, "integrator", "epsilon", 0.0))
    if epsilon < 0:
        violations.append("integrator.epsilon must be nonnegative")
    stride = _get(doc, "integrator", "diagnostic_stride", 10)
    if isinstance(stride, int) and stride < 1:
        violations.append("integrator.diagnostic_stride must be >= 1")
    energy_tol = float(_get(doc, "integrator", "energy_tol", 1e-4))
    nonlinear_on = _get(doc, "integrator", "nonlinear", True)
    dealias = _get(doc, "integrator", "dealias", True)
    x_order = _get(doc, "integrator", "x_order", 2)
    if x_order not in (2, 4):
        violations.append("integrator.x_order must be 2 or 4")

    fit_start = float(_get(doc, "experiment", "fit_start_frac", 0.2))
    fit_end = float(_get(doc, "experiment", "fit_end_frac", 0.9))
    if not (0.0 <= fit_start < fit_end <= 1.0):
        violations.append("experiment fit window fractions must satisfy 0 <= start < end <= 1")
    allow_outside = _get(doc, "experiment", "allow_outside_theorem", False)
    epsilon_list = _get(doc, "experiment", "epsilon_list", [4e-3, 2e-3, 1e-3])
    if not (isinstance(epsilon_list, list) and all(isinstance(e, (int, float)) and e > 0
                                                   for e in epsilon_list)):
        violations.append("experiment.epsilon_list must be a list of positive numbers")
    elif kind == "epsilon-convergence" and len(epsilon_list) < 3:
        violations.append("experiment.epsilon_list needs at least 3 values")
    delta = float(_get(doc, "experiment", "delta", 1e-3))
    if delta < 0:
        violations.append("experiment.delta must be nonnegative")
    perturb_family = _get(doc, "experiment", "perturb_family", "bump")
    perturb_amplitude = float(_get(doc, "experiment", "perturb_amplitude", 1.0))
    perturb_sigma = float(_get(doc, "experiment", "perturb_transverse_scale", sigma))
    seed = _get(doc, "experiment", "seed", 20250810)

    directory = _get(doc, "output", "directory", "./out")
    formats = _get(doc, "output", "formats", ["csv", "json"])
    if not (isinstance(formats, list) and formats
            and all(f in ("csv", "json") for f in formats)):
        violations.append("output.formats entries must be 'csv' or 'json'")

    if violations:
        raise ConfigError(violations)

    return RunConfig(raw_text=text, L=L, dim=int(dim), Nx=int(Nx), Ny=int(Ny),
                     Nz=None if dim == 2 else int(Nz), half_width=half_width,
                     family=family, amplitude=amplitude, transverse_scale=sigma,
                     table_path=table_path, dt=dt, T=T, scheme=scheme, epsilon=epsilon,
                     diagnostic_stride=int(stride), energy_tol=energy_tol,
                     nonlinear=bool(nonlinear_on), dealias=bool(dealias),
                     x_order=int(x_order), kind=kind, fit_start_frac=fit_start,
                     fit_end_frac=fit_end, allow_outside_theorem=bool(allow_outside),
                     epsilon_list=[float(e) for e in epsilon_list], delta=delta,
                     perturb_family=perturb_family, perturb_amplitude=perturb_amplitude,
                     perturb_transverse_scale=perturb_sigma, seed=int(seed),
                     directory=directory, formats=list(formats))


def parse_config(path) -> RunConfig:
    """Read and validate a configuration file; raises ConfigError or OSError."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
