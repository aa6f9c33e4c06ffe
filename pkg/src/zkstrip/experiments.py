"""Scenario drivers turning the decay theorem and its lemmas into experiments.

Each driver produces a small report object: exponential-rate fits against the
predicted decay rates, vanishing-regularization convergence orders, the
two-solution perturbation gap against its Gronwall envelope, and a sweep of
the standalone lemma checkers.  Drivers are pure apart from reading
ZK_THREADS to cap the parallel width of independent sweep runs.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import math
import os

import numpy as np

from .functionals import (FunctionalSeries, SmallnessReport, integrate_comparison_ode,
                          j0_functional, ode_comparison_check, interpolation_check,
                          smallness_check, steklov_ratio)
from .grid import Field, ProfileSpec, build_grid, make_profile
from .integrator import IntegratorConfig, RunResult, Stepper, run
from .operators import OperatorSet, build_operators, dense_from_diags


class ExperimentError(RuntimeError):
    pass


class OutsideTheoremError(ExperimentError):
    """Configured data fails the smallness check and no override was given."""


def _worker_count(n_jobs: int) -> int:
    cap = os.environ.get("ZK_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n_jobs, limit))


# -- measurement-grade initial data ------------------------------------------------
#
# The discrete x operator carries two eigenvalue branches: smoothly varying
# modes (the physical dynamics) and sawtooth modes oscillating at O(1/dx^3)
# frequencies.  The trapezoidal step is not L-stable, so sawtooth content in
# the data is rotated essentially undamped and shows up as a flat floor under
# every decaying functional.  Generic smooth profiles contain O(dx^2) sawtooth
# content through the wall closures; the constructors below produce data that
# keeps the floors orders of magnitude lower, which is what makes the decay
# and vanishing-regularization measurements clean at desk resolutions.


def _smooth_slow_eigvec(A: np.ndarray, roughness_cut: float):
    """Smallest-real-part eigenpair of the smoothly varying branch, or None."""
    ev, V = np.linalg.eig(A)
    rough = np.abs(np.diff(V, 2, axis=0)).max(axis=0) / np.abs(V).max(axis=0)
    smooth = np.nonzero(rough < roughness_cut)[0]
    if smooth.size == 0:
        return None
    i = smooth[np.argmin(ev.real[smooth])]
    return V[:, i]


def slow_mode_profile(ops: OperatorSet, amplitude: float, transverse_scale: float = 2.0,
                      weight_cut: float = 1e-10, roughness_cut: float = 0.1,
                      support_cut: float = 1e-9) -> ProfileSpec:
    """Initial data built from the slowest smooth eigenvector of every
    transverse Fourier sector, under a Gaussian transverse envelope.

    Each sector then evolves as a nearly pure exponential at its own smooth
    rate with no sawtooth excitation, so the measured decay of every
    functional reflects the physics instead of the undamped-floor artifact.
    Sector vectors are normalized by their overlap with the mean-sector
    eigenvector (an analytic function of the transverse wavenumber) to keep
    the transverse envelope localized; columns below support_cut of the peak
    are zeroed so the profile is exactly compactly supported inside the box.
    The eigenvector family decorrelates over a unit y-scale, so the envelope
    tail clears support_cut only for half_width >= ~6x transverse_scale.
    Returns a custom-table ProfileSpec normalized to unit peak.
    """
    g = ops.grid
    n = g.Nx
    D1 = dense_from_diags(ops.d1, n)
    D3 = dense_from_diags(ops.d3, n)
    if g.dim == 2:
        envelope = np.exp(-(g.y / transverse_scale) ** 2)
        ghat = np.fft.rfft(envelope)
    else:
        env = (np.exp(-(g.y / transverse_scale) ** 2)[:, None]
               * np.exp(-(g.z / transverse_scale) ** 2)[None, :])
        ghat = np.fft.rfftn(env).ravel()
    kap2 = ops.kappa2_flat
    u0hat = np.zeros((n, kap2.size), dtype=complex)
    keep = np.nonzero(np.abs(ghat) > weight_cut * np.abs(ghat).max())[0]
    phi_ref = None
    norm_ref = None
    for m in keep:
        phi = _smooth_slow_eigvec((1.0 - kap2[m]) * D1 + D3, roughness_cut)
        if phi is None:
            continue
        if phi_ref is None:
            phi = phi.real / np.abs(phi.real).max()
            if phi[np.argmax(np.abs(phi))] < 0:
                phi = -phi
            phi_ref = phi.astype(complex)
            norm_ref = float(np.vdot(phi_ref, phi_ref).real)
            phi = phi_ref
        else:
            phi = phi * (norm_ref / np.vdot(phi_ref, phi))
        u0hat[:, m] = ghat[m] * phi
    if g.dim == 2:
        table = np.fft.irfft(u0hat, n=g.Ny, axis=1)
    else:
        table = np.fft.irfftn(u0hat.reshape(n, g.Ny, g.Nz // 2 + 1),
                              s=(g.Ny, g.Nz), axes=(1, 2))
    table = table / np.abs(table).max()
    colmax = np.abs(table).max(axis=0)
    table[:, colmax <= support_cut] = 0.0
    return ProfileSpec("custom-table", amplitude=amplitude,
                       transverse_scale=transverse_scale, table=table)


def cubic_wall_profile(grid, amplitude: float, transverse_scale: float = 1.0) -> ProfileSpec:
    """Closure-compatible polynomial data x^3 (L-x)^2 * Gaussian transverse.

    Besides the wall conditions u(0) = u(L) = u_x(L) = 0, this x factor also
    has u_xx(0) = 0, the extra condition that the fourth-difference wall
    closure encodes.  That removes the O(eps * u_xx(0)/dx^2) spurious wall
    spike the hyperviscous term would otherwise inject, which is what makes
    the vanishing-regularization comparison converge at first order.
    Returns a custom-table ProfileSpec normalized to unit peak.
    """
    x = grid.x
    L = grid.L
    xfac = x ** 3 * (L - x) ** 2
    fy = np.exp(-(grid.y / transverse_scale) ** 2)
    if grid.dim == 2:
        table = xfac[:, None] * fy[None, :]
    else:
        fz = np.exp(-(grid.z / transverse_scale) ** 2)
        table = xfac[:, None, None] * fy[None, :, None] * fz[None, None, :]
    table = table / np.abs(table).max()
    return ProfileSpec("custom-table", amplitude=amplitude,
                       transverse_scale=transverse_scale, table=table)


# -- decay-rate fitting -----------------------------------------------------------


@dataclasses.dataclass
class DecayFit:
    """Least-squares exponential rate of one functional over a fit window."""

    functional_name: str
    window: tuple[float, float]
    fitted_rate: float
    r_squared: float
    predicted_rate: float | None = None
    margin: float | None = None

    def to_dict(self) -> dict:
        return {
            "functional_name": self.functional_name,
            "window": list(self.window),
            "fitted_rate": self.fitted_rate,
            "r_squared": self.r_squared,
            "predicted_rate": self.predicted_rate,
            "margin": self.margin,
        }


def fit_decay(series: FunctionalSeries, functional_name: str,
              window: tuple[float, float],
              predicted_rate: float | None = None) -> DecayFit:
    """Fit value ~ C exp(-rate*t) by least squares on log(value).

    Requires >= 10 strictly positive samples in the window; trailing
    nonpositive samples (functional decayed to numerical zero) shrink the
    window, anything else is an error.
    """
    t0, t1 = window
    if not t0 < t1:
        raise ValueError("fit window must have t_start < t_end")
    times = series.times
    values = series.column(functional_name)
    mask = (times >= t0) & (times <= t1)
    t = times[mask]
    v = values[mask]
    bad = np.nonzero(v <= 0.0)[0]
    if bad.size:
        first_bad = bad[0]
        if np.any(v[first_bad:] > 0.0):
            raise ValueError(
                f"{functional_name} has nonpositive interior samples in the window; "
                "cannot fit an exponential")
        t, v = t[:first_bad], v[:first_bad]
    if t.size < 10:
        raise ValueError(
            f"only {t.size} positive samples of {functional_name} in [{t0:g}, {t1:g}]; "
            "need at least 10 (shrink the window or sample more densely)")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((logv - pred) ** 2))
    ss_tot = float(np.sum((logv - logv.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 else 1.0 - ss_res / ss_tot
    rate = -float(slope)
    margin = None if predicted_rate in (None, 0.0) else rate / predicted_rate
    return DecayFit(functional_name=functional_name, window=(float(t[0]), float(t[-1])),
                    fitted_rate=rate, r_squared=r2, predicted_rate=predicted_rate,
                    margin=margin)


# -- decay experiment -------------------------------------------------------------


@dataclasses.dataclass
class DecayExperimentResult:
    fits: dict[str, DecayFit]
    smallness: SmallnessReport
    run_result: RunResult
    degenerate: bool
    outside_theorem: bool
    window: tuple[float, float]
    fit_errors: dict[str, str] = dataclasses.field(default_factory=dict)


def predicted_rates(L: float) -> dict[str, float]:
    """Predicted decay rates: the weighted energy decays at least at
    pi^2/(L^2(1+L)); u_t, H1 and H2 composites at least at chi/2 with the
    theorem's chi = pi^2/(2L^2(1+L))."""
    chi_e2 = math.pi ** 2 / (L ** 2 * (1.0 + L))
    chi_half = math.pi ** 2 / (4.0 * L ** 2 * (1.0 + L))
    return {
        "weighted": chi_e2,
        "ut_weighted": chi_half,
        "h1": chi_half,
        "h2_composite": chi_half,
    }


def decay_experiment(ops: OperatorSet, profile: ProfileSpec, cfg: IntegratorConfig,
                     window: tuple[float, float] | None = None,
                     allow_outside_theorem: bool = False) -> DecayExperimentResult:
    """Run the solver and fit every monitored decay against the predicted rates.

    Refuses to certify configurations failing the smallness check unless
    allow_outside_theorem is set (the result is then labeled).  A zero profile
    is reported as degenerate with no fits; blowup/nan runs carry no fits and
    keep their status in run_result.
    """
    grid = ops.grid
    u0 = make_profile(grid, profile)
    norm_u0 = math.sqrt(grid.integrate(u0.values ** 2))
    j0 = j0_functional(ops, u0)
    report = smallness_check(grid.L, norm_u0, j0)
    outside = not report.passed()
    if outside and not allow_outside_theorem:
        raise OutsideTheoremError(
            "initial data fails the smallness conditions "
            f"(margins {report.margins}); pass allow_outside_theorem to run anyway")

    result = run(ops, u0, cfg)
    if window is None:
        window = (0.2 * cfg.T, 0.9 * cfg.T)

    degenerate = norm_u0 == 0.0
    fits: dict[str, DecayFit] = {}
    fit_errors: dict[str, str] = {}
    if not degenerate and result.completed:
        for name, rate in predicted_rates(grid.L).items():
            try:
                fits[name] = fit_decay(result.series, name, window, predicted_rate=rate)
            except ValueError as exc:
                fit_errors[name] = str(exc)
    return DecayExperimentResult(fits=fits, smallness=report, run_result=result,
                                 degenerate=degenerate, outside_theorem=outside,
                                 window=window, fit_errors=fit_errors)


# -- vanishing regularization -------------------------------------------------------


@dataclasses.dataclass
class ConvergenceReport:
    parameter: str
    values: list[float]
    errors: list[float]
    fitted_order: float | None
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "values": list(self.values),
            "errors": list(self.errors),
            "fitted_order": self.fitted_order,
            "degenerate": self.degenerate,
        }


def epsilon_convergence(ops: OperatorSet, profile: ProfileSpec, cfg: IntegratorConfig,
                        epsilons: list[float]) -> ConvergenceReport:
    """L2 distance at T between eps-regularized runs and the eps=0 reference.

    Needs at least three eps values; the fitted order is the log-log slope of
    error against eps.  All runs share the grid, profile, and step size.
    """
    if len(epsilons) < 3:
        raise ValueError("need at least 3 epsilon values")
    if any(e <= 0 for e in epsilons):
        raise ValueError("epsilon values must be positive")
    grid = ops.grid
    u0 = make_profile(grid, profile)

    def one(eps: float) -> RunResult:
        res = run(ops, u0, cfg.replace(epsilon=eps))
        if not res.completed:
            raise ExperimentError(f"epsilon={eps:g} run ended with status {res.status}")
        return res

    jobs = [0.0] + list(epsilons)
    with concurrent.futures.ThreadPoolExecutor(_worker_count(len(jobs))) as ex:
        results = list(ex.map(one, jobs))
    ref = results[0].final_state.values
    errors = [math.sqrt(grid.integrate((r.final_state.values - ref) ** 2))
              for r in results[1:]]

    if all(e < 1e-30 for e in errors):
        return ConvergenceReport("epsilon", list(epsilons), errors, None, degenerate=True)
    order = float(np.polyfit(np.log(epsilons), np.log(errors), 1)[0])
    return ConvergenceReport("epsilon", list(epsilons), errors, order)


# -- uniqueness / continuous dependence ----------------------------------------------


@dataclasses.dataclass
class PerturbationReport:
    """Twin-run gap history against its calibrated Gronwall envelope."""

    delta: float
    initial_gap: float
    times: np.ndarray
    gap: np.ndarray
    envelope: np.ndarray | None
    quartic_integral: np.ndarray
    calibration_constant: float | None
    gronwall_constant: float | None
    bound_satisfied: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "initial_gap": self.initial_gap,
            "times": self.times.tolist(),
            "gap": self.gap.tolist(),
            "envelope": None if self.envelope is None else self.envelope.tolist(),
            "quartic_integral": self.quartic_integral.tolist(),
            "calibration_constant": self.calibration_constant,
            "gronwall_constant": self.gronwall_constant,
            "bound_satisfied": self.bound_satisfied,
            "tol": self.tol,
        }


def perturbation_experiment(ops: OperatorSet, profile: ProfileSpec,
                            perturbation: ProfileSpec, cfg: IntegratorConfig,
                            delta: float, tol: float = 0.1) -> PerturbationReport:
    """Advance u1 from u0 and u2 from u0 + delta*perturbation in lockstep.

    Records the weighted gap ((1+x), w^2) every step together with the
    quartic-norm integrand ||u2_x||^4 + ||u1||^4 + ||u2||^4.  The Gronwall
    constant is calibrated as the smallest C with gap(dt) <= exp(C Q(dt)) gap(0)
    and held fixed; the envelope shape exp(C Q(t)) gap(0) is then checked with
    the given tolerance.  delta = 0 is the discrete-uniqueness control: the
    twin states remain bitwise identical.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    grid = ops.grid
    u0 = make_profile(grid, profile)
    p = make_profile(grid, dataclasses.replace(perturbation, amplitude=perturbation.amplitude))
    u1 = np.array(u0.values)
    u2 = u0.values + delta * p.values

    w1px = (1.0 + grid.x).reshape((grid.Nx,) + (1,) * (grid.dim - 1))

    def gap_of(a, b):
        w = a - b
        return grid.integrate(w1px * w * w)

    def grad_x_sq(v):
        d = np.diff(v, axis=0, prepend=0.0, append=0.0) / grid.dx
        return float(d.ravel() @ d.ravel()) * grid.dx * grid.transverse_weight

    def quartic(a, b):
        n1 = grid.integrate(a * a)
        n2 = grid.integrate(b * b)
        return grad_x_sq(b) ** 2 + n1 ** 2 + n2 ** 2

    stepper = Stepper(ops, cfg)
    n_steps = max(1, int(round(cfg.T / cfg.dt)))
    times = [0.0]
    gaps = [gap_of(u1, u2)]
    qrate = [quartic(u1, u2)]
    np1 = np2 = None
    for istep in range(n_steps):
        u1, np1, _ = stepper.advance(u1, np1)
        u2, np2, _ = stepper.advance(u2, np2)
        if not (np.isfinite(u1).all() and np.isfinite(u2).all()):
            raise ExperimentError(f"twin run lost finiteness at step {istep + 1}")
        times.append((istep + 1) * cfg.dt)
        gaps.append(gap_of(u1, u2))
        qrate.append(quartic(u1, u2))

    times = np.array(times)
    gaps = np.array(gaps)
    qrate = np.array(qrate)
    # cumulative trapezoid of the quartic integrand
    Q = np.concatenate(([0.0], np.cumsum(0.5 * (qrate[1:] + qrate[:-1]) * np.diff(times))))

    gap0 = gaps[0]
    if gap0 <= 0.0 or delta == 0.0:
        bound = bool(np.all(gaps <= 1e-12 * max(grid.integrate(u0.values ** 2), 1e-300)))
        return PerturbationReport(delta=delta, initial_gap=gap0, times=times, gap=gaps,
                                  envelope=None, quartic_integral=Q,
                                  calibration_constant=None, gronwall_constant=None,
                                  bound_satisfied=bound, tol=tol)

    C = math.log(gaps[1] / gap0) / Q[1] if Q[1] > 0 else 0.0
    envelope = gap0 * np.exp(C * Q)
    bound = bool(np.all(gaps <= envelope * (1.0 + tol)))
    gronwall = float(np.exp(C * Q).max())
    return PerturbationReport(delta=delta, initial_gap=gap0, times=times, gap=gaps,
                              envelope=envelope, quartic_integral=Q,
                              calibration_constant=C, gronwall_constant=gronwall,
                              bound_satisfied=bound, tol=tol)


# -- lemma suite ------------------------------------------------------------------


@dataclasses.dataclass
class LemmaSuiteReport:
    steklov: list[dict]
    interpolation: list[dict]
    comparison_ode: list[dict]

    @property
    def n_pass(self) -> int:
        return sum(e["passed"] for e in self.steklov + self.interpolation + self.comparison_ode)

    @property
    def n_total(self) -> int:
        return len(self.steklov) + len(self.interpolation) + len(self.comparison_ode)

    def all_passed(self) -> bool:
        return self.n_pass == self.n_total

    def to_dict(self) -> dict:
        return {
            "steklov": self.steklov,
            "interpolation": self.interpolation,
            "comparison_ode": self.comparison_ode,
            "n_pass": self.n_pass,
            "n_total": self.n_total,
        }


def lemma_suite(L: float = math.pi / 2, nx_list=(64, 128, 256), n_random: int = 100,
                grid3_n: int = 32, q_list=(3.0, 4.0, 6.0), ode_T: float = 20.0,
                seed: int = 20250810) -> LemmaSuiteReport:
    """Execute every lemma checker over its standard parameter family."""
    rng = np.random.default_rng(seed)
    pi2 = math.pi ** 2

    steklov_entries = []
    for nx in nx_list:
        dx = L / (nx + 1)
        x = dx * np.arange(1, nx + 1)
        # equality case sin(pi x / L)
        ratio = steklov_ratio(np.sin(math.pi * x / L), L)
        target = pi2 / L ** 2
        ok = (1.0 - 10.0 * dx ** 2) * target <= ratio <= (1.0 + 10.0 * dx ** 2) * target
        steklov_entries.append({"case": f"sin(pi x/L), Nx={nx}", "ratio": ratio,
                                "target": target, "passed": bool(ok),
                                "note": "first eigenfunction (equality case)"})
        # second eigenfunction and the parabola, analytic targets
        ratio2 = steklov_ratio(np.sin(2 * math.pi * x / L), L)
        ok2 = abs(ratio2 / (4 * target) - 1.0) <= 40.0 * dx ** 2 / L ** 2 + 1e-12
        steklov_entries.append({"case": f"sin(2 pi x/L), Nx={nx}", "ratio": ratio2,
                                "target": 4 * target, "passed": bool(ok2),
                                "note": "second eigenvalue"})
        ratiop = steklov_ratio(x * (L - x), L)
        okp = ratiop >= target and abs(ratiop / (10.0 / L ** 2) - 1.0) <= 1e-2
        steklov_entries.append({"case": f"x(L-x), Nx={nx}", "ratio": ratiop,
                                "target": 10.0 / L ** 2, "passed": bool(okp),
                                "note": "parabola, exact ratio 10/L^2"})
    nx = nx_list[-1]
    dx = L / (nx + 1)
    floor = pi2 / L ** 2 * (1.0 - 10.0 * dx ** 2 / L ** 2)
    worst = np.inf
    for _ in range(n_random):
        v = rng.standard_normal(nx)
        worst = min(worst, steklov_ratio(v, L))
    steklov_entries.append({"case": f"{n_random} random profiles, Nx={nx}",
                            "ratio": float(worst), "target": floor,
                            "passed": bool(worst >= floor),
                            "note": "random admissible profiles vs. discrete floor"})

    interp_entries = []
    g3 = build_grid(L, 3, grid3_n, grid3_n, grid3_n, half_width=6.0)
    for family in ("separable-sine-gauss", "bump"):
        u = make_profile(g3, ProfileSpec(family, amplitude=1.0, transverse_scale=1.0))
        for q in q_list:
            lhs, rhs_val = interpolation_check(u, q)
            ok = lhs <= rhs_val * (1.0 + 1e-2)
            interp_entries.append({"case": f"{family}, q={q:g}", "lhs": lhs,
                                   "rhs": rhs_val, "passed": bool(ok)})

    ode_entries = []
    for alpha in (0.5, 1.0, 2.0):
        for k in (0.0, 0.5, 1.0):
            for n in (1, 2, 3):
                f0 = 1.0 if k == 0.0 else min(1.0, 0.8 * (alpha / (2.0 * k)) ** (1.0 / n))
                ok = ode_comparison_check(alpha, k, n, f0, T=ode_T)
                ode_entries.append({"case": f"alpha={alpha:g}, k={k:g}, n={n}, f0={f0:.4g}",
                                    "passed": bool(ok)})
    # closed-form cross-check of the logistic case
    t, f = integrate_comparison_ode(1.0, 1.0, 1, 0.5, ode_T)
    exact = 1.0 * 0.5 * np.exp(-t) / (1.0 - 0.5 + 0.5 * np.exp(-t))
    err = float(np.abs(f - exact).max())
    ode_entries.append({"case": "logistic closed form (1,1,1,0.5)",
                        "passed": bool(err <= 1e-6), "max_error": err})

    return LemmaSuiteReport(steklov=steklov_entries, interpolation=interp_entries,
                            comparison_ode=ode_entries)
