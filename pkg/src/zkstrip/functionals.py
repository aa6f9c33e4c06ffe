"""Energy functionals, theorem constants, and inequality checkers.

Everything here is a pure evaluation: norms and weighted inner products of a
state (FunctionalSnapshot), the smallness-condition arithmetic of the decay
theorem (SmallnessReport), and standalone checkers for the Poincare/Steklov
inequality, the anisotropic interpolation inequality, and the comparison-ODE
lemma that drives the u_t decay estimate.

Derivative norms of ||grad u|| type use the forward-difference Dirichlet form
in x (interval midpoints with the wall zeros appended): its Rayleigh quotient
is bounded below by (4/dx^2) sin^2(pi dx / 2L), so the discrete Steklov bound
holds for every admissible profile, not just smooth ones.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .grid import Field, quadrature
from .operators import OperatorSet

CSV_COLUMNS = ("t", "l2", "weighted", "h1", "h2_partial", "bracket2",
               "trace0", "ut_l2", "ut_weighted", "boundary_leak")


class HypothesisNotSatisfied(ValueError):
    """Comparison-ODE hypothesis alpha - k f(0)^n > 0 violated."""


@dataclasses.dataclass
class FunctionalSnapshot:
    """Every monitored functional of one state at one time."""

    t: float
    l2: float            # ||u||^2
    weighted: float      # ((1+x), u^2)
    h1: float            # ||u||^2 + ||grad u||^2
    h2_partial: float    # sum of squared second-derivative norms
    bracket2: float      # ||u_xx||^2 + ||u_yy||^2 (+ ||u_zz||^2)
    trace0: float        # integral over S of u_x(0,.)^2
    ut_l2: float         # ||u_t||^2
    ut_weighted: float   # ((1+x), u_t^2)
    boundary_leak: float  # max |u| on the transverse box edge

    def row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in CSV_COLUMNS)


class FunctionalSeries:
    """Time-ordered snapshots along a run, with column access for fits."""

    def __init__(self):
        self.snapshots: list[FunctionalSnapshot] = []

    def append(self, snap: FunctionalSnapshot) -> None:
        if self.snapshots and snap.t <= self.snapshots[-1].t:
            raise ValueError("snapshot times must be strictly increasing")
        self.snapshots.append(snap)

    def __len__(self):
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def column(self, name: str) -> np.ndarray:
        """A recorded column, or the derived 'h2_composite' = h1 + h2_partial + ut_l2."""
        if name == "h2_composite":
            return self.column("h1") + self.column("h2_partial") + self.column("ut_l2")
        if name not in CSV_COLUMNS:
            raise KeyError(f"unknown functional {name!r}")
        return np.array([getattr(s, name) for s in self.snapshots])


def _weight_1px(grid) -> np.ndarray:
    w = 1.0 + grid.x
    return w.reshape((grid.Nx,) + (1,) * (grid.dim - 1))


def grad_sq(ops: OperatorSet, v: np.ndarray) -> float:
    """||grad u||^2: Dirichlet form in x, spectral first derivatives in y, z."""
    g = ops.grid
    dxv = np.diff(v, axis=0, prepend=0.0, append=0.0) / g.dx
    total = float(dxv.ravel() @ dxv.ravel()) * g.dx * g.transverse_weight
    uy = ops.dy_values(v)
    total += float(uy.ravel() @ uy.ravel()) * g.dx * g.transverse_weight
    if g.dim == 3:
        uz = ops.dz_values(v)
        total += float(uz.ravel() @ uz.ravel()) * g.dx * g.transverse_weight
    return total


def snapshot(ops: OperatorSet, u: Field, epsilon: float, t: float) -> FunctionalSnapshot:
    g = ops.grid
    v = u.values
    w1px = _weight_1px(g)

    l2 = g.integrate(v * v)
    weighted = g.integrate(w1px * v * v)
    h1 = l2 + grad_sq(ops, v)

    uxx = ops.d2x_values(v)
    uyy = ops.dyy_values(v)
    bracket2 = g.integrate(uxx * uxx) + g.integrate(uyy * uyy)
    uxy = ops.dx_values(ops.dy_values(v))
    h2_partial = bracket2 + g.integrate(uxy * uxy)
    if g.dim == 3:
        uzz = ops.dzz_values(v)
        uxz = ops.dx_values(ops.dz_values(v))
        uyz = ops.dy_values(ops.dz_values(v))
        bracket2 += g.integrate(uzz * uzz)
        h2_partial += (g.integrate(uzz * uzz) + g.integrate(uxz * uxz)
                       + g.integrate(uyz * uyz))

    trace0 = float(np.sum(v[0] ** 2)) / g.dx ** 2 * g.transverse_weight

    ut = ops.rhs_values(v, epsilon)
    ut_l2 = g.integrate(ut * ut)
    ut_weighted = g.integrate(w1px * ut * ut)

    leak = float(np.abs(v[:, 0]).max()) if v.size else 0.0
    if g.dim == 3:
        leak = max(leak, float(np.abs(v[:, :, 0]).max()))

    return FunctionalSnapshot(t=t, l2=l2, weighted=weighted, h1=h1,
                              h2_partial=h2_partial, bracket2=bracket2,
                              trace0=trace0, ut_l2=ut_l2, ut_weighted=ut_weighted,
                              boundary_leak=leak)


def j0_functional(ops: OperatorSet, u0: Field) -> float:
    """Weighted square of the initial residual: ((1+x), u_t^2) at t = 0, eps = 0.

    u_t is evaluated through the same right-hand side as the solver, so this
    equals the ut_weighted entry of the t=0 snapshot identically.
    """
    r = ops.rhs_values(u0.values, 0.0)
    return ops.grid.integrate(_weight_1px(ops.grid) * r * r)


# -- smallness conditions --------------------------------------------------------


@dataclasses.dataclass
class SmallnessReport:
    """Evaluated decay-theorem constants, thresholds, margins, and verdicts.

    C1 = 2 + (2^13/3)||u0||^4
    K1 = 2^16 3^3 (1+L)((2^3/25) C1 + 1)          (constants="theorem")
    K1 = 2^16 3^3 (1+L)^4 ((2^3/25) C1^2 + 1)     (constants="estimate4")
    K2 = 2^19 3^3 (1+L)^6
    chi = pi^2 / (2 L^2 (1+L))
    pass iff L <= pi/2, ||u0||^4 <= pi^2/(8 K1 L^2), J0^2 <= pi^2/(200 K2 L^2).
    """

    L: float
    norm_u0: float
    J0: float
    C1: float
    K1: float
    K2: float
    chi: float
    threshold_u0: float
    threshold_J0: float
    margins: dict
    verdict: dict
    constants: str = "theorem"

    def passed(self) -> bool:
        return self.verdict["overall"] == "pass"

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "norm_u0": self.norm_u0,
            "J0": self.J0,
            "C1": self.C1,
            "K1": self.K1,
            "K2": self.K2,
            "chi": self.chi,
            "threshold_u0": self.threshold_u0,
            "threshold_J0": self.threshold_J0,
            "margins": dict(self.margins),
            "verdict": dict(self.verdict),
            "constants": self.constants,
        }


def smallness_check(L: float, norm_u0: float, J0: float,
                    constants: str = "theorem") -> SmallnessReport:
    """Pure arithmetic of the decay theorem's smallness conditions."""
    if not L > 0:
        raise ValueError("L must be positive")
    if norm_u0 < 0 or J0 < 0:
        raise ValueError("norm_u0 and J0 must be nonnegative")
    if constants not in ("theorem", "estimate4"):
        raise ValueError("constants must be 'theorem' or 'estimate4'")

    u4 = norm_u0 ** 4
    C1 = 2.0 + (2.0 ** 13 / 3.0) * u4
    if constants == "theorem":
        K1 = 2.0 ** 16 * 3 ** 3 * (1.0 + L) * ((2.0 ** 3 / 25.0) * C1 + 1.0)
    else:
        K1 = 2.0 ** 16 * 3 ** 3 * (1.0 + L) ** 4 * ((2.0 ** 3 / 25.0) * C1 ** 2 + 1.0)
    K2 = 2.0 ** 19 * 3 ** 3 * (1.0 + L) ** 6
    chi = math.pi ** 2 / (2.0 * L ** 2 * (1.0 + L))
    threshold_u0 = math.pi ** 2 / (8.0 * K1 * L ** 2)
    threshold_J0 = math.pi ** 2 / (200.0 * K2 * L ** 2)

    geom_ok = L <= math.pi / 2
    u0_ok = u4 <= threshold_u0
    j0_ok = J0 ** 2 <= threshold_J0
    pf = lambda ok: "pass" if ok else "fail"
    verdict = {
        "geometry": pf(geom_ok),
        "u0": pf(u0_ok),
        "J0": pf(j0_ok),
        "overall": pf(geom_ok and u0_ok and j0_ok),
    }
    margins = {"u0": u4 / threshold_u0, "J0": J0 ** 2 / threshold_J0}
    return SmallnessReport(L=L, norm_u0=norm_u0, J0=J0, C1=C1, K1=K1, K2=K2,
                           chi=chi, threshold_u0=threshold_u0,
                           threshold_J0=threshold_J0, margins=margins,
                           verdict=verdict, constants=constants)


# -- lemma checkers ---------------------------------------------------------------


def steklov_ratio(v: np.ndarray, L: float) -> float:
    """||v_x||^2 / ||v||^2 for a profile on (0, L) vanishing at both ends.

    v holds the Nx interior values; the end zeros are implicit.  Uses the
    forward-difference Dirichlet form, whose minimum Rayleigh quotient is
    (4/dx^2) sin^2(pi dx / 2L) >= (pi^2/L^2)(1 - 10 dx^2/L^2).
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("steklov_ratio expects a one-dimensional profile")
    if not np.any(v):
        raise ValueError("profile is identically zero")
    dx = L / (v.size + 1)
    dv = np.diff(v, prepend=0.0, append=0.0)
    num = float(dv @ dv) / dx ** 2 * dx
    den = float(v @ v) * dx
    return num / den


def interpolation_check(u: Field, q: float) -> tuple[float, float]:
    """Both sides of ||u||_{L^q} <= 4^theta ||grad u||^theta ||u||^(1-theta).

    theta = 3(1/2 - 1/q); three-dimensional fields with u vanishing on the
    strip walls only.  q ranges over [2, 6] (q = 2 is the degenerate equality
    case theta = 0).
    """
    if u.grid.dim != 3:
        raise ValueError("the interpolation exponent theta = 3(1/2 - 1/q) is three-dimensional")
    if not (2.0 <= q <= 6.0):
        raise ValueError("q must lie in [2, 6]")
    theta = 3.0 * (0.5 - 1.0 / q)
    from .operators import OperatorSet  # local to avoid building ops for pure-grid callers
    ops = OperatorSet(u.grid, dealias=False)
    l2 = math.sqrt(u.grid.integrate(u.values ** 2))
    lq = u.grid.integrate(np.abs(u.values) ** q) ** (1.0 / q)
    gr = math.sqrt(grad_sq(ops, u.values))
    rhs_val = 4.0 ** theta * gr ** theta * l2 ** (1.0 - theta)
    return lq, rhs_val


def integrate_comparison_ode(alpha: float, k: float, n: int, f0: float,
                             T: float, steps: int = 20000):
    """RK4 integration of the boundary case f' = -(alpha - k f^n) f on [0, T]."""
    dt = T / steps
    t = np.linspace(0.0, T, steps + 1)
    f = np.empty(steps + 1)
    f[0] = f0

    def rate(val):
        return -(alpha - k * val ** n) * val

    for i in range(steps):
        y = f[i]
        k1 = rate(y)
        k2 = rate(y + 0.5 * dt * k1)
        k3 = rate(y + 0.5 * dt * k2)
        k4 = rate(y + dt * k3)
        f[i + 1] = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return t, f


def ode_comparison_check(alpha: float, k: float, n: int, f0: float,
                         T: float = 20.0) -> bool:
    """True iff the integrated boundary case stays below f(0) and nonincreasing.

    Raises HypothesisNotSatisfied when alpha - k f0^n <= 0 (distinct from a
    False result, which would mean the comparison claim itself failed).
    """
    if alpha <= 0 or k < 0 or f0 <= 0 or int(n) < 1:
        raise ValueError("need alpha > 0, k >= 0, f0 > 0, n >= 1")
    if alpha - k * f0 ** n <= 0:
        raise HypothesisNotSatisfied(
            f"alpha - k*f0^n = {alpha - k * f0 ** n:.3g} is not positive")
    _, f = integrate_comparison_ode(alpha, k, int(n), f0, T)
    below = bool(np.all(f[1:] < f0))
    monotone = bool(np.all(np.diff(f) <= 1e-12 * f0))
    return below and monotone
