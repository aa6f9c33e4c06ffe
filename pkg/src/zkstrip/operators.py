"""Discrete spatial operators of the strip-domain dispersive equation.

x-derivatives are banded finite differences on the interior nodes.  Wall
values u(0)=u(L)=0 enter the stencils as zeros; ghost values outside the
walls are eliminated with u_x(L)=0 (v_{N+2} = v_N) and the zero-curvature
extrapolation u_xx(0)=0 (v_{-1} = -v_1), which is also the extra wall
condition of the fourth-order regularization.  Transverse derivatives are
Fourier multipliers on the periodic box, wavenumbers k_n = pi*n/half_width.

With the uniform inner product dx*dy(*dz)*sum(u v):
  - the first-derivative matrix is exactly antisymmetric,
  - 2(u, D3 u) = sum over the transverse nodes of (u_1^2 + u_N^2)/dx^2
    (left-wall slope flux plus an O(dx^2)-consistent right-wall closure term),
  - (u, D4 u) = ||u_xx||^2 + 2 sum u_N^2 / dx^3 >= 0,
  - the skew-split nonlinearity (D1(u^2) + u D1 u)/3 is exactly energy-neutral,
so the semi-discrete energy law d/dt||u||^2 = -energy_production(u, eps)
closes to rounding error.  All applications are pure; OperatorSet is
immutable after construction.
"""

from __future__ import annotations

import numpy as np

from .grid import Field, Grid


class OperatorError(ValueError):
    """Operator applied to a field from a different grid, or bad parameters."""


def _row_aligned_diags(dense: np.ndarray, width: int) -> dict[int, np.ndarray]:
    """Extract {offset: row-aligned coefficients} from a small dense matrix.

    diags[off][i] multiplies u[i+off]; entries outside the matrix are zero.
    """
    n = dense.shape[0]
    diags = {}
    for off in range(-width, width + 1):
        c = np.zeros(n)
        if off >= 0:
            idx = np.arange(0, n - off)
        else:
            idx = np.arange(-off, n)
        c[idx] = dense[idx, idx + off]
        if np.any(c):
            diags[off] = c
    return diags


def dense_from_diags(diags: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Reassemble the dense matrix of a row-aligned banded operator."""
    A = np.zeros((n, n))
    for off, c in diags.items():
        if off >= 0:
            A[np.arange(n - off), np.arange(off, n)] = c[: n - off]
        else:
            A[np.arange(-off, n), np.arange(n + off)] = c[-off:]
    return A


def apply_banded(diags: dict[int, np.ndarray], u: np.ndarray) -> np.ndarray:
    """Apply a row-aligned banded operator along axis 0."""
    n = u.shape[0]
    out = np.zeros_like(u)
    for off, c in diags.items():
        cc = c.reshape((n,) + (1,) * (u.ndim - 1))
        if off >= 0:
            out[: n - off] += cc[: n - off] * u[off:]
        else:
            out[-off:] += cc[-off:] * u[: n + off]
    return out


def _first_derivative_dense(n: int, dx: float, order: int) -> np.ndarray:
    """Centered first derivative with implicit wall zeros.

    order=2 is exactly antisymmetric.  order=4 uses the five-point interior
    stencil on rows that stay inside the walls and second-order rows at the
    two wall-adjacent nodes (accuracy mode; not exactly antisymmetric).
    """
    D = np.zeros((n, n))
    for i in range(n):
        if i + 1 < n:
            D[i, i + 1] += 1.0 / (2 * dx)
        if i - 1 >= 0:
            D[i, i - 1] += -1.0 / (2 * dx)
    if order == 4:
        c1, c2 = 8.0 / (12 * dx), 1.0 / (12 * dx)
        for i in range(1, n - 1):
            # node k=i+1: stencil nodes k-2..k+2 stay within walls for these rows
            D[i, :] = 0.0
            for off, w in ((-2, c2), (-1, -c1), (1, c1), (2, -c2)):
                j = i + off
                if 0 <= j < n:
                    D[i, j] = w
    return D


def _third_derivative_dense(n: int, dx: float) -> np.ndarray:
    """(-v_{k-2} + 2v_{k-1} - 2v_{k+1} + v_{k+2})/(2 dx^3) with wall closures."""
    c = 1.0 / (2 * dx ** 3)
    D = np.zeros((n, n))
    for i in range(n):
        k = i + 1  # extended node index, walls at 0 and n+1
        for off, w in ((-2, -1.0), (-1, 2.0), (1, -2.0), (2, 1.0)):
            m = k + off
            if m in (0, n + 1):
                continue
            if m == -1:            # ghost v_{-1} = -v_1
                D[i, 0] += -w * c
            elif m == n + 2:       # ghost v_{N+2} = v_N
                D[i, n - 1] += w * c
            else:
                D[i, m - 1] += w * c
    return D


def _fourth_derivative_dense(n: int, dx: float) -> np.ndarray:
    """(v_{k-2} - 4v_{k-1} + 6v_k - 4v_{k+1} + v_{k+2})/dx^4 with wall closures."""
    c = 1.0 / dx ** 4
    D = np.zeros((n, n))
    for i in range(n):
        k = i + 1
        for off, w in ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)):
            m = k + off
            if m in (0, n + 1):
                continue
            if m == -1:
                D[i, 0] += -w * c
            elif m == n + 2:
                D[i, n - 1] += w * c
            else:
                D[i, m - 1] += w * c
    return D


def _second_derivative_diags(n: int, dx: float) -> dict[int, np.ndarray]:
    c = 1.0 / dx ** 2
    return {
        -1: np.concatenate(([0.0], np.full(n - 1, c))),
        0: np.full(n, -2.0 * c),
        1: np.concatenate((np.full(n - 1, c), [0.0])),
    }


class OperatorSet:
    """Banded x-derivatives, Fourier transverse multipliers, and energy forms.

    Immutable after construction; every application is a pure function of its
    inputs, so instances are safe to share across threads.
    """

    def __init__(self, grid: Grid, x_order: int = 2, dealias: bool = True):
        if x_order not in (2, 4):
            raise OperatorError("x_order must be 2 or 4")
        self.grid = grid
        self.x_order = x_order
        self.dealias = dealias
        n, dx = grid.Nx, grid.dx

        self.d1 = _row_aligned_diags(_first_derivative_dense(n, dx, x_order), 2 if x_order == 4 else 1)
        self.d2 = _second_derivative_diags(n, dx)
        self.d3 = _row_aligned_diags(_third_derivative_dense(n, dx), 2)
        self.d4 = _row_aligned_diags(_fourth_derivative_dense(n, dx), 2)

        # Transverse wavenumbers k_n = pi n / half_width.
        hw = grid.half_width
        if grid.dim == 2:
            ky = 2 * np.pi * np.fft.rfftfreq(grid.Ny, d=grid.dy)
            self._ky = ky[None, :]
            self._kz = None
            self.kappa2_flat = ky ** 2
            self.kappa4_flat = ky ** 4
            ny_idx = np.arange(grid.Ny // 2 + 1)
            self._dealias_mask = (ny_idx <= grid.Ny // 3)[None, :]
        else:
            ky = 2 * np.pi * np.fft.fftfreq(grid.Ny, d=grid.dy)
            kz = 2 * np.pi * np.fft.rfftfreq(grid.Nz, d=grid.dz)
            self._ky = ky[None, :, None]
            self._kz = kz[None, None, :]
            self.kappa2_flat = (ky[:, None] ** 2 + kz[None, :] ** 2).ravel()
            self.kappa4_flat = (ky[:, None] ** 4 + kz[None, :] ** 4).ravel()
            ny_idx = np.minimum(np.arange(grid.Ny), grid.Ny - np.arange(grid.Ny))
            nz_idx = np.arange(grid.Nz // 2 + 1)
            self._dealias_mask = ((ny_idx <= grid.Ny // 3)[:, None]
                                  & (nz_idx <= grid.Nz // 3)[None, :])[None, :, :]
        assert abs(float(np.abs(self._ky).max()) - np.pi * (grid.Ny // 2) / hw) < 1e-9 / hw
        self.n_modes = self.kappa2_flat.size

    # -- transverse transforms -------------------------------------------------

    def tfft(self, v: np.ndarray) -> np.ndarray:
        if self.grid.dim == 2:
            return np.fft.rfft(v, axis=1)
        return np.fft.rfftn(v, axes=(1, 2))

    def itfft(self, vh: np.ndarray) -> np.ndarray:
        if self.grid.dim == 2:
            return np.fft.irfft(vh, n=self.grid.Ny, axis=1)
        return np.fft.irfftn(vh, s=(self.grid.Ny, self.grid.Nz), axes=(1, 2))

    def _multiply(self, v: np.ndarray, mult) -> np.ndarray:
        return self.itfft(self.tfft(v) * mult)

    # -- array-level operators -------------------------------------------------

    def dx_values(self, v: np.ndarray) -> np.ndarray:
        return apply_banded(self.d1, v)

    def d2x_values(self, v: np.ndarray) -> np.ndarray:
        return apply_banded(self.d2, v)

    def d3x_values(self, v: np.ndarray) -> np.ndarray:
        return apply_banded(self.d3, v)

    def d4x_values(self, v: np.ndarray) -> np.ndarray:
        return apply_banded(self.d4, v)

    def dy_values(self, v: np.ndarray) -> np.ndarray:
        return self.itfft(self.tfft(v) * (1j * self._ky))

    def dz_values(self, v: np.ndarray) -> np.ndarray:
        if self.grid.dim == 2:
            raise OperatorError("no z axis on a 2D grid")
        return self.itfft(self.tfft(v) * (1j * self._kz))

    def dyy_values(self, v: np.ndarray) -> np.ndarray:
        return self._multiply(v, -self._ky ** 2)

    def dzz_values(self, v: np.ndarray) -> np.ndarray:
        if self.grid.dim == 2:
            raise OperatorError("no z axis on a 2D grid")
        return self._multiply(v, -self._kz ** 2)

    def transverse_laplacian_values(self, v: np.ndarray) -> np.ndarray:
        mult = -self._ky ** 2 if self.grid.dim == 2 else -(self._ky ** 2 + self._kz ** 2)
        return self._multiply(v, mult)

    def dispersive_values(self, v: np.ndarray) -> np.ndarray:
        return self.d3x_values(v) + self.dx_values(self.transverse_laplacian_values(v))

    def nonlinear_values(self, v: np.ndarray) -> np.ndarray:
        w = (self.dx_values(v * v) + v * self.dx_values(v)) / 3.0
        if self.dealias:
            w = self.itfft(self.tfft(w) * self._dealias_mask)
        return w

    def hyper_values(self, v: np.ndarray, epsilon: float) -> np.ndarray:
        if epsilon < 0:
            raise OperatorError("epsilon must be nonnegative")
        if epsilon == 0.0:
            return np.zeros_like(v)
        mult = self._ky ** 4 if self.grid.dim == 2 else self._ky ** 4 + self._kz ** 4
        return epsilon * (self.d4x_values(v) + self._multiply(v, mult))

    def linear_values(self, v: np.ndarray, epsilon: float) -> np.ndarray:
        """Full linear operator: transport + dispersive (+ hyperviscosity)."""
        out = self.dx_values(v) + self.dispersive_values(v)
        if epsilon > 0.0:
            out += self.hyper_values(v, epsilon)
        return out

    def rhs_values(self, v: np.ndarray, epsilon: float, nonlinear: bool = True) -> np.ndarray:
        out = -self.linear_values(v, epsilon)
        if nonlinear:
            out -= self.nonlinear_values(v)
        return out

    # -- energy forms ------------------------------------------------------------

    def uniform_energy(self, v: np.ndarray) -> float:
        """||v||^2 with uniform weights dx*dy(*dz); the scheme's conserved form."""
        return float(v.ravel() @ v.ravel()) * self.grid.dx * self.grid.transverse_weight

    def trace_flux(self, v: np.ndarray) -> tuple[float, float]:
        """(left, right) wall flux of the third-derivative energy form.

        left = integral over S of (v_1/dx)^2, the discrete u_x(0,.)^2 trace;
        right = integral over S of (v_N/dx)^2, the O(dx^2)-consistent closure
        flux at x = L (tends to 0 since u_x(L) = 0).
        """
        tw = self.grid.transverse_weight
        dx = self.grid.dx
        left = float(np.sum(v[0] ** 2)) / dx ** 2 * tw
        right = float(np.sum(v[-1] ** 2)) / dx ** 2 * tw
        return left, right

    def bracket_scheme(self, v: np.ndarray) -> float:
        """The exact form with 2*eps*(this) dissipated by the hyperviscous term.

        ||u_xx||^2 + ||u_yy||^2 (+ ||u_zz||^2) in uniform weights, plus the
        right-wall closure extra 2 * integral_S v_N^2 / dx^3.
        """
        g = self.grid
        dx, tw = g.dx, g.transverse_weight
        uxx = self.d2x_values(v)
        total = float(uxx.ravel() @ uxx.ravel()) * dx * tw
        total += 2.0 * float(np.sum(v[-1] ** 2)) / dx ** 3 * tw
        uyy = self.dyy_values(v)
        total += float(uyy.ravel() @ uyy.ravel()) * dx * tw
        if g.dim == 3:
            uzz = self.dzz_values(v)
            total += float(uzz.ravel() @ uzz.ravel()) * dx * tw
        return total

    def energy_production(self, v: np.ndarray, epsilon: float) -> float:
        """Instantaneous dissipation: d/dt ||u||^2 = -energy_production(u, eps)
        for the semi-discrete system (nonlinear term is exactly neutral)."""
        left, right = self.trace_flux(v)
        total = left + right
        if epsilon > 0.0:
            total += 2.0 * epsilon * self.bracket_scheme(v)
        return total


def build_operators(grid: Grid, x_order: int = 2, dealias: bool = True) -> OperatorSet:
    return OperatorSet(grid, x_order=x_order, dealias=dealias)


def _check_grid(ops: OperatorSet, u: Field) -> None:
    if u.grid is not ops.grid and u.grid != ops.grid:
        raise OperatorError("field grid does not match operator grid")


def d_x(ops: OperatorSet, u: Field) -> Field:
    """Transport derivative u_x with the wall closures."""
    _check_grid(ops, u)
    return Field(ops.grid, ops.dx_values(u.values), copy=False, check=False)


def dispersive(ops: OperatorSet, u: Field) -> Field:
    """u_xxx + u_xyy (+ u_xzz): Fourier multiplier then banded d/dx."""
    _check_grid(ops, u)
    return Field(ops.grid, ops.dispersive_values(u.values), copy=False, check=False)


def nonlinear(ops: OperatorSet, u: Field) -> Field:
    """Skew-split u*u_x = (d/dx(u^2) + u du/dx)/3, optionally 2/3-rule dealiased."""
    _check_grid(ops, u)
    return Field(ops.grid, ops.nonlinear_values(u.values), copy=False, check=False)


def hyperviscosity(ops: OperatorSet, u: Field, epsilon: float) -> Field:
    """eps*(u_xxxx + u_yyyy (+ u_zzzz)) with the u_xx(0)=0 closure; zero for eps=0."""
    _check_grid(ops, u)
    return Field(ops.grid, ops.hyper_values(u.values, epsilon), copy=False, check=False)


def rhs(ops: OperatorSet, u: Field, epsilon: float, include_nonlinear: bool = True) -> Field:
    """u_t = -u_x - u u_x - (u_xxx + u_xyy [+ u_xzz]) - eps*fourth-order part."""
    _check_grid(ops, u)
    return Field(ops.grid, ops.rhs_values(u.values, epsilon, nonlinear=include_nonlinear),
                 copy=False, check=False)
