"""Strip-domain grids, grid functions, initial profiles, and quadrature.

The domain is (0, L) in x crossed with a periodic box (-half_width, half_width)
in each transverse direction.  Grid functions store interior x nodes only,
x_i = i*dx for i = 1..Nx with dx = L/(Nx+1); the wall values u(0,.) = u(L,.) = 0
are held implicitly.  Transverse nodes are y_j = -half_width + j*dy with
dy = 2*half_width/Ny and y = +half_width identified with y = -half_width.

Quadrature is trapezoid in x with the two wall values linearly extrapolated
from the nearest interior nodes (exact for affine integrands, all weights
positive), and the exact periodic rectangle rule in y, z.
"""

from __future__ import annotations

import dataclasses

import numpy as np

PROFILE_FAMILIES = ("zero", "separable-sine-gauss", "bump", "custom-table")

# Largest relative magnitude a profile's transverse factor may have at the box
# edge before the periodic truncation stops being benign.
EDGE_DECAY_LIMIT = 1e-12


class GridError(ValueError):
    """Invalid grid parameters."""


class FieldError(ValueError):
    """Invalid grid-function data (wrong shape, non-finite values)."""


class ProfileError(ValueError):
    """Invalid initial-profile specification."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class Grid:
    """Uniform tensor grid for the strip (0,L) x (-half_width, half_width)^(dim-1).

    Attributes
    ----------
    L, dim, Nx, Ny, Nz, half_width : as passed to build_grid (Nz is None in 2D)
    dx, dy, dz : spacings, dx = L/(Nx+1), dy = dz = 2*half_width/N
    x : interior x nodes, shape (Nx,)
    y, z : transverse nodes starting at -half_width, shapes (Ny,), (Nz,)
    shape : value-array shape, (Nx, Ny) or (Nx, Ny, Nz)
    """

    def __init__(self, L, dim, Nx, Ny, Nz, half_width):
        self.L = float(L)
        self.dim = int(dim)
        self.Nx = int(Nx)
        self.Ny = int(Ny)
        self.Nz = None if dim == 2 else int(Nz)
        self.half_width = float(half_width)

        self.dx = self.L / (self.Nx + 1)
        self.dy = 2.0 * self.half_width / self.Ny
        self.dz = None if dim == 2 else 2.0 * self.half_width / self.Nz

        self.x = self.dx * np.arange(1, self.Nx + 1)
        self.y = -self.half_width + self.dy * np.arange(self.Ny)
        self.z = None if dim == 2 else -self.half_width + self.dz * np.arange(self.Nz)

        if dim == 2:
            self.shape = (self.Nx, self.Ny)
            self.transverse_weight = self.dy
        else:
            self.shape = (self.Nx, self.Ny, self.Nz)
            self.transverse_weight = self.dy * self.dz

        # Trapezoid weights in x with linearly extrapolated wall values
        # u(0) ~ 2u_1 - u_2, u(L) ~ 2u_N - u_{N-1}: exact for affine densities.
        wx = np.ones(self.Nx)
        wx[0] = 2.0
        wx[1] = 0.5
        wx[-1] = 2.0
        wx[-2] = 0.5
        self.x_weights = self.dx * wx

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of a raw value array over the full domain."""
        if values.shape != self.shape:
            raise FieldError(f"value shape {values.shape} does not match grid {self.shape}")
        inner = np.tensordot(self.x_weights, values, axes=(0, 0))
        return float(inner.sum() * self.transverse_weight)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.L, self.dim, self.Nx, self.Ny, self.Nz, self.half_width) == (
            other.L, other.dim, other.Nx, other.Ny, other.Nz, other.half_width)

    def __repr__(self):
        tail = f", Nz={self.Nz}" if self.dim == 3 else ""
        return (f"Grid(L={self.L:g}, dim={self.dim}, Nx={self.Nx}, Ny={self.Ny}{tail}, "
                f"half_width={self.half_width:g})")


def build_grid(L, dim, Nx, Ny, Nz=None, half_width=None) -> Grid:
    """Validate parameters and construct a Grid.

    Rejects L <= 0, dim not in {2, 3}, Nx < 8, transverse counts that are not
    powers of two >= 8, and half_width <= 0.
    """
    problems = []
    if not (L > 0):
        problems.append("L must be positive")
    if dim not in (2, 3):
        problems.append("dim must be 2 or 3")
    if not (isinstance(Nx, (int, np.integer)) and Nx >= 8):
        problems.append("Nx must be an integer >= 8")
    if not (isinstance(Ny, (int, np.integer)) and Ny >= 8 and _is_power_of_two(int(Ny))):
        problems.append("Ny must be a power of two >= 8")
    if dim == 3:
        if Nz is None or not (isinstance(Nz, (int, np.integer)) and Nz >= 8
                              and _is_power_of_two(int(Nz))):
            problems.append("Nz must be a power of two >= 8 when dim = 3")
    if half_width is None or not (half_width > 0):
        problems.append("half_width must be positive")
    if problems:
        raise GridError("; ".join(problems))
    return Grid(L, dim, Nx, Ny, Nz, half_width)


class Field:
    """A real grid function at one time instant; values are immutable.

    The array covers interior x nodes times transverse nodes; the wall values
    u(0,.) = u(L,.) = 0 are implicit, so those two boundary conditions hold by
    representation.  The remaining condition u_x(L,.) = 0 is checked with a
    one-sided five-point stencil (exact for x-polynomials up to degree 4, so
    the built-in profile families pass at machine precision).
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values, copy: bool = True, check: bool = True):
        arr = np.array(values, dtype=float, copy=copy)
        if arr.shape != grid.shape:
            raise FieldError(f"value shape {arr.shape} does not match grid {grid.shape}")
        if check and not np.isfinite(arr).all():
            raise FieldError("field contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def wall_slope_residual(self) -> float:
        """Max |u_x(L,.)| over the transverse nodes, via the one-sided stencil."""
        v = self.values
        dx = self.grid.dx
        # f'(L) with nodes L, L-dx, ..., L-4dx and f(L) = 0
        r = (-4.0 * v[-1] + 3.0 * v[-2] - (4.0 / 3.0) * v[-3] + 0.25 * v[-4]) / dx
        return float(np.abs(r).max())

    def bc_compliant(self, tol: float | None = None) -> bool:
        """Check the discrete boundary conditions.

        u(0) = u(L) = 0 hold by representation; u_x(L) = 0 is compared against
        tol * max|u| / L (tol defaults to 100*dx^2, the scheme's boundary
        tolerance for evolved states).
        """
        if tol is None:
            tol = 100.0 * self.grid.dx ** 2
        scale = float(np.abs(self.values).max())
        if scale == 0.0:
            return True
        return self.wall_slope_residual() * self.grid.L / scale <= tol

    def copy(self) -> "Field":
        return Field(self.grid, self.values, copy=True, check=False)


@dataclasses.dataclass(frozen=True, eq=False)
class ProfileSpec:
    """Initial-data profile: family name, amplitude, transverse scale.

    Families:
      zero                 identically zero
      separable-sine-gauss a * x(L-x)^2 * exp(-(y^2 [+ z^2])/sigma^2)
      bump                 a * x^2(L-x)^2 * B(y/sigma)[* B(z/sigma)] with the
                           compactly supported bump B(s) = exp(1 - 1/(1-s^2))
      custom-table         a * table (node values supplied directly or via CSV)

    Every family is built from an x factor vanishing at x=0, x=L with zero
    slope at x=L, so u0(0)=u0(L)=u0x(L)=0 hold exactly.
    """

    family: str
    amplitude: float = 1.0
    transverse_scale: float = 1.0
    table: np.ndarray | None = None


def _bump(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def _transverse_factor(spec: ProfileSpec, grid: Grid):
    """Separable transverse factor evaluated on the grid, normalized to max 1."""
    sigma = spec.transverse_scale
    if sigma <= 0:
        raise ProfileError("transverse_scale must be positive")
    if spec.family == "separable-sine-gauss":
        fy = np.exp(-(grid.y / sigma) ** 2)
        fz = None if grid.dim == 2 else np.exp(-(grid.z / sigma) ** 2)
    elif spec.family == "bump":
        fy = _bump(grid.y / sigma)
        fz = None if grid.dim == 2 else _bump(grid.z / sigma)
    else:
        raise ProfileError(f"unknown profile family {spec.family!r}")
    return fy, fz


def make_profile(grid: Grid, spec: ProfileSpec) -> Field:
    """Build the initial-data Field for a ProfileSpec.

    Scaling is linear in the amplitude: make_profile(a*spec) = a*make_profile(spec).
    Raises ProfileError for unknown families, mis-shaped custom tables, or
    transverse factors that have not decayed below EDGE_DECAY_LIMIT at the box
    edge (periodic truncation would not be benign).
    """
    if spec.family == "zero":
        return Field(grid, grid.zeros(), copy=False, check=False)

    if spec.family == "custom-table":
        if spec.table is None:
            raise ProfileError("custom-table profile needs node values")
        table = np.asarray(spec.table, dtype=float)
        if table.shape != grid.shape:
            raise ProfileError(
                f"custom table shape {table.shape} does not match grid {grid.shape}")
        values = spec.amplitude * table
        _check_edge_decay_values(grid, values)
        return Field(grid, values, copy=False)

    if spec.family not in PROFILE_FAMILIES:
        raise ProfileError(f"unknown profile family {spec.family!r}")

    x = grid.x
    L = grid.L
    if spec.family == "separable-sine-gauss":
        xfac = x * (L - x) ** 2
    else:  # bump
        xfac = x ** 2 * (L - x) ** 2
    fy, fz = _transverse_factor(spec, grid)
    for f, name in ((fy, "y"), (fz, "z")):
        if f is None:
            continue
        edge = f[0] / max(f.max(), np.finfo(float).tiny)
        if edge > EDGE_DECAY_LIMIT:
            raise ProfileError(
                f"transverse factor is {edge:.2e} of its peak at {name} = -half_width; "
                f"increase half_width (need <= {EDGE_DECAY_LIMIT:g} for a benign truncation)")
    if grid.dim == 2:
        shape = xfac[:, None] * fy[None, :]
    else:
        shape = xfac[:, None, None] * fy[None, :, None] * fz[None, None, :]
    return Field(grid, spec.amplitude * shape, copy=False)


def _check_edge_decay_values(grid: Grid, values: np.ndarray) -> None:
    scale = float(np.abs(values).max())
    if scale == 0.0:
        return
    edge = np.abs(values[:, 0]).max()
    if grid.dim == 3:
        edge = max(edge, np.abs(values[:, :, 0]).max())
    if edge / scale > EDGE_DECAY_LIMIT:
        raise ProfileError(
            f"table values are {edge / scale:.2e} of the peak at the transverse box edge; "
            "the periodic truncation is not benign at this half_width")


def quadrature(f: Field) -> float:
    """Integral of f over the domain (trapezoid in x, rectangle rule in y, z)."""
    return f.grid.integrate(f.values)


def read_profile_table(path, grid: Grid) -> np.ndarray:
    """Read custom-table node values from CSV with header x,y[,z],value.

    Rows must enumerate grid nodes in row-major order (x outermost).  Raises
    ProfileError on a wrong header, wrong row count, or mismatched coordinates.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        expected = "x,y,value" if grid.dim == 2 else "x,y,z,value"
        if header.replace(" ", "") != expected:
            raise ProfileError(f"table header {header!r} does not match {expected!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    npoints = int(np.prod(grid.shape))
    if data.shape != (npoints, grid.dim + 1):
        raise ProfileError(
            f"table has shape {data.shape}, expected ({npoints}, {grid.dim + 1}) "
            f"for grid {grid.shape}")
    if grid.dim == 2:
        coords = np.stack(np.meshgrid(grid.x, grid.y, indexing="ij"), axis=-1).reshape(-1, 2)
    else:
        coords = np.stack(
            np.meshgrid(grid.x, grid.y, grid.z, indexing="ij"), axis=-1).reshape(-1, 3)
    scale = max(grid.L, 2 * grid.half_width)
    if not np.allclose(data[:, :-1], coords, atol=1e-9 * scale, rtol=0):
        raise ProfileError("table coordinates do not match the grid nodes "
                           "(row-major order, x outermost)")
    return data[:, -1].reshape(grid.shape)
