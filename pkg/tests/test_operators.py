import numpy as np
import pytest

import zkstrip as zk
from zkstrip.grid import Field
from zkstrip.operators import OperatorError


def uniform_inner(grid, a, b):
    return float(a.ravel() @ b.ravel()) * grid.dx * grid.transverse_weight


def transverse_constant(grid, profile_1d):
    vals = np.broadcast_to(profile_1d.reshape((grid.Nx,) + (1,) * (grid.dim - 1)),
                           grid.shape).copy()
    return Field(grid, vals, check=False)


class TestFirstDerivative:
    def test_polynomial_second_order(self):
        # oracle: d/dx [x(L-x)^2] = (L-x)^2 - 2x(L-x); centered difference on a
        # cubic has error dx^2 * u'''/6 = dx^2 exactly (u''' = 6 here)
        errors = []
        for nx in (32, 64, 128):
            g = zk.build_grid(np.pi / 2, 2, nx, 8, half_width=2.0)
            ops = zk.build_operators(g)
            u = transverse_constant(g, g.x * (g.L - g.x) ** 2)
            exact = (g.L - g.x) ** 2 - 2 * g.x * (g.L - g.x)
            got = zk.d_x(ops, u).values[:, 0]
            errors.append(np.abs(got - exact).max())
            assert np.abs(got - exact).max() <= 1.0001 * g.dx ** 2
        orders = [np.log2(errors[i] / errors[i + 1]) for i in range(2)]
        assert min(orders) >= 1.8

    def test_quadratic_exact_at_interior_nodes(self, ops2d_small, grid2d_small):
        # centered second-order stencil differentiates degree <= 2 exactly;
        # wall rows assume zero wall values so only interior rows qualify
        g = grid2d_small
        u = transverse_constant(g, 1.0 + 2 * g.x - 3 * g.x ** 2)
        got = zk.d_x(ops2d_small, u).values[1:-1, 0]
        exact = (2 - 6 * g.x)[1:-1]
        np.testing.assert_allclose(got, exact, rtol=1e-12, atol=1e-13)

    def test_zero_and_linearity(self, ops2d_small, grid2d_small):
        g = grid2d_small
        rng = np.random.default_rng(3)
        u = Field(g, rng.standard_normal(g.shape))
        v = Field(g, rng.standard_normal(g.shape))
        zero = zk.d_x(ops2d_small, Field(g, g.zeros()))
        assert not np.any(zero.values)
        lhs = zk.d_x(ops2d_small, Field(g, u.values + v.values)).values
        rhs = zk.d_x(ops2d_small, u).values + zk.d_x(ops2d_small, v).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_grid_mismatch(self, ops2d_small):
        other = zk.build_grid(1.0, 2, 16, 8, half_width=2.0)
        with pytest.raises(OperatorError):
            zk.d_x(ops2d_small, Field(other, other.zeros()))

    def test_fourth_order_interior_option(self):
        g = zk.build_grid(np.pi / 2, 2, 64, 8, half_width=2.0)
        ops4 = zk.build_operators(g, x_order=4)
        u = transverse_constant(g, np.sin(2 * g.x) * g.x ** 2 * (g.L - g.x) ** 2)
        du = zk.d_x(ops4, u).values[:, 0]
        exact = (2 * np.cos(2 * g.x) * g.x ** 2 * (g.L - g.x) ** 2
                 + np.sin(2 * g.x) * (2 * g.x * (g.L - g.x) ** 2
                                      - 2 * g.x ** 2 * (g.L - g.x)))
        interior = slice(4, -4)
        assert np.abs(du - exact)[interior].max() <= 50 * g.dx ** 4


class TestDispersive:
    def test_transverse_constant_reduces_to_third_derivative(self, ops2d_small, grid2d_small):
        g = grid2d_small
        u = transverse_constant(g, g.x * (g.L - g.x) ** 2)
        disp = zk.dispersive(ops2d_small, u).values
        np.testing.assert_array_equal(disp, ops2d_small.d3x_values(u.values))

    def test_spectral_accuracy_probe(self, ops2d_small, grid2d_small):
        # separable probe (violates the outflow slope condition; accuracy only):
        # the transverse part must equal -(pi/half_width)^2 * d_x u spectrally
        g = grid2d_small
        vals = np.sin(np.pi * g.x / g.L)[:, None] * np.cos(np.pi * g.y / g.half_width)[None, :]
        u = Field(g, vals)
        transverse = (zk.dispersive(ops2d_small, u).values
                      - ops2d_small.d3x_values(u.values))
        expected = -(np.pi / g.half_width) ** 2 * ops2d_small.dx_values(u.values)
        np.testing.assert_allclose(transverse, expected, rtol=0, atol=1e-12 * np.abs(expected).max())

    def test_fourier_multiplier_exact_per_mode(self, ops2d_small, grid2d_small):
        g = grid2d_small
        for n in (1, 3, 5):
            mode = np.cos(np.pi * n * g.y / g.half_width)
            vals = np.ones((g.Nx, 1)) * mode[None, :]
            got = ops2d_small.dyy_values(vals)
            expected = -(np.pi * n / g.half_width) ** 2 * vals
            np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-12)


class TestNonlinear:
    def test_zero(self, ops2d_small, grid2d_small):
        f = Field(grid2d_small, grid2d_small.zeros())
        assert not np.any(zk.nonlinear(ops2d_small, f).values)

    def test_constant_in_x_vanishes_at_interior_nodes(self, grid2d_small):
        g = grid2d_small
        ops = zk.build_operators(g, dealias=False)
        c = np.exp(-g.y ** 2)
        u = Field(g, np.ones((g.Nx, 1)) * c[None, :], check=False)
        nl = zk.nonlinear(ops, u).values
        assert np.abs(nl[1:-1]).max() <= 1e-14

    def test_quadratic_scaling(self, ops2d_small, grid2d_small):
        g = grid2d_small
        rng = np.random.default_rng(5)
        u = rng.standard_normal(g.shape)
        n1 = zk.nonlinear(ops2d_small, Field(g, u)).values
        n3 = zk.nonlinear(ops2d_small, Field(g, 3.0 * u)).values
        np.testing.assert_allclose(n3, 9.0 * n1, rtol=1e-12, atol=1e-12)

    def test_polynomial_product_rule(self):
        # oracle: u u_x for u = x(L-x)^2 in closed form
        errors = []
        for nx in (32, 64, 128):
            g = zk.build_grid(np.pi / 2, 2, nx, 8, half_width=2.0)
            ops = zk.build_operators(g, dealias=False)
            prof = g.x * (g.L - g.x) ** 2
            u = transverse_constant(g, prof)
            exact = prof * ((g.L - g.x) ** 2 - 2 * g.x * (g.L - g.x))
            got = zk.nonlinear(ops, u).values[:, 0]
            errors.append(np.abs(got - exact).max())
        orders = [np.log2(errors[i] / errors[i + 1]) for i in range(2)]
        assert min(orders) >= 1.8

    def test_dealias_preserves_smooth_fields(self):
        # transverse resolution fine enough that the squared profile has no
        # content above the 2/3 cut
        g = zk.build_grid(np.pi / 2, 2, 32, 128, half_width=6.0)
        ops_raw = zk.build_operators(g, dealias=False)
        ops_filt = zk.build_operators(g, dealias=True)
        u = zk.make_profile(g, zk.ProfileSpec("separable-sine-gauss", amplitude=0.1))
        raw = zk.nonlinear(ops_raw, u).values
        filt = zk.nonlinear(ops_filt, u).values
        assert np.abs(raw - filt).max() <= 1e-12 * np.abs(raw).max()


class TestHyperviscosity:
    def test_epsilon_zero(self, ops2d_small, grid2d_small):
        rng = np.random.default_rng(9)
        u = Field(grid2d_small, rng.standard_normal(grid2d_small.shape))
        assert not np.any(zk.hyperviscosity(ops2d_small, u, 0.0).values)

    def test_negative_epsilon(self, ops2d_small, grid2d_small):
        u = Field(grid2d_small, grid2d_small.zeros())
        with pytest.raises(OperatorError):
            zk.hyperviscosity(ops2d_small, u, -1.0)

    def test_transverse_eigenfunction(self, ops2d_small, grid2d_small):
        g = grid2d_small
        vals = np.ones((g.Nx, 1)) * np.cos(np.pi * g.y / g.half_width)[None, :]
        u = Field(g, vals, check=False)
        got = zk.hyperviscosity(ops2d_small, u, 1.0).values
        # x part of a field constant in x cancels at interior rows up to the
        # O(eps/dx^4) rounding of the stencil sum
        expected = (np.pi / g.half_width) ** 4 * vals
        interior = slice(2, -2)
        np.testing.assert_allclose(got[interior], expected[interior],
                                   rtol=1e-6, atol=1e-12 / g.dx ** 4 * 10)

    def test_cubic_interior_exact(self, grid2d_medium):
        g = grid2d_medium
        ops = zk.build_operators(g)
        poly = 1.0 + g.x + 0.5 * g.x ** 2 - 0.25 * g.x ** 3
        u = transverse_constant(g, poly)
        got = zk.hyperviscosity(ops, u, 1e-2).values[:, 0]
        # interior five-point stencil annihilates cubics exactly
        interior = slice(2, g.Nx - 2)
        assert np.abs(got[interior]).max() <= 1e-8


class TestRhs:
    def test_zero_field(self, ops2d_small, grid2d_small):
        f = Field(grid2d_small, grid2d_small.zeros())
        assert not np.any(zk.rhs(ops2d_small, f, 0.0).values)

    def test_composition(self, ops2d_small, grid2d_small):
        g = grid2d_small
        rng = np.random.default_rng(13)
        u = Field(g, 0.1 * rng.standard_normal(g.shape))
        for eps in (0.0, 1e-2):
            total = zk.rhs(ops2d_small, u, eps).values
            parts = -(zk.d_x(ops2d_small, u).values
                      + zk.nonlinear(ops2d_small, u).values
                      + zk.dispersive(ops2d_small, u).values
                      + zk.hyperviscosity(ops2d_small, u, eps).values)
            np.testing.assert_allclose(total, parts, rtol=1e-12, atol=1e-15)


class TestEnergyForms:
    """The exact quadratic-form identities that close the energy balance."""

    @pytest.mark.parametrize("fixture", ["2d", "3d"])
    @pytest.mark.parametrize("eps", [0.0, 1e-2])
    def test_production_matches_inner_product(self, fixture, eps, request,
                                              ops2d_small, ops3d_small):
        ops = ops2d_small if fixture == "2d" else ops3d_small
        g = ops.grid
        rng = np.random.default_rng(17)
        v = rng.standard_normal(g.shape)
        lhs = 2 * uniform_inner(g, v, ops.linear_values(v, eps))
        rhs_val = ops.energy_production(v, eps)
        assert lhs == pytest.approx(rhs_val, rel=1e-12)

    def test_transport_exactly_antisymmetric(self, ops2d_small):
        g = ops2d_small.grid
        rng = np.random.default_rng(19)
        v = rng.standard_normal(g.shape)
        inner = uniform_inner(g, v, ops2d_small.dx_values(v))
        assert abs(inner) <= 1e-13 * uniform_inner(g, v, v)

    @pytest.mark.parametrize("fixture", ["2d", "3d"])
    def test_skew_split_nonlinearity_energy_neutral(self, fixture,
                                                    ops2d_small, ops3d_small):
        ops = ops2d_small if fixture == "2d" else ops3d_small
        g = ops.grid
        rng = np.random.default_rng(23)
        v = rng.standard_normal(g.shape)
        inner = uniform_inner(g, v, ops.nonlinear_values(v))
        assert abs(inner) <= 1e-12 * uniform_inner(g, v, v) ** 1.5

    def test_production_nonnegative(self, ops2d_small):
        g = ops2d_small.grid
        rng = np.random.default_rng(29)
        for _ in range(20):
            v = rng.standard_normal(g.shape)
            assert ops2d_small.energy_production(v, 0.0) >= 0.0
            assert ops2d_small.energy_production(v, 1e-2) >= 0.0
