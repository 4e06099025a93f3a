import numpy as np
import pytest

from bochner import DiagonalOperator, Grid, GridFunction, MatrixOperator, ValueSpace, Weight
from bochner.grids import forward_transform, inverse_transform, spectral_derivative, weighted_lp_norm
from bochner.symbols import (
    apply_symbol,
    char_projection,
    dyadic_partition,
    hilbert_symbol,
    identity_symbol,
    lower_corner_projection,
    mikhlin_certificate,
    piecewise_const_approx,
    power_symbol,
    resolvent_symbol,
    riesz_like_symbol,
    riesz_projection,
    scalar_symbol,
    symbol_product,
    upper_corner_projection,
)

from conftest import lattice_mode, random_function


@pytest.fixture
def grid64():
    return Grid((np.pi,), (64,))


@pytest.fixture
def sp1():
    return ValueSpace(1, 2.0)


class TestApply:
    def test_identity_symbol(self, grid64, sp1):
        u = random_function(grid64, sp1, np.random.default_rng(0))
        out = apply_symbol(identity_symbol(sp1, 1), u)
        assert np.max(np.abs(out.values - u.values)) < 1e-10

    def test_power_symbol_equals_derivative(self, grid64, sp1):
        u = random_function(grid64, sp1, np.random.default_rng(1))
        for alpha in [(1,), (2,), (3,)]:
            via_symbol = apply_symbol(power_symbol(sp1, alpha), u)
            direct = spectral_derivative(u, alpha)
            assert np.max(np.abs(via_symbol.values - direct.values)) == 0.0

    def test_hilbert_turns_cos_into_sin(self, grid64, sp1):
        x = grid64.axis(0)
        u = GridFunction(grid64, sp1, np.cos(x)[:, None].astype(complex))
        out = apply_symbol(hilbert_symbol(sp1), u)
        assert np.max(np.abs(out.values[:, 0] - np.sin(x))) < 1e-9

    def test_linearity(self, grid64, sp1):
        rng = np.random.default_rng(2)
        u, v = random_function(grid64, sp1, rng), random_function(grid64, sp1, rng)
        m = riesz_like_symbol(sp1)
        lhs = apply_symbol(m, 2.0 * u + (1.0 - 0.5j) * v)
        rhs = 2.0 * apply_symbol(m, u) + (1.0 - 0.5j) * apply_symbol(m, v)
        assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10

    def test_scalar_composition(self, grid64, sp1):
        u = random_function(grid64, sp1, np.random.default_rng(3))
        m1 = riesz_like_symbol(sp1)
        m2 = scalar_symbol(sp1, lambda xi: 1.0 / (1.0 + xi**2), name="bell")
        nested = apply_symbol(m1, apply_symbol(m2, u))
        product = apply_symbol(symbol_product(m1, m2), u)
        assert np.max(np.abs(nested.values - product.values)) < 1e-9

    def test_codiagonal_composition(self, grid64):
        space = ValueSpace(3, 2.0)
        a = DiagonalOperator(1.0, space)
        u = random_function(grid64, space, np.random.default_rng(4))
        m1 = resolvent_symbol(space, a, {(2,): -1.0}, 1.0)
        m2 = resolvent_symbol(space, a, {(2,): -1.0}, 4.0)
        nested = apply_symbol(m1, apply_symbol(m2, u))
        product = apply_symbol(symbol_product(m1, m2), u)
        assert np.max(np.abs(nested.values - product.values)) < 1e-9

    def test_plancherel_operator_norm_bound(self, grid64):
        # p = q = 2, unit weight: the map is bounded by the table sup
        space = ValueSpace(3, 2.0)
        w = Weight.one(grid64)
        rng = np.random.default_rng(5)
        a = MatrixOperator([[2.0, 1.0, 0.0], [1.0, 2.0, 0.5], [0.0, 0.5, 1.0]], space)
        for m in [resolvent_symbol(space, a, {(2,): -1.0}, 2.0), riesz_like_symbol(space)]:
            sup = float(np.max(m.opnorms_on(grid64, 2.0)))
            for _ in range(5):
                u = random_function(grid64, space, rng)
                ratio = weighted_lp_norm(apply_symbol(m, u), 2.0, w) / weighted_lp_norm(u, 2.0, w)
                assert ratio <= sup + 1e-6


class TestProjections:
    def test_riesz_keeps_positive_mode(self, grid64, sp1):
        u = lattice_mode(grid64, sp1, (3,))
        out = riesz_projection(u)
        assert np.max(np.abs(out.values - u.values)) < 1e-12

    def test_riesz_kills_negative_mode(self, grid64, sp1):
        u = lattice_mode(grid64, sp1, (-2,))
        assert np.max(np.abs(riesz_projection(u).values)) < 1e-12

    def test_riesz_two_dimensional_orthant(self, sp1):
        grid = Grid((np.pi, np.pi), (16, 16))
        keep = lattice_mode(grid, sp1, (2, 3))
        kill = lattice_mode(grid, sp1, (2, -3))
        assert np.max(np.abs(riesz_projection(keep).values - keep.values)) < 1e-12
        assert np.max(np.abs(riesz_projection(kill).values)) < 1e-12

    def test_riesz_idempotent(self, grid64, sp1):
        u = random_function(grid64, sp1, np.random.default_rng(6))
        once = riesz_projection(u)
        twice = riesz_projection(once)
        assert np.max(np.abs(once.values - twice.values)) < 1e-12

    def test_box_covering_lattice_is_identity(self, grid64, sp1):
        u = random_function(grid64, sp1, np.random.default_rng(7))
        out = char_projection(u, (-1e9,), (1e9,))
        assert np.max(np.abs(out.values - u.values)) < 1e-12

    def test_disjoint_boxes_annihilate(self, grid64, sp1):
        u = random_function(grid64, sp1, np.random.default_rng(8))
        first = char_projection(u, (0.5,), (10.5,))
        then = char_projection(first, (11.5,), (20.5,))
        assert np.max(np.abs(then.values)) < 1e-12

    def test_empty_box_gives_zero(self, grid64, sp1):
        u = random_function(grid64, sp1, np.random.default_rng(9))
        out = char_projection(u, (5.25,), (5.75,))
        assert np.max(np.abs(out.values)) < 1e-12

    def test_box_factorizes_into_corner_projections(self, grid64, sp1):
        u = random_function(grid64, sp1, np.random.default_rng(10))
        a, b = (-7.5,), (13.5,)
        box = char_projection(u, a, b)
        composed = lower_corner_projection(upper_corner_projection(u, b), a)
        assert np.max(np.abs(box.values - composed.values)) < 1e-12

    def test_char_projection_idempotent(self, grid64, sp1):
        u = random_function(grid64, sp1, np.random.default_rng(11))
        once = char_projection(u, (-3.5,), (9.5,))
        twice = char_projection(once, (-3.5,), (9.5,))
        assert np.max(np.abs(once.values - twice.values)) < 1e-12


class TestDyadicPartition:
    def test_point_three_lands_in_cell_one(self, grid64):
        cells = dyadic_partition(grid64, 0)
        hosts = [c for c in cells if c.contains((3.0,))]
        assert len(hosts) == 1
        assert hosts[0].j == (1,)
        assert hosts[0].lo == (2.0,)

    def test_level_one_splits_and_preserves_union(self, grid64):
        base = dyadic_partition(grid64, 0)
        fine = dyadic_partition(grid64, 1)
        positive = [xi for xi in grid64.freq_axis(0) if xi > 0]
        for cells in (base, fine):
            counts = [sum(1 for c in cells if c.contains((xi,))) for xi in positive]
            assert all(count == 1 for count in counts)
        assert len(fine) > len(base)

    def test_exhaustive_cover_two_dimensional(self):
        grid = Grid((np.pi, np.pi), (16, 16))
        cells = dyadic_partition(grid, 0)
        mesh = grid.freq_mesh()
        points = np.stack([g.ravel() for g in mesh], axis=-1)
        strictly_positive = points[(points > 0).all(axis=1)]
        counts = [sum(1 for c in cells if c.contains(tuple(p))) for p in strictly_positive]
        assert all(count == 1 for count in counts)


class TestPiecewiseApprox:
    def test_constant_symbol_exact_at_every_level(self, grid64, sp1):
        m = scalar_symbol(sp1, lambda xi: np.full(np.shape(xi), 2.0 + 0.0j), name="const")
        positive = np.array([xi for xi in grid64.freq_axis(0) if xi > 0])
        for level in (0, 2, 5):
            approx = piecewise_const_approx(m, level)
            got = approx.table_at((positive,), None)
            assert np.max(np.abs(got - 2.0)) == 0.0

    def test_anchor_of_unit_cell_is_value_at_one(self, sp1):
        m = scalar_symbol(sp1, lambda xi: 1.0 / (1.0 + xi), name="decay")
        for level in (0, 1, 4):
            approx = piecewise_const_approx(m, level)
            got = approx.table_at((np.array([1.0 + 1e-9]),), None)
            assert got[0] == pytest.approx(0.5, abs=1e-9)

    def test_refinement_error_monotone(self, grid64, sp1):
        m = scalar_symbol(sp1, lambda xi: 1.0 / (1.0 + xi), name="decay")
        positive = np.array([xi for xi in grid64.freq_axis(0) if xi > 0])
        exact = m.table_at((positive,), None)
        errors = []
        for level in (0, 3, 6):
            approx = piecewise_const_approx(m, level)
            errors.append(np.max(np.abs(approx.table_at((positive,), None) - exact)))
        assert errors[1] <= errors[0]
        assert errors[2] <= errors[1]

    def test_zero_outside_positive_orthant(self, sp1):
        m = scalar_symbol(sp1, lambda xi: np.ones(np.shape(xi), dtype=complex), name="one")
        approx = piecewise_const_approx(m, 1)
        got = approx.table_at((np.array([-1.0, 0.0, 1.0]),), None)
        assert np.allclose(got, [0.0, 0.0, 1.0])


class TestMikhlinCertificate:
    def test_identity_certificate(self, sp1):
        cert = mikhlin_certificate(identity_symbol(sp1, 1), 1, vectors=200)
        assert cert.bounded
        assert cert.per_beta[(0,)].bound == pytest.approx(1.0, abs=1e-9)
        assert cert.per_beta[(1,)].bound == pytest.approx(0.0, abs=1e-9)

    def test_riesz_like_matches_scalar_oracle(self, sp1):
        # dense scalar evaluation: sup |m| on the grid and sup |xi m'| = 1/4 at xi = 1
        cert = mikhlin_certificate(riesz_like_symbol(sp1), 1, vectors=400)
        assert cert.bounded
        assert cert.per_beta[(0,)].bound == pytest.approx(256.0 / 257.0, rel=1e-4)
        assert cert.per_beta[(1,)].bound == pytest.approx(0.25, rel=1e-3)
        assert cert.total == pytest.approx(256.0 / 257.0 + 0.25, rel=1e-3)

    def test_log_symbol_grows_with_the_lattice(self, sp1):
        log_symbol = scalar_symbol(sp1, lambda xi: np.log(np.abs(xi)), name="log")
        small = mikhlin_certificate(log_symbol, 1, hi=2.0**4, vectors=200)
        large = mikhlin_certificate(log_symbol, 1, hi=2.0**12, vectors=200)
        assert large.per_beta[(0,)].bound > small.per_beta[(0,)].bound + 1.0

    def test_resolvent_symbol_certified_bounded(self):
        space = ValueSpace(4, 2.0)
        a = DiagonalOperator(1.0, space)
        m = resolvent_symbol(space, a, {(2,): -1.0}, 1.0)
        cert = mikhlin_certificate(m, 1, points_per_sign=17, vectors=300)
        assert cert.bounded
        assert cert.total < 10.0

    def test_isotropic_variant_runs(self, sp1):
        cert = mikhlin_certificate(riesz_like_symbol(sp1), 1, isotropic=True, vectors=200)
        assert cert.bounded
        assert cert.per_beta[(1,)].bound == pytest.approx(0.25, rel=1e-3)
