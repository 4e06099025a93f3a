import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bochner import (
    Grid,
    GridFunction,
    MatrixOperator,
    ValueSpace,
    Weight,
    forward_transform,
    inverse_transform,
    mixed_norm,
    sobolev_lions_norm,
    spectral_derivative,
    weighted_lp_norm,
)
from bochner.grids import Anisotropy, frequency_l2_norm, graph_norm_lp, multi_indices_up_to

from conftest import lattice_mode, random_function


def naive_dft(values, grid):
    """Quadratic-cost reference transform with the forward 1/prod(m) factor."""
    m = grid.sizes[0]
    out = np.zeros_like(values)
    for k in range(m):
        out[k] = np.sum(values * np.exp(-2j * np.pi * k * np.arange(m) / m)[:, None], axis=0) / m
    return out


class TestGridConstruction:
    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            Grid((1.0,), (48,))

    def test_rejects_tiny_axis(self):
        with pytest.raises(ValueError):
            Grid((1.0,), (2,))

    def test_rejects_nonpositive_extent(self):
        with pytest.raises(ValueError):
            Grid((0.0,), (8,))

    def test_rejects_dimension_over_three(self):
        with pytest.raises(ValueError):
            Grid((1.0,) * 4, (8,) * 4)

    def test_half_cell_offset_avoids_origin(self, grid64):
        assert np.min(np.abs(grid64.axis(0))) > 0

    def test_frequency_lattice_is_pi_j_over_l(self, grid64):
        xi = grid64.freq_axis(0)
        assert xi[1] == pytest.approx(np.pi / np.pi)
        # non-Nyquist bins come in symmetric pairs
        regular = xi[np.abs(xi) < np.pi * 32 / np.pi]
        assert set(np.round(regular, 12)) == set(np.round(-regular, 12))


class TestTransform:
    def test_constant_concentrates_at_dc(self, grid64, scalar_space):
        c = 2.5 - 1.0j
        u = GridFunction(grid64, scalar_space, np.full((64, 1), c))
        u_hat = forward_transform(u)
        assert u_hat.values[0, 0] == pytest.approx(c)
        assert np.max(np.abs(u_hat.values[1:])) < 1e-14

    def test_lattice_exponential_single_bin(self, grid64, scalar_space):
        u = lattice_mode(grid64, scalar_space, (5,))
        u_hat = forward_transform(u).values[:, 0]
        spectrum = np.abs(u_hat)
        assert np.argmax(spectrum) == 5
        others = np.delete(spectrum, 5)
        assert np.max(others) < 1e-13

    def test_round_trip_matches_naive_dft(self, grid64, scalar_space):
        rng = np.random.default_rng(0)
        u = random_function(grid64, scalar_space, rng)
        u_hat = forward_transform(u)
        reference = naive_dft(u.values, grid64)
        assert np.max(np.abs(u_hat.values - reference)) < 1e-12
        back = inverse_transform(u_hat)
        rel = np.max(np.abs(back.values - u.values)) / np.max(np.abs(u.values))
        assert rel < 1e-10

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_round_trip_random(self, seed):
        grid = Grid((2.0,), (16,))
        space = ValueSpace(3, 2.0)
        u = random_function(grid, space, np.random.default_rng(seed))
        back = inverse_transform(forward_transform(u))
        rel = np.max(np.abs(back.values - u.values)) / np.max(np.abs(u.values))
        assert rel < 1e-10

    def test_parseval(self, grid64, scalar_space, ones64):
        rng = np.random.default_rng(3)
        u = random_function(grid64, scalar_space, rng)
        space_side = weighted_lp_norm(u, 2.0, ones64)
        freq_side = frequency_l2_norm(forward_transform(u))
        assert space_side == pytest.approx(freq_side, rel=1e-9)


class TestSpectralDerivative:
    def test_zero_order_is_identity(self, grid64, scalar_space):
        u = random_function(grid64, scalar_space, np.random.default_rng(1))
        d = spectral_derivative(u, (0,))
        assert np.max(np.abs(d.values - u.values)) < 1e-12

    def test_exponential_eigenfunction(self, grid64, scalar_space):
        u = lattice_mode(grid64, scalar_space, (4,))
        d = spectral_derivative(u, (3,))
        assert np.max(np.abs(d.values - (4j) ** 3 * u.values)) < 1e-9

    def test_sin_second_derivative(self, grid64, scalar_space):
        x = grid64.axis(0)
        u = GridFunction(grid64, scalar_space, np.sin(x)[:, None].astype(complex))
        d2 = spectral_derivative(u, (2,))
        assert np.max(np.abs(d2.values + u.values)) < 1e-9

    def test_composition_on_band_limited(self, grid64, scalar_space):
        rng = np.random.default_rng(9)
        coeffs = np.zeros((64, 1), dtype=complex)
        idx = np.r_[0:10, 54:64]
        coeffs[idx, 0] = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
        u = inverse_transform(GridFunction(grid64, scalar_space, coeffs))
        both = spectral_derivative(u, (3,))
        nested = spectral_derivative(spectral_derivative(u, (1,)), (2,))
        scale = np.max(np.abs(both.values)) or 1.0
        assert np.max(np.abs(both.values - nested.values)) / scale < 1e-9

    def test_real_input_stays_real_for_odd_order(self, grid64, scalar_space):
        rng = np.random.default_rng(10)
        u = GridFunction(grid64, scalar_space, rng.standard_normal((64, 1)).astype(complex))
        d = spectral_derivative(u, (1,))
        assert np.max(np.abs(d.values.imag)) < 1e-12


class TestNorms:
    def test_zero_function(self, grid64, scalar_space, ones64):
        u = GridFunction.zero(grid64, scalar_space)
        assert weighted_lp_norm(u, 2.0, ones64) == 0.0

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_unit_constant_on_torus(self, grid64, scalar_space, ones64, p):
        u = GridFunction(grid64, scalar_space, np.ones((64, 1), dtype=complex))
        assert weighted_lp_norm(u, p, ones64) == pytest.approx((2 * np.pi) ** (1 / p), rel=1e-12)

    def test_cosine_l2(self, grid64, scalar_space, ones64):
        x = grid64.axis(0)
        u = GridFunction(grid64, scalar_space, np.cos(x)[:, None].astype(complex))
        assert weighted_lp_norm(u, 2.0, ones64) == pytest.approx(np.sqrt(np.pi), abs=1e-6)

    @settings(max_examples=20, deadline=None)
    @given(scale=st.floats(-8.0, 8.0), seed=st.integers(0, 1000))
    def test_homogeneity(self, scale, seed):
        grid = Grid((1.0,), (16,))
        space = ValueSpace(2, 2.5)
        u = random_function(grid, space, np.random.default_rng(seed))
        w = Weight.one(grid)
        base = weighted_lp_norm(u, 2.0, w)
        assert weighted_lp_norm(scale * u, 2.0, w) == pytest.approx(abs(scale) * base, rel=1e-12)

    def test_sobolev_lions_pieces(self, grid64, scalar_space, ones64, identity_op):
        x = grid64.axis(0)
        u = GridFunction(grid64, scalar_space, np.sin(x)[:, None].astype(complex))
        total = sobolev_lions_norm(u, (2,), identity_op, 2.0, ones64)
        base = np.sqrt(np.pi)  # ||sin||_2 = ||sin''||_2 = sqrt(pi)
        expected = (2 * base**2) ** 0.5 + base
        assert total == pytest.approx(expected, rel=1e-9)

    def test_sobolev_homogeneity(self, grid64, scalar_space, ones64, identity_op):
        u = random_function(grid64, scalar_space, np.random.default_rng(4))
        n1 = sobolev_lions_norm(u, (2,), identity_op, 2.0, ones64)
        n3 = sobolev_lions_norm(3.0 * u, (2,), identity_op, 2.0, ones64)
        assert n3 == pytest.approx(3.0 * n1, rel=1e-12)

    def test_graph_norm_identity_power_zero(self, grid64, scalar_space, ones64, identity_op):
        u = random_function(grid64, scalar_space, np.random.default_rng(5))
        base = weighted_lp_norm(u, 2.0, ones64)
        assert graph_norm_lp(u, identity_op, 0.0, 2.0, ones64) == pytest.approx(
            2 ** 0.5 * base, rel=1e-12
        )


class TestMixedNorm:
    def test_all_zero(self, grid64, scalar_space, ones64):
        snaps = [GridFunction.zero(grid64, scalar_space) for _ in range(5)]
        assert mixed_norm(snaps, 0.25, 2.0, 2.0, ones64) == 0.0

    def test_single_snapshot(self, grid64, scalar_space, ones64):
        u = random_function(grid64, scalar_space, np.random.default_rng(6))
        dt = 0.37
        got = mixed_norm([u], dt, 2.0, 2.0, ones64)
        assert got == pytest.approx(dt ** 0.5 * weighted_lp_norm(u, 2.0, ones64), rel=1e-12)

    def test_time_constant_over_unit_interval(self, grid64, scalar_space, ones64):
        u = random_function(grid64, scalar_space, np.random.default_rng(7))
        n_steps = 64
        snaps = [u for _ in range(n_steps + 1)]
        got = mixed_norm(snaps, 1.0 / n_steps, 2.0, 2.0, ones64)
        assert got == pytest.approx(weighted_lp_norm(u, 2.0, ones64), rel=1e-10)


class TestHelpers:
    def test_anisotropy_kappa(self):
        l = Anisotropy((2, 4))
        assert l.kappa((1, 1)) == pytest.approx(0.75)
        assert l.kappa((0, 0)) == 0.0
        # additive in alpha
        assert l.kappa((1, 2)) == pytest.approx(l.kappa((1, 0)) + l.kappa((0, 2)))

    def test_anisotropy_rejects_zero_order(self):
        with pytest.raises(ValueError):
            Anisotropy((0, 2))

    def test_multi_index_enumeration(self):
        found = multi_indices_up_to(2, 2)
        assert len(found) == 6
        assert all(sum(a) <= 2 for a in found)
