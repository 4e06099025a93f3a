import itertools

import numpy as np
import pytest

from bochner import (
    DiagonalOperator,
    MatrixOperator,
    Sector,
    ValueSpace,
    ellipticity_constant,
    matrix_rpositivity_check,
    positivity_bound,
    r_bound_estimate,
)
from bochner.errors import SingularityError
from bochner.operators import matrix_opnorm, sector_samples


@pytest.fixture
def space2():
    return ValueSpace(2, 2.0)


@pytest.fixture
def spd2(space2):
    return MatrixOperator([[2.0, 1.0], [1.0, 2.0]], space2)


class TestFracPower:
    def test_power_zero_is_identity(self, spd2):
        assert np.allclose(spd2.frac_power(0.0).mat, np.eye(2))

    def test_diagonal_closed_form(self):
        d = DiagonalOperator(1.0, ValueSpace(3, 2.0))
        half = d.frac_power(0.5)
        assert np.allclose(half.entries, [2**0.5, 2.0, 2**1.5])

    def test_matrix_square_root(self, spd2):
        half = spd2.frac_power(0.5)
        assert np.max(np.abs(half.mat @ half.mat - spd2.mat)) < 1e-10

    def test_semigroup_property(self, spd2):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        t1, t2 = 0.3, -0.7
        lhs = spd2.frac_power(t1).apply(spd2.frac_power(t2).apply(v))
        rhs = spd2.frac_power(t1 + t2).apply(v)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_diagonal_semigroup(self):
        d = DiagonalOperator(0.7, ValueSpace(4, 3.0))
        v = np.arange(1.0, 5.0)
        lhs = d.frac_power(0.4).apply(d.frac_power(0.35).apply(v))
        assert np.max(np.abs(lhs - d.frac_power(0.75).apply(v))) < 1e-10

    def test_indefinite_matrix_rejected(self, space2):
        op = MatrixOperator([[1.0, 2.0], [2.0, 1.0]], space2)
        with pytest.raises(ValueError):
            op.frac_power(0.5)


class TestResolvent:
    def test_identity_shift(self, space2):
        op = MatrixOperator(np.eye(2), space2)
        v = np.array([2.0, -4.0])
        assert np.allclose(op.resolvent_apply(1.0, v), v / 2)

    def test_diagonal_inverse(self):
        # entries 2^{i/1}? build d = (1, 2, 4) via s = 1 shifted: use explicit matrix instead
        op = MatrixOperator(np.diag([1.0, 2.0, 4.0]), ValueSpace(3, 2.0))
        got = op.resolvent_apply(0.0, np.ones(3))
        assert np.allclose(got, [1.0, 0.5, 0.25])

    def test_residual_small(self, spd2):
        v = np.array([1.0, 0.0])
        w = spd2.resolvent_apply(1.0, v)
        assert np.max(np.abs((spd2.mat + np.eye(2)) @ w - v)) < 1e-12

    def test_resolvent_identity(self, spd2):
        rng = np.random.default_rng(1)
        v = rng.standard_normal(2)
        lam, mu = 0.5 + 0.25j, 3.0
        lhs = spd2.resolvent_apply(lam, v) - spd2.resolvent_apply(mu, v)
        rhs = (mu - lam) * spd2.resolvent_apply(lam, spd2.resolvent_apply(mu, v))
        assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_spectral_point_raises(self, spd2):
        with pytest.raises(SingularityError):
            spd2.resolvent_apply(-1.0, np.ones(2))


class TestPositivityBound:
    def test_identity_on_positive_ray(self, space2):
        op = MatrixOperator(np.eye(2), space2)
        assert positivity_bound(op, 0.0) == pytest.approx(1.0, abs=1e-9)

    def test_dyadic_diagonal_close_to_one(self):
        op = DiagonalOperator(1.0, ValueSpace(8, 2.0))
        bound = positivity_bound(op, 0.0)
        # sup of (1 + xi) / (2 + xi) over xi >= 0 approaches 1 from below
        assert bound <= 1.0 + 1e-9
        assert bound > 0.99

    def test_refinement_stability_on_wide_sector(self, spd2):
        coarse = positivity_bound(spd2, 3 * np.pi / 4)
        fine = positivity_bound(spd2, 3 * np.pi / 4, num_moduli=344, num_angles=65)
        assert abs(fine / coarse - 1.0) < 0.05

    def test_monotone_in_angle(self, spd2):
        angles = [0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4]
        bounds = [positivity_bound(spd2, phi) for phi in angles]
        assert all(hi >= lo - 1e-12 for lo, hi in zip(bounds, bounds[1:]))

    def test_sector_membership(self):
        s = Sector(np.pi / 4)
        assert s.contains(0.0)
        assert s.contains(1.0 + 1.0j)
        assert not s.contains(-1.0)


class TestRBound:
    def test_identity_family(self, space2):
        est = r_bound_estimate([np.eye(2)], space=space2, vectors=100)
        assert est.bound == pytest.approx(1.0, abs=1e-12)
        assert est.method == "exhaustive"

    def test_scalar_homogeneity(self, space2):
        est = r_bound_estimate([-2.5 * np.eye(2)], space=space2, vectors=100)
        assert est.bound == pytest.approx(2.5, rel=1e-10)

    def test_projection_pair_matches_brute_force(self, space2):
        # Independent oracle (dense angle/phase grid search) gives exactly 1.
        est = r_bound_estimate(
            [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], space=space2, vectors=10_000
        )
        assert est.method == "exhaustive"
        assert est.bound == pytest.approx(1.0, abs=1e-6)

    def test_singleton_equals_operator_norm(self, space2):
        mat = np.array([[1.0, 3.0], [0.0, 2.0]])
        est = r_bound_estimate([mat], space=space2, vectors=2000)
        assert est.bound == pytest.approx(np.linalg.norm(mat, 2), rel=1e-6)

    def test_resolvent_family_bounded_by_max_norm_factor(self):
        space = ValueSpace(4, 2.0)
        a = DiagonalOperator(1.0, space)
        family = [a.matrix() @ a.resolvent_matrix(t) for t in (0.5, 1.0, 2.0, 4.0, 8.0)]
        est = r_bound_estimate(family, space=space, vectors=3000)
        max_norm = max(np.linalg.norm(m, 2) for m in family)
        assert est.bound >= max_norm - 1e-6
        # five commuting contractions: the first-moment bound stays modest
        assert est.bound <= 2.0 * max_norm

    def test_empty_family_rejected(self, space2):
        with pytest.raises(ValueError):
            r_bound_estimate([], space=space2)

    def test_monte_carlo_above_twelve(self, space2):
        family = [t * np.eye(2) for t in np.linspace(0.1, 1.0, 13)]
        est = r_bound_estimate(family, space=space2, trials=256, vectors=200)
        assert est.method == "monte-carlo"
        assert est.bound == pytest.approx(1.0, rel=0.05)

    def test_exhaustive_signs_match_direct_enumeration(self, space2):
        # cross-check the sign-average ratio against an explicit loop
        rng = np.random.default_rng(5)
        family = [np.diag([1.0, 0.5]), np.array([[0.0, 1.0], [1.0, 0.0]])]
        tuples = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        tuples /= np.linalg.norm(tuples, axis=1, keepdims=True)
        num = den = 0.0
        for s2 in (1, -1):
            num += np.linalg.norm(family[0] @ tuples[0] + s2 * family[1] @ tuples[1])
            den += np.linalg.norm(tuples[0] + s2 * tuples[1])
        est = r_bound_estimate(family, space=space2, vectors=4000)
        assert est.bound >= num / den - 1e-9


class TestRowAggregate:
    def test_identity_below_one(self, space2):
        op = MatrixOperator(np.eye(2), space2)
        lams = np.logspace(-3, 5, 33)
        assert matrix_rpositivity_check(op, lams, 2.0) < 1.0

    def test_refinement_stability(self, spd2):
        coarse = matrix_rpositivity_check(spd2, np.logspace(-3, 5, 33), 2.0)
        fine = matrix_rpositivity_check(spd2, np.logspace(-3, 5, 66), 2.0)
        assert abs(fine / coarse - 1.0) < 0.05

    def test_resolvent_asymptotics(self, spd2):
        b = 1e8 * spd2.resolvent_matrix(1e8)
        assert np.max(np.abs(b - np.eye(2))) < 1e-6


class TestEllipticity:
    def test_identity(self):
        assert ellipticity_constant(np.eye(3)) == pytest.approx(1.0)

    def test_coupled_positive(self):
        # eigenvalues 1 and 3 by the characteristic polynomial
        assert ellipticity_constant([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(1.0, abs=1e-12)

    def test_coupled_indefinite(self):
        # eigenvalues -1 and 3
        assert ellipticity_constant([[1.0, 2.0], [2.0, 1.0]]) == pytest.approx(-1.0, abs=1e-12)


class TestOpnorm:
    def test_diagonal_any_q(self):
        mat = np.diag([1.0, -3.0, 2.0])
        for q in (1.0, 2.0, 2.5, 4.0):
            assert matrix_opnorm(mat, q) == pytest.approx(3.0, rel=1e-8)

    def test_q2_matches_svd(self):
        rng = np.random.default_rng(2)
        mat = rng.standard_normal((4, 4))
        assert matrix_opnorm(mat, 2.0) == pytest.approx(np.linalg.norm(mat, 2), rel=1e-12)

    def test_power_method_lower_bound_vs_scan(self):
        rng = np.random.default_rng(3)
        mat = rng.standard_normal((2, 2))
        q = 3.0
        # dense unit-sphere scan as the reference supremum
        angles = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
        xs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        xs /= np.sum(np.abs(xs) ** q, axis=1, keepdims=True) ** (1 / q)
        ref = np.max(np.sum(np.abs(xs @ mat.T) ** q, axis=1) ** (1 / q))
        got = matrix_opnorm(mat, q)
        assert got == pytest.approx(ref, rel=1e-3)

    def test_sector_sampling_grid_shape(self):
        samples = sector_samples(np.pi / 3, num_moduli=19, num_angles=5)
        assert samples.size == 19 * 5
        assert np.max(np.abs(np.angle(samples))) <= np.pi / 3 + 1e-12
