"""Spectral treatment of the constant-coefficient abstract elliptic equation.

The principal part is diagonal in frequency: with K(xi) the characteristic
polynomial of the top-order coefficients, the solution of

    sum_{|alpha|=2l} a_alpha D^alpha u + A u + lam u = f

is u = F^{-1} (A + K(xi) + lam)^{-1} F f, valid whenever K stays in a
sector of half-angle phi_1 < pi and lam keeps away from the opposite ray.
Variable lower-order terms are handled by a Neumann series around the
principal resolvent, mirroring the perturbation argument the estimate
rests on; a dense direct solve remains the small-instance test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConditionViolation, NonContractionError, SectorError, SingularityError
from .grids import (
    Grid,
    GridFunction,
    ValueSpace,
    forward_transform,
    inverse_transform,
    multi_indices_up_to,
    spectral_derivative,
    weighted_lp_norm,
)
from .operators import matrix_opnorm
from .reports import EstimateReport
from .weights import Weight

COERCIVE_COLUMNS = ("modulus", "angle", "member", "lhs", "rhs", "ratio")


@dataclass(frozen=True)
class LowerOrderTerm:
    """Grid-sampled operator coefficient of one derivative below top order."""

    alpha: tuple[int, ...]
    coefficient: np.ndarray  # shape sizes + (N, N)
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        object.__setattr__(self, "coefficient", np.asarray(self.coefficient, dtype=complex))


@dataclass(frozen=True)
class EllipticProblem:
    grid: Grid
    space: ValueSpace
    order: int  # top order is 2 * order
    coeffs: dict
    operator: object
    lower: tuple = ()
    lam: complex = 0.0

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order parameter must be >= 1")
        coeffs = {tuple(int(a) for a in alpha): complex(c) for alpha, c in self.coeffs.items()}
        object.__setattr__(self, "coeffs", coeffs)
        if not coeffs or all(c == 0 for c in coeffs.values()):
            raise ConditionViolation("all top-order coefficients vanish", condition="condition-5.1")
        top = 2 * self.order
        for alpha in coeffs:
            if len(alpha) != self.grid.n or sum(alpha) != top:
                raise ValueError(f"coefficient index {alpha} is not of order {top}")
        for term in self.lower:
            if sum(term.alpha) >= top:
                raise ValueError("lower-order index must have |alpha| < 2l")
            bound = 1.0 - sum(term.alpha) / top
            if not (0.0 < term.mu < bound):
                raise ValueError(f"mu for {term.alpha} must lie in (0, {bound})")
            expected = self.grid.sizes + (self.space.dim, self.space.dim)
            if term.coefficient.shape != expected:
                raise ValueError("lower-order coefficient not sampled on the grid")
        object.__setattr__(self, "lam", complex(self.lam))

    def with_lambda(self, lam: complex) -> "EllipticProblem":
        return replace(self, lam=complex(lam))


def principal_values(coeffs: dict, xis) -> np.ndarray:
    """K(xi) = sum a_alpha prod (i xi_k)^{alpha_k} on broadcastable arrays."""
    arrays = np.broadcast_arrays(*xis)
    total = np.zeros(arrays[0].shape, dtype=complex)
    for alpha, a in coeffs.items():
        term = np.full(arrays[0].shape, complex(a))
        for k, ak in enumerate(alpha):
            if ak:
                term = term * (1j * arrays[k]) ** ak
        total = total + term
    return total


def check_condition_5_1(coeffs: dict, order: int, grid: Grid) -> tuple[float, float]:
    """Sector angle and ellipticity constant of K over the nonzero lattice.

    Returns (phi_1, M_0); raises when the symbol leaves every proper sector
    or the modulus lower bound degenerates.
    """
    mesh = grid.freq_mesh()
    k_vals = principal_values(coeffs, mesh)
    denom = sum(g ** (2 * order) for g in mesh)
    nonzero = denom > 0
    if not np.any(nonzero):
        raise ConditionViolation("frequency lattice has no nonzero points", condition="condition-5.1")
    phi1 = float(np.max(np.abs(np.angle(k_vals[nonzero]))))
    m0 = float(np.min(np.abs(k_vals[nonzero]) / denom[nonzero]))
    if m0 <= 1e-12:
        raise ConditionViolation(
            "principal symbol modulus bound degenerates", condition="condition-5.1", m0=m0,
        )
    if phi1 >= math.pi - 1e-12:
        raise ConditionViolation(
            "principal symbol fills the whole plane", condition="condition-5.1", phi1=phi1,
        )
    return phi1, m0


def admissible_lambda(lam: complex, phi1: float) -> bool:
    """lam is admissible iff it is 0 or lies strictly inside S(pi - phi_1)."""
    lam = complex(lam)
    if lam == 0:
        return True
    return abs(np.angle(lam)) < math.pi - phi1


def solve_principal(prob: EllipticProblem, f: GridFunction) -> GridFunction:
    """Exact per-frequency resolvent solve of the principal equation."""
    phi1, _ = check_condition_5_1(prob.coeffs, prob.order, prob.grid)
    if not admissible_lambda(prob.lam, phi1):
        raise SectorError(
            "spectral parameter outside the admissible sector",
            lam=prob.lam, phi1=phi1,
        )
    k_vals = principal_values(prob.coeffs, prob.grid.freq_mesh())
    eigvals, basis = prob.operator.eigensystem()
    denom = eigvals + (k_vals + prob.lam)[..., None]
    small = np.abs(denom) < 1e-13
    if np.any(small):
        bad = np.argwhere(small)[0]
        xi = tuple(float(prob.grid.freq_axis(k)[bad[k]]) for k in range(prob.grid.n))
        raise SingularityError("resolvent singular on the lattice", xi=xi, lam=prob.lam)
    f_hat = forward_transform(f).values
    if basis is not None:
        f_hat = f_hat @ basis
    w = f_hat / denom
    if basis is not None:
        w = w @ basis.T
    return inverse_transform(GridFunction(prob.grid, prob.space, w))


def apply_operator(prob: EllipticProblem, u: GridFunction) -> GridFunction:
    """Physical-space application of the full operator (incl. lower order)."""
    total = GridFunction(prob.grid, prob.space, prob.operator.apply(u.values) + prob.lam * u.values)
    for alpha, a in prob.coeffs.items():
        total = total + a * spectral_derivative(u, alpha)
    for term in prob.lower:
        du = spectral_derivative(u, term.alpha)
        total = total + GridFunction(
            prob.grid, prob.space, np.einsum("...ij,...j->...i", term.coefficient, du.values)
        )
    return total


def relative_residual(prob: EllipticProblem, u: GridFunction, f: GridFunction) -> float:
    """|| L u - f || / || f || in the plain L_2 norm."""
    ones = Weight.one(prob.grid)
    applied = apply_operator(prob, u)
    return weighted_lp_norm(applied - f, 2.0, ones) / weighted_lp_norm(f, 2.0, ones)


def coercive_lhs(prob: EllipticProblem, u: GridFunction, p: float, weight) -> float:
    """sum_{|alpha| <= 2l} |lam|^{1 - |alpha|/2l} ||D^alpha u|| + ||A u||.

    At lam = 0 the |lam|-weighted strictly-lower-order terms vanish and the
    |alpha| = 2l terms enter with unit coefficient (exponent 0).
    """
    top = 2 * prob.order
    modulus = abs(prob.lam)
    total = 0.0
    for alpha in multi_indices_up_to(prob.grid.n, top):
        exponent = 1.0 - sum(alpha) / top
        coeff = modulus**exponent if exponent > 0 else 1.0
        if coeff == 0.0:
            continue
        total += coeff * weighted_lp_norm(spectral_derivative(u, alpha), p, weight)
    au = GridFunction(prob.grid, prob.space, prob.operator.apply(u.values))
    total += weighted_lp_norm(au, p, weight)
    return float(total)


def coercive_report(prob: EllipticProblem, corpus, lam_sweep, p: float = 2.0, weight=None) -> EstimateReport:
    """Uniformity table of the coercive estimate over a spectral sweep."""
    weight = Weight.one(prob.grid) if weight is None else weight
    report = EstimateReport(kind="elliptic", columns=COERCIVE_COLUMNS)
    per_lambda_max: dict[complex, float] = {}
    for lam in lam_sweep:
        lam = complex(lam)
        instance = prob.with_lambda(lam)
        for idx, f in enumerate(corpus):
            u = solve_principal(instance, f)
            lhs = coercive_lhs(instance, u, p, weight)
            rhs = weighted_lp_norm(f, p, weight)
            report.add(abs(lam), float(np.angle(lam)), idx, lhs, rhs, lhs / rhs)
            per_lambda_max[lam] = max(per_lambda_max.get(lam, 0.0), lhs / rhs)
    report.summary["empirical_constant"] = report.max_ratio
    values = list(per_lambda_max.values())
    if values and min(values) > 0:
        report.summary["uniformity_ratio"] = max(values) / min(values)
    return report


def lower_order_condition_check(terms, operator, order: int, q: float = 2.0) -> list[float]:
    """Per-term sup over the grid of || A_alpha(x) A^{-(1 - |alpha|/2l - mu)} ||."""
    bounds = []
    for term in terms:
        theta = 1.0 - sum(term.alpha) / (2 * order) - term.mu
        inverse_power = operator.frac_power(-theta).matrix().real
        composed = term.coefficient @ inverse_power
        flat = composed.reshape(-1, composed.shape[-2], composed.shape[-1])
        if q == 2.0:
            norms = np.linalg.svd(flat, compute_uv=False)[:, 0]
            bounds.append(float(np.max(norms)))
        else:
            bounds.append(float(max(matrix_opnorm(mat, q) for mat in flat)))
    return bounds


def _apply_lower(prob: EllipticProblem, u: GridFunction) -> GridFunction:
    values = np.zeros_like(u.values)
    for term in prob.lower:
        du = spectral_derivative(u, term.alpha)
        values = values + np.einsum("...ij,...j->...i", term.coefficient, du.values)
    return GridFunction(prob.grid, prob.space, values)


def solve_perturbed(prob: EllipticProblem, f: GridFunction,
                    tol: float = 1e-10, max_terms: int = 200) -> GridFunction:
    """Neumann-series solve of the full equation around the principal part.

    Iterates g_{k+1} = -L_1 (L_0 + lam)^{-1} g_k until the increment norm
    falls below tol * ||f||; five consecutive non-decreasing increments
    raise the non-contraction error (the spectral shift is too small).
    """
    if not prob.lower:
        return solve_principal(prob, f)
    ones = Weight.one(prob.grid)
    f_norm = weighted_lp_norm(f, 2.0, ones)
    accumulated = f.copy()
    g = f
    previous_norm = math.inf
    non_decreasing = 0
    for _ in range(max_terms):
        g = -1.0 * _apply_lower(prob, solve_principal(prob, g))
        g_norm = weighted_lp_norm(g, 2.0, ones)
        if g_norm <= tol * f_norm:
            accumulated = accumulated + g
            break
        if g_norm >= previous_norm:
            non_decreasing += 1
            if non_decreasing >= 5:
                raise NonContractionError(
                    "perturbation series fails to contract",
                    lam=prob.lam, increment=g_norm,
                )
        else:
            non_decreasing = 0
        previous_norm = g_norm
        accumulated = accumulated + g
    return solve_principal(prob, accumulated)
