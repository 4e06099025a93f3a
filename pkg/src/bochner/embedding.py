"""Numerical checks of the anisotropic embedding inequality.

The central object is the operator symbol

    Psi_h(xi) = |xi|^alpha A^{1-kappa-mu} h^{-mu} [A + sum_k |xi_k|^{l_k} + 1/h]^{-1}

with |xi|^alpha = prod_k |xi_k|^{alpha_k} and kappa = sum alpha_k / l_k.
Its lattice sup feeds the uniformity check, and the two report operations
measure the two-term bound

    ||D^alpha u||_{E(A^{1-kappa-mu}) part} <= C_mu [h^mu ||u||_Y + h^{-(1-mu)} ||u||_X]

and its multiplicative consequence at h = ||u||_X / ||u||_Y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import (
    Anisotropy,
    GridFunction,
    graph_norm_lp,
    kappa as kappa_of,
    sobolev_lions_norm,
    spectral_derivative,
    validate_multi_index,
    weighted_lp_norm,
)
from .reports import EstimateReport
from .symbols import DIAGONAL, OperatorSymbol

H_MAX_DEFAULT = 1.0

EMBED_COLUMNS = ("mu", "h", "lhs", "rhs", "ratio")


@dataclass(frozen=True)
class EmbeddingCase:
    """One instance of the embedding estimate's parameters.

    ``weight`` may stay None when only the symbol is needed; the report
    operations require it.
    """

    l: tuple[int, ...]
    alpha: tuple[int, ...]
    mu: float
    operator: object
    p: float = 2.0
    weight: object = None
    h: float = H_MAX_DEFAULT

    def __post_init__(self):
        object.__setattr__(self, "l", Anisotropy(self.l).orders)
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        if len(self.alpha) != len(self.l) or any(a < 0 for a in self.alpha):
            raise ValueError("invalid derivative multi-index")
        if self.kappa > 1.0 + 1e-12:
            raise ValueError("|alpha : l| must not exceed 1")
        if not (-1e-12 <= self.mu <= 1.0 - self.kappa + 1e-12):
            raise ValueError(f"mu must lie in [0, {1.0 - self.kappa}]")
        if self.h <= 0:
            raise ValueError("h must be positive")
        if not (1.0 < self.p < math.inf):
            raise ValueError("p must lie in (1, oo)")

    @property
    def kappa(self) -> float:
        return kappa_of(self.alpha, self.l)

    @property
    def target_power(self) -> float:
        return 1.0 - self.kappa - self.mu


def psi_h_symbol(case: EmbeddingCase, h: float | None = None) -> OperatorSymbol:
    """The uniformly bounded embedding symbol for one parameter instance."""
    h_val = float(case.h if h is None else h)
    if h_val <= 0:
        raise ValueError("h must be positive")
    eigvals, basis = case.operator.eigensystem()
    theta = case.target_power
    alpha, orders = case.alpha, case.l

    def evaluate(xis, grid):
        arrays = np.broadcast_arrays(*xis)
        amp = np.ones(arrays[0].shape)
        for a, arr in zip(alpha, arrays):
            if a:
                amp = amp * np.abs(arr) ** a
        s = np.zeros(arrays[0].shape)
        for lk, arr in zip(orders, arrays):
            s = s + np.abs(arr) ** lk
        denom = eigvals + (s + 1.0 / h_val)[..., None]
        return (amp * h_val ** (-case.mu))[..., None] * eigvals**theta / denom

    return OperatorSymbol(
        case.operator.space, DIAGONAL, evaluate, basis=basis,
        ndim=len(alpha), name=f"psi(h={h_val})",
    )


def psi_sup_on_lattice(case: EmbeddingCase, grid, h: float | None = None, q: float = 2.0) -> float:
    return float(np.max(psi_h_symbol(case, h).opnorms_on(grid, q)))


def embedding_lhs(u: GridFunction, case: EmbeddingCase) -> float:
    """Graph-norm size of D^alpha u in the interpolation target space."""
    if case.weight is None:
        raise ValueError("the report operations need a weight on the case")
    du = spectral_derivative(u, validate_multi_index(case.alpha, u.grid.n))
    return graph_norm_lp(du, case.operator, case.target_power, case.p, case.weight)


def embedding_norms(u: GridFunction, case: EmbeddingCase) -> tuple[float, float]:
    """(||u||_X, ||u||_Y): plain weighted norm and the anisotropic norm."""
    if case.weight is None:
        raise ValueError("the report operations need a weight on the case")
    x = weighted_lp_norm(u, case.p, case.weight)
    y = sobolev_lions_norm(u, case.l, case.operator, case.p, case.weight)
    return x, y


def embedding_inequality_report(u: GridFunction, case: EmbeddingCase, h_sweep) -> EstimateReport:
    """Two-sided table of the h-bracket inequality for one function.

    Rows (mu, h, lhs, rhs, ratio); the empirical constant is the max ratio.
    A zero function is skipped (empty report).
    """
    report = EstimateReport(kind="embed", columns=EMBED_COLUMNS)
    if not np.any(u.values):
        report.summary["skipped_zero_function"] = 1
        return report
    lhs = embedding_lhs(u, case)
    x_norm, y_norm = embedding_norms(u, case)
    for h in h_sweep:
        h = float(h)
        rhs = h**case.mu * y_norm + h ** -(1.0 - case.mu) * x_norm
        report.add(case.mu, h, lhs, rhs, lhs / rhs)
    report.summary["empirical_constant"] = report.max_ratio
    return report


def corpus_embedding_constant(corpus, case: EmbeddingCase, h_sweep) -> float:
    """Empirical constant: max ratio over the h sweep and the corpus."""
    best = 0.0
    for u in corpus:
        rep = embedding_inequality_report(u, case, h_sweep)
        if rep.rows:
            best = max(best, rep.max_ratio)
    return best


def multiplicative_estimate_report(u: GridFunction, case: EmbeddingCase,
                                   h_max: float = H_MAX_DEFAULT) -> EstimateReport:
    """Single-point report of the product-form estimate at h = X/Y.

    ``ratio`` is lhs / (Y^{1-mu} X^mu) as in the product inequality; since
    the bracket at h = X/Y equals exactly 2 Y^{1-mu} X^mu, the comparable
    sweep quantity is ``bracket_ratio`` = ratio / 2.
    """
    x_norm, y_norm = embedding_norms(u, case)
    if y_norm == 0.0:
        raise ValueError("zero function has no multiplicative ratio")
    h_star = x_norm / y_norm
    lhs = embedding_lhs(u, case)
    denom = y_norm ** (1.0 - case.mu) * x_norm**case.mu
    ratio = lhs / denom
    report = EstimateReport(kind="embed-multiplicative", columns=EMBED_COLUMNS)
    report.add(case.mu, h_star, lhs, denom, ratio)
    report.summary["bracket_ratio"] = ratio / 2.0
    report.summary["h_star"] = h_star
    report.summary["h_star_within_range"] = bool(h_star <= h_max)
    return report
