"""Positive operators on the truncated value space and R-bound estimation.

Two concrete families: the dyadic diagonal operator diag(2^{s i}), i = 1..N,
and real symmetric matrices.  Diagonal operators store only (s, N); every
function of them is computed entrywise in closed form.  Matrix operators
cache their eigendecomposition at construction.

R-bounds use first-moment Rademacher averages.  All reported bounds are
sampled lower bounds, not certified suprema.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError
from .grids import ValueSpace

_SINGULAR_TOL = 1e-13


@dataclass(frozen=True)
class Sector:
    """S_phi = {z : |arg z| <= phi} together with 0."""

    phi: float

    def __post_init__(self):
        if not 0.0 <= self.phi < math.pi:
            raise ValueError("sector angle must lie in [0, pi)")

    def contains(self, z: complex) -> bool:
        z = complex(z)
        if z == 0:
            return True
        return abs(np.angle(z)) <= self.phi + 1e-15


def hermitian_opnorm(eigvals, q: float) -> float:
    """Operator norm of a normal matrix given its eigenvalues; exact for q=2."""
    if q != 2.0:
        raise ValueError("eigenvalue shortcut only valid for q = 2")
    return float(np.max(np.abs(eigvals)))


def matrix_opnorm(mat: np.ndarray, q: float = 2.0, iterations: int = 30) -> float:
    """l_q -> l_q operator norm of a dense matrix.

    Exact for q in {1, 2}; otherwise a deterministic power-method estimate
    (a lower bound) started from the ones vector and every coordinate
    vector.
    """
    mat = np.asarray(mat, dtype=complex)
    if q == 2.0:
        return float(np.linalg.norm(mat, 2))
    if q == 1.0:
        return float(np.max(np.sum(np.abs(mat), axis=0)))
    qd = q / (q - 1.0)

    def dual_map(y, exponent):
        mag = np.abs(y)
        scale = np.where(mag > 0, mag ** (exponent - 1.0), 0.0)
        phase = np.where(mag > 0, y / np.where(mag > 0, mag, 1.0), 0.0)
        return scale * phase

    def qnorm(y, e):
        return np.sum(np.abs(y) ** e) ** (1.0 / e)

    n = mat.shape[1]
    starts = [np.ones(n, dtype=complex)] + [e for e in np.eye(n, dtype=complex)]
    best = 0.0
    for x in starts:
        x = x / qnorm(x, q)
        for _ in range(iterations):
            y = mat @ x
            ny = qnorm(y, q)
            if ny == 0:
                break
            best = max(best, float(ny))
            z = mat.conj().T @ dual_map(y, q)
            nz = qnorm(z, qd)
            if nz == 0:
                break
            x = dual_map(z, qd)
            x = x / qnorm(x, q)
        y = mat @ x
        best = max(best, float(qnorm(y, q)))
    return best


class DiagonalOperator:
    """diag(2^{s i}), i = 1..N, acting on the value space."""

    variant = "diagonal"

    def __init__(self, s: float, space: ValueSpace):
        self.s = float(s)
        self.space = space
        self.entries = 2.0 ** (self.s * np.arange(1, space.dim + 1))

    def __repr__(self):
        return f"DiagonalOperator(s={self.s}, N={self.space.dim})"

    def eigensystem(self):
        return self.entries, None

    def matrix(self) -> np.ndarray:
        return np.diag(self.entries).astype(complex)

    def apply(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values) * self.entries

    def frac_power(self, theta: float) -> "DiagonalOperator":
        return DiagonalOperator(self.s * theta, self.space)

    def resolvent_apply(self, lam: complex, values: np.ndarray) -> np.ndarray:
        denom = self.entries + lam
        if np.min(np.abs(denom)) < _SINGULAR_TOL * max(1.0, abs(lam)):
            raise SingularityError("resolvent at a spectral point", lam=lam)
        return np.asarray(values) / denom

    def resolvent_matrix(self, lam: complex) -> np.ndarray:
        denom = self.entries + lam
        if np.min(np.abs(denom)) < _SINGULAR_TOL * max(1.0, abs(lam)):
            raise SingularityError("resolvent at a spectral point", lam=lam)
        return np.diag(1.0 / denom)

    def opnorm(self, q: float | None = None) -> float:
        # Diagonal matrices have the same norm on every l_q.
        return float(np.max(np.abs(self.entries)))


class MatrixOperator:
    """Real symmetric matrix on the value space; eigendecomposed once."""

    variant = "symmetric"

    def __init__(self, matrix, space: ValueSpace):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (space.dim, space.dim):
            raise ValueError("matrix shape must match the value space dimension")
        if not np.allclose(matrix, matrix.T, rtol=0, atol=1e-12):
            raise ValueError("matrix must be symmetric")
        self.space = space
        self.mat = matrix
        self.eigvals, self.eigvecs = np.linalg.eigh(matrix)

    def __repr__(self):
        return f"MatrixOperator(N={self.space.dim})"

    def eigensystem(self):
        return self.eigvals, self.eigvecs

    def matrix(self) -> np.ndarray:
        return self.mat.astype(complex)

    def apply(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values) @ self.mat.T

    def _require_positive(self):
        if np.min(self.eigvals) <= 0:
            raise ValueError("operation requires a positive definite matrix")

    def frac_power(self, theta: float) -> "MatrixOperator":
        self._require_positive()
        powered = (self.eigvecs * self.eigvals**theta) @ self.eigvecs.T
        return MatrixOperator(powered, self.space)

    def resolvent_apply(self, lam: complex, values: np.ndarray) -> np.ndarray:
        denom = self.eigvals + lam
        if np.min(np.abs(denom)) < _SINGULAR_TOL * max(1.0, abs(lam)):
            raise SingularityError("resolvent at a spectral point", lam=lam)
        coeffs = np.asarray(values) @ self.eigvecs
        return (coeffs / denom) @ self.eigvecs.T

    def resolvent_matrix(self, lam: complex) -> np.ndarray:
        denom = self.eigvals + lam
        if np.min(np.abs(denom)) < _SINGULAR_TOL * max(1.0, abs(lam)):
            raise SingularityError("resolvent at a spectral point", lam=lam)
        return (self.eigvecs / denom) @ self.eigvecs.T

    def opnorm(self, q: float | None = None) -> float:
        if q in (None, 2.0):
            return hermitian_opnorm(self.eigvals, 2.0)
        return matrix_opnorm(self.mat, q)


def ellipticity_constant(operator_or_matrix) -> float:
    """Smallest eigenvalue of a symmetric matrix; positivity is the
    quadratic-form lower bound constant."""
    if isinstance(operator_or_matrix, MatrixOperator):
        return float(np.min(operator_or_matrix.eigvals))
    mat = np.asarray(operator_or_matrix, dtype=float)
    if not np.allclose(mat, mat.T, rtol=0, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    return float(np.min(np.linalg.eigvalsh(mat)))


def sector_samples(phi: float, num_moduli: int = 172, num_angles: int = 33) -> np.ndarray:
    """Log-spaced moduli over [1e-3, 1e6] crossed with an angle grid on [-phi, phi]."""
    moduli = np.logspace(-3, 6, num_moduli)
    angles = np.linspace(-phi, phi, num_angles) if phi > 0 else np.array([0.0])
    return (moduli[:, None] * np.exp(1j * angles)[None, :]).ravel()


def positivity_bound(operator, phi: float, num_moduli: int = 172, num_angles: int = 33) -> float:
    """Sampled sup of (1 + |xi|) ||(A + xi)^(-1)|| over the sector S_phi.

    A lower bound for the positivity constant; exact per sample for q = 2
    since both operator families are normal.
    """
    xis = sector_samples(phi, num_moduli, num_angles)
    eigvals, _ = operator.eigensystem()
    denom = np.abs(eigvals[None, :] + xis[:, None])
    if np.min(denom) < _SINGULAR_TOL:
        raise SingularityError("sector sample hits the spectrum")
    norms = 1.0 / np.min(denom, axis=1)
    return float(np.max((1.0 + np.abs(xis)) * norms))


# ---------------------------------------------------------------------------
# R-bound estimation


@dataclass(frozen=True)
class RBoundEstimate:
    bound: float
    method: str
    family_size: int
    sign_draws: int
    vector_candidates: int
    skipped: int = 0


_EXHAUSTIVE_LIMIT = 12
_SCREEN_SIGNS = 64
_FINALISTS = 32


def _as_matrix_stack(family, dim: int) -> np.ndarray:
    mats = []
    for member in family:
        if hasattr(member, "matrix"):
            mats.append(np.asarray(member.matrix(), dtype=complex))
        else:
            arr = np.asarray(member, dtype=complex)
            if arr.ndim == 0:
                mats.append(arr * np.eye(dim))
            elif arr.ndim == 1:
                mats.append(np.diag(arr))
            else:
                mats.append(arr)
    stack = np.stack(mats)
    if stack.shape[1:] != (dim, dim):
        raise ValueError("family members must act on the given value space")
    return stack


def _sign_patterns(m: int, trials: int, rng) -> tuple[np.ndarray, str]:
    if m <= _EXHAUSTIVE_LIMIT:
        # First sign fixed to +1: global sign flips leave both averages alone.
        count = 2 ** (m - 1)
        bits = (np.arange(count)[:, None] >> np.arange(m - 1)[None, :]) & 1
        signs = np.concatenate([np.ones((count, 1)), 1.0 - 2.0 * bits], axis=1)
        return signs, "exhaustive"
    signs = rng.integers(0, 2, size=(trials, m)) * 2.0 - 1.0
    return signs, "monte-carlo"


def _rademacher_ratios(signs: np.ndarray, transformed: np.ndarray, tuples: np.ndarray, q: float) -> np.ndarray:
    """Ratio of first-moment averages for a batch of vector tuples.

    transformed, tuples: (B, m, N); signs: (S, m).  Returns (B,) ratios.
    """
    num = np.einsum("sj,bjn->bsn", signs, transformed)
    den = np.einsum("sj,bjn->bsn", signs, tuples)
    num_avg = np.mean(np.sum(np.abs(num) ** q, axis=2) ** (1.0 / q), axis=1)
    den_avg = np.mean(np.sum(np.abs(den) ** q, axis=2) ** (1.0 / q), axis=1)
    out = np.zeros_like(num_avg)
    ok = den_avg > 0
    out[ok] = num_avg[ok] / den_avg[ok]
    return out


def r_bound_estimate(
    family,
    trials: int = 2048,
    vectors: int = 10000,
    space: ValueSpace | None = None,
    rng=None,
) -> RBoundEstimate:
    """Estimate the Rademacher bound of an operator family from below.

    Maximizes E||sum r_j T_j u_j|| / E||sum r_j u_j|| over candidate unit
    vector tuples: coordinate tuples, single-member tuples (these recover
    per-member operator norms), and random tuples.  Signs are enumerated
    exhaustively for families of size <= 12, Monte Carlo otherwise.
    """
    family = list(family)
    if not family:
        raise ValueError("empty operator family")
    if space is None:
        for member in family:
            if hasattr(member, "space"):
                space = member.space
                break
        else:
            probe = np.asarray(family[0])
            dim = 1 if probe.ndim == 0 else probe.shape[-1]
            space = ValueSpace(dim, 2.0)
    dim, q = space.dim, space.q
    mats = _as_matrix_stack(family, dim)
    m = len(family)
    rng = np.random.default_rng(0) if rng is None else rng
    signs, method = _sign_patterns(m, trials, rng)

    candidates = []
    eye = np.eye(dim, dtype=complex)
    for c in range(dim):
        candidates.append(np.tile(eye[c], (m, 1)))
    # Single-member tuples: best coordinate column per member.
    col_norms = np.sum(np.abs(mats) ** q, axis=1) ** (1.0 / q)
    best_cols = np.argmax(col_norms, axis=1)
    for j in range(m):
        tup = np.zeros((m, dim), dtype=complex)
        tup[j] = eye[best_cols[j]]
        candidates.append(tup)
    if m <= 1024 and q == 2.0:
        for j in range(m):
            _, _, vh = np.linalg.svd(mats[j])
            tup = np.zeros((m, dim), dtype=complex)
            tup[j] = vh[0].conj()
            candidates.append(tup)
    deterministic = np.stack(candidates)

    def transform(tuples):
        return np.einsum("jan,bjn->bja", mats, tuples)

    screen_signs = signs[: min(_SCREEN_SIGNS, signs.shape[0])]
    best_tuples = []
    best_scores = []

    def consider(tuples):
        ratios = _rademacher_ratios(screen_signs, transform(tuples), tuples, q)
        order = np.argsort(ratios)[::-1][:_FINALISTS]
        best_tuples.append(tuples[order])
        best_scores.append(ratios[order])

    consider(deterministic)
    chunk = max(1, min(256, int(2_000_000 // max(1, m * dim))))
    remaining = vectors
    while remaining > 0:
        b = min(chunk, remaining)
        raw = rng.standard_normal((b, m, dim)) + 1j * rng.standard_normal((b, m, dim))
        raw /= np.sum(np.abs(raw) ** q, axis=2, keepdims=True) ** (1.0 / q)
        consider(raw)
        remaining -= b

    finalists = np.concatenate(best_tuples)
    scores = np.concatenate(best_scores)
    order = np.argsort(scores)[::-1][:_FINALISTS]
    finalists = finalists[order]
    final_ratios = _rademacher_ratios(signs, transform(finalists), finalists, q)
    bound = float(np.max(final_ratios)) if final_ratios.size else 0.0
    return RBoundEstimate(
        bound=bound,
        method=method,
        family_size=m,
        sign_draws=int(signs.shape[0]),
        vector_candidates=int(vectors + deterministic.shape[0]),
    )


def matrix_rpositivity_check(operator: MatrixOperator, lam_samples, q: float) -> float:
    """Max over samples and rows of the l_q row aggregate of lam (A + lam)^(-1).

    Uses a direct (eigendecomposition) solve rather than adjugate entries;
    the two agree analytically and the solve is well conditioned.
    """
    if not isinstance(operator, MatrixOperator):
        raise ValueError("the row-aggregate check applies to the matrix variant")
    operator._require_positive()
    worst = 0.0
    for lam in lam_samples:
        b = lam * operator.resolvent_matrix(lam)
        rows = np.sum(np.abs(b) ** q, axis=1) ** (1.0 / q)
        worst = max(worst, float(np.max(rows)))
    return worst
