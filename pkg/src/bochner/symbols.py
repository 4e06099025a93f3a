"""Operator-valued Fourier multipliers.

A symbol maps lattice frequencies to operators on the value space and is
applied through the transform pair.  Three table kinds keep application
cheap: ``scalar`` (c(xi) I), ``diagonal`` (entries, optionally conjugated
by a fixed orthonormal basis, covering resolvent families of both operator
variants) and ``matrix``.

The zero frequency needs a convention on a discrete lattice: resolvent-type
symbols evaluate there directly (the operator part is positive), while
homogeneous scalar symbols such as the half-space sign set the DC bin to 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularityError
from .grids import Grid, GridFunction, ValueSpace, forward_transform, inverse_transform, validate_multi_index
from .operators import RBoundEstimate, r_bound_estimate

SCALAR = "scalar"
DIAGONAL = "diagonal"
MATRIX = "matrix"


@dataclass
class OperatorSymbol:
    space: ValueSpace
    kind: str
    evaluate: object
    basis: np.ndarray | None = None
    ndim: int | None = None
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def table_at(self, xis, grid: Grid | None = None) -> np.ndarray:
        """Evaluate on broadcastable frequency arrays; checks finiteness."""
        table = np.asarray(self.evaluate(xis, grid), dtype=complex)
        if not np.all(np.isfinite(table)):
            bad = np.argwhere(~np.isfinite(table))[0]
            point = tuple(float(np.broadcast_arrays(*xis)[k][tuple(bad[: len(xis)])]) for k in range(len(xis)))
            raise SingularityError(f"symbol {self.name or '<anon>'} not finite", xi=point)
        return table

    def table_on(self, grid: Grid) -> np.ndarray:
        if grid not in self._cache:
            self._cache[grid] = self.table_at(grid.freq_mesh(), grid)
        return self._cache[grid]

    def opnorms_on(self, grid: Grid, q: float = 2.0) -> np.ndarray:
        """Pointwise operator norms over the lattice (exact for q = 2)."""
        table = self.table_on(grid)
        if self.kind == SCALAR:
            return np.abs(table)
        if self.kind == DIAGONAL:
            if self.basis is None or q == 2.0:
                return np.max(np.abs(table), axis=-1)
            raise ValueError("rotated diagonal opnorms only available for q = 2")
        if q != 2.0:
            raise ValueError("matrix table opnorms only available for q = 2")
        return np.linalg.norm(table, ord=2, axis=(-2, -1))


def apply_symbol(symbol: OperatorSymbol, u: GridFunction) -> GridFunction:
    """F^{-1}[ M(xi) (F u)(xi) ]; linear in u."""
    if symbol.space != u.space:
        raise ValueError("symbol and function value spaces differ")
    table = symbol.table_on(u.grid)
    u_hat = forward_transform(u).values
    if symbol.kind == SCALAR:
        out = u_hat * table[..., None]
    elif symbol.kind == DIAGONAL:
        if symbol.basis is None:
            out = u_hat * table
        else:
            v = symbol.basis
            out = ((u_hat @ v) * table) @ v.T
    elif symbol.kind == MATRIX:
        out = np.einsum("...ij,...j->...i", table, u_hat)
    else:
        raise ValueError(f"unknown symbol kind {symbol.kind}")
    return inverse_transform(GridFunction(u.grid, u.space, out))


def symbol_product(m1: OperatorSymbol, m2: OperatorSymbol) -> OperatorSymbol:
    """Pointwise product for scalar or co-diagonal families."""
    if m1.space != m2.space:
        raise ValueError("value spaces differ")
    same_basis = (
        (m1.basis is None and m2.basis is None)
        or (m1.basis is not None and m2.basis is not None and np.array_equal(m1.basis, m2.basis))
    )

    def evaluate(xis, grid):
        t1 = m1.table_at(xis, grid)
        t2 = m2.table_at(xis, grid)
        if m1.kind == SCALAR and m2.kind == SCALAR:
            return t1 * t2
        if m1.kind == SCALAR:
            return t1[..., None] * t2
        if m2.kind == SCALAR:
            return t1 * t2[..., None]
        return t1 * t2

    if m1.kind == SCALAR and m2.kind == SCALAR:
        kind, basis = SCALAR, None
    elif {m1.kind, m2.kind} <= {SCALAR, DIAGONAL} and same_basis:
        kind = DIAGONAL
        basis = m1.basis if m1.basis is not None else m2.basis
    else:
        raise ValueError("product only defined for scalar / co-diagonal symbols")
    return OperatorSymbol(m1.space, kind, evaluate, basis=basis, ndim=m1.ndim or m2.ndim,
                          name=f"({m1.name})*({m2.name})")


# ---------------------------------------------------------------------------
# Closed-form families


def identity_symbol(space: ValueSpace, ndim: int = 1) -> OperatorSymbol:
    def evaluate(xis, grid):
        return np.ones(np.broadcast(*xis).shape, dtype=complex)

    return OperatorSymbol(space, SCALAR, evaluate, ndim=ndim, name="identity")


def scalar_symbol(space: ValueSpace, fn, ndim: int = 1, name: str = "scalar") -> OperatorSymbol:
    def evaluate(xis, grid):
        return np.asarray(fn(*xis), dtype=complex)

    return OperatorSymbol(space, SCALAR, evaluate, ndim=ndim, name=name)


def hilbert_symbol(space: ValueSpace) -> OperatorSymbol:
    """One-dimensional conjugate-function symbol -i sign(xi), 0 at xi = 0."""
    return scalar_symbol(space, lambda xi: -1j * np.sign(xi), ndim=1, name="sign")


def riesz_like_symbol(space: ValueSpace) -> OperatorSymbol:
    return scalar_symbol(space, lambda xi: xi / (1.0 + np.abs(xi)), ndim=1, name="riesz-like")


def power_symbol(space: ValueSpace, alpha) -> OperatorSymbol:
    """prod_k (i xi_k)^{alpha_k}, matching the spectral-derivative Nyquist rule."""
    alpha = tuple(int(a) for a in alpha)

    def evaluate(xis, grid):
        arrays = np.broadcast_arrays(*xis)
        out = np.ones(arrays[0].shape, dtype=complex)
        for k, a in enumerate(alpha):
            if a == 0:
                continue
            factor = (1j * arrays[k]) ** a
            if a % 2 == 1 and grid is not None:
                nyq = -np.pi * (grid.sizes[k] // 2) / grid.extents[k]
                factor = np.where(arrays[k] == nyq, 0.0, factor)
            out = out * factor
        return out

    return OperatorSymbol(space, SCALAR, evaluate, ndim=len(alpha), name=f"power{alpha}")


def _principal_values(coeffs: dict, xis) -> np.ndarray:
    arrays = np.broadcast_arrays(*xis)
    total = np.zeros(arrays[0].shape, dtype=complex)
    for alpha, a in coeffs.items():
        term = np.full(arrays[0].shape, complex(a))
        for k, ak in enumerate(alpha):
            if ak:
                term = term * (1j * arrays[k]) ** ak
        total = total + term
    return total


def resolvent_symbol(space: ValueSpace, operator, coeffs: dict, lam: complex) -> OperatorSymbol:
    """(A + K(xi) + lam)^(-1) with K the principal polynomial of the coefficients."""
    eigvals, basis = operator.eigensystem()
    ndim = len(next(iter(coeffs)))

    def evaluate(xis, grid):
        k_vals = _principal_values(coeffs, xis)
        return 1.0 / (eigvals + (k_vals + lam)[..., None])

    return OperatorSymbol(space, DIAGONAL, evaluate, basis=basis, ndim=ndim, name="resolvent")


def parabolic_phi_symbol(space: ValueSpace, operator, coeffs: dict, lam: complex) -> OperatorSymbol:
    """lam (A + K(xi) + lam)^(-1), the resolvent family of the full-space generator."""
    eigvals, basis = operator.eigensystem()
    ndim = len(next(iter(coeffs)))

    def evaluate(xis, grid):
        k_vals = _principal_values(coeffs, xis)
        return lam / (eigvals + (k_vals + lam)[..., None])

    return OperatorSymbol(space, DIAGONAL, evaluate, basis=basis, ndim=ndim, name="phi")


# ---------------------------------------------------------------------------
# Projections


def _axis_half_space(u: GridFunction, k: int) -> GridFunction:
    mask = u.grid.freq_axis(k) > 0
    shape = [1] * u.grid.n + [1]
    shape[k] = u.grid.sizes[k]
    spec = np.fft.fft(u.values, axis=k, norm="forward")
    spec = spec * mask.reshape(shape)
    return GridFunction(u.grid, u.space, np.fft.ifft(spec, axis=k, norm="forward"))


def riesz_projection(u: GridFunction) -> GridFunction:
    """Positive-orthant frequency cutoff, composed axis by axis."""
    out = u
    for k in range(u.grid.n):
        out = _axis_half_space(out, k)
    return out


def _box_mask(grid: Grid, a, b) -> np.ndarray:
    mask = np.ones(grid.sizes, dtype=bool)
    for k in range(grid.n):
        axis = grid.freq_axis(k)
        keep = (axis > a[k]) & (axis < b[k])
        shape = [1] * grid.n
        shape[k] = grid.sizes[k]
        mask &= keep.reshape(shape)
    return mask


def char_projection(u: GridFunction, a, b) -> GridFunction:
    """Frequency cutoff to the open box prod_k (a_k, b_k); empty box gives 0."""
    a = tuple(float(v) for v in a)
    b = tuple(float(v) for v in b)
    if len(a) != u.grid.n or len(b) != u.grid.n:
        raise ValueError("corner dimension mismatch")
    u_hat = forward_transform(u)
    masked = u_hat.values * _box_mask(u.grid, a, b)[..., None]
    return inverse_transform(GridFunction(u.grid, u.space, masked))


def lower_corner_projection(u: GridFunction, a) -> GridFunction:
    """Cutoff to prod_k (a_k, oo); one factor of the box projection."""
    b = tuple(np.inf for _ in range(u.grid.n))
    return char_projection(u, a, b)


def upper_corner_projection(u: GridFunction, b) -> GridFunction:
    a = tuple(-np.inf for _ in range(u.grid.n))
    return char_projection(u, a, b)


# ---------------------------------------------------------------------------
# Dyadic partition and piecewise-constant approximation


@dataclass(frozen=True)
class DyadicCell:
    """Subcell of prod_k [2^{j_k}, 2^{j_k+1}) after 2^level splits per axis."""

    j: tuple[int, ...]
    l: tuple[int, ...]
    level: int
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def contains(self, point) -> bool:
        return all(lo <= x < hi for x, lo, hi in zip(point, self.lo, self.hi))

    @property
    def anchor(self) -> tuple[float, ...]:
        return self.lo


def _axis_cells(xi_values: np.ndarray, level: int):
    positive = np.unique(xi_values[xi_values > 0])
    cells = []
    if positive.size == 0:
        return cells
    j_min = int(np.floor(np.log2(positive[0])))
    j_max = int(np.floor(np.log2(positive[-1])))
    for j in range(j_min, j_max + 1):
        width = 2.0**j / 2**level
        for l in range(2**level):
            lo = 2.0**j + l * width
            hi = lo + width
            if np.any((positive >= lo) & (positive < hi)):
                cells.append((j, l, lo, hi))
    return cells


def dyadic_partition(grid: Grid, level: int = 0) -> list[DyadicCell]:
    """Cells covering every strictly positive lattice frequency exactly once."""
    if level < 0:
        raise ValueError("level must be >= 0")
    per_axis = [_axis_cells(grid.freq_axis(k), level) for k in range(grid.n)]
    cells = []
    idx = [0] * grid.n
    if any(not axis for axis in per_axis):
        return cells
    while True:
        chosen = [per_axis[k][idx[k]] for k in range(grid.n)]
        cells.append(
            DyadicCell(
                j=tuple(c[0] for c in chosen),
                l=tuple(c[1] for c in chosen),
                level=level,
                lo=tuple(c[2] for c in chosen),
                hi=tuple(c[3] for c in chosen),
            )
        )
        k = grid.n - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < len(per_axis[k]):
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            break
    return cells


def piecewise_const_approx(symbol: OperatorSymbol, level: int) -> OperatorSymbol:
    """Freeze the symbol on each dyadic subcell at the cell's anchor value.

    The anchor of the subcell with indices (j, r) is
    2^{j_k} + r_k 2^{j_k - level} per axis; outside the open positive
    orthant the approximation is zero.
    """
    if level < 0:
        raise ValueError("level must be >= 0")

    def evaluate(xis, grid):
        arrays = [np.asarray(a, dtype=float) for a in np.broadcast_arrays(*xis)]
        inside = np.ones(arrays[0].shape, dtype=bool)
        anchors = []
        for a in arrays:
            inside &= a > 0
            safe = np.where(a > 0, a, 1.0)
            j = np.floor(np.log2(safe))
            base = 2.0**j
            r = np.clip(np.floor((safe - base) / (base / 2**level)), 0, 2**level - 1)
            anchors.append(base + r * base / 2**level)
        table = symbol.table_at(tuple(anchors), None)
        extra = table.ndim - inside.ndim
        mask = inside.reshape(inside.shape + (1,) * extra)
        return np.where(mask, table, 0.0)

    return OperatorSymbol(
        symbol.space, symbol.kind, evaluate, basis=symbol.basis, ndim=symbol.ndim,
        name=f"pc{level}[{symbol.name}]",
    )


# ---------------------------------------------------------------------------
# Mikhlin-type certificate


@dataclass(frozen=True)
class MikhlinCertificate:
    per_beta: dict
    total: float
    bounded: bool
    points: int


def _zero_one_multi_indices(n: int):
    out = []
    for mask in range(2**n):
        out.append(tuple((mask >> k) & 1 for k in range(n)))
    return sorted(out)


def _eval_grid(n: int, lo: float, hi: float, points_per_sign: int) -> tuple[np.ndarray, ...]:
    axis = np.logspace(np.log2(lo), np.log2(hi), points_per_sign, base=2.0)
    axis = np.concatenate([-axis[::-1], axis])
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    return tuple(g.ravel() for g in grids)


def _derivative_table(symbol: OperatorSymbol, pts, beta, rel_step: float) -> np.ndarray:
    axis = next((k for k, b in enumerate(beta) if b), None)
    if axis is None:
        return symbol.table_at(pts, None)
    rest = tuple(0 if k == axis else b for k, b in enumerate(beta))
    h = rel_step * np.abs(pts[axis])
    plus = tuple(p + h if k == axis else p for k, p in enumerate(pts))
    minus = tuple(p - h if k == axis else p for k, p in enumerate(pts))
    upper = _derivative_table(symbol, plus, rest, rel_step)
    lower = _derivative_table(symbol, minus, rest, rel_step)
    denom = (2.0 * h).reshape(h.shape + (1,) * (upper.ndim - h.ndim))
    return (upper - lower) / denom


def _as_family(symbol: OperatorSymbol, table: np.ndarray):
    if symbol.kind == SCALAR:
        return [table[p] for p in range(table.shape[0])]
    if symbol.kind == DIAGONAL:
        if symbol.basis is None:
            return [table[p] for p in range(table.shape[0])]
        v = symbol.basis
        return [(v * table[p]) @ v.T for p in range(table.shape[0])]
    return [table[p] for p in range(table.shape[0])]


def mikhlin_certificate(
    symbol: OperatorSymbol,
    n: int | None = None,
    *,
    lo: float = 2.0**-8,
    hi: float = 2.0**8,
    points_per_sign: int = 33,
    rel_step: float = 1e-4,
    isotropic: bool = False,
    trials: int = 2048,
    vectors: int | None = None,
    rng=None,
) -> MikhlinCertificate:
    """Estimate the per-index constants of the 0/1 derivative condition.

    For each 0/1 multi-index beta the family {xi^beta D^beta M(xi)} over a
    log-spaced grid avoiding 0 is formed (central differences with relative
    step) and its Rademacher bound estimated; the certificate is the sum of
    the per-beta estimates.  With ``isotropic`` the weight |xi|^{|beta|}
    replaces xi^beta.  A falsifier for bad symbols, not a proof.
    """
    n = n if n is not None else (symbol.ndim or 1)
    pts = _eval_grid(n, lo, hi, points_per_sign)
    m = pts[0].size
    if vectors is None:
        vectors = int(max(512, min(10000, 2_000_000 // max(1, m))))
    per_beta = {}
    bounded = True
    total = 0.0
    rng = np.random.default_rng(0) if rng is None else rng
    for beta in _zero_one_multi_indices(n):
        try:
            table = _derivative_table(symbol, pts, beta, rel_step)
        except SingularityError:
            per_beta[beta] = None
            bounded = False
            continue
        if isotropic:
            radius = np.sqrt(sum(p**2 for p in pts))
            weight = radius ** sum(beta)
        else:
            weight = np.ones(m)
            for k, b in enumerate(beta):
                if b:
                    weight = weight * pts[k]
        table = table * weight.reshape((m,) + (1,) * (table.ndim - 1))
        if not np.all(np.isfinite(table)):
            per_beta[beta] = None
            bounded = False
            continue
        estimate = r_bound_estimate(
            _as_family(symbol, table), trials=trials, vectors=vectors,
            space=symbol.space, rng=rng,
        )
        per_beta[beta] = estimate
        total += estimate.bound
    return MikhlinCertificate(per_beta=per_beta, total=total, bounded=bounded, points=m)
