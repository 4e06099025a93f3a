"""Periodic grids, vector-valued grid functions, transforms and norms.

Functions live on the torus ``prod_k [-L_k, L_k)`` sampled at ``m_k`` points
per axis, with values in a truncated sequence space of dimension ``N``
normed by ``l_q``.  Sample points sit at cell midpoints (half-cell offset),
so ``x = 0`` is never a sample and power weights stay finite.

Conventions fixed once and used everywhere:

* the forward transform carries the ``1/prod(m_k)`` factor, the inverse is
  unnormalized, so a pure lattice exponential ``exp(i xi0 . x)`` transforms
  to a single unit coefficient in bin ``xi0`` regardless of resolution;
* the frequency lattice is ``xi_j = pi j / L_k`` in standard DFT order;
* spectral derivatives of odd order zero the Nyquist coefficient, keeping
  real samples real;
* integrals are cell-volume Riemann sums (periodic trapezoid), which are
  spectrally accurate for smooth integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class ValueSpace:
    """Truncated sequence space: C^dim with the l_q norm, 1 < q < oo."""

    dim: int
    q: float = 2.0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("value space dimension must be >= 1")
        if not (1.0 < self.q < math.inf):
            raise ValueError("q must lie in (1, oo)")

    def norm(self, values: np.ndarray) -> np.ndarray:
        """l_q norm over the trailing coordinate axis."""
        return np.sum(np.abs(values) ** self.q, axis=-1) ** (1.0 / self.q)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on prod_k [-L_k, L_k), m_k a power of two >= 4."""

    extents: tuple[float, ...]
    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(L) for L in self.extents))
        object.__setattr__(self, "sizes", tuple(int(m) for m in self.sizes))
        if not 1 <= self.n <= 3:
            raise ValueError("dimension must be 1, 2 or 3")
        if len(self.sizes) != self.n:
            raise ValueError("extents and sizes must have equal length")
        if any(L <= 0 for L in self.extents):
            raise ValueError("extents must be strictly positive")
        if any(m < 4 or not _is_power_of_two(m) for m in self.sizes):
            raise ValueError("sizes must be powers of two, at least 4")

    @property
    def n(self) -> int:
        return len(self.extents)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def cell_volume(self) -> float:
        return float(np.prod([2 * L / m for L, m in zip(self.extents, self.sizes)]))

    def axis(self, k: int) -> np.ndarray:
        """Sample coordinates along axis k (cell midpoints)."""
        L, m = self.extents[k], self.sizes[k]
        return -L + (np.arange(m) + 0.5) * (2 * L / m)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*(self.axis(k) for k in range(self.n)), indexing="ij")

    def points(self) -> np.ndarray:
        """All sample points, shape (npoints, n), row-major order."""
        return np.stack([g.ravel() for g in self.mesh()], axis=-1)

    def freq_axis(self, k: int) -> np.ndarray:
        """Frequency lattice along axis k in DFT order: pi * j / L_k."""
        L, m = self.extents[k], self.sizes[k]
        return np.fft.fftfreq(m) * m * (np.pi / L)

    def freq_mesh(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*(self.freq_axis(k) for k in range(self.n)), indexing="ij")

    def nyquist_mask(self, k: int) -> np.ndarray:
        """Boolean mask over axis-k frequency bins selecting the Nyquist bin."""
        m = self.sizes[k]
        mask = np.zeros(m, dtype=bool)
        mask[m // 2] = True
        return mask


@dataclass(frozen=True)
class Anisotropy:
    """Per-axis differentiation orders l with the derived weight kappa."""

    orders: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(l) for l in self.orders))
        if any(l < 1 for l in self.orders):
            raise ValueError("anisotropy orders must be >= 1")

    def kappa(self, alpha) -> float:
        """|alpha : l| = sum_k alpha_k / l_k."""
        if len(alpha) != len(self.orders):
            raise ValueError("multi-index length mismatch")
        return float(sum(a / l for a, l in zip(alpha, self.orders)))


def validate_multi_index(alpha, n: int) -> tuple[int, ...]:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != n or any(a < 0 for a in alpha):
        raise ValueError(f"invalid multi-index {alpha} for dimension {n}")
    return alpha


@dataclass
class GridFunction:
    """Vector-valued function sampled on a grid; values shape sizes + (N,).

    Instances are treated as immutable after construction; all operations
    return new functions.
    """

    grid: Grid
    space: ValueSpace
    values: np.ndarray

    def __post_init__(self):
        expected = self.grid.sizes + (self.space.dim,)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape}, expected {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    @classmethod
    def zero(cls, grid: Grid, space: ValueSpace) -> "GridFunction":
        return cls(grid, space, np.zeros(grid.sizes + (space.dim,), dtype=complex))

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.space, self.values.copy())

    def flat(self) -> np.ndarray:
        """Values as (npoints, N), row-major over grid points."""
        return self.values.reshape(self.grid.npoints, self.space.dim)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return GridFunction(self.grid, self.space, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return GridFunction(self.grid, self.space, self.values - other.values)

    def __mul__(self, scalar) -> "GridFunction":
        return GridFunction(self.grid, self.space, self.values * scalar)

    __rmul__ = __mul__

    def _check_compatible(self, other: "GridFunction"):
        if self.grid != other.grid or self.space != other.space:
            raise ValueError("grid functions live on different grids/spaces")


def forward_transform(u: GridFunction) -> GridFunction:
    """Componentwise DFT; carries the 1/prod(m_k) normalization."""
    axes = tuple(range(u.grid.n))
    return GridFunction(u.grid, u.space, np.fft.fftn(u.values, axes=axes, norm="forward"))


def inverse_transform(u_hat: GridFunction) -> GridFunction:
    axes = tuple(range(u_hat.grid.n))
    return GridFunction(u_hat.grid, u_hat.space, np.fft.ifftn(u_hat.values, axes=axes, norm="forward"))


def derivative_multiplier(grid: Grid, alpha) -> np.ndarray:
    """Lattice table of prod_k (i xi_k)^alpha_k with odd-order Nyquist zeroing."""
    alpha = validate_multi_index(alpha, grid.n)
    factor = np.ones(grid.sizes, dtype=complex)
    for k, a in enumerate(alpha):
        if a == 0:
            continue
        axis_vals = (1j * grid.freq_axis(k)) ** a
        if a % 2 == 1:
            axis_vals[grid.nyquist_mask(k)] = 0.0
        shape = [1] * grid.n
        shape[k] = grid.sizes[k]
        factor = factor * axis_vals.reshape(shape)
    return factor


def spectral_derivative(u: GridFunction, alpha) -> GridFunction:
    """D^alpha u computed through the transform."""
    factor = derivative_multiplier(u.grid, alpha)
    u_hat = forward_transform(u)
    return inverse_transform(GridFunction(u.grid, u.space, u_hat.values * factor[..., None]))


def _weight_values(weight, grid: Grid) -> np.ndarray:
    values = np.asarray(getattr(weight, "values", weight), dtype=float)
    if values.shape != grid.sizes:
        raise ValueError("weight not sampled on this grid")
    return values


def weighted_lp_norm(u: GridFunction, p: float, weight) -> float:
    """Riemann-sum realization of the weighted L_p norm of ||u(x)||_{l_q}."""
    if not (1.0 <= p < math.inf):
        raise ValueError("p must lie in [1, oo)")
    gamma = _weight_values(weight, u.grid)
    pointwise = u.space.norm(u.values)
    return float((np.sum(pointwise**p * gamma) * u.grid.cell_volume) ** (1.0 / p))


def graph_norm_lp(u: GridFunction, operator, theta: float, p: float, weight) -> float:
    """Weighted L_p norm of u measured in the A^theta graph norm of the value space.

    The pointwise graph norm is (|v|^p + |A^theta v|^p)^(1/p), so the L_p
    integral splits into plain-norm integrals of u and A^theta u.
    """
    if theta == 0.0:
        # A^0 = I: the graph norm doubles the plain norm contribution.
        base = weighted_lp_norm(u, p, weight)
        return float((2.0 * base**p) ** (1.0 / p))
    power = operator.frac_power(theta)
    au = GridFunction(u.grid, u.space, power.apply(u.values))
    a = weighted_lp_norm(u, p, weight)
    b = weighted_lp_norm(au, p, weight)
    return float((a**p + b**p) ** (1.0 / p))


def sobolev_lions_norm(u: GridFunction, l, operator, p: float, weight) -> float:
    """Anisotropic norm: graph-norm part plus the n pure derivative terms."""
    orders = l.orders if isinstance(l, Anisotropy) else tuple(int(v) for v in l)
    if len(orders) != u.grid.n or any(v < 1 for v in orders):
        raise ValueError("anisotropy must provide one positive order per axis")
    total = graph_norm_lp(u, operator, 1.0, p, weight)
    for k, lk in enumerate(orders):
        alpha = tuple(lk if j == k else 0 for j in range(u.grid.n))
        total += weighted_lp_norm(spectral_derivative(u, alpha), p, weight)
    return float(total)


def mixed_norm(snapshots, dt: float, p: float, p1: float, weight) -> float:
    """Outer L_{p1} time quadrature of inner weighted L_p space norms.

    Uses the trapezoid rule on the uniform time grid; a single snapshot is
    integrated with plain weight dt.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    norms = np.array([weighted_lp_norm(s, p, weight) for s in snapshots])
    if norms.size == 0:
        raise ValueError("empty snapshot sequence")
    if norms.size == 1:
        quad_weights = np.array([dt])
    else:
        quad_weights = np.full(norms.size, dt)
        quad_weights[0] = quad_weights[-1] = dt / 2
    return float(np.sum(quad_weights * norms**p1) ** (1.0 / p1))


def frequency_l2_norm(u_hat: GridFunction) -> float:
    """Frequency-side counterpart of the unweighted L_2 norm.

    With the forward 1/prod(m_k) factor, Parseval reads
    ||u||_{L_2}^2 = prod(2 L_k) * sum_xi ||u_hat(xi)||_{l_2}^2.
    """
    volume = float(np.prod([2 * L for L in u_hat.grid.extents]))
    return float(np.sqrt(volume * np.sum(np.abs(u_hat.values) ** 2)))


def kappa(alpha, l) -> float:
    orders = l.orders if isinstance(l, Anisotropy) else tuple(l)
    return Anisotropy(orders).kappa(alpha)


def multi_indices_up_to(n: int, degree: int):
    """All multi-indices alpha in N^n with |alpha| <= degree."""
    if n == 1:
        return [(a,) for a in range(degree + 1)]
    result = []
    for a in range(degree + 1):
        for rest in multi_indices_up_to(n - 1, degree - a):
            result.append((a,) + rest)
    return result
