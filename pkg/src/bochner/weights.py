"""Weights on the grid, the A_p detector, and degeneracy substitutions.

The A_p quantity of a weight gamma over a cube Q is

    avg_Q(gamma) * avg_Q(gamma^(-1/(p-1)))^(p-1)

with averages over the grid points inside Q.  The detector takes the max
over a family of cubes; the default family contains all dyadic cubes with
side 2^-g * 2L for g = 0 .. log2(m)-2 at all aligned positions, so every
cube holds at least 4 points per axis.  The half-cell grid offset keeps
power weights finite while preserving their blow-up signature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditionViolation
from .grids import Grid

AP_DEFAULT_THRESHOLD = 100.0


@dataclass(frozen=True)
class Weight:
    """Positive weight sampled on a grid."""

    grid: Grid
    values: np.ndarray
    kind: str = "tabulated"
    exponents: tuple[float, ...] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.sizes:
            raise ValueError("weight values must be sampled on the grid")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("weight values must be strictly positive and finite")

    @classmethod
    def one(cls, grid: Grid) -> "Weight":
        return cls(grid, np.ones(grid.sizes), kind="constant-one")

    @classmethod
    def axis_power(cls, grid: Grid, exponents) -> "Weight":
        """prod_k |x_k|^{a_k}; finite on the half-cell offset grid."""
        exps = tuple(float(a) for a in exponents)
        if len(exps) != grid.n:
            raise ValueError("one exponent per axis required")
        values = np.ones(grid.sizes)
        for k, a in enumerate(exps):
            axis = np.abs(grid.axis(k)) ** a
            shape = [1] * grid.n
            shape[k] = grid.sizes[k]
            values = values * axis.reshape(shape)
        return cls(grid, values, kind="axis-power", exponents=exps)

    @classmethod
    def tabulated(cls, grid: Grid, values) -> "Weight":
        return cls(grid, np.asarray(values, dtype=float), kind="tabulated")


@dataclass(frozen=True)
class Cube:
    """Axis-aligned half-open box prod_k [lo_k, hi_k) in physical coordinates."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]


def dyadic_cube_family(grid: Grid, max_generation: int | None = None) -> list[Cube]:
    """All aligned dyadic cubes with side 2^-g * 2L_k, g = 0 .. log2(m)-2."""
    g_cap = int(np.log2(min(grid.sizes))) - 2
    if max_generation is not None:
        g_cap = min(g_cap, int(max_generation))
    cubes = []
    for g in range(g_cap + 1):
        per_axis = []
        for L in grid.extents:
            side = 2 * L / 2**g
            per_axis.append([(-L + i * side, -L + (i + 1) * side) for i in range(2**g)])
        idx = [0] * grid.n
        while True:
            lo = tuple(per_axis[k][idx[k]][0] for k in range(grid.n))
            hi = tuple(per_axis[k][idx[k]][1] for k in range(grid.n))
            cubes.append(Cube(lo, hi))
            j = grid.n - 1
            while j >= 0:
                idx[j] += 1
                if idx[j] < 2**g:
                    break
                idx[j] = 0
                j -= 1
            if j < 0:
                break
    return cubes


def _cube_slices(grid: Grid, cube: Cube):
    slices = []
    for k in range(grid.n):
        axis = grid.axis(k)
        i0 = int(np.searchsorted(axis, cube.lo[k], side="left"))
        i1 = int(np.searchsorted(axis, cube.hi[k], side="left"))
        if i1 <= i0:
            return None
        slices.append(slice(i0, i1))
    return tuple(slices)


def ap_quantity(weight: Weight, p: float, cube: Cube) -> float:
    """The two-average product for one cube; >= 1 by Jensen."""
    if not (1.0 < p < np.inf):
        raise ValueError("p must lie in (1, oo)")
    slices = _cube_slices(weight.grid, cube)
    if slices is None:
        raise ValueError(f"cube {cube} contains no grid points")
    block = weight.values[slices]
    avg = float(np.mean(block))
    avg_dual = float(np.mean(block ** (-1.0 / (p - 1.0))))
    return avg * avg_dual ** (p - 1.0)


def ap_constant(weight: Weight, p: float, cubes=None) -> float:
    """Max of the A_p quantity over the cube family (default: dyadic family)."""
    if cubes is None:
        cubes = dyadic_cube_family(weight.grid)
    if not cubes:
        raise ValueError("empty cube family")
    return max(ap_quantity(weight, p, cube) for cube in cubes)


def ap_constants_by_generation(weight: Weight, p: float) -> list[float]:
    """Per-generation maxima of the A_p quantity over the dyadic family.

    Generation-g cubes tile the grid into aligned index blocks, so the
    averages reduce to blockwise means.
    """
    if not (1.0 < p < np.inf):
        raise ValueError("p must lie in (1, oo)")
    grid = weight.grid
    g_cap = int(np.log2(min(grid.sizes))) - 2
    gamma = weight.values
    dual = gamma ** (-1.0 / (p - 1.0))
    out = []
    for g in range(g_cap + 1):
        shape = []
        for m in grid.sizes:
            shape += [2**g, m // 2**g]
        mean_axes = tuple(range(1, 2 * grid.n, 2))
        avg = gamma.reshape(shape).mean(axis=mean_axes)
        avg_dual = dual.reshape(shape).mean(axis=mean_axes)
        out.append(float(np.max(avg * avg_dual ** (p - 1.0))))
    return out


# ---------------------------------------------------------------------------
# Degeneracy substitutions tau_k(x_k) = int_0^{x_k} 1/gamma_k


_SHELLS = 48
_PANELS_PER_SHELL = 512
_DIVERGENCE_RATIO = 0.995


def _one_sided_table(gamma, L: float):
    """Nodes 0 < x <= L and tau(x) on (0, L], dyadically refined toward 0.

    1/gamma is integrated by per-panel Simpson over dyadic shells
    [L 2^-(j+1), L 2^-j]; the mass below the innermost shell is recovered
    by geometric extrapolation of the shell totals.  A shell ratio
    approaching 1 signals a non-integrable inverse.
    """
    inv = lambda y: 1.0 / np.asarray(gamma(np.asarray(y, dtype=float)), dtype=float)
    shell_totals = []
    shell_nodes = []
    shell_partials = []
    for j in range(_SHELLS):
        a, b = L * 2.0 ** -(j + 1), L * 2.0**-j
        edges = np.linspace(a, b, _PANELS_PER_SHELL + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        fe, fm = inv(edges), inv(mids)
        panels = (edges[1:] - edges[:-1]) / 6.0 * (fe[:-1] + 4.0 * fm + fe[1:])
        shell_totals.append(float(panels.sum()))
        shell_nodes.append(edges[1:])
        shell_partials.append(np.cumsum(panels))
    ratios = [shell_totals[j + 1] / shell_totals[j] for j in range(_SHELLS - 4, _SHELLS - 1)]
    rho = max(ratios)
    if rho >= _DIVERGENCE_RATIO:
        raise ConditionViolation(
            "inverse degeneracy function is not integrable at 0",
            condition="condition-7.2",
            shell_ratio=float(rho),
        )
    tail = shell_totals[-1] * rho / (1.0 - rho)
    xs_all = []
    tau_all = []
    acc = tail
    for j in reversed(range(_SHELLS)):
        xs_all.append(shell_nodes[j])
        tau_all.append(acc + shell_partials[j])
        acc += shell_totals[j]
    return np.concatenate(xs_all), np.concatenate(tau_all)


@dataclass(frozen=True)
class AxisSubstitution:
    """Monotone map tau(x) on [-L, L] with its numerical inverse."""

    x_nodes: np.ndarray
    tau_nodes: np.ndarray

    def tau_of_x(self, x):
        return np.interp(x, self.x_nodes, self.tau_nodes)

    def x_of_tau(self, tau):
        return np.interp(tau, self.tau_nodes, self.x_nodes)

    @property
    def tau_low(self) -> float:
        return float(self.tau_nodes[0])

    @property
    def tau_high(self) -> float:
        return float(self.tau_nodes[-1])


def axis_substitution(gamma, L: float) -> AxisSubstitution:
    """Build tau(x) = int_0^x 1/gamma for one axis, checking integrability."""
    xp, taup = _one_sided_table(gamma, L)
    xn, taun = _one_sided_table(lambda y: np.asarray(gamma(-y), dtype=float), L)
    x_nodes = np.concatenate([-xn[::-1], [0.0], xp])
    tau_nodes = np.concatenate([-taun[::-1], [0.0], taup])
    if np.any(np.diff(tau_nodes) <= 0):
        raise ConditionViolation(
            "substitution is not strictly increasing",
            condition="condition-7.2",
        )
    return AxisSubstitution(x_nodes, tau_nodes)


@dataclass(frozen=True)
class Substitution:
    """Per-axis coordinate maps, the induced grid and the induced weight."""

    axes: tuple[AxisSubstitution, ...]
    tau_grid: Grid
    centers: tuple[float, ...]
    x_axes: tuple[np.ndarray, ...]
    induced_weight: Weight


def degenerate_substitution(gammas, grid: Grid) -> Substitution:
    """Map the x-grid onto a uniform tau-grid carrying the induced weight.

    The tau domain per axis is [tau(-L), tau(L)] recentred at its midpoint
    so the result is again a symmetric torus; recentring is a translation
    and changes no norm or derivative.
    """
    if len(gammas) != grid.n:
        raise ValueError("one degeneracy function per axis required")
    axes = tuple(axis_substitution(g, L) for g, L in zip(gammas, grid.extents))
    extents = tuple((a.tau_high - a.tau_low) / 2 for a in axes)
    centers = tuple((a.tau_high + a.tau_low) / 2 for a in axes)
    tau_grid = Grid(extents, grid.sizes)
    x_axes = tuple(
        axes[k].x_of_tau(tau_grid.axis(k) + centers[k]) for k in range(grid.n)
    )
    values = np.ones(grid.sizes)
    for k in range(grid.n):
        factor = np.asarray(gammas[k](x_axes[k]), dtype=float)
        shape = [1] * grid.n
        shape[k] = grid.sizes[k]
        values = values * factor.reshape(shape)
    induced = Weight(tau_grid, values, kind="tabulated")
    return Substitution(axes, tau_grid, centers, x_axes, induced)


def check_induced_ap(sub: Substitution, p: float, threshold: float = AP_DEFAULT_THRESHOLD) -> float:
    """A_p screen of the induced weight over the default dyadic family."""
    constant = ap_constant(sub.induced_weight, p)
    if not np.isfinite(constant) or constant > threshold:
        raise ConditionViolation(
            "induced weight fails the A_p screen",
            condition="condition-7.1",
            ap_constant=float(constant),
            threshold=float(threshold),
        )
    return float(constant)
