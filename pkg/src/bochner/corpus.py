"""Random band-limited test functions and forcings.

Corpus members are trigonometric polynomials defined by lattice-index
coefficient dictionaries, so the same continuum function can be sampled on
any grid refinement (the forward transform's 1/prod(m_k) factor makes the
coefficients resolution independent).  Frequency support stays in the
inner part of the lattice, keeping spectral derivatives exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid, GridFunction, ValueSpace


def synthesize(grid: Grid, space: ValueSpace, coefficients: dict) -> GridFunction:
    """Build sum_j c_j e^{i pi j . x / L} from integer-index coefficients."""
    spectrum = np.zeros(grid.sizes + (space.dim,), dtype=complex)
    for index, vec in coefficients.items():
        pos = tuple(int(j) % m for j, m in zip(index, grid.sizes))
        spectrum[pos] += np.asarray(vec, dtype=complex)
    values = np.fft.ifftn(spectrum, axes=tuple(range(grid.n)), norm="forward")
    return GridFunction(grid, space, values)


def random_coefficients(space: ValueSpace, rng, n: int, index_bound: int, num_modes: int = 8) -> dict:
    """Random coefficient dictionary supported on |j_k| < index_bound."""
    coeffs: dict = {}
    for _ in range(num_modes):
        index = tuple(int(rng.integers(-index_bound + 1, index_bound)) for _ in range(n))
        vec = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
        if index in coeffs:
            coeffs[index] = coeffs[index] + vec
        else:
            coeffs[index] = vec
    return coeffs


def random_band_limited(grid: Grid, space: ValueSpace, rng, band: float = 0.25,
                        num_modes: int = 8) -> GridFunction:
    """Random trig polynomial with frequency support in the inner lattice."""
    bound = max(2, int(band * min(grid.sizes) / 2))
    return synthesize(grid, space, random_coefficients(space, rng, grid.n, bound, num_modes))


@dataclass(frozen=True)
class Mode:
    coefficient: tuple  # value-space vector
    index: tuple[int, ...]  # integer lattice index, frequency pi j / L
    omega: float  # time frequency of the envelope exp(i omega t)


@dataclass(frozen=True)
class ModalForcing:
    """f(t, x) = sum_r c_r e^{i xi_r . x} e^{i omega_r t}, xi_r on the lattice.

    Closed form in (t, x), so it can be sampled on any coordinate image,
    which the degenerate-substitution path needs.
    """

    extents: tuple[float, ...]
    modes: tuple[Mode, ...]

    def sample_on_axes(self, times, axes, space: ValueSpace) -> np.ndarray:
        """Sample on a tensor grid given per-axis coordinate arrays.

        Returns shape (len(times),) + mesh shape + (N,).
        """
        times = np.asarray(times, dtype=float)
        shape = tuple(len(a) for a in axes)
        out = np.zeros((times.size,) + shape + (space.dim,), dtype=complex)
        for mode in self.modes:
            xi = tuple(np.pi * j / L for j, L in zip(mode.index, self.extents))
            spatial = np.ones(shape, dtype=complex)
            for k, (axis, x_k) in enumerate(zip(axes, xi)):
                factor = np.exp(1j * x_k * np.asarray(axis))
                view = [1] * len(shape)
                view[k] = shape[k]
                spatial = spatial * factor.reshape(view)
            envelope = np.exp(1j * mode.omega * times)
            vec = np.asarray(mode.coefficient, dtype=complex)
            out += envelope[(slice(None),) + (None,) * (len(shape) + 1)] * spatial[None, ..., None] * vec
        return out

    def sample_series(self, grid: Grid, space: ValueSpace, times) -> np.ndarray:
        return self.sample_on_axes(times, [grid.axis(k) for k in range(grid.n)], space)


def random_modal_forcing(space: ValueSpace, rng, n: int, extents, index_bound: int,
                         num_modes: int = 6, omega_scale: float = 2.0) -> ModalForcing:
    modes = []
    for _ in range(num_modes):
        index = tuple(int(rng.integers(-index_bound + 1, index_bound)) for _ in range(n))
        vec = tuple((rng.standard_normal() + 1j * rng.standard_normal()) for _ in range(space.dim))
        omega = float(omega_scale * rng.standard_normal())
        modes.append(Mode(coefficient=vec, index=index, omega=omega))
    return ModalForcing(extents=tuple(float(L) for L in extents), modes=tuple(modes))
