"""Flat binary layout for grid functions, weights and time series.

Grid function record: little-endian header ``n:u32, m_k:u64*n, L_k:f64*n,
N:u64, q:f64`` followed by row-major (point, coordinate) complex pairs as
float64 (real, imaginary).  Weights use the same record without the
value-space fields, with zero imaginary parts.  A time series is a
``count:u64, times:f64*count`` header followed by count records.
"""

from __future__ import annotations

import struct

import numpy as np

from .grids import Grid, GridFunction, ValueSpace
from .weights import Weight


def _pack_header(grid: Grid, space: ValueSpace | None) -> bytes:
    parts = [struct.pack("<I", grid.n)]
    parts.append(np.asarray(grid.sizes, dtype="<u8").tobytes())
    parts.append(np.asarray(grid.extents, dtype="<f8").tobytes())
    if space is not None:
        parts.append(struct.pack("<Q", space.dim))
        parts.append(struct.pack("<d", space.q))
    return b"".join(parts)


def _unpack_header(buf: memoryview, offset: int, with_space: bool):
    (n,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    sizes = np.frombuffer(buf, dtype="<u8", count=n, offset=offset)
    offset += 8 * n
    extents = np.frombuffer(buf, dtype="<f8", count=n, offset=offset)
    offset += 8 * n
    grid = Grid(tuple(float(L) for L in extents), tuple(int(m) for m in sizes))
    space = None
    if with_space:
        (dim,) = struct.unpack_from("<Q", buf, offset)
        offset += 8
        (q,) = struct.unpack_from("<d", buf, offset)
        offset += 8
        space = ValueSpace(int(dim), float(q))
    return grid, space, offset


def _pack_complex(values: np.ndarray) -> bytes:
    flat = np.asarray(values, dtype=complex).ravel()
    pairs = np.empty(flat.size * 2, dtype="<f8")
    pairs[0::2] = flat.real
    pairs[1::2] = flat.imag
    return pairs.tobytes()


def _unpack_complex(buf: memoryview, offset: int, count: int):
    pairs = np.frombuffer(buf, dtype="<f8", count=2 * count, offset=offset)
    return pairs[0::2] + 1j * pairs[1::2], offset + 16 * count


def dump_grid_function(u: GridFunction) -> bytes:
    return _pack_header(u.grid, u.space) + _pack_complex(u.values)


def load_grid_function_from(buf: memoryview, offset: int = 0):
    grid, space, offset = _unpack_header(buf, offset, with_space=True)
    count = grid.npoints * space.dim
    flat, offset = _unpack_complex(buf, offset, count)
    values = flat.reshape(grid.sizes + (space.dim,))
    return GridFunction(grid, space, values), offset


def load_grid_function(data: bytes) -> GridFunction:
    u, _ = load_grid_function_from(memoryview(data))
    return u


def dump_weight(w: Weight) -> bytes:
    return _pack_header(w.grid, None) + _pack_complex(w.values.astype(complex))


def load_weight(data: bytes) -> Weight:
    buf = memoryview(data)
    grid, _, offset = _unpack_header(buf, 0, with_space=False)
    flat, _ = _unpack_complex(buf, offset, grid.npoints)
    if np.max(np.abs(flat.imag)) > 0:
        raise ValueError("weight payload carries nonzero imaginary parts")
    return Weight.tabulated(grid, flat.real.reshape(grid.sizes))


def dump_time_series(series) -> bytes:
    times = np.asarray(series.times, dtype="<f8")
    parts = [struct.pack("<Q", times.size), times.tobytes()]
    for i in range(times.size):
        parts.append(dump_grid_function(series.snapshot(i)))
    return b"".join(parts)


def load_time_series(data: bytes):
    from .parabolic import TimeSeries

    buf = memoryview(data)
    (count,) = struct.unpack_from("<Q", buf, 0)
    offset = 8
    times = np.frombuffer(buf, dtype="<f8", count=count, offset=offset).copy()
    offset += 8 * count
    snapshots = []
    for _ in range(count):
        u, offset = load_grid_function_from(buf, offset)
        snapshots.append(u)
    grid, space = snapshots[0].grid, snapshots[0].space
    values = np.stack([s.values for s in snapshots])
    return TimeSeries(grid, space, times, values)


def write_file(path, payload: bytes):
    with open(path, "wb") as fh:
        fh.write(payload)


def read_file(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()
