"""Experiment configuration: YAML schema, validation and object builders.

A config is a nested key/value document with a top-level ``kind`` choosing
the experiment.  ``validate_config`` returns human-readable diagnostics
with field paths and never raises; the run entry point refuses to start
unless the list is empty.
"""

from __future__ import annotations

import math

import numpy as np
import yaml

from .grids import Grid, ValueSpace, kappa as kappa_of
from .operators import DiagonalOperator, MatrixOperator, ellipticity_constant
from .weights import Weight

KINDS = ("ap-check", "mikhlin", "embed", "elliptic", "parabolic", "system", "degenerate")

SYMBOL_FAMILIES = ("identity", "sign", "riesz-like", "power", "resolvent", "psi-h", "parabolic-phi")

WEIGHT_KINDS = ("one", "axis-power")

GAMMA_KINDS = ("one", "power")


def load_config(path) -> dict:
    with open(path, "r") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError("config root must be a mapping")
    return data


def _is_power_of_two(m) -> bool:
    return isinstance(m, int) and m >= 4 and (m & (m - 1)) == 0


def parse_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"cannot read complex number from {value!r}")


def parse_coeffs(entries) -> dict:
    coeffs = {}
    for entry in entries:
        alpha = tuple(int(a) for a in entry["alpha"])
        coeffs[alpha] = parse_complex(entry["value"])
    return coeffs


def build_grid(cfg: dict) -> Grid:
    section = cfg["grid"]
    return Grid(tuple(section["extents"]), tuple(section["sizes"]))


def build_space(cfg: dict) -> ValueSpace:
    section = cfg.get("space", {})
    return ValueSpace(int(section.get("dim", 1)), float(section.get("q", 2.0)))


def build_operator(cfg: dict, space: ValueSpace):
    section = cfg.get("operator", {"variant": "diagonal", "s": 1.0})
    variant = section.get("variant", "diagonal")
    if variant == "diagonal":
        return DiagonalOperator(float(section.get("s", 1.0)), space)
    if variant == "matrix":
        return MatrixOperator(np.asarray(section["matrix"], dtype=float), space)
    raise ValueError(f"unknown operator variant {variant!r}")


def build_weight(cfg: dict, grid: Grid) -> Weight:
    section = cfg.get("weight", {"kind": "one"})
    kind = section.get("kind", "one")
    if kind == "one":
        return Weight.one(grid)
    if kind == "axis-power":
        return Weight.axis_power(grid, tuple(section["exponents"]))
    raise ValueError(f"unknown weight kind {kind!r}")


def build_gamma(section: dict):
    kind = section.get("kind", "one")
    if kind == "one":
        return lambda y: np.ones_like(np.asarray(y, dtype=float))
    if kind == "power":
        nu = float(section["exponent"])
        return lambda y: np.abs(np.asarray(y, dtype=float)) ** nu
    raise ValueError(f"unknown degeneracy kind {kind!r}")


def h_sweep(section: dict) -> list[float]:
    lo = float(section.get("lo", 1e-3))
    hi = float(section.get("hi", 1.0))
    count = int(section.get("count", 10))
    return [float(h) for h in np.logspace(math.log10(lo), math.log10(hi), count)]


def lambda_sweep(section: dict, phi1: float = 0.0) -> list[complex]:
    moduli = [float(m) for m in section.get("moduli", [1.0, 10.0, 100.0, 1000.0])]
    angles = [float(a) for a in section.get("angles", [])]
    for fraction in section.get("angles_phi1_fraction", []):
        angles.append(float(fraction) * phi1)
    if not angles:
        angles = [0.0]
    out = []
    for r in moduli:
        for theta in sorted(set(angles)):
            out.append(r * complex(math.cos(theta), math.sin(theta)))
    return out


# ---------------------------------------------------------------------------
# Validation


def _diag(out, path, message):
    out.append(f"{path}: {message}")


def _check_grid(cfg, out, required=True):
    section = cfg.get("grid")
    if section is None:
        if required:
            _diag(out, "grid", "missing section")
        return
    extents = section.get("extents")
    sizes = section.get("sizes")
    if not isinstance(extents, list) or not extents:
        _diag(out, "grid.extents", "must be a nonempty list")
        return
    if not isinstance(sizes, list) or len(sizes) != len(extents):
        _diag(out, "grid.sizes", "must match extents in length")
        return
    if not 1 <= len(extents) <= 3:
        _diag(out, "grid.extents", "dimension must be 1, 2 or 3")
    for i, L in enumerate(extents):
        if not isinstance(L, (int, float)) or L <= 0:
            _diag(out, f"grid.extents[{i}]", "must be positive")
    for i, m in enumerate(sizes):
        if not _is_power_of_two(m):
            _diag(out, f"grid.sizes[{i}]", "must be a power of two, at least 4")


def _check_space(cfg, out):
    section = cfg.get("space", {})
    dim = section.get("dim", 1)
    q = section.get("q", 2.0)
    if not isinstance(dim, int) or dim < 1:
        _diag(out, "space.dim", "must be an integer >= 1")
    if not isinstance(q, (int, float)) or not (1.0 < float(q) < math.inf):
        _diag(out, "space.q", "must lie in (1, oo)")


def _check_exponent(cfg, out, key="p"):
    p = cfg.get(key, 2.0)
    if not isinstance(p, (int, float)) or not (1.0 < float(p) < math.inf):
        _diag(out, key, "must lie in (1, oo)")


def _check_operator(cfg, out):
    section = cfg.get("operator")
    if section is None:
        return
    variant = section.get("variant", "diagonal")
    if variant == "diagonal":
        s = section.get("s", 1.0)
        if not isinstance(s, (int, float)) or s <= 0:
            _diag(out, "operator.s", "must be positive")
    elif variant == "matrix":
        matrix = section.get("matrix")
        try:
            arr = np.asarray(matrix, dtype=float)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError
            if not np.allclose(arr, arr.T):
                _diag(out, "operator.matrix", "must be symmetric")
            elif ellipticity_constant(arr) <= 0:
                _diag(out, "operator.matrix", "must be positive definite")
        except Exception:
            _diag(out, "operator.matrix", "must be a square numeric matrix")
    else:
        _diag(out, "operator.variant", f"unknown variant {variant!r}")


def _check_coeffs(cfg, out, order_key="order", coeffs_key="coeffs"):
    order = cfg.get(order_key)
    if not isinstance(order, int) or order < 1:
        _diag(out, order_key, "must be an integer >= 1")
        return
    entries = cfg.get(coeffs_key)
    if not isinstance(entries, list) or not entries:
        _diag(out, coeffs_key, "must be a nonempty list of {alpha, value} entries")
        return
    grid = cfg.get("grid", {})
    n = len(grid.get("extents", [])) or None
    for i, entry in enumerate(entries):
        alpha = entry.get("alpha")
        if not isinstance(alpha, list) or any(not isinstance(a, int) or a < 0 for a in alpha):
            _diag(out, f"{coeffs_key}[{i}].alpha", "must be a list of nonnegative integers")
            continue
        if n is not None and len(alpha) != n:
            _diag(out, f"{coeffs_key}[{i}].alpha", f"length must equal the grid dimension {n}")
        if sum(alpha) != 2 * order:
            _diag(out, f"{coeffs_key}[{i}].alpha", f"|alpha| must equal {2 * order}")
        try:
            parse_complex(entry.get("value"))
        except ValueError:
            _diag(out, f"{coeffs_key}[{i}].value", "must be a real or [re, im] pair")


def _check_embed(cfg, out):
    section = cfg.get("embed")
    if section is None:
        _diag(out, "embed", "missing section")
        return
    l = section.get("l")
    alpha = section.get("alpha")
    if not isinstance(l, list) or any(not isinstance(v, int) or v < 1 for v in l):
        _diag(out, "embed.l", "must be a list of integers >= 1")
        return
    if not isinstance(alpha, list) or len(alpha) != len(l) or any(
        not isinstance(a, int) or a < 0 for a in alpha
    ):
        _diag(out, "embed.alpha", "must be nonnegative integers matching l in length")
        return
    kappa = kappa_of(tuple(alpha), tuple(l))
    if kappa > 1.0:
        _diag(out, "embed.alpha", "|alpha : l| must not exceed 1")
        return
    for i, mu in enumerate(section.get("mu", [0.0])):
        if not isinstance(mu, (int, float)) or not (0.0 <= mu <= 1.0 - kappa + 1e-12):
            _diag(out, f"embed.mu[{i}]", f"must lie in [0, {1.0 - kappa}] (interpolation range)")


def validate_config(cfg: dict) -> list[str]:
    """All violated invariants as 'field-path: message' diagnostics."""
    out: list[str] = []
    kind = cfg.get("kind")
    if kind not in KINDS:
        _diag(out, "kind", f"must be one of {', '.join(KINDS)}")
        return out
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int):
        _diag(out, "seed", "must be an integer")
    if kind == "ap-check":
        _check_grid(cfg, out)
        _check_exponent(cfg, out)
        weight = cfg.get("weight", {})
        if weight.get("kind", "one") not in WEIGHT_KINDS:
            _diag(out, "weight.kind", f"must be one of {', '.join(WEIGHT_KINDS)}")
    elif kind == "mikhlin":
        _check_space(cfg, out)
        section = cfg.get("mikhlin", {})
        family = section.get("symbol")
        if family not in SYMBOL_FAMILIES:
            _diag(out, "mikhlin.symbol", f"must be one of {', '.join(SYMBOL_FAMILIES)}")
        _check_operator(cfg, out)
    elif kind == "embed":
        _check_grid(cfg, out)
        _check_space(cfg, out)
        _check_exponent(cfg, out)
        _check_operator(cfg, out)
        _check_embed(cfg, out)
    elif kind in ("elliptic", "parabolic"):
        _check_grid(cfg, out)
        _check_space(cfg, out)
        _check_exponent(cfg, out)
        _check_operator(cfg, out)
        _check_coeffs(cfg, out)
        if kind == "parabolic":
            _check_exponent(cfg, out, key="p1")
            steps = cfg.get("steps", 256)
            if not isinstance(steps, int) or steps < 1:
                _diag(out, "steps", "must be an integer >= 1")
    elif kind == "system":
        _check_grid(cfg, out)
        _check_exponent(cfg, out)
        _check_exponent(cfg, out, key="q")
        _check_coeffs(cfg, out)
        coupling = cfg.get("coupling", {})
        if "matrix" not in coupling and "s" not in coupling:
            _diag(out, "coupling", "must give an inline matrix or a dyadic-diagonal s")
    elif kind == "degenerate":
        _check_grid(cfg, out)
        _check_space(cfg, out)
        _check_exponent(cfg, out)
        _check_operator(cfg, out)
        _check_coeffs(cfg, out)
        gammas = cfg.get("gammas")
        grid = cfg.get("grid", {})
        n = len(grid.get("extents", []))
        if not isinstance(gammas, list) or (n and len(gammas) != n):
            _diag(out, "gammas", "must list one degeneracy function per axis")
        else:
            for i, g in enumerate(gammas):
                if g.get("kind", "one") not in GAMMA_KINDS:
                    _diag(out, f"gammas[{i}].kind", f"must be one of {', '.join(GAMMA_KINDS)}")
                elif g.get("kind") == "power" and not (0 < float(g.get("exponent", 0)) ):
                    _diag(out, f"gammas[{i}].exponent", "must be positive")
    return out
