"""Residual and identity checks on reconstructed fields.

Interior checks work on uniform grids with 4th-order central differences.  Boundary
limits x -> 0 (or y -> 0) are taken along x_j = x0 2**-j with Richardson
extrapolation; every estimate carries the last increment as its uncertainty.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .boundary import BoundaryProfile, lax_matrix
from .errors import ExtrapolationUnstable, GridTooCoarse
from .volterra import frame_at_zero

STENCIL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
MIN_POINTS = 5  # interior points per axis, i.e. excluding a one-cell margin

Evaluator = Callable[[float, float], tuple]


@dataclass
class FieldGrid:
    """E, H sampled on the tensor grid x[i], y[j]; NaN where no value exists."""

    x: np.ndarray
    y: np.ndarray
    E: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.E = np.asarray(self.E, dtype=complex)
        self.H = np.asarray(self.H, dtype=complex)

    @property
    def h(self) -> tuple[float, float]:
        return float(self.x[1] - self.x[0]), float(self.y[1] - self.y[0])

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @classmethod
    def from_function(cls, fn, x, y):
        """Grid from a vectorized fn(X, Y) -> (E, H), NaN outside x + y < 1."""
        X, Y = np.meshgrid(x, y, indexing="ij")
        inside = X + Y < 1.0
        E = np.full(X.shape, np.nan, complex)
        H = np.full(X.shape, np.nan, complex)
        e, hh = fn(X[inside], Y[inside])
        E[inside], H[inside] = e, hh
        return cls(x, y, E, H)


def _check_grid(grid: FieldGrid) -> None:
    nx, ny = len(grid.x), len(grid.y)
    if nx - 2 < MIN_POINTS or ny - 2 < MIN_POINTS:
        raise GridTooCoarse(f"{nx} x {ny} grid leaves fewer than {MIN_POINTS} interior points per axis")
    for v in (grid.x, grid.y):
        d = np.diff(v)
        if np.any(np.abs(d - d[0]) > 1e-12 * max(1.0, abs(d[0]))):
            raise ValueError("grid spacing must be uniform")


def d1(F: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order central first derivative; NaN on the two-cell margin."""
    F = np.moveaxis(np.asarray(F), axis, 0)
    out = np.full(F.shape, np.nan, dtype=np.result_type(F, float))
    n = F.shape[0]
    acc = sum(c * F[2 + o: n - 2 + o] for c, o in zip(STENCIL, range(-2, 3)) if c != 0.0)
    out[2:n - 2] = acc / h
    return np.moveaxis(out, 0, axis)


def _derivatives(grid: FieldGrid):
    hx, hy = grid.h
    E, H = grid.E, grid.H
    Ex, Ey, Hx, Hy = d1(E, hx, 0), d1(E, hy, 1), d1(H, hx, 0), d1(H, hy, 1)
    return Ex, Ey, Hx, Hy, d1(Ex, hy, 1), d1(Hx, hy, 1)


def residual_terms(x, y, E, H, Ex, Ey, Hx, Hy, Exy, Hxy):
    """Pointwise residuals (r1, r2) of the Ernst-Maxwell system from given derivatives."""
    f = np.real(E) - np.abs(H) ** 2
    wave = 1.0 / (2.0 * (1.0 - x - y))
    Hc = np.conj(H)
    r1 = f * (Exy - (Ex + Ey) * wave) - Ex * Ey + Hc * (Ex * Hy + Ey * Hx)
    r2 = f * (Hxy - (Hx + Hy) * wave) - 0.5 * (Ex * Hy + Ey * Hx) + 2.0 * Hc * Hx * Hy
    return r1, r2


def pde_residual(grid: FieldGrid):
    """(r1, r2) on the grid; NaN where the stencil does not fit."""
    _check_grid(grid)
    X, Y = grid.mesh()
    with np.errstate(invalid="ignore", divide="ignore"):
        return residual_terms(X, Y, grid.E, grid.H, *_derivatives(grid))


def interior_lax_pair(x, y, E, H, Ex, Ey, Hx, Hy, lam):
    f = np.real(E) - np.abs(H) ** 2
    sf = np.sqrt(f)
    A = (Ex - 2.0 * np.conj(H) * Hx) / (2.0 * f)
    B = (Ey - 2.0 * np.conj(H) * Hy) / (2.0 * f)
    return lax_matrix(A, Hx, lam, sf), lax_matrix(B, Hy, 1.0 / lam, sf)


def lambda_field(X, Y, k: complex):
    """Plus-sheet lambda(x, y, k) for fixed k off [0, 1] (Re lambda > 0)."""
    r = np.sqrt((k - (1.0 - Y)) / (k - X) + 0j)
    return np.where(r.real < 0, -r, r)


def zero_curvature(grid: FieldGrid, k: complex = 2.0 + 0.5j) -> float:
    """max |U_y - V_x + [U, V]| over the points where all differences exist."""
    _check_grid(grid)
    k = complex(k)
    if k.imag == 0.0 and 0.0 <= k.real <= 1.0:
        raise ValueError("k must lie off [0, 1]")
    X, Y = grid.mesh()
    hx, hy = grid.h
    with np.errstate(invalid="ignore", divide="ignore"):
        Ex, Ey, Hx, Hy, _, _ = _derivatives(grid)
        U, V = interior_lax_pair(X, Y, grid.E, grid.H, Ex, Ey, Hx, Hy, lambda_field(X, Y, k))
        D = d1(U, hy, 1) - d1(V, hx, 0) + U @ V - V @ U
    vals = np.abs(D).max(axis=(-2, -1))
    return float(np.nanmax(vals))


def summarize(field_values) -> dict:
    a = np.abs(np.asarray(field_values))
    a = a[np.isfinite(a)]
    if a.size == 0:
        return {"max": float("nan"), "rms": float("nan"), "count": 0}
    return {"max": float(a.max()), "rms": float(np.sqrt(np.mean(a ** 2))), "count": int(a.size)}


def observed_order(errors, ratio: float = 2.0) -> list:
    e = np.asarray(errors, dtype=float)
    return list(np.log(e[:-1] / e[1:]) / math.log(ratio))


# ------------------------------------------------------------------ boundary limits

@dataclass
class Estimate:
    value: complex
    uncertainty: float
    sequence: list = field(default_factory=list)

    def as_dict(self) -> dict:
        v = complex(self.value)
        return {"value": [v.real, v.imag] if v.imag else v.real,
                "uncertainty": self.uncertainty}


def richardson(values, ratio: float) -> Estimate:
    """Two-term Richardson extrapolation of a sequence with error ~ step.

    ``ratio`` is the ratio of successive steps raised to the error exponent.  Raises
    ExtrapolationUnstable when the increments grow instead of shrinking.
    """
    a = np.asarray(values, dtype=complex)
    if a.size < 2:
        raise ValueError("need at least two terms")
    r = (ratio * a[1:] - a[:-1]) / (ratio - 1.0)
    inc = np.abs(np.diff(r))
    if inc.size >= 2:
        scale = max(1.0, float(np.max(np.abs(r))))
        if inc[-1] > 2.0 * inc[-2] and inc[-1] > 1e-9 * scale:
            raise ExtrapolationUnstable(f"increments grow: {inc[-2]:.2e} -> {inc[-1]:.2e}")
    unc = float(inc[-1]) if inc.size else float(abs(r[-1] - a[-1]))
    return Estimate(complex(r[-1]), unc, list(r))


def weighted_normal_derivative(evaluator: Evaluator, s: float, t: float, axis: str,
                               alpha: float):
    """s**alpha * d/ds of (E, H) at distance s from the edge, through u = s**(1-alpha).

    ``axis`` names the derivative direction: "x" means (x, y) = (s, t).
    """
    u = s ** (1.0 - alpha)
    h = 0.25 * u
    vals = []
    for o in (-2, -1, 1, 2):
        sp = (u + o * h) ** (1.0 / (1.0 - alpha))
        vals.append(np.array(evaluator(sp, t) if axis == "x" else evaluator(t, sp), dtype=complex))
    vals = np.array(vals)
    du = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12.0 * h)
    return (1.0 - alpha) * du  # s^alpha d/ds = (1 - alpha) d/du


def approach_points(s0: float = 0.05, levels: int = 8) -> np.ndarray:
    return s0 * 2.0 ** -np.arange(levels)


def _edge_data(profile: BoundaryProfile, t: float):
    """Transverse-edge quantities at parameter t: (H(t), f(t), c, d, e)."""
    sf = frame_at_zero(profile, t)
    return complex(profile.H(t)), float(profile.f(t)), sf.c, sf.d, sf.e


def data_constants(profile: BoundaryProfile, s: float = 0.0) -> tuple[complex, complex]:
    """(m, n) = corner limits of s**alpha E', s**alpha H' along the profile."""
    return complex(profile.weighted_dE(s)), complex(profile.weighted_dH(s))


def predicted_edge_limits(m, n, c, d, e, H_t, f_t, t):
    """Limits of x^alpha E_x and x^alpha H_x predicted from the edge data at y = t."""
    root = math.sqrt(f_t) * math.sqrt(1.0 - t)
    core = 1j * m * np.conj(d) + 2.0 * np.conj(e) * n
    lim_E = c * (core * np.conj(H_t) + c * (e * m + 2j * d * n)) / root
    lim_H = c * core / (2.0 * root)
    return complex(lim_E), complex(lim_H)


def wave_functional(lim_E, lim_H, H_t, f_t, t):
    """(1 - t)(|L_E - 2 conj(H_t) L_H|^2 / f_t^2 + 4 |L_H|^2 / f_t) for alpha = 1/2."""
    return (1.0 - t) * (abs(lim_E - 2.0 * np.conj(H_t) * lim_H) ** 2 / f_t ** 2
                        + 4.0 * abs(lim_H) ** 2 / f_t)


def _transverse(profiles, axis):
    prof_normal, prof_edge = (profiles[0], profiles[1]) if axis == "x" else (profiles[1], profiles[0])
    return prof_normal, prof_edge


def edge_limit_check(profiles, evaluator: Evaluator, t: float, axis: str = "x",
                   points=None, rhs_tol: float = 1e-9) -> dict:
    """Compare extrapolated edge limits of the normal derivatives with their predictions.

    ``profiles`` = (x-axis profile, y-axis profile).  For ``axis="x"`` the limit x -> 0
    is taken at y = t; the prediction uses (m1, n1) from the x-axis data and
    (c1, d1, e1) from the sparse frame of the y-axis data at t.  Each band is the
    extrapolation uncertainty plus ``rhs_tol``, the error budget of the integrated
    frame constants.
    """
    prof_n, prof_e = _transverse(profiles, axis)
    alpha = prof_n.alpha
    s_pts = approach_points() if points is None else np.asarray(points, float)
    seq = np.array([weighted_normal_derivative(evaluator, s, t, axis, alpha) for s in s_pts])
    ratio = 2.0 ** (1.0 - alpha)
    est_E = richardson(seq[:, 0], ratio)
    est_H = richardson(seq[:, 1], ratio)
    m, n = data_constants(prof_n)
    H_t, f_t, c, d, e = _edge_data(prof_e, t)
    rhs_E, rhs_H = predicted_edge_limits(m, n, c, d, e, H_t, f_t, t)
    return {
        "t": t, "axis": axis,
        "limit_E": est_E, "limit_H": est_H,
        "rhs_E": rhs_E, "rhs_H": rhs_H,
        "defect_E": abs(est_E.value - rhs_E), "defect_H": abs(est_H.value - rhs_H),
        "band_E": est_E.uncertainty + rhs_tol, "band_H": est_H.uncertainty + rhs_tol,
        "constants": {"m": m, "n": n, "c": c, "d": d, "e": e},
    }


def boundary_functional(evaluator: Evaluator, profiles, t: float, axis: str = "x",
                        points=None) -> Estimate:
    """(1 - t) lim s (|E_s - 2 conj(H_t) H_s|^2 / f_t^2 + 4 |H_s|^2 / f_t), alpha = 1/2."""
    prof_n, prof_e = _transverse(profiles, axis)
    if abs(prof_n.alpha - 0.5) > 1e-12:
        raise ValueError("the wave functional is defined for alpha = 1/2")
    s_pts = approach_points() if points is None else np.asarray(points, float)
    H_t, f_t = complex(prof_e.H(t)), float(prof_e.f(t))
    vals = []
    for s in s_pts:
        wE, wH = weighted_normal_derivative(evaluator, s, t, axis, 0.5)
        vals.append(wave_functional(wE, wH, H_t, f_t, t))
    est = richardson(vals, 2.0 ** 0.5)
    return Estimate(est.value.real, est.uncertainty, [v.real for v in est.sequence])


def admissibility(m1, n1, m2, n2):
    """(ok, value_x, value_y): both |m|^2 + 4|n|^2 must lie in [1, 2)."""
    v1 = abs(m1) ** 2 + 4 * abs(n1) ** 2
    v2 = abs(m2) ** 2 + 4 * abs(n2) ** 2
    return (1.0 <= v1 < 2.0) and (1.0 <= v2 < 2.0), v1, v2


# ------------------------------------------------------------------ report

def _jsonable(v):
    if isinstance(v, Estimate):
        return v.as_dict()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


@dataclass
class ResidualReport:
    grid: dict
    pde_residual1: dict = field(default_factory=dict)
    pde_residual2: dict = field(default_factory=dict)
    zero_curvature: float | None = None
    functional_x: Estimate | None = None
    functional_y: Estimate | None = None
    admissible: bool | None = None
    admissibility_values: tuple | None = None
    edge_limit_defects: dict = field(default_factory=dict)
    invariants: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self) | {"functional_x": self.functional_x,
                                          "functional_y": self.functional_y})

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text
