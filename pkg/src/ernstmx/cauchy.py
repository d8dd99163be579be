"""Discrete Cauchy transform on the two-circle contour.

Orientation bookkeeping lives here and only here.  Both circles are clockwise, so
the "+" side (left of the direction of travel) is the exterior of each circle and
the "-" side its interior.  A circle is parametrized as z = M(w) with w = exp(-i theta)
on the unit circle (see :class:`ernstmx.surface.Circle`); for a Moebius M

    dz' / (z' - z) = [1 / (w' - w) - 1 / (w' - w_inf)] dw',    w_inf = M^{-1}(inf),

so with G(w) = g(M(w)) = sum_n g_n w**n the clockwise Cauchy integral is

    C g(z) = -sum_{n>=0} g_n w**n - kappa    (z inside,  |w| < 1)
    C g(z) =  sum_{n<0}  g_n w**n - kappa    (z outside, |w| > 1)

with kappa = sum_{n<0} g_n w_inf**n.  Boundary values follow by letting |w| -> 1, so
C_+ - C_- = g holds identically (Plemelj).  Modes n = -N/2 .. N/2 - 1; the Nyquist
mode counts as negative.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ProximityError, ResolutionError
from .surface import Circle, ContourSpec

RESOLUTION_TOL = 1e-10


@dataclass
class ContourFunction:
    """Samples of a scalar- or matrix-valued function at the contour nodes.

    ``samples`` has shape (2N, ...) with the Gamma_0 nodes first.
    """

    contour: ContourSpec
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape[0] != 2 * self.contour.nodes_per_circle:
            raise ValueError("sample count does not match the contour")

    def per_circle(self):
        N = self.contour.nodes_per_circle
        return self.samples[:N], self.samples[N:]

    def __mul__(self, other: "ContourFunction") -> "ContourFunction":
        return ContourFunction(self.contour, np.matmul(self.samples, other.samples))


def _modes(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, 1.0 / N).astype(int)  # 0..N/2-1, -N/2..-1


def laurent_coefficients(samples: np.ndarray) -> np.ndarray:
    """g_n for n in fftfreq order, from samples at w_j = exp(-2 pi i j / N)."""
    return np.fft.ifft(samples, axis=0)


def tail_ratio(samples: np.ndarray) -> float:
    """Largest Laurent coefficient among the highest retained modes (top eighth of the
    band), relative to the largest coefficient."""
    if not np.any(samples):
        return 0.0
    N = samples.shape[0]
    c = np.abs(laurent_coefficients(samples)).reshape(N, -1).max(axis=1)
    n = np.abs(_modes(N))
    return float(c[n >= 7 * N // 16].max() / c.max())


def check_resolution(g: ContourFunction, tol: float = RESOLUTION_TOL) -> float:
    worst = max(tail_ratio(part) for part in g.per_circle())
    if worst > tol:
        raise ResolutionError(f"Laurent tail {worst:.2e} exceeds {tol:.0e}")
    return worst


# ------------------------------------------------------------------ linear operators

def _power_matrix(w_targets, modes):
    """w**n via exp(n log w): underflows cleanly to 0 where complex pow would give nan."""
    w_targets = np.asarray(w_targets, dtype=complex)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out = np.exp(modes[None, :] * np.log(w_targets)[:, None])
    return np.where(modes[None, :] == 0, 1.0 + 0j, out)


def _kappa_row(circle: Circle) -> np.ndarray:
    """Row vector mapping samples on the circle to kappa."""
    N = circle.N
    n = _modes(N)
    F = np.fft.ifft(np.eye(N), axis=0)  # coefficient = F @ samples
    w_inf = circle.w_inf
    if np.isinf(w_inf):
        return np.zeros(N, dtype=complex)
    weights = np.where(n < 0, complex(w_inf) ** n.astype(float), 0.0)
    return weights @ F


def evaluation_matrix(circle: Circle, z) -> np.ndarray:
    """Matrix E with (E @ samples)[t] = C g(z_t) for g supported on ``circle``.

    ``z`` must stay off the circle; inside and outside points may be mixed.
    """
    N = circle.N
    n = _modes(N)
    F = np.fft.ifft(np.eye(N), axis=0)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.empty(z.shape, dtype=complex)
    finite = ~np.isinf(z)
    w[finite] = circle.M_inv(z[finite])
    w[~finite] = circle.w_inf
    inside = np.abs(w) < 1.0
    out = np.empty((len(z), N), dtype=complex)
    kap = _kappa_row(circle)
    wi = w[inside]
    out[inside] = -np.where(n >= 0, _power_matrix(wi, np.where(n >= 0, n, 0)), 0.0) @ F
    wo = w[~inside]
    P = np.where(n < 0, _power_matrix(np.where(np.isinf(wo), 1.0, wo), np.where(n < 0, n, 0)), 0.0)
    P[np.isinf(wo)] = 0.0
    out[~inside] = P @ F
    return out - kap[None, :]


def boundary_matrices(circle: Circle) -> tuple[np.ndarray, np.ndarray]:
    """(C_minus, C_plus) of a single circle acting on its own samples."""
    N = circle.N
    n = _modes(N)
    F = np.fft.ifft(np.eye(N), axis=0)
    P = _power_matrix(circle.w, n)
    kap = _kappa_row(circle)[None, :]
    plus = (P * (n < 0)) @ F - kap
    minus = -(P * (n >= 0)) @ F - kap
    return minus, plus


@lru_cache(maxsize=64)
def contour_matrices(contour: ContourSpec) -> tuple[np.ndarray, np.ndarray]:
    """(C_minus, C_plus) on the full 2N-node contour, cross-circle terms included."""
    N = contour.nodes_per_circle
    g0, g1 = contour.circles
    Cm = np.empty((2 * N, 2 * N), dtype=complex)
    m0, _ = boundary_matrices(g0)
    m1, _ = boundary_matrices(g1)
    Cm[:N, :N] = m0
    Cm[N:, N:] = m1
    Cm[:N, N:] = evaluation_matrix(g1, g0.nodes)
    Cm[N:, :N] = evaluation_matrix(g0, g1.nodes)
    Cp = Cm + np.eye(2 * N)
    Cm.setflags(write=False)
    Cp.setflags(write=False)
    return Cm, Cp


def minus_operator_norm(contour: ContourSpec) -> float:
    """Operator norm of C_minus in the discrete L^2(|dz|) inner product."""
    Cm, _ = contour_matrices(contour)
    d = np.sqrt(np.abs(contour.weights))
    return float(np.linalg.norm(d[:, None] * Cm / d[None, :], 2))


# ------------------------------------------------------------------ function-level API

def _apply(M, samples):
    s = np.asarray(samples)
    return (M @ s.reshape(s.shape[0], -1)).reshape((M.shape[0],) + s.shape[1:])


def cauchy_off(g: ContourFunction, z, method: str = "laurent", safeguard: float = 1e-12):
    """C g(z) for z off the contour.

    ``method="laurent"`` sums the Laurent series of each circle (exact for
    band-limited samples); ``"trapezoid"`` is the plain quadrature of the Cauchy
    kernel, accurate only a few node spacings away from the contour.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    nodes = g.contour.nodes
    finite = ~np.isinf(zz)
    if finite.any():
        dist = np.min(np.abs(zz[finite, None] - nodes[None, :]), axis=1)
        scale = np.max(np.abs(nodes))
        if method == "trapezoid":
            h = max(np.max(np.abs(c.nodes - np.roll(c.nodes, 1))) for c in g.contour.circles)
            if np.any(dist < 2.0 * h):
                raise ProximityError("point within two node spacings of the contour")
        elif np.any(dist < safeguard * scale):
            raise ProximityError("point on the contour; use cauchy_minus / cauchy_plus")
    if method == "trapezoid":
        wts = g.contour.weights
        out = np.zeros((len(zz),) + g.samples.shape[1:], dtype=complex)
        for t, zt in enumerate(zz):
            if np.isinf(zt):
                continue
            ker = wts / (2j * np.pi * (nodes - zt))
            out[t] = np.tensordot(ker, g.samples, axes=(0, 0))
    elif method == "laurent":
        g0s, g1s = g.per_circle()
        out = (_apply(evaluation_matrix(g.contour.gamma0, zz), g0s)
               + _apply(evaluation_matrix(g.contour.gamma1, zz), g1s))
    else:
        raise ValueError(f"unknown method {method!r}")
    return out[0] if scalar else out


def cauchy_minus(g: ContourFunction, check: bool = False) -> ContourFunction:
    if check:
        check_resolution(g)
    Cm, _ = contour_matrices(g.contour)
    return ContourFunction(g.contour, _apply(Cm, g.samples))


def cauchy_plus(g: ContourFunction, check: bool = False) -> ContourFunction:
    if check:
        check_resolution(g)
    _, Cp = contour_matrices(g.contour)
    return ContourFunction(g.contour, _apply(Cp, g.samples))


def apply_cw(w: ContourFunction, g: ContourFunction) -> ContourFunction:
    """C_w(g) = C_-(g w)."""
    return cauchy_minus(g * w)
