"""Boundary eigenfunctions Phi_0(x, P), Phi_1(y, P).

Both solve ``Phi' = C(s, P) Phi, Phi(0) = I`` along their characteristic, where C is
U_0 (x-axis, uses lambda) or V_1 (y-axis, uses 1/lambda).  The equation is integrated
in the regularized variable u = s**(1 - alpha) with an adaptive embedded Runge-Kutta
pair (DOP853), all spectral points of a batch advancing on one shared step sequence.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from .boundary import BoundaryProfile, DerivedCoefficients, scaled_lax_matrix
from .errors import AdmissibilityError, SparsityError, ToleranceError
from .surface import SurfacePoint, transport_lambda

LAMBDA = np.diag([1.0, -1.0, 1.0]).astype(complex)
DEFAULT_TOL = 1e-10


@dataclass
class FrameSamples:
    axis: str
    s: float
    points: list
    values: np.ndarray  # (n_points, 3, 3)

    @property
    def det_reference(self) -> float:
        return self.f_s ** 1.5

    f_s: float = 1.0

    def det_defect(self) -> float:
        d = np.linalg.det(self.values)
        return float(np.max(np.abs(d - self.det_reference)) / self.det_reference)


def _ell_along(axis: str, lam, x: float, y: float):
    """Map s' -> lambda(s', 0, P) (x-axis) or 1/lambda(0, s', P) (y-axis)."""
    lam = np.asarray(lam, dtype=complex)
    if axis == "x":
        return lambda sp: transport_lambda(lam, x, y, sp, 0.0)
    return lambda sp: 1.0 / transport_lambda(lam, x, y, 0.0, sp)


def integrate(profile: BoundaryProfile, s: float, ell_of_s, n_points: int,
              tol: float = DEFAULT_TOL, s_eval=None) -> np.ndarray:
    """Integrate the boundary Lax equation from 0 to s for a batch of points.

    ``ell_of_s(s')`` returns the (n_points,) array of lambda (or 1/lambda) values.
    Returns (n_points, 3, 3), or (len(s_eval), n_points, 3, 3) when ``s_eval`` is given.
    """
    eye = np.broadcast_to(np.eye(3, dtype=complex), (n_points, 3, 3))
    if s == 0.0 and s_eval is None:
        return eye.copy()
    u_end = float(profile.u_of(s))
    inv = 1.0 / (1.0 - profile.alpha)

    def rhs(u, yv):
        Phi = yv.reshape(n_points, 3, 3)
        C = scaled_lax_matrix(profile, np.array(u), ell_of_s(u ** inv))
        return np.matmul(C, Phi).ravel()

    t_eval = None if s_eval is None else profile.u_of(np.asarray(s_eval, dtype=float))
    sol = solve_ivp(rhs, (0.0, u_end), eye.ravel().copy(), method="DOP853",
                    rtol=tol, atol=tol, t_eval=t_eval)
    if sol.status != 0:
        raise ToleranceError(f"step control failed: {sol.message}")
    if s_eval is None:
        return sol.y[:, -1].reshape(n_points, 3, 3)
    return sol.y.T.reshape(len(t_eval), n_points, 3, 3)


def _check_admissible(axis: str, s: float, points) -> None:
    for p in points:
        k = complex(p.k)
        if np.isinf(k) or k.imag != 0.0:
            continue
        lo, hi = (0.0, s) if axis == "x" else (1.0 - s, 1.0)
        if lo <= k.real <= hi:
            raise AdmissibilityError(f"k = {k} lies on the forbidden segment [{lo}, {hi}]")


def solve_frame(profile: BoundaryProfile, s: float, points, tol: float = DEFAULT_TOL,
                check: bool = True) -> FrameSamples:
    """Frames at parameter s for SurfacePoints sharing one base point (x, y).

    The point's lambda is transported to every intermediate surface, so points of
    the contour crossing the cut (x, 1 - y) are followed by analytic continuation.
    """
    points = list(points)
    if not points:
        return FrameSamples(profile.axis, s, [], np.zeros((0, 3, 3), complex),
                            float(profile.f(s)))
    x, y = points[0].x, points[0].y
    if check:
        _check_admissible(profile.axis, s, points)
    lam = np.array([p.lam for p in points], dtype=complex)
    vals = integrate(profile, s, _ell_along(profile.axis, lam, x, y), len(points), tol)
    return FrameSamples(profile.axis, s, points, vals, float(profile.f(s)))


def solve_frame_lambda(profile: BoundaryProfile, s: float, lam, x: float, y: float,
                       tol: float = DEFAULT_TOL) -> np.ndarray:
    """Array version of :func:`solve_frame`: points given by lambda on the surface over (x, y)."""
    lam = np.asarray(lam, dtype=complex)
    return integrate(profile, s, _ell_along(profile.axis, lam, x, y), lam.size, tol)


def solve_frame_k(profile: BoundaryProfile, s: float, k, sheet="plus",
                  tol: float = DEFAULT_TOL) -> np.ndarray:
    """Frames addressed by (k, sheet) on the surface of the characteristic point itself."""
    x, y = (s, 0.0) if profile.axis == "x" else (0.0, s)
    pts = [SurfacePoint.from_k(x, y, kk, sheet) for kk in np.atleast_1d(k)]
    return solve_frame(profile, s, pts, tol).values


def frame_at_infinity_plus(profile: BoundaryProfile, s) -> np.ndarray:
    """Closed form of the frame at the point over k = infinity on the plus sheet."""
    E = complex(profile.E(s))
    H = complex(profile.H(s))
    return tilde_phi(E, H)


def tilde_phi(E: complex, H: complex) -> np.ndarray:
    sf = np.sqrt(E.real - abs(H) ** 2)
    left = 0.5 * np.array([
        [np.conj(E) - 2 * H * np.conj(H), 1.0, 1j * H],
        [E, -1.0, -1j * H],
        [2j * np.conj(H) * sf, 0.0, sf],
    ], dtype=complex)
    right = np.array([[1, 1, 0], [1, -1, 0], [0, 0, 2]], dtype=complex)
    return left @ right


@dataclass(frozen=True)
class SparseFrame:
    """Frame at the point where the off-pattern couplings vanish.

    For the y-characteristic this is Phi_1(y, k = 0) (there 1/lambda(0, y', 0) = 0); for
    the x-characteristic the mirror point k = 1 (lambda(x', 0, 1) = 0).
    """

    a: complex
    b: complex
    c: complex
    d: complex
    e: complex
    matrix: np.ndarray
    c_quadrature: complex


def frame_at_zero(profile: BoundaryProfile, s: float, tol: float = DEFAULT_TOL,
                  sparsity_tol: float = 1e-12) -> SparseFrame:
    ell = lambda sp: np.zeros(1, dtype=complex)
    Phi = integrate(profile, s, ell, 1, tol)[0]
    mask = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=bool)
    if np.max(np.abs(Phi[mask]), initial=0.0) > sparsity_tol:
        raise SparsityError(f"off-pattern entries {np.abs(Phi[mask]).max():.3e}")
    dc = DerivedCoefficients(profile)
    u_end = float(profile.u_of(s))
    re = quad(lambda u: dc.A_u(np.array([u]))[0].real, 0.0, u_end, epsabs=1e-13)[0]
    im = quad(lambda u: dc.A_u(np.array([u]))[0].imag, 0.0, u_end, epsabs=1e-13)[0]
    return SparseFrame(Phi[0, 0], Phi[0, 2], Phi[1, 1], Phi[2, 0], Phi[2, 2], Phi,
                       np.exp(complex(re, im)))
