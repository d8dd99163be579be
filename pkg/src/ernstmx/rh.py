"""Jump assembly and solution of the 3x3 Riemann-Hilbert problem at one (x, y).

With w = v - I the density mu solves (I - C_w) mu = I and m = I + C(mu w).  Rows of mu
decouple (w multiplies from the right), so the collocation system is one dense
(6N) x (6N) matrix with three right-hand sides.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import zgecon

from .boundary import BoundaryProfile
from .cauchy import (ContourFunction, cauchy_off, contour_matrices, minus_operator_norm,
                     tail_ratio)
from .errors import NonConvergence, ResolutionError, SingularSystemError
from .surface import ContourSpec, build_contour, check_domain, lambda_from_z
from .volterra import DEFAULT_TOL, LAMBDA, frame_at_infinity_plus, solve_frame_lambda

log = logging.getLogger(__name__)

EYE = np.eye(3, dtype=complex)
NEUMANN_THRESHOLD = 0.5
NEUMANN_MAX_TERMS = 200
COND_LIMIT = 1e12
N_MAX = 1024


@dataclass
class RHSolution:
    xy: tuple
    contour: ContourSpec
    mu: ContourFunction
    w: ContourFunction
    m_at_zero: np.ndarray
    conditioning: float
    method: str
    norm_proxy: float = float("nan")
    resolution: float = float("nan")
    terms: int = 0

    def evaluate(self, z):
        return evaluate(self, z)


def assemble_jump(profile0: BoundaryProfile, profile1: BoundaryProfile, x: float, y: float,
                  contour: ContourSpec, tol: float = DEFAULT_TOL):
    """(v, w) on the contour: Phi_0(x, .) on Gamma_0, Phi_1(y, .) on Gamma_1."""
    check_domain(x, y)
    lam0 = lambda_from_z(contour.gamma0.nodes)
    lam1 = lambda_from_z(contour.gamma1.nodes)
    v0 = solve_frame_lambda(profile0, x, lam0, x, y, tol)
    v1 = solve_frame_lambda(profile1, y, lam1, x, y, tol)
    v = ContourFunction(contour, np.concatenate([v0, v1]))
    return v, ContourFunction(contour, v.samples - EYE)


def _direct(w: ContourFunction):
    Cm, _ = contour_matrices(w.contour)
    n = Cm.shape[0]
    # K[(i,a),(j,b)] = Cm[i,j] w_j[b,a]
    K = Cm[:, None, :, None] * np.transpose(w.samples, (2, 0, 1))[None]
    A = np.eye(3 * n, dtype=complex) - K.reshape(3 * n, 3 * n)
    anorm = np.linalg.norm(A, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            lu, piv = lu_factor(A, check_finite=False)
        except (np.linalg.LinAlgError, LinAlgWarning, ValueError) as exc:
            raise SingularSystemError(
                f"RH problem may be unsolvable at (x, y) = ({w.contour.x}, {w.contour.y})") from exc
    rcond, info = zgecon(lu, anorm, norm="1")
    cond = float(1.0 / rcond) if rcond > 0 else float("inf")
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystemError(
            f"RH problem may be unsolvable at (x, y) = ({w.contour.x}, {w.contour.y}): "
            f"condition number {cond:.3e}")
    B = np.tile(EYE, (n, 1))  # B[(i,a), r] = delta_ar
    X = lu_solve((lu, piv), B, check_finite=False)
    mu = np.transpose(X.reshape(n, 3, 3), (0, 2, 1))
    return mu, cond


def _neumann(w: ContourFunction, tol: float = 1e-15):
    Cm, _ = contour_matrices(w.contour)
    n = Cm.shape[0]
    mu = np.broadcast_to(EYE, (n, 3, 3)).copy()
    for term in range(1, NEUMANN_MAX_TERMS + 1):
        nxt = EYE + (Cm @ np.matmul(mu, w.samples).reshape(n, 9)).reshape(n, 3, 3)
        delta = np.max(np.abs(nxt - mu))
        mu = nxt
        if delta < tol * max(1.0, np.max(np.abs(mu))):
            return mu, term
    raise NonConvergence(f"Neumann series not converged after {NEUMANN_MAX_TERMS} terms")


def norm_proxy(w: ContourFunction) -> float:
    sup_w = float(np.max(np.linalg.norm(w.samples, ord=2, axis=(1, 2))))
    return minus_operator_norm(w.contour) * sup_w


def solve(w: ContourFunction, method: str = "auto") -> RHSolution:
    contour = w.contour
    proxy = norm_proxy(w)
    if method == "auto":
        method = "neumann" if proxy < NEUMANN_THRESHOLD else "direct"
    terms = 0
    if method == "direct":
        mu, cond = _direct(w)
    elif method == "neumann":
        mu, terms = _neumann(w)
        cond = (1.0 + proxy) / (1.0 - proxy) if proxy < 1.0 else float("inf")
    else:
        raise ValueError(f"unknown method {method!r}")
    mu_f = ContourFunction(contour, mu)
    mw = mu_f * w
    m0 = EYE + cauchy_off(mw, 0.0)
    return RHSolution((contour.x, contour.y), contour, mu_f, w, m0, cond, method,
                      norm_proxy=proxy, terms=terms)


def evaluate(sol: RHSolution, z):
    """m(z) = I + C(mu w)(z) off the contour; vectorized over z."""
    val = cauchy_off(sol.mu * sol.w, z)
    return EYE + val


def boundary_values(sol: RHSolution):
    """(m_+, m_-) at the contour nodes."""
    Cm, Cp = contour_matrices(sol.contour)
    mw = (sol.mu * sol.w).samples
    n = mw.shape[0]
    flat = mw.reshape(n, 9)
    return EYE + (Cp @ flat).reshape(n, 3, 3), EYE + (Cm @ flat).reshape(n, 3, 3)


def solve_point(profile0: BoundaryProfile, profile1: BoundaryProfile, x: float, y: float,
                N: int = 64, gamma: float = 1.5, tol: float = DEFAULT_TOL,
                method: str = "auto", resolution_tol: float = 1e-10,
                spacing: str = "hyperbolic", n_max: int = N_MAX,
                adaptive: bool = True) -> RHSolution:
    """Contour, jump and solve at (x, y).

    With ``adaptive`` N is doubled until the jump's top Laurent modes fall below
    ``resolution_tol`` (ResolutionError past ``n_max``); otherwise N is used as given
    and the tail is only recorded.
    """
    contour = build_contour(x, y, N, gamma, spacing)
    while True:
        _, w = assemble_jump(profile0, profile1, x, y, contour, tol)
        tail = max(tail_ratio(part) for part in w.per_circle())
        if tail <= resolution_tol or not adaptive:
            break
        if contour.nodes_per_circle * 2 > n_max:
            raise ResolutionError(
                f"jump unresolved at ({x}, {y}) with N = {contour.nodes_per_circle}: tail {tail:.2e}")
        contour = contour.with_N(contour.nodes_per_circle * 2)
    sol = solve(w, method)
    sol.resolution = tail
    return sol


# ------------------------------------------------------------------ m-hat identities

def invariant_defects(mhat: np.ndarray) -> dict:
    """Defects of the algebraic identities m(x, y, 0) must satisfy."""
    m = mhat
    return {
        "det": abs(np.linalg.det(m) - 1.0),
        "m22_ge_1": max(0.0, 1.0 - m[1, 1].real) + abs(m[1, 1].imag),
        "sym_33": abs(m[2, 2] - (1 - m[0, 0] + m[1, 1])),
        "sym_12_21": abs(m[0, 1] * m[1, 0] - (m[0, 0] - 1) * (m[1, 1] + 1)),
        "sym_13_31": abs(m[0, 2] * m[2, 0] - (m[0, 0] - 1) * (m[1, 1] - m[0, 0])),
        "sym_23_32": abs(m[1, 2] * m[2, 1] - (m[1, 1] + 1) * (m[1, 1] - m[0, 0])),
        "conj_transpose": float(np.max(np.abs(np.conj(m) - m.T))),
        "inverse": float(np.max(np.abs(np.linalg.inv(m) - LAMBDA @ m @ LAMBDA))),
    }


def inversion_defect(sol: RHSolution, z) -> float:
    """max |m(z) - m(0) Lambda m(1/z) Lambda| over the given points."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    mz = evaluate(sol, z)
    mi = evaluate(sol, 1.0 / z)
    rhs = sol.m_at_zero[None] @ LAMBDA @ mi @ LAMBDA
    return float(np.max(np.abs(mz - rhs)))


def conjugation_defect(sol: RHSolution, z) -> float:
    """max |conj(m(conj z)) - Lambda (m(z)^-1)^T Lambda| for z in the outer region."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    lhs = np.conj(evaluate(sol, np.conj(z)))
    rhs = LAMBDA @ np.transpose(np.linalg.inv(evaluate(sol, z)), (0, 2, 1)) @ LAMBDA
    return float(np.max(np.abs(lhs - rhs)))


# ------------------------------------------------------------------ closed form on y = 0

def boundary_solution(profile0: BoundaryProfile, x: float, contour: ContourSpec, z,
                      tol: float = DEFAULT_TOL):
    """Exact m(x, 0, z): Phi_0(x, inf+)^-1 times I (inside Gamma_0) or Phi_0(x, P(z))."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    inv_inf = np.linalg.inv(frame_at_infinity_plus(profile0, x))
    inside0 = contour.gamma0.contains(z)
    out = np.empty((len(z), 3, 3), dtype=complex)
    out[inside0] = inv_inf
    rest = ~inside0
    if rest.any():
        phi = solve_frame_lambda(profile0, x, lambda_from_z(z[rest]), x, 0.0, tol)
        out[rest] = inv_inf @ phi
    return out


def verify_boundary_solution(profile0: BoundaryProfile, x: float, contour: ContourSpec | None = None,
                             tol: float = DEFAULT_TOL, profile1: BoundaryProfile | None = None,
                             z_test=None, **solve_kw) -> float:
    """Max deviation between the numerical RH solution at (x, 0) and the closed form."""
    from .boundary import trivial_profile

    profile1 = profile1 or trivial_profile("y")
    if contour is None:
        sol = solve_point(profile0, profile1, x, 0.0, tol=tol, **solve_kw)
        contour = sol.contour
    else:
        _, w = assemble_jump(profile0, profile1, x, 0.0, contour, tol)
        sol = solve(w, solve_kw.get("method", "auto"))
    if z_test is None:
        c0, c1 = contour.circles
        z_test = np.array([
            0.0, 0.3j, -0.2 + 0.1j, 2.0 + 3.0j, -40.0 + 5.0j,       # outer region
            c0.center + 0.3 * c0.radius * np.exp(0.7j), -1.0 + 1e-3j,  # inside Gamma_0
            c1.center + 0.4 * c1.radius * np.exp(2.1j),               # inside Gamma_1
        ])
    exact = boundary_solution(profile0, x, contour, z_test, tol)
    num = evaluate(sol, z_test)
    return float(np.max(np.abs(num - exact)))
