"""Characteristic boundary data and the coefficient matrices of the boundary Lax equations.

Data along one characteristic may have derivatives blowing up like s**(-alpha) at the
corner.  Every profile is therefore stored in the regularized variable
``u = s**(1 - alpha)``, in which E and H are C^1; derivatives with respect to s are
recovered by the chain rule.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import FloaterHormannInterpolator

from .errors import FormatError, PositivityError, ValidationError

CORNER_TOL_CLOSED = 1e-10
CORNER_TOL_SAMPLED = 1e-6

Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BoundaryProfile:
    """Data on one characteristic.

    ``e_u``, ``h_u`` give E and H as functions of u; ``de_u``, ``dh_u`` their
    u-derivatives.  All four are vectorized.
    """

    axis: str
    alpha: float
    e_u: Fn
    h_u: Fn
    de_u: Fn
    dh_u: Fn
    s_max: float = 1.0
    source: str = "builtin-family"
    meta: dict = field(default_factory=dict, compare=False)

    def u_of(self, s):
        return np.asarray(s, dtype=float) ** (1.0 - self.alpha)

    def s_of(self, u):
        return np.asarray(u, dtype=float) ** (1.0 / (1.0 - self.alpha))

    def _check_range(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0) or np.any(s > self.s_max * (1 + 1e-12)):
            raise ValueError(f"s outside the represented range [0, {self.s_max}]")
        return s

    def E(self, s):
        return self.e_u(self.u_of(self._check_range(s)))

    def H(self, s):
        return self.h_u(self.u_of(self._check_range(s)))

    def f(self, s):
        return f_of(self.E(s), self.H(s))

    def _ds(self, du_fn, s):
        s = self._check_range(s)
        u = self.u_of(s)
        with np.errstate(divide="ignore"):
            return du_fn(u) * (1.0 - self.alpha) * s ** (-self.alpha)

    def dE(self, s):
        """dE/ds (infinite at s = 0 when alpha > 0 and the data are singular)."""
        return self._ds(self.de_u, s)

    def dH(self, s):
        return self._ds(self.dh_u, s)

    def weighted_dE(self, s):
        """s**alpha * dE/ds, finite up to the corner."""
        return (1.0 - self.alpha) * self.de_u(self.u_of(self._check_range(s)))

    def weighted_dH(self, s):
        return (1.0 - self.alpha) * self.dh_u(self.u_of(self._check_range(s)))

    def truncated(self, s_cut: float) -> "BoundaryProfile":
        """Same data on [0, s_cut], frozen at their s_cut values beyond it."""
        u_cut = float(self.u_of(s_cut))

        def clip(fn):
            return lambda u: fn(np.minimum(u, u_cut))

        def cut(fn):
            return lambda u: np.where(np.asarray(u) <= u_cut, fn(np.minimum(u, u_cut)), 0.0)

        return BoundaryProfile(self.axis, self.alpha, clip(self.e_u), clip(self.h_u),
                               cut(self.de_u), cut(self.dh_u), self.s_max,
                               self.source, {**self.meta, "truncated_at": s_cut})


def f_of(E, H):
    return np.real(E) - np.abs(H) ** 2


# --------------------------------------------------------------------------- builders

def _const(value):
    return lambda u: np.full(np.shape(u), value, dtype=complex)


def trivial_profile(axis: str = "x", alpha: float = 0.0) -> BoundaryProfile:
    return BoundaryProfile(axis, alpha, _const(1.0), _const(0.0), _const(0.0),
                           _const(0.0), source="builtin-family", meta={"kind": "trivial"})


def family_profile(axis: str, p: float, q: float, amplitude: float = 1.0) -> BoundaryProfile:
    """Characteristic restriction of E = 1, H = p t + i q z.

    On y = 0 this is H = (p - i q) sqrt(x), on x = 0 H = (p + i q) sqrt(y); alpha = 1/2
    and u = sqrt(s).  ``amplitude`` rescales H (the result is an exact solution only
    for amplitude 1 and p**2 + q**2 = 1).
    """
    c = amplitude * (complex(p, -q) if axis == "x" else complex(p, q))
    return BoundaryProfile(axis, 0.5, _const(1.0), lambda u: c * np.asarray(u, dtype=complex),
                           _const(0.0), _const(c), source="builtin-family",
                           meta={"kind": "family", "p": p, "q": q, "amplitude": amplitude})


def polynomial_profile(axis: str, e_coeffs, h_coeffs, alpha: float = 0.5,
                       s_max: float = 1.0) -> BoundaryProfile:
    """E = 1 + sum_n e_n u**n, H = sum_n h_n u**n (coefficients for n = 1, 2, ...)."""
    e = np.polynomial.Polynomial(np.concatenate([[1.0], np.asarray(e_coeffs, complex)]))
    h = np.polynomial.Polynomial(np.concatenate([[0.0], np.asarray(h_coeffs, complex)]))
    de, dh = e.deriv(), h.deriv()
    return BoundaryProfile(axis, alpha, lambda u: e(np.asarray(u, complex)),
                           lambda u: h(np.asarray(u, complex)),
                           lambda u: de(np.asarray(u, complex)) + 0j * np.asarray(u),
                           lambda u: dh(np.asarray(u, complex)) + 0j * np.asarray(u),
                           s_max=s_max, source="builtin-family",
                           meta={"kind": "polynomial", "e": list(e_coeffs), "h": list(h_coeffs)})


class FloaterHormann:
    """scipy's Floater-Hormann rational interpolant plus its first derivative.

    Stable on non-uniform and equispaced grids, pole-free on the real line.
    """

    def __init__(self, nodes, values, d: int = 5):
        self.x = np.asarray(nodes, dtype=float)
        self.f = np.asarray(values, dtype=complex)
        self._fh = FloaterHormannInterpolator(self.x, self.f, d=min(d, len(self.x) - 1))
        self.w = np.asarray(self._fh.weights, dtype=float).ravel()

    def _diffs(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        diff = t[:, None] - self.x[None, :]
        hit = diff == 0.0
        return t, diff, hit

    def __call__(self, t):
        return np.asarray(self._fh(np.asarray(t, dtype=float)), dtype=complex)

    def derivative(self, t):
        t0 = np.asarray(t)
        t, diff, hit = self._diffs(t)
        out = np.empty(len(t), dtype=complex)
        for r in range(len(t)):
            if hit[r].any():
                i = int(np.nonzero(hit[r])[0][0])
                mask = np.arange(len(self.x)) != i
                out[r] = -np.sum(self.w[mask] * (self.f[i] - self.f[mask])
                                 / (self.x[i] - self.x[mask])) / self.w[i]
            else:
                c = self.w / diff[r]
                val = (c @ self.f) / c.sum()
                out[r] = np.sum(c * (val - self.f) / diff[r]) / c.sum()
        return out.reshape(t0.shape)


def sampled_profile(s, E, H, alpha: float, axis: str, degree: int = 5) -> BoundaryProfile:
    """Profile interpolating samples in u = s**(1 - alpha)."""
    s = np.asarray(s, dtype=float)
    u = s ** (1.0 - alpha)
    ei = FloaterHormann(u, E, degree)
    hi = FloaterHormann(u, H, degree)
    return BoundaryProfile(axis, alpha, ei, hi, ei.derivative, hi.derivative,
                           s_max=float(s[-1]), source="sampled-file",
                           meta={"kind": "samples", "n": len(s)})


# --------------------------------------------------------------------------- validation

def validate(profile: BoundaryProfile, n_check: int = 201) -> BoundaryProfile:
    tol = CORNER_TOL_SAMPLED if profile.source == "sampled-file" else CORNER_TOL_CLOSED
    problems = []
    if not (0.0 <= profile.alpha < 1.0):
        problems.append(f"alpha = {profile.alpha} not in [0, 1)")
    if profile.axis not in ("x", "y"):
        problems.append(f"axis {profile.axis!r} is neither 'x' nor 'y'")
    if problems:
        raise ValidationError(problems)
    e0 = complex(np.asarray(profile.e_u(np.array([0.0])))[0])
    h0 = complex(np.asarray(profile.h_u(np.array([0.0])))[0])
    if abs(e0 - 1.0) > tol:
        problems.append(f"E(0) = {e0} != 1")
    if abs(h0) > tol:
        problems.append(f"H(0) = {h0} != 0")
    u = np.linspace(0.0, float(profile.u_of(profile.s_max)), n_check)
    if profile.s_max >= 1.0:
        u = u[:-1]
    f = f_of(profile.e_u(u), profile.h_u(u))
    if np.any(~np.isfinite(f)) or np.any(f <= 0.0):
        bad = float(profile.s_of(u[np.argmin(np.where(np.isfinite(f), f, -np.inf))]))
        problems.append(f"Re E - |H|^2 <= 0 near s = {bad:.6g}")
    de, dh = profile.de_u(u), profile.dh_u(u)
    if not (np.all(np.isfinite(de)) and np.all(np.isfinite(dh))):
        problems.append("s^alpha dE/ds or s^alpha dH/ds unbounded")
    if problems:
        raise ValidationError(problems)
    return profile


def read_samples(csv_path, meta_path=None):
    """Read a ``s,reE,imE,reH,imH`` CSV plus its ``{"alpha", "axis"}`` sidecar."""
    csv_path = Path(csv_path)
    meta_path = Path(meta_path) if meta_path else csv_path.with_suffix(".json")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        alpha, axis = float(meta["alpha"]), str(meta["axis"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"bad sidecar {meta_path}: {exc}") from exc
    with csv_path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["s", "reE", "imE", "reH", "imH"]:
            raise FormatError(f"{csv_path}: header must be s,reE,imE,reH,imH, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise FormatError(f"{csv_path}:{lineno}: {exc}") from exc
            if len(rows[-1]) != 5:
                raise FormatError(f"{csv_path}:{lineno}: expected 5 columns")
    data = np.array(rows)
    if len(data) < 2:
        raise FormatError(f"{csv_path}: need at least two samples")
    s = data[:, 0]
    if s[0] != 0.0 or np.any(np.diff(s) <= 0.0):
        raise FormatError(f"{csv_path}: s must start at 0 and increase strictly")
    return s, data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4], alpha, axis


def write_samples(csv_path, s, E, H, alpha: float, axis: str) -> None:
    csv_path = Path(csv_path)
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "reE", "imE", "reH", "imH"])
        for row in zip(s, np.real(E), np.imag(E), np.real(H), np.imag(H)):
            w.writerow([repr(float(v)) for v in row])
    csv_path.with_suffix(".json").write_text(json.dumps({"alpha": alpha, "axis": axis}),
                                             encoding="utf-8")


def load_profile(descriptor, axis: str | None = None, base_dir=None) -> BoundaryProfile:
    """Build and validate a profile from a descriptor.

    Accepted forms (JSON-compatible dicts)::

        {"kind": "family", "p": 1, "q": 0, "amplitude": 1}
        {"kind": "trivial"}
        {"kind": "polynomial", "e": [[re, im], ...], "h": [...], "alpha": 0.5}
        {"kind": "samples", "path": "data.csv", "meta": "data.json"}

    ``axis`` overrides the descriptor's ``axis`` entry.
    """
    if isinstance(descriptor, BoundaryProfile):
        return validate(descriptor)
    d = dict(descriptor)
    kind = d.get("kind", "family")
    ax = axis or d.get("axis", "x")
    if kind == "family":
        prof = family_profile(ax, float(d.get("p", 1.0)), float(d.get("q", 0.0)),
                              float(d.get("amplitude", 1.0)))
    elif kind == "trivial":
        prof = trivial_profile(ax, float(d.get("alpha", 0.0)))
    elif kind == "polynomial":
        prof = polynomial_profile(ax, [_complex(c) for c in d.get("e", [])],
                                  [_complex(c) for c in d.get("h", [])],
                                  float(d.get("alpha", 0.5)))
    elif kind == "samples":
        base = Path(base_dir) if base_dir else Path(".")
        path = base / d["path"]
        meta = base / d["meta"] if "meta" in d else None
        s, E, H, alpha, file_axis = read_samples(path, meta)
        if axis and file_axis != axis:
            raise ValidationError([f"{path}: axis {file_axis!r} but used for {axis!r}"])
        prof = sampled_profile(s, E, H, alpha, file_axis, int(d.get("degree", 5)))
    else:
        raise FormatError(f"unknown profile kind {kind!r}")
    if "truncate" in d:
        prof = prof.truncated(float(d["truncate"]))
    return validate(prof)


def _complex(c):
    if isinstance(c, (list, tuple)):
        return complex(c[0], c[1] if len(c) > 1 else 0.0)
    return complex(c)


# --------------------------------------------------------------------------- coefficients

@dataclass(frozen=True)
class DerivedCoefficients:
    """A(s) (or B(s)), f(s) and sqrt(f(s)) for one characteristic."""

    profile: BoundaryProfile

    def A(self, s):
        p = self.profile
        E, H = p.E(s), p.H(s)
        return (p.dE(s) - 2.0 * np.conj(H) * p.dH(s)) / (2.0 * f_of(E, H))

    B = A

    def f(self, s):
        return self.profile.f(s)

    def sqrtF(self, s):
        return np.sqrt(self.f(s))

    def A_u(self, u):
        """A * ds/du as a function of u; regular at the corner."""
        p = self.profile
        E, H = p.e_u(u), p.h_u(u)
        return (p.de_u(u) - 2.0 * np.conj(H) * p.dh_u(u)) / (2.0 * f_of(E, H))


def derive(profile: BoundaryProfile, s_check=None) -> DerivedCoefficients:
    if s_check is None:
        s_check = profile.s_of(np.linspace(0.0, float(profile.u_of(profile.s_max)), 101))
        if profile.s_max >= 1.0:
            s_check = s_check[:-1]
    if np.any(profile.f(s_check) <= 0.0):
        raise PositivityError("f <= 0 on the evaluation range")
    return DerivedCoefficients(profile)


def lax_matrix(A, hd, ell, sqrt_f):
    """Shared shape of the boundary Lax coefficients.

    ``ell`` is lambda for the x-characteristic and 1/lambda for the y-characteristic;
    ``hd`` the derivative of H along the characteristic.  Broadcasts over leading
    array dimensions and returns shape (..., 3, 3).
    """
    A, hd, ell, sqrt_f = np.broadcast_arrays(*(np.asarray(v, dtype=complex)
                                               for v in (A, hd, ell, sqrt_f)))
    Ac, g = np.conj(A), 1j * hd / sqrt_f
    gc = 1j * np.conj(hd) / sqrt_f
    out = np.empty(A.shape + (3, 3), dtype=complex)
    out[..., 0, 0] = Ac
    out[..., 0, 1] = ell * Ac
    out[..., 0, 2] = g
    out[..., 1, 0] = ell * A
    out[..., 1, 1] = A
    out[..., 1, 2] = -ell * g
    out[..., 2, 0] = gc
    out[..., 2, 1] = ell * gc
    out[..., 2, 2] = 0.5 * (A + Ac)
    return out


def coefficient_matrix_U0(profile: BoundaryProfile, x, lam):
    """U_0(x, P) given lambda(x, 0, P); vectorized over ``lam``."""
    dc = DerivedCoefficients(profile)
    return lax_matrix(dc.A(x), profile.dH(x), lam, dc.sqrtF(x))


def coefficient_matrix_V1(profile: BoundaryProfile, y, lam):
    """V_1(y, P) given lambda(0, y, P); an infinite lambda gives the k = 0 reduction."""
    dc = DerivedCoefficients(profile)
    lam = np.asarray(lam, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        ell = np.where(np.isinf(lam), 0.0, 1.0 / lam)
    return lax_matrix(dc.A(y), profile.dH(y), ell, dc.sqrtF(y))


def scaled_lax_matrix(profile: BoundaryProfile, u, ell):
    """Coefficient matrix times ds/du at parameter u (what the integrator sees)."""
    dc = DerivedCoefficients(profile)
    E, H = profile.e_u(u), profile.h_u(u)
    return lax_matrix(dc.A_u(u), profile.dh_u(u), ell, np.sqrt(f_of(E, H)))
