"""The two-sheeted spectral surface and the two-circle jump contour.

For fixed (x, y) the spectral parameter k lives on the genus-zero surface
``lambda**2 = (k - (1 - y)) / (k - x)``.  The map ``z = (1 + lambda) / (1 - lambda)``
uniformizes it: the plus sheet (Re lambda > 0) goes to |z| > 1, the minus sheet to
|z| < 1 and the cut (x, 1 - y) to the unit circle.  Branch points x and 1 - y land on
z = -1 and z = +1, the two points above k = infinity on z = infinity (plus) and z = 0
(minus).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import BranchCutError, ContourInfeasible, DegenerateError, DomainError

INF = complex(math.inf, 0.0)

#: radius used for a loop whose cut image has collapsed (x = 0 or y = 0)
FALLBACK_RADIUS = 0.5


class Sheet(str, Enum):
    plus = "plus"
    minus = "minus"

    @property
    def sign(self) -> int:
        return 1 if self is Sheet.plus else -1


def check_domain(x: float, y: float) -> None:
    if not (x >= 0.0 and y >= 0.0 and x + y < 1.0):
        raise DomainError(f"(x, y) = ({x}, {y}) is not in D")


def _is_inf(v) -> bool:
    return cmath.isinf(complex(v))


def _fix_branch(root: complex) -> complex:
    # Re >= 0, ties on the imaginary axis broken by Im > 0
    if root.real < 0.0 or (root.real == 0.0 and root.imag < 0.0):
        return -root
    return root


def lambda_(x: float, y: float, k, sheet=Sheet.plus) -> complex:
    """Sheet-resolved root of ``lambda**2 = (k - (1 - y)) / (k - x)``.

    ``k`` may be ``inf``.  The branch points are accepted: k = x gives an infinite
    lambda, k = 1 - y gives zero.  Points of the open cut raise BranchCutError.
    """
    check_domain(x, y)
    sheet = Sheet(sheet)
    if _is_inf(k):
        return complex(sheet.sign)
    k = complex(k)
    if k == x:
        return INF
    if k.imag == 0.0 and x < k.real < 1.0 - y:
        raise BranchCutError(f"k = {k} lies on the cut [{x}, {1 - y}]")
    root = _fix_branch(cmath.sqrt((k - (1.0 - y)) / (k - x)))
    return sheet.sign * root


def to_z(lam):
    """z = (1 + lambda) / (1 - lambda); lambda = inf maps to -1, lambda = 1 to inf."""
    lam = complex(lam)
    if _is_inf(lam):
        return complex(-1.0)
    if lam == 1.0:
        return INF
    return (1.0 + lam) / (1.0 - lam)


def lambda_from_z(z):
    """Inverse of :func:`to_z`, vectorized over arrays."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = (z - 1.0) / (z + 1.0)
    lam = np.where(np.isinf(z), 1.0 + 0j, lam)
    lam = np.where(z == -1.0, INF, lam)
    return lam if lam.ndim else complex(lam)


@dataclass(frozen=True)
class SurfacePoint:
    """A point of the surface attached to (x, y), with cached lambda and z."""

    x: float
    y: float
    k: complex
    sheet: Sheet
    lam: complex = field(compare=False)
    z: complex = field(compare=False)

    @classmethod
    def from_k(cls, x, y, k, sheet=Sheet.plus) -> "SurfacePoint":
        lam = lambda_(x, y, k, sheet)
        return cls(float(x), float(y), complex(k), Sheet(sheet), lam, to_z(lam))

    @classmethod
    def from_z(cls, x, y, z) -> "SurfacePoint":
        return from_z(x, y, z)


def from_z(x: float, y: float, z) -> SurfacePoint:
    """Preimage of z on the surface over (x, y)."""
    check_domain(x, y)
    z = complex(z)
    if z == 1.0:
        raise ValueError("z = 1 is the branch point k = 1 - y (lambda = 0)")
    if _is_inf(z):
        return SurfacePoint(x, y, INF, Sheet.plus, complex(1.0), INF)
    if z == 0.0:
        return SurfacePoint(x, y, INF, Sheet.minus, complex(-1.0), 0j)
    if z == -1.0:
        return SurfacePoint(x, y, complex(x), Sheet.plus, INF, complex(-1.0))
    lam = (z - 1.0) / (z + 1.0)
    lam2 = lam * lam
    k = (lam2 * x - (1.0 - y)) / (lam2 - 1.0)
    r = abs(z)
    if abs(r - 1.0) > 1e-14:
        sheet = Sheet.plus if r > 1.0 else Sheet.minus
    else:
        sheet = Sheet.plus if z.imag > 0.0 else Sheet.minus
        k = complex(k.real, 0.0)
    return SurfacePoint(float(x), float(y), k, sheet, lam, z)


def transport_lambda(lam, x: float, y: float, xp: float, yp: float):
    """lambda of the same spectral point P on the surface over (xp, yp).

    P is given by its lambda on the surface over (x, y).  The result is
    ``lam * sqrt(rho2)`` with the principal root: ``rho2`` stays off the negative
    axis as long as the k-projection of P avoids [min(x, xp), max(x, xp)] and
    [1 - max(y, yp), 1 - min(y, yp)], so the continuation across the common part
    of the two cuts is automatic.  Vectorized over ``lam``.
    """
    lam = np.asarray(lam, dtype=complex)
    l2 = lam * lam
    num = l2 * (x - 1.0 + yp) + (y - yp)
    den = l2 * (x - xp) - (1.0 - y - xp)
    rho2 = num / (l2 * den)
    return lam * np.sqrt(rho2)


def cut_image_endpoints(x: float, y: float) -> tuple[float, float]:
    """Outer endpoints a0 < -1 of F(Sigma_0) = [a0, 1/a0] and a1 > 1 of F(Sigma_1)."""
    check_domain(x, y)
    if x == 0.0 or y == 0.0:
        raise DegenerateError(f"cut image collapses at (x, y) = ({x}, {y})")
    L0 = math.sqrt((1.0 - y) / x)
    L1 = math.sqrt((1.0 - x) / y)
    return (1.0 + L0) / (1.0 - L0), (L1 + 1.0) / (L1 - 1.0)


@dataclass(frozen=True)
class Circle:
    """Clockwise circle orthogonal to the unit circle, crossing the real axis at
    ``outer`` (|outer| > 1) and ``1/outer``.

    Nodes are the images of ``w_j = exp(-2 pi i j / N)`` under the Moebius map
    ``M(w) = (a w + focus) / (c w + 1)`` that sends the unit w-circle onto the circle,
    w = -1 to ``outer``, w = 1 to ``1/outer`` and w = 0 to ``focus``.  With ``focus``
    at the center this is plain equal-angle spacing; with ``focus`` = +-1 the nodes are
    equidistributed for the hyperbolic metric, which clusters them at the end near 0.
    """

    outer: float
    focus: float
    N: int

    @property
    def inner(self) -> float:
        return 1.0 / self.outer

    @property
    def center(self) -> float:
        return 0.5 * (self.outer + self.inner)

    @property
    def radius(self) -> float:
        return 0.5 * abs(self.outer - self.inner)

    @property
    def _coeffs(self) -> tuple[float, float]:
        f, pin, pout = self.focus, self.inner, self.outer
        c = (2.0 * f - pin - pout) / (pin - pout)
        return pin * (c + 1.0) - f, c

    def M(self, w):
        a, c = self._coeffs
        return (a * w + self.focus) / (c * w + 1.0)

    def M_inv(self, z):
        a, c = self._coeffs
        return (z - self.focus) / (a - c * z)

    def dM(self, w):
        a, c = self._coeffs
        return (a - self.focus * c) / (c * w + 1.0) ** 2

    @property
    def w_inf(self) -> complex:
        """Preimage of z = infinity (inf itself for equal-angle spacing)."""
        _, c = self._coeffs
        return INF if c == 0.0 else complex(-1.0 / c)

    @property
    def w(self) -> np.ndarray:
        return np.exp(-2j * np.pi * np.arange(self.N) / self.N)

    @property
    def nodes(self) -> np.ndarray:
        return self.M(self.w)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights for the clockwise integral of g(z) dz."""
        w = self.w
        return (2.0 * np.pi / self.N) * self.dM(w) * (-1j * w)

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def with_N(self, N: int) -> "Circle":
        return Circle(self.outer, self.focus, int(N))


@dataclass(frozen=True)
class ContourSpec:
    x: float
    y: float
    gamma0: Circle
    gamma1: Circle

    @property
    def circles(self) -> tuple[Circle, Circle]:
        return self.gamma0, self.gamma1

    @property
    def nodes_per_circle(self) -> int:
        return self.gamma0.N

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([self.gamma0.nodes, self.gamma1.nodes])

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate([self.gamma0.weights, self.gamma1.weights])

    def with_N(self, N: int) -> "ContourSpec":
        return ContourSpec(self.x, self.y, self.gamma0.with_N(N), self.gamma1.with_N(N))

    def region(self, z) -> str:
        """'0', '1' or 'inf': which component of C minus the contour holds z."""
        if self.gamma0.contains(z):
            return "0"
        if self.gamma1.contains(z):
            return "1"
        return "inf"


def _outer_crossing(a: float | None, gamma: float, sign: int) -> float:
    r_min = FALLBACK_RADIUS
    r_floor = r_min + math.sqrt(r_min * r_min + 1.0)
    if a is None:
        return sign * r_floor
    return sign * max(gamma * abs(a), r_floor)


def build_contour(x: float, y: float, N: int = 64, gamma: float = 1.5,
                  spacing: str = "hyperbolic") -> ContourSpec:
    """Two clockwise circles enclosing F(Sigma_0) and F(Sigma_1).

    Each circle passes through ``gamma * a`` and its reciprocal, so it is
    orthogonal to the unit circle and invariant under z -> conj(z), z -> 1/z.  A loop
    whose radius would drop below ``FALLBACK_RADIUS`` (in particular on the edges
    x = 0, y = 0) is widened to that radius.
    """
    check_domain(x, y)
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    if N < 4 or N % 2:
        raise ValueError("N must be an even integer >= 4")
    a0 = a1 = None
    if x > 0.0:
        L0 = math.sqrt((1.0 - y) / x)
        if L0 - 1.0 <= 1e-12:
            raise ContourInfeasible(f"x + y too close to 1 at ({x}, {y})")
        a0 = (1.0 + L0) / (1.0 - L0)
    if y > 0.0:
        L1 = math.sqrt((1.0 - x) / y)
        if L1 - 1.0 <= 1e-12:
            raise ContourInfeasible(f"x + y too close to 1 at ({x}, {y})")
        a1 = (L1 + 1.0) / (L1 - 1.0)
    p0 = _outer_crossing(a0, gamma, -1)
    p1 = _outer_crossing(a1, gamma, +1)
    if not (math.isfinite(p0) and math.isfinite(p1)) or min(abs(1 / p0), 1 / p1) < 1e-10:
        raise ContourInfeasible(f"contour touches 0 at ({x}, {y}); shrink gamma")
    if spacing == "hyperbolic":
        f0, f1 = -1.0, 1.0
    elif spacing == "angle":
        f0, f1 = 0.5 * (p0 + 1 / p0), 0.5 * (p1 + 1 / p1)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    return ContourSpec(float(x), float(y), Circle(p0, f0, N), Circle(p1, f1, N))
