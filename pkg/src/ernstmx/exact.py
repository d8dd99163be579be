"""Closed-form colliding plane-wave family with E = 1 and H = p t + i q zc."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import check_domain


@dataclass(frozen=True)
class FamilyParams:
    p: float
    q: float

    def __post_init__(self):
        if abs(self.p ** 2 + self.q ** 2 - 1.0) > 1e-12:
            raise ValueError(f"p^2 + q^2 = {self.p ** 2 + self.q ** 2} (expected 1)")

    @classmethod
    def from_angle(cls, theta: float) -> "FamilyParams":
        return cls(float(np.cos(theta)), float(np.sin(theta)))


BELL_SZEKERES = FamilyParams(1.0, 0.0)


def tz(x, y):
    """(t, zc) with t = sqrt(x(1-y)) + sqrt(y(1-x)), zc = sqrt(y(1-x)) - sqrt(x(1-y))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.sqrt(x) * np.sqrt(1.0 - y)
    b = np.sqrt(y) * np.sqrt(1.0 - x)
    return a + b, b - a


def potentials(params: FamilyParams, x, y):
    """(E, H, f) of the family; vectorized over x, y."""
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        check_domain(float(x), float(y))
    t, zc = tz(x, y)
    H = params.p * t + 1j * params.q * zc
    E = np.ones_like(H)
    return E, H, 1.0 - np.abs(H) ** 2


def potential_sample(params: FamilyParams, x: float, y: float):
    from .reconstruct import PotentialSample

    E, H, f = potentials(params, x, y)
    return PotentialSample((float(x), float(y)), complex(E), complex(H), float(f),
                           (1.0 - x - y) / float(f))


def characteristic_data(params: FamilyParams):
    """Coefficients c with H_0(x) = c0 sqrt(x), H_1(y) = c1 sqrt(y)."""
    return complex(params.p, -params.q), complex(params.p, params.q)


def boundary_constants(params: FamilyParams):
    """(m1, n1, m2, n2, value) with value = |m1|^2 + 4|n1|^2."""
    n1 = 0.5 * complex(params.p, -params.q)
    m1 = m2 = 0j
    n2 = n1.conjugate()
    return m1, n1, m2, n2, abs(m1) ** 2 + 4 * abs(n1) ** 2


def nutku_halil(params: FamilyParams, x, y):
    """(1 + H) / (1 - H) for the family's H.  Solves the vacuum Ernst equation,
    not the coupled system handled by this package; provided for export only."""
    _, H, _ = potentials(params, x, y)
    return (1.0 + H) / (1.0 - H)
