"""Potentials from m(x, y, 0), and the map back."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import DegenerateRecovery, PositivityError
from .volterra import LAMBDA, tilde_phi

BRANCH_SWITCH = 1e-6


@dataclass(frozen=True)
class PotentialSample:
    xy: tuple
    E: complex
    H: complex
    f: float
    chi: float
    branch: str = "primary"

    def as_row(self) -> dict:
        d = asdict(self)
        return d


def recover(mhat: np.ndarray, xy=(0.0, 0.0)) -> PotentialSample:
    m = np.asarray(mhat, dtype=complex)
    scale = float(np.linalg.norm(m))
    den = m[2, 2] + m[0, 0] + m[1, 0]
    if abs(den) >= BRANCH_SWITCH * scale:
        E = (m[2, 2] + m[0, 0] - m[1, 0]) / den
        H = -1j * m[1, 2] / den
        branch = "primary"
    else:
        den_e = 1.0 - m[0, 0] - m[1, 0]
        den_h = (m[0, 0] + m[1, 0] - 1.0) * m[1, 2]
        if min(abs(den_e), abs(den_h)) < BRANCH_SWITCH * scale:
            raise DegenerateRecovery(f"both recovery branches singular at {xy}")
        E = np.conj(-(1.0 - m[0, 0] + m[1, 0]) / den_e)
        H = np.conj(1j * m[1, 0] * (m[2, 2] - 1.0) / den_h)
        branch = "alternate"
    f = 2.0 * (m[1, 1].real + 1.0) / abs(1.0 + m[1, 1] + m[1, 0]) ** 2
    x, y = xy
    return PotentialSample((float(x), float(y)), complex(E), complex(H), float(f),
                           float((1.0 - x - y) / f), branch)


def forward(E: complex, H: complex) -> np.ndarray:
    """m-hat = Phi~^{-1} Lambda Phi~ Lambda."""
    f = E.real - abs(H) ** 2
    if f <= 0.0:
        raise PositivityError(f"Re E - |H|^2 = {f} <= 0")
    T = tilde_phi(complex(E), complex(H))
    return np.linalg.solve(T, LAMBDA @ T @ LAMBDA)
