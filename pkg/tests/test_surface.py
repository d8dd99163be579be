import math

import numpy as np
import pytest

from ernstmx import surface
from ernstmx.errors import BranchCutError, ContourInfeasible, DegenerateError, DomainError
from ernstmx.surface import Sheet, SurfacePoint


def test_lambda_at_infinity():
    assert surface.lambda_(0.2, 0.3, math.inf, "plus") == 1
    assert surface.lambda_(0.2, 0.3, math.inf, "minus") == -1


def test_lambda_squared_relation():
    lam = surface.lambda_(0.2, 0.3, 2 + 1j)
    assert abs(lam ** 2 - (2 + 1j - 0.7) / (2 + 1j - 0.2)) < 1e-14
    assert lam.real > 0


def test_branch_points_and_cut():
    assert surface.lambda_(0.2, 0.3, 0.7) == 0
    assert surface.lambda_(0.2, 0.3, 0.2) == surface.INF
    with pytest.raises(BranchCutError):
        surface.lambda_(0.2, 0.3, 0.5)
    with pytest.raises(DomainError):
        surface.lambda_(0.6, 0.5, 2.0)


def test_z_map_sheets():
    p = SurfacePoint.from_k(0.2, 0.3, 3.0 + 2j, "plus")
    m = SurfacePoint.from_k(0.2, 0.3, 3.0 + 2j, "minus")
    assert abs(p.z) > 1 > abs(m.z)
    assert abs(p.z * m.z - 1) < 1e-13
    back = surface.from_z(0.2, 0.3, p.z)
    assert back.sheet is Sheet.plus and abs(back.k - p.k) < 1e-12


def test_special_z_values():
    assert surface.from_z(0.2, 0.3, 0).sheet is Sheet.minus
    assert math.isinf(surface.from_z(0.2, 0.3, math.inf).k.real)
    assert surface.from_z(0.2, 0.3, -1).k == 0.2


def test_cut_image_endpoints():
    a0, a1 = surface.cut_image_endpoints(0.25, 0.25)
    L0 = math.sqrt(3.0)
    assert abs(a0 - (1 + L0) / (1 - L0)) < 1e-14
    assert a0 < -1 and a1 > 1
    with pytest.raises(DegenerateError):
        surface.cut_image_endpoints(0.0, 0.3)


def test_cut_maps_into_segment():
    x, y = 0.25, 0.25
    a0, _ = surface.cut_image_endpoints(x, y)
    for k in np.linspace(0.0, 0.249, 7):
        z = surface.to_z(surface.lambda_(x, y, k, "plus"))
        assert a0 - 1e-12 <= z.real < -1 and abs(z.imag) < 1e-14


def test_contour_example_values():
    c = surface.build_contour(0.25, 0.25, 64, 1.5, spacing="angle")
    g0 = c.gamma0
    assert abs(g0.outer - (-5.598)) < 1e-3 and abs(g0.inner - (-0.1786)) < 1e-4
    assert abs(g0.center - (-2.888)) < 1e-3 and abs(g0.radius - 2.710) < 1e-3
    assert abs(g0.center ** 2 - g0.radius ** 2 - 1) < 1e-12
    assert abs(g0.center) > g0.radius


@pytest.mark.parametrize("spacing", ["angle", "hyperbolic"])
def test_nodes_on_circle_clockwise(spacing):
    c = surface.build_contour(0.3, 0.2, 128, spacing=spacing)
    for circ in c.circles:
        z = circ.nodes
        assert np.allclose(np.abs(z - circ.center), circ.radius, atol=1e-12)
        # clockwise: signed area negative
        area = 0.5 * np.sum((z.real * np.roll(z.imag, -1) - np.roll(z.real, -1) * z.imag))
        assert area < 0
        # clockwise: the weights integrate dz / (z - c) to -2 pi i
        assert abs(np.sum(circ.weights)) < 1e-12
        assert abs(np.sum(circ.weights / (z - circ.center)) + 2j * np.pi) < 1e-10


def test_contour_symmetry_and_feasibility():
    c = surface.build_contour(0.4, 0.2, 16)
    for circ in c.circles:
        z = circ.nodes
        gap = np.abs(np.conj(z)[:, None] - z[None, :]).min(axis=1)
        assert gap.max() < 1e-10
    with pytest.raises(ContourInfeasible):
        surface.build_contour(0.5, 0.5 - 1e-15, 16)
    with pytest.raises(ValueError):
        surface.build_contour(0.2, 0.2, 15)


def test_edge_contour_uses_fallback_loop():
    c = surface.build_contour(0.0, 0.3, 16)
    assert abs(c.gamma0.radius - surface.FALLBACK_RADIUS) < 1e-12
    assert c.gamma0.contains(-1.0)


def test_transport_lambda_identity_and_relation():
    lam = np.array([0.3 + 0.4j, 2.0 - 1j])
    assert np.allclose(surface.transport_lambda(lam, 0.3, 0.2, 0.3, 0.2), lam)
    x, y, xp, yp = 0.3, 0.2, 0.1, 0.0
    lp = surface.transport_lambda(lam, x, y, xp, yp)
    k = (lam ** 2 * x - (1 - y)) / (lam ** 2 - 1)
    assert np.allclose(lp ** 2, (k - (1 - yp)) / (k - xp))
