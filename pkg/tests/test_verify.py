import json

import numpy as np
import pytest

from ernstmx import boundary, exact, verify
from ernstmx.errors import ExtrapolationUnstable, GridTooCoarse
from oracles import family_derivatives, r1_nonsolution


def family_grid(n=13, x0=0.1, h=0.02, p=0.6, q=0.8):
    x = x0 + h * np.arange(n)
    fp = exact.FamilyParams(p, q)
    return verify.FieldGrid.from_function(lambda X, Y: exact.potentials(fp, X, Y)[:2], x, x)


def test_closed_form_residual_vanishes():
    for p, q in [(1.0, 0.0), (0.6, 0.8)]:
        r1, r2 = verify.residual_terms(0.2, 0.3, *family_derivatives(p, q, 0.2, 0.3))
        assert abs(r1) < 1e-14 and abs(r2) < 1e-14


def test_family_grid_residual_small():
    # discretisation error only: O(h^4) with large derivatives near the axes
    r1, r2 = verify.pde_residual(family_grid())
    assert np.nanmax(np.abs(r1)) < 1e-3 and np.nanmax(np.abs(r2)) < 1e-3
    assert verify.zero_curvature(family_grid()) < 1e-2


def test_nonsolution_detected():
    x = 0.1 + 0.02 * np.arange(11)
    g = verify.FieldGrid.from_function(lambda X, Y: (1 + X * Y, 0 * X), x, x)
    r1, _ = verify.pde_residual(g)
    assert abs(r1[5, 5] - r1_nonsolution(x[5], x[5])) < 1e-8
    assert abs(r1[5, 5]) > 0.1
    assert verify.zero_curvature(g) > 1e-2


def test_fourth_order_differences():
    errs = []
    for h in (0.04, 0.02, 0.01):
        x = 0.2 + h * np.arange(-4, 5)
        F = np.sin(3 * x)
        errs.append(abs(verify.d1(F, h, 0)[4] - 3 * np.cos(0.6)))
    assert min(verify.observed_order(errs)) > 3.8


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        verify.pde_residual(family_grid(n=6))


def test_richardson():
    h = 0.1 * 2.0 ** -np.arange(6)
    est = verify.richardson(3.0 + 2.0 * h + 0.5 * h ** 2, 2.0)
    assert abs(est.value - 3.0) < 1e-3 and est.uncertainty < 1e-3
    with pytest.raises(ExtrapolationUnstable):
        verify.richardson([0.0, 0.0, 0.1, 0.0, 5.0], 2.0)


def test_admissibility():
    ok, v1, v2 = verify.admissibility(0, 0.5, 0, 0.5j)
    assert ok and v1 == pytest.approx(1.0)
    assert not verify.admissibility(1.0, 0.5, 0, 0.5)[0]
    assert not verify.admissibility(0, 0.3, 0, 0.5)[0]


def test_edge_limit_with_closed_form_evaluator():
    fp = exact.FamilyParams(0.6, 0.8)
    profs = (boundary.family_profile("x", 0.6, 0.8), boundary.family_profile("y", 0.6, 0.8))
    ev = lambda x, y: tuple(complex(v) for v in exact.potentials(fp, x, y)[:2])
    for axis in ("x", "y"):
        th = verify.edge_limit_check(profs, ev, 0.36, axis)
        assert th["defect_H"] <= th["band_H"] + 1e-8
        assert th["defect_E"] <= th["band_E"] + 1e-8
        fe = verify.boundary_functional(ev, profs, 0.36, axis)
        assert abs(fe.value - 1.0) < 1e-3


def test_report_json(tmp_path):
    rep = verify.ResidualReport(grid={"nx": 3}, functional_x=verify.Estimate(1.0, 1e-4),
                                admissibility_values=(1.0, 1j))
    rep.to_json(tmp_path / "r.json")
    d = json.loads((tmp_path / "r.json").read_text())
    assert d["functional_x"]["value"] == 1.0 and d["admissibility_values"][1] == [0.0, 1.0]
