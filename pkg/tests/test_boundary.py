import json

import numpy as np
import pytest

from ernstmx import boundary
from ernstmx.errors import FormatError, PositivityError, ValidationError


def test_family_profile_values():
    b = boundary.family_profile("x", 0.6, 0.8)
    assert abs(b.H(0.25) - (0.6 - 0.8j) * 0.5) < 1e-15
    assert abs(b.f(0.25) - 0.75) < 1e-15
    assert abs(b.weighted_dH(0.0) - (0.6 - 0.8j) / 2) < 1e-15
    y = boundary.family_profile("y", 0.6, 0.8)
    assert abs(y.H(0.36) - (0.6 + 0.8j) * 0.6) < 1e-15


def test_validation_collects_all_problems():
    bad = boundary.polynomial_profile("x", [0.0], [1.5], alpha=0.5)  # f = 1 - 2.25 s
    with pytest.raises(ValidationError) as exc:
        boundary.validate(bad)
    assert any("Re E" in p for p in exc.value.problems)
    shifted = boundary.BoundaryProfile("x", 0.5, lambda u: 1.1 + 0 * u, lambda u: 0.1 + 0 * u,
                                       lambda u: 0 * u + 0j, lambda u: 0 * u + 0j)
    with pytest.raises(ValidationError) as exc:
        boundary.validate(shifted)
    assert len(exc.value.problems) == 2


def test_floater_hormann_reproduces_polynomials():
    u = np.linspace(0, 1, 23)
    fh = boundary.FloaterHormann(u, 1 + 2 * u - u ** 3, d=5)
    t = np.array([0.0, 0.013, 0.5, 0.77, 1.0])
    assert np.allclose(fh(t), 1 + 2 * t - t ** 3, atol=1e-12)
    assert np.allclose(fh.derivative(t), 2 - 3 * t ** 2, atol=1e-9)
    assert np.allclose(fh.derivative(u[[3, 10]]), 2 - 3 * u[[3, 10]] ** 2, atol=1e-9)


def test_samples_roundtrip(tmp_path):
    s = np.linspace(0, 0.9, 61)
    H = (0.6 - 0.8j) * np.sqrt(s)
    E = np.ones_like(H)
    boundary.write_samples(tmp_path / "x.csv", s, E, H, 0.5, "x")
    prof = boundary.load_profile({"kind": "samples", "path": "x.csv"}, "x", tmp_path)
    assert abs(prof.H(0.3) - (0.6 - 0.8j) * np.sqrt(0.3)) < 1e-10
    assert abs(prof.weighted_dH(0.2) - (0.6 - 0.8j) / 2) < 1e-8


def test_sample_format_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("s,E\n0,1\n")
    (tmp_path / "bad.json").write_text(json.dumps({"alpha": 0.5, "axis": "x"}))
    with pytest.raises(FormatError):
        boundary.read_samples(p)
    p.write_text("s,reE,imE,reH,imH\n0.1,1,0,0,0\n0,1,0,0,0\n")
    with pytest.raises(FormatError):
        boundary.read_samples(p)


def test_derive_and_positivity():
    b = boundary.family_profile("x", 1.0, 0.0)
    dc = boundary.derive(b)
    # A = -|H|^2' / (2 f) = -1 / (2 (1 - s)) for Bell-Szekeres
    assert abs(dc.A(0.36) + 1 / (2 * 0.64)) < 1e-14
    with pytest.raises(PositivityError):
        boundary.derive(boundary.family_profile("x", 1.0, 0.0, amplitude=1.2))


def test_lax_matrix_pattern_at_zero_lambda():
    b = boundary.family_profile("y", 0.6, 0.8)
    V = boundary.coefficient_matrix_V1(b, 0.3, np.array([np.inf]))[0]
    assert V[0, 1] == 0 and V[1, 0] == 0 and V[1, 2] == 0 and V[2, 1] == 0
    assert abs(np.trace(V) - 1.5 * (-1 / (1 - 0.3))) < 1e-14


def test_truncation_keeps_head():
    b = boundary.family_profile("x", 0.6, 0.8)
    t = b.truncated(0.5)
    s = np.linspace(0, 0.5, 11)
    assert np.array_equal(t.H(s), b.H(s))
    assert t.H(0.8) == b.H(0.5)
