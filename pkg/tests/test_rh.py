import numpy as np
import pytest

from ernstmx import boundary, rh, surface
from ernstmx.cauchy import ContourFunction
from ernstmx.errors import ResolutionError, SingularSystemError

E13 = np.zeros((3, 3)); E13[0, 2] = 1.0


@pytest.fixture(scope="module")
def fam():
    return boundary.family_profile("x", 0.6, 0.8), boundary.family_profile("y", 0.6, 0.8)


def nilpotent_jump(N, spacing="hyperbolic"):
    """Jump I - E13 (z + 1) on Gamma_0; solution I + E13 (z + 1) inside Gamma_0, I elsewhere."""
    c = surface.build_contour(0.3, 0.2, N, spacing=spacing)
    w = np.zeros((2 * N, 3, 3), complex)
    w[:N] = -E13 * (c.gamma0.nodes[:, None, None] + 1)
    return c, ContourFunction(c, w)


def nilpotent_error(N, spacing="hyperbolic"):
    c, w = nilpotent_jump(N, spacing)
    sol = rh.solve(w, "direct")
    z = np.array([c.gamma0.center + 0.3 * c.gamma0.radius, -1.5, 0.0, 4.0 + 2j])
    exact = np.where(c.gamma0.contains(z)[:, None, None], np.eye(3) + E13 * (z[:, None, None] + 1),
                     np.eye(3))
    return float(np.max(np.abs(rh.evaluate(sol, z) - exact)))


def test_nilpotent_exact_with_angle_spacing():
    assert nilpotent_error(16, "angle") < 1e-13


def test_nilpotent_converges_with_hyperbolic_spacing():
    assert nilpotent_error(64) < 1e-6
    assert nilpotent_error(128) < 1e-12


def test_trivial_data_gives_identity():
    t0, t1 = boundary.trivial_profile("x"), boundary.trivial_profile("y")
    sol = rh.solve_point(t0, t1, 0.3, 0.3, 32)
    assert np.allclose(sol.m_at_zero, np.eye(3), atol=1e-14)
    assert np.allclose(sol.mu.samples, np.eye(3), atol=1e-14)


def test_invariants_and_inversion(fam):
    sol = rh.solve_point(*fam, 0.2, 0.3, 64, adaptive=False)
    d = rh.invariant_defects(sol.m_at_zero)
    assert max(d.values()) < 1e-8
    z = np.array([0.3 + 0.4j, -0.5j, 2.0 + 1j, -8.0 + 3j])
    assert rh.inversion_defect(sol, z) < 1e-6


def test_conjugation_symmetry_outer_region(fam):
    sol = rh.solve_point(*fam, 0.2, 0.3, 128, adaptive=False)
    rng = np.random.default_rng(0)
    z = 3 * (rng.normal(size=40) + 1j * rng.normal(size=40))
    z = z[[sol.contour.region(zz) == "inf" for zz in z]]
    assert len(z) > 5
    assert rh.conjugation_defect(sol, z) < 1e-6


def test_small_data_neumann_matches_direct():
    b0 = boundary.family_profile("x", 0.6, 0.8, amplitude=0.05)
    b1 = boundary.family_profile("y", 0.6, 0.8, amplitude=0.05)
    _, w = rh.assemble_jump(b0, b1, 0.3, 0.3, surface.build_contour(0.3, 0.3, 64))
    a, b = rh.solve(w, "neumann"), rh.solve(w, "direct")
    assert a.norm_proxy < rh.NEUMANN_THRESHOLD and rh.solve(w).method == "neumann"
    assert np.max(np.abs(a.m_at_zero - b.m_at_zero)) < 1e-10


def test_boundary_solution_on_axis(fam):
    assert rh.verify_boundary_solution(fam[0], 0.1) < 1e-8


def test_resolution_and_singular_errors(fam):
    with pytest.raises(ResolutionError):
        rh.solve_point(*fam, 0.45, 0.45, 16, n_max=16)
    c = surface.build_contour(0.3, 0.2, 16)
    w = ContourFunction(c, np.broadcast_to(-np.eye(3), (32, 3, 3)))  # v = 0
    with pytest.raises(SingularSystemError):
        rh.solve(w, "direct")


def test_outer_diagonal_converges_with_N():
    from ernstmx import exact, reconstruct

    b0, b1 = boundary.family_profile("x", 0.0, 1.0), boundary.family_profile("y", 0.0, 1.0)
    x, y = 0.035, 0.63
    H = exact.potentials(exact.FamilyParams(0.0, 1.0), x, y)[1]
    errs = [abs(reconstruct.recover(rh.solve_point(b0, b1, x, y, N, adaptive=False).m_at_zero).H - H)
            for N in (64, 128)]
    assert errs[1] < 1e-2 * errs[0] and errs[1] < 1e-5
