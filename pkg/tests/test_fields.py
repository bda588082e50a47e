import numpy as np
import pytest

from conftest import maxwell_jet, random_orthogonal, random_velocity
from emframes.core import (Constants, NotOrthogonal, NotUnit, StepTooSmall,
                           cross)
from emframes.fields import (ChargeCurrent, ConstantFields, EMField, FieldJet,
                             FourPotential, FunctionProvider, PlaneWave,
                             PolynomialJet, TransformedProvider,
                             continuity_residual, curl, dalembertian_residual,
                             fields_from_potential, maxwell_constraint_system,
                             maxwell_residual, scalar_jet_rotation,
                             solve_jet_constraints, transform_cc_boost,
                             transform_cc_matrix, transform_em_boost,
                             transform_em_matrix, transform_em_rotation,
                             transform_jet, transform_limit,
                             transform_partials, transform_potential_boost,
                             transform_potential_jet, transform_scalar_rotation,
                             transform_vector_rotation, vector_jet_rotation)
from emframes.kinematics import (Orthogonal3, boost_matrix, composed_boost,
                                 rotation_matrix, thomas_rotation)
from emframes.nonradiating import poynting_divergence
from emframes.stress_energy import surface_equation_residual

E1 = np.array([1.0, 0, 0])
REFLECT_Z = Orthogonal3(np.diag([1.0, 1.0, -1.0]))


def test_scalar_rotation():
    f = lambda x, y, z, t: x
    g = Orthogonal3(np.array([[0, -1.0, 0], [1, 0, 0], [0, 0, 1]]))  # e1 -> e2
    fg = transform_scalar_rotation(f, g)
    assert fg(0.0, 2.0, 0.0, 0.0) == pytest.approx(2.0)
    _, grad = scalar_jet_rotation(0.0, [1, 0, 0, 0], g)
    assert np.allclose(grad[:3], g.m @ E1)
    assert transform_scalar_rotation(f, np.eye(3))(1.0, 2.0, 3.0, 0.0) == 1.0


def test_scalar_rotation_gradient_matches_numeric(rng):
    a = rng.normal(size=3)
    f = lambda x, y, z, t: a[0] * x * x + a[1] * y * z + a[2] * z + t
    g = random_orthogonal(rng)
    fg = transform_scalar_rotation(f, g)
    x = rng.normal(size=3)
    grad = np.array([2 * a[0] * x[0], a[1] * x[2], a[1] * x[1] + a[2], 1.0])
    _, gg = scalar_jet_rotation(f(*x, 0), grad, g)
    xp = g.m @ x
    h = 1e-6
    num = [(fg(*(xp + h * e), 0) - fg(*(xp - h * e), 0)) / (2 * h) for e in np.eye(3)]
    assert np.allclose(gg[:3], num, atol=1e-8)


def test_vector_rotation_identities(rng):
    for g in (random_orthogonal(rng, proper=True), REFLECT_Z):
        F, dF = rng.normal(size=3), rng.normal(size=(3, 4))
        H = rng.normal(size=3)
        Fg, dFg = vector_jet_rotation(F, dF, g)
        # divergence is a scalar, curl picks up sign(g)
        assert abs(np.trace(dFg[:, :3]) - np.trace(dF[:, :3])) < 1e-11
        assert np.allclose(curl(dFg), g.det_sign * (g.m @ curl(dF)), atol=1e-11)
        assert np.allclose(cross(g.m @ F, g.m @ H), g.det_sign * g.m @ cross(F, H), atol=1e-11)
    Fv = lambda x, y, z, t: np.array([x, y * y, t])
    out = transform_vector_rotation(Fv, np.eye(3))(1.0, 2.0, 3.0, 4.0)
    assert np.allclose(out, [1, 4, 4])


def test_rotation_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonal):
        transform_em_rotation(EMField([1, 0, 0], [0, 1, 0]), np.diag([1.0, 2.0, 1.0]))


def test_em_rotation_preserves_maxwell_and_poynting(rng):
    jet = maxwell_jet(rng)
    assert np.allclose(transform_em_rotation(jet, np.eye(3)).coefficients(), jet.coefficients())
    for g in (REFLECT_Z, random_orthogonal(rng)):
        out = transform_em_rotation(jet, g)
        assert np.max(np.abs(maxwell_residual(out))) < 1e-10
        assert abs(poynting_divergence(out) - poynting_divergence(jet)) < 1e-10


def test_cc_boost():
    cc = ChargeCurrent(1.0, [0, 0, 0])
    assert transform_cc_boost(cc, [0, 0, 0]) is cc
    out = transform_cc_boost(cc, [0.6, 0, 0])
    assert out.rho == pytest.approx(1.25)
    assert np.allclose(out.J, [-0.75, 0, 0])


def test_boost_round_trips(rng):
    for _ in range(20):
        v = random_velocity(rng, 0.9) + 0.2j * rng.normal(size=3)
        cc = ChargeCurrent(rng.normal(), rng.normal(size=3))
        back = transform_cc_boost(transform_cc_boost(cc, v), -v)
        assert abs(back.rho - cc.rho) < 1e-11 and np.allclose(back.J, cc.J, atol=1e-11)
        fld = EMField(rng.normal(size=3), rng.normal(size=3))
        back = transform_em_boost(transform_em_boost(fld, v), -v)
        assert np.allclose(back.E, fld.E, atol=1e-11) and np.allclose(back.B, fld.B, atol=1e-11)


def test_em_boost_example():
    out = transform_em_boost(EMField([0, 0, 0], [0, 0, 1.0]), [0.6, 0, 0])
    assert np.allclose(out.E, [0, -0.75, 0])
    assert np.allclose(out.B, [0, 0, 1.25])


def test_boost_formulas_match_tensor(rng):
    k = Constants(c=2.5, eps0=0.7)
    for _ in range(20):
        v = random_velocity(rng, 0.95, c=k.c)
        L = boost_matrix(v, const=k)
        fld = EMField(rng.normal(size=3), rng.normal(size=3))
        a, b = transform_em_boost(fld, v, k), transform_em_matrix(fld, L, k)
        assert np.allclose(a.E, b.E) and np.allclose(a.B, b.B)
        cc = ChargeCurrent(rng.normal(), rng.normal(size=3))
        a, b = transform_cc_boost(cc, v, k), transform_cc_matrix(cc, L, k)
        assert np.isclose(a.rho, b.rho) and np.allclose(a.J, b.J)


def test_potential_boost_commutes_with_derivation():
    pw = PlaneWave([0, 0, 1.0], [1.0, 0.5, 0.0], k=1.2)
    pt = np.array([0.3, -0.2, 0.1, 0.4])
    pj = pw.potential_jet(pt)
    E, B, _, _ = pw(*pt)
    f = fields_from_potential(pj)
    assert np.allclose(f.E, E) and np.allclose(f.B, B)
    L = boost_matrix([0.5, 0, 0])
    lhs = fields_from_potential(transform_potential_jet(pj, L))
    rhs = transform_em_matrix(EMField(E, B), L)
    assert np.allclose(lhs.E, rhs.E, atol=1e-9) and np.allclose(lhs.B, rhs.B, atol=1e-9)


def test_potential_boost_values():
    p = FourPotential(0.3, [0.1, -0.2, 0.5])
    assert transform_potential_boost(p, [0, 0, 0]) is p
    out = transform_potential_boost(p, [0.6, 0, 0])
    assert out.V_over_c == pytest.approx(1.25 * (0.3 - 0.6 * 0.1))
    assert np.allclose(out.A, [1.25 * (0.1 - 0.3 * 0.6), -0.2, 0.5])


def test_transform_limit_examples():
    f, c = transform_limit(EMField([0, 0, 0], [0, 0, 0]), ChargeCurrent(0, [0, 0, 0]), E1)
    assert np.allclose(f.E, 0) and np.allclose(f.B, 0) and c.rho == 0
    f, _ = transform_limit(EMField([0, 0, 0], [0, 0, 1.0]), ChargeCurrent(0, [0, 0, 0]), E1)
    assert np.allclose(f.E, [0, 1j, 0]) and np.allclose(f.B, 0)
    with pytest.raises(NotUnit):
        transform_limit(EMField([0, 0, 0], [0, 0, 1.0]), ChargeCurrent(0, [0, 0, 0]), [2, 0, 0])


def test_transform_limit_convergence(rng):
    fld = EMField(rng.normal(size=3), rng.normal(size=3))
    cc = ChargeCurrent(rng.normal(), rng.normal(size=3))
    lf, _ = transform_limit(fld, cc, E1)
    f = transform_em_boost(fld, 1e4 * E1)
    rel = np.linalg.norm(np.concatenate([f.E - lf.E, f.B - lf.B])) / np.linalg.norm(
        np.concatenate([lf.E, lf.B]))
    assert rel < 1e-3


def test_maxwell_residual_examples():
    jet = ConstantFields([1, 0, 0], [0, 1, 0]).jet([0, 0, 0, 0])
    assert np.allclose(maxwell_residual(jet), 0)
    pw = PlaneWave([0, 1.0, 0], [1.0, 0, 0], k=2.0)
    assert np.max(np.abs(maxwell_residual(pw.jet([0.3, 0.1, -0.7, 0.2])))) < 1e-12
    dE = np.zeros((3, 4))
    dE[0, 0] = 1e-3
    bad = FieldJet([0, 0, 0, 0], [0, 0, 0], dE, [0, 0, 0], np.zeros((3, 4)))
    assert maxwell_residual(bad)[0] == pytest.approx(1e-3)


def test_continuity_residual():
    drho = np.array([0, 0, 0, 2.0])
    dJ = np.zeros((3, 4))
    dJ[0, 0] = -2.0
    jet = FieldJet([0, 0, 0, 0], [0, 0, 0], np.zeros((3, 4)), [0, 0, 0], np.zeros((3, 4)),
                   0.0, drho, [0, 0, 0], dJ)
    assert continuity_residual(jet) == 0


def test_constraint_system_rank(rng):
    M, _ = maxwell_constraint_system(ChargeCurrent(rng.normal(), rng.normal(size=3)))
    assert M.shape == (8, 30)
    assert np.linalg.matrix_rank(M) == 8


def test_finite_difference_jet_matches_exact():
    pw = PlaneWave([0, 0, 1.0], [0.6, 0.8, 0], k=0.7)
    fp = FunctionProvider(lambda *p: pw(*p))
    a, b = pw.jet([0.1, 0.2, 0.3, 0.4]), fp.jet([0.1, 0.2, 0.3, 0.4])
    assert np.allclose(a.dE, b.dE, atol=1e-7) and np.allclose(a.dB, b.dB, atol=1e-7)


def test_boosted_plane_wave_provider():
    pw = PlaneWave([0, 1.0, 0], [1.0, 0, 0])
    tp = TransformedProvider(pw, boost_matrix([0.5, 0, 0]))
    for p in ([0, 0, 0, 0], [0.3, -1.0, 0.2, 0.7]):
        assert np.max(np.abs(maxwell_residual(tp.jet(p)))) < 1e-9


def test_poynting_divergence_across_commuting_square(rng):
    """B_v B_u and R_g B_{u*v} give the same Poynting divergence at
    corresponding points; so does the derivative chain rule."""
    jet = maxwell_jet(rng)
    u, v = random_velocity(rng, 0.8), random_velocity(rng, 0.8)
    L1 = boost_matrix(v) @ boost_matrix(u)
    L2 = rotation_matrix(thomas_rotation(u, v)) @ composed_boost(u, v)
    j1, j2 = transform_jet(jet, L1), transform_jet(jet, L2)
    assert np.allclose(j1.dE, j2.dE, atol=1e-9) and np.allclose(j1.dB, j2.dB, atol=1e-9)
    assert abs(poynting_divergence(j1) - poynting_divergence(j2)) < 1e-9
    P = rng.normal(size=(3, 4))
    assert np.allclose(transform_partials(P, L1), transform_partials(P, L2), atol=1e-9)


def test_solve_jet_constraints(rng):
    zero = solve_jet_constraints(np.zeros(4), ChargeCurrent(0, [0, 0, 0]), 0.0)
    assert np.allclose(zero.coefficients(), 0)
    cc = ChargeCurrent(rng.normal(), rng.normal(size=3))
    for axis in (1, 2, 3):
        jet = solve_jet_constraints(np.zeros(4), cc, 0.3, axis, rng=rng)
        assert np.max(np.abs(maxwell_residual(jet))) < 1e-10
        assert abs(surface_equation_residual(jet, 0.3, axis)) < 1e-8


def test_dalembertian():
    assert dalembertian_residual(lambda x, y, z, t: x * t, [0.1, 0.2, 0.3, 0.4], 1e-3) == pytest.approx(0, abs=1e-9)
    assert dalembertian_residual(lambda x, y, z, t: x * x, [0.1, 0.2, 0.3, 0.4], 1e-3) == pytest.approx(-2, abs=1e-6)
    wave = lambda x, y, z, t: np.cos(1.3 * x - 1.3 * t)
    assert abs(dalembertian_residual(wave, [0.2, 0, 0, 0.1], 1e-3)) < 1e-5
    with pytest.raises(StepTooSmall):
        dalembertian_residual(wave, [0, 0, 0, 0], 1e-7)


def test_polynomial_jet_evaluates_to_itself(rng):
    jet = maxwell_jet(rng, point=np.array([0.5, 0.1, 0.0, 0.2]))
    prov = PolynomialJet(jet)
    E, B, rho, J = prov(*jet.point)
    assert np.allclose(E, jet.E) and np.allclose(B, jet.B)
