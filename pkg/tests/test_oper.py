import math

import numpy as np
import pytest

from operlab.bethe import BetheRoots, bethe_eigenvalues, solve_bae
from operlab.errors import ConstraintViolation
from operlab.gaudin import gaudin_matrices, joint_diagonalize, match_spectra
from operlab.oper import (Oper, baxter_q, miura, miura_potential, oper_from_mu, q_polynomial, trivial_oper,
                          universal_oper_residual)
from operlab.repspace import GaudinConfig, build_sector
from operlab.samples import fixture_config, random_dominant_configs

XS = [0.4 + 0.6j, 1.7 - 0.8j, -0.9 + 1.2j]


def test_trivial_oper():
    op = trivial_oper((0, 1, 2))
    assert np.all(op.v(np.array([0.3 + 0.2j, 5.0])) == 0)
    assert op.constraint_residuals() == (0, 0)


def test_constraint_violation():
    with pytest.raises(ConstraintViolation):
        oper_from_mu(fixture_config(), (1.0, 0.0, 0.0))


def test_spectral_mu_satisfies_constraints():
    cfg = fixture_config()
    spec = joint_diagonalize(gaudin_matrices(cfg, build_sector(cfg, capped=True)))
    for mu in spec.eigenvalues:
        oper_from_mu(cfg, mu, tol=1e-10)


def test_single_point_miura():
    cfg = GaudinConfig((0,), (3, 3))
    op = miura(cfg, BetheRoots(()))
    assert op.mu == (0,)
    x = np.array([0.7 + 0.1j, -2.0])
    assert np.allclose(op.v(x), 15 / 4 / x ** 2)


def test_miura_matches_spectral_oper():
    cfg = fixture_config()
    for w in solve_bae(cfg):
        op = miura(cfg, w)
        assert np.allclose(op.mu, bethe_eigenvalues(w, cfg), atol=1e-14)
        xs = np.array(XS)
        assert np.abs(miura_potential(cfg, w, xs) - op.v(xs)).max() < 1e-12


def test_q_polynomial_fixture():
    cfg = fixture_config()
    for w in solve_bae(cfg):
        q = q_polynomial(Oper(cfg.points, cfg.weights, bethe_eigenvalues(w, cfg)))
        assert q.degree == 1
        assert complex(q.coeffs[1]) == pytest.approx(-w.roots[0], abs=1e-12)


def test_q_polynomial_vacuum():
    cfg = GaudinConfig.with_n((0, 1), (1, 2), 0)
    q = q_polynomial(Oper(cfg.points, cfg.weights, bethe_eigenvalues(BetheRoots(()), cfg)))
    assert q.degree == 0 and q.coeffs[0] == 1


@pytest.mark.parametrize("cfg", random_dominant_configs(6, seed=21), ids=lambda c: f"m{c.m}n{c.n}")
def test_q_roots_reproduce_bethe_roots(cfg):
    for w in solve_bae(cfg):
        op = Oper(cfg.points, cfg.weights, bethe_eigenvalues(w, cfg))
        q = q_polynomial(op, check_tol=1e-8)
        got = q.roots()
        want = np.array(w.roots, dtype=complex)
        assert match_spectra([(z,) for z in got], [(z,) for z in want]) < 1e-7
        # round trip through the Miura oper
        back = miura(cfg, BetheRoots(tuple(got)))
        assert np.allclose(back.mu, op.mu, atol=1e-7)


def test_baxter_vacuum_is_identity():
    cfg = GaudinConfig.with_n((0, 1, 3), (1, 2, 1), 0)
    mats = gaudin_matrices(cfg, build_sector(cfg, capped=True))
    q = baxter_q(cfg, mats)
    assert q.degree == 0
    assert np.allclose(q(0.3 + 0.1j), np.eye(1))


def test_universal_residual_controls():
    cfg = GaudinConfig.with_n((0, 1, 2.5), (2, 1, 2), 2)
    mats = gaudin_matrices(cfg, build_sector(cfg, capped=True))
    qop = baxter_q(cfg, mats)
    assert universal_oper_residual(qop, mats, XS) < 1e-6
    ident = np.eye(mats.dim)
    assert universal_oper_residual(lambda x: ident, mats, XS) > 1e-2
    spec = joint_diagonalize(mats)
    V = spec.eigenvectors
    dual = np.linalg.inv(V)
    for k, v in enumerate(V.T):
        poly = qop.eigen_polynomial(v)
        proj = np.outer(v, dual[k])  # spectral projector: proj G = mu proj
        assert universal_oper_residual(lambda x: np.polyval(poly, x) * proj, mats, XS) < 1e-6


def test_exact_baxter_operator_commutes():
    from fractions import Fraction as F
    cfg = GaudinConfig.with_n((0, F(1, 2), 2), (2, 1, 1), 2)
    mats = gaudin_matrices(cfg, build_sector(cfg, capped=True))
    qop = baxter_q(cfg, mats)
    assert qop.exact and qop.residual == 0
    for c in qop.coeffs:
        for g in mats.G:
            assert ((c.dot(g) - g.dot(c)) == 0).all()


def test_eigen_polynomials_are_q_polynomials():
    cfg = GaudinConfig.with_n((0.0, 1.1, 2.9, 4.2), (1, 2, 1, 1), 2)
    mats = gaudin_matrices(cfg, build_sector(cfg, capped=True))
    qop = baxter_q(cfg, mats)
    spec = joint_diagonalize(mats)
    for v, mu in zip(spec.eigenvectors.T, spec.eigenvalues):
        q = q_polynomial(Oper(cfg.points, cfg.weights, mu))
        assert np.abs(qop.eigen_polynomial(v) - np.array(q.coeffs, dtype=complex)).max() < 1e-8
    assert math.isfinite(qop.residual)
