from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from operlab.bethe import solve_bae
from operlab.errors import PathThroughSingularity, PreconditionError
from operlab.gaudin import gaudin_matrices
from operlab.hecke import (QuaternionicBeta, beta_grid, chiral_factorization, chiral_hecke, chiral_matrix,
                           chiral_restriction, chiral_setup, eval_x, hecke_3pt, hecke_3pt_asymptotic,
                           hecke_exponents, q_plus, r_minus, split_x, target_sector)
from operlab.localfield import beta_closed, gamma_local
from operlab.oper import universal_oper_residual
from operlab.repspace import build_sector, poly_add
from operlab.samples import fixture_config

# independent quadrature (30 digits) of the kernel at a, b, c = .3i, -.5i, .8i and x = 5
HECKE_AT_5 = 2.188297967543636958 + 0.48434857539488433537j

imag = st.floats(-2, 2).filter(lambda v: abs(v) > 0.05).map(lambda v: 1j * v)


@settings(max_examples=40)
@given(imag, imag, imag)
def test_q_and_r_are_phases(a, b, c):
    assert abs(abs(q_plus(a, b, c)) - 1) < 1e-10
    assert abs(abs(r_minus(a, b, c)) - 1) < 1e-10


@given(imag, imag, imag)
def test_exponents_decay_at_infinity(a, b, c):
    assert sum(hecke_exponents(a, b, c)).real == pytest.approx(-1.5)


@given(imag, imag, imag)
def test_second_term_is_gamma_times_q(a, b, c):
    lhs = beta_closed((a + b - c + 1) / 2, (-a - b - c + 1) / 2)
    assert abs(lhs - gamma_local(c) * q_plus(a, b, c)) < 1e-9 * max(1, abs(lhs))


def test_value_against_oracle():
    h = hecke_3pt(0.3j, -0.5j, 0.8j, 5.0)
    assert abs(h.value - HECKE_AT_5) < 1e-8


def test_asymptotic_terms_dominate():
    a, b, c = 0.3j, -0.5j, 0.8j
    errs = []
    for x in (1e2, 1e3):
        first, second = hecke_3pt_asymptotic(a, b, c, x)
        errs.append(abs(hecke_3pt(a, b, c, x).value - first - second) / abs(first))
    assert errs[1] < errs[0] < 0.1


def test_normalized_even_in_a():
    b, c, x = -0.5j, 0.8j, 5.0
    for a in (0.3j, 1.1j):
        plus = hecke_3pt(a, b, c, x).normalized(a, b, c, x)
        minus = hecke_3pt(-a, b, c, x).normalized(-a, b, c, x)
        assert abs(plus - minus) < 1e-6 * abs(plus)


@pytest.mark.xfail(strict=True, reason="the raw value is not symmetric under a -> -a")
def test_raw_value_even_in_a():
    b, c, x = -0.5j, 0.8j, 5.0
    assert abs(hecke_3pt(0.3j, b, c, x).value - hecke_3pt(-0.3j, b, c, x).value) < 1e-6


@pytest.mark.parametrize("args", [(0.1, 0.2j, 0.3j, 5.0), (0.1j, 0.2j, 0, 5.0), (0.1j, 0.2j, 0.3j, 0),
                                  (0.1j, 0.2j, 0.3j, 1)])
def test_scalar_preconditions(args):
    with pytest.raises(PreconditionError):
        hecke_3pt(*args)


@pytest.fixture(scope="module")
def fixture_beta():
    cfg = fixture_config()
    return cfg, [QuaternionicBeta(cfg.points, cfg.finite_weights, w.q_coefficients()) for w in solve_bae(cfg)]


def test_beta_vanishes_on_axis(fixture_beta):
    _, betas = fixture_beta
    for beta in betas:
        for x in (-1.3, 0.5, 1.5, 3.2):
            v, _ = beta.evaluate(np.array([x + 1e-9j, x - 1e-9j]))
            assert np.abs(v).max() < 1e-7


def test_beta_continuous_across_axis(fixture_beta):
    _, betas = fixture_beta
    x = np.array([0.5 + 1e-4j, 0.5 - 1e-4j])
    for beta in betas:
        v, _ = beta.evaluate(x)
        assert abs(v[0] - v[1]) < 1e-3


def test_beta_rejects_real_points(fixture_beta):
    _, betas = fixture_beta
    with pytest.raises(PathThroughSingularity):
        betas[0].evaluate(np.array([0.5 + 0j]))


def test_beta_positive_above_reference(fixture_beta):
    _, betas = fixture_beta
    for beta in betas:
        v, _ = beta.evaluate(np.array([beta.x0 + 0.05j]))
        assert v[0] > 0


def test_beta_grid_single_valued(fixture_beta):
    cfg, _ = fixture_beta
    w = solve_bae(cfg)[0]
    scan = beta_grid(w.q_coefficients(), cfg, np.linspace(-1, 3, 7), [0.3, -0.8, 1.7])
    assert scan.values.shape == (21,)
    assert scan.path_residual < 1e-9


def test_beta_needs_dominant_weights():
    with pytest.raises(PreconditionError):
        QuaternionicBeta((0, 1, 2), (1, F(1, 2), 1), [1, -1])


def _setup():
    return chiral_setup((0, 1, 3), (F(5, 2), F(1, 2), 1), 1)


def test_chiral_top_coefficient_is_restriction():
    s = _setup()
    for b in build_sector(s.config).basis:
        parts = split_x(chiral_hecke(b, s))
        assert max(parts) == s.n
        assert parts[s.n] == chiral_restriction(b, s)


def test_chiral_n_zero_is_restriction():
    s = chiral_setup((0, 1, 3), (F(1, 2), F(3, 2), 1), 4)
    assert s.n == 0
    for b in build_sector(s.config).basis:
        img = chiral_hecke(b, s)
        assert img
        assert eval_x(img, F(1)) == chiral_restriction(b, s)


@settings(max_examples=10, deadline=None)
@given(st.fractions(-3, 3, max_denominator=5), st.fractions(-3, 3, max_denominator=5))
def test_chiral_linear(u, v):
    s = _setup()
    b0, b1 = build_sector(s.config).basis[:2]
    mix = poly_add(poly_add({}, b0, u), b1, v)
    lhs = chiral_hecke(mix, s)
    rhs = poly_add(poly_add({}, chiral_hecke(b0, s), u), chiral_hecke(b1, s), v)
    assert {k: c for k, c in lhs.items() if c} == {k: c for k, c in rhs.items() if c}


def test_chiral_outputs_land_in_target():
    s = _setup()
    target = target_sector(s)
    for b in build_sector(s.config).basis:
        for x in (F(2), F(-1, 3)):
            assert target.contains(eval_x(chiral_hecke(b, s), x))


def test_chiral_matrix_solves_oper_equation():
    s = _setup()
    src = build_sector(s.config)
    mats = gaudin_matrices(s.config, src)
    res = universal_oper_residual(lambda x: chiral_matrix(s, x, source=src), mats, [0.4 + 0.6j, 1.7 - 0.8j])
    assert res < 1e-6


def test_chiral_matrix_exact_at_rational_points():
    s = _setup()
    M = chiral_matrix(s, F(2))
    assert M.dtype == object
    assert np.allclose(M.astype(complex), chiral_matrix(s, 2.0 + 0j), atol=1e-12)


def test_factorization_scalar():
    fact = chiral_factorization(_setup())
    assert fact.exact and fact.kappa in (1, -1)


def test_factorization_degenerate():
    fact = chiral_factorization(chiral_setup((0, 1, 3), (2, 1, 1), 5))
    assert fact.degenerate and not fact.exact


@pytest.mark.parametrize("bad", [dict(r=-1), dict(r=F(1, 2))])
def test_chiral_preconditions(bad):
    with pytest.raises(PreconditionError):
        chiral_setup((0, 1, 3), (F(5, 2), F(1, 2), 1), **bad)


def test_chiral_needs_rational_data():
    with pytest.raises(PreconditionError):
        chiral_setup((0, 1.1, 3), (F(5, 2), F(1, 2), 1), 1)


def test_chiral_rejects_inhomogeneous_psi():
    s = _setup()
    b = build_sector(s.config).basis[0]
    with pytest.raises(PreconditionError):
        chiral_hecke(poly_add(dict(b), {(0, 0, 0): F(1)}), s)
