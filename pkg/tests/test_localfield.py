import cmath

import pytest
from hypothesis import given, settings, strategies as st

from operlab.errors import NonConvergence, PoleError, PreconditionError
from operlab.localfield import (FieldTag, beta_closed, beta_quadrature, gamma_local, hypergeom_phi,
                                phi_asymptotic)

# frozen from 30-digit evaluations of the closed form / of the integral
G_QUARTER_SQ = 17.9045289263739669155947597483
G_THIRD = 2.514568208821685069029848101
G_COMPLEX = complex(-1.63503064569327968020656325908, -0.406909390257758748931903337771)
PHI_AT_5 = complex(3.94600546866405863251654041505, 1.17002570519227585451508972978)

off_poles = st.complex_numbers(min_magnitude=0, max_magnitude=4, allow_nan=False, allow_infinity=False).filter(
    lambda a: min(abs(a - k) for k in range(-6, 7)) > 1e-3)


def test_half_is_one():
    assert gamma_local(0.5) == pytest.approx(1, abs=1e-14)


def test_zero_at_one():
    assert gamma_local(1) == 0


@pytest.mark.parametrize("a", [0, -2, -4])
def test_poles(a):
    with pytest.raises(PoleError):
        gamma_local(a)


def test_frozen_values():
    assert gamma_local(1 / 3) == pytest.approx(G_THIRD, rel=1e-13)
    assert gamma_local(0.3 + 0.7j) == pytest.approx(G_COMPLEX, rel=1e-13)


@given(off_poles)
def test_functional_equation(a):
    assert abs(gamma_local(a) * gamma_local(1 - a) - 1) < 1e-12


@given(off_poles)
def test_functional_equation_complex_field(a):
    assert abs(gamma_local(a, FieldTag.COMPLEX) * gamma_local(1 - a, FieldTag.COMPLEX) - 1) < 1e-12


strip = st.tuples(st.floats(0.05, 0.9), st.floats(-2, 2), st.floats(0.05, 0.9), st.floats(-2, 2)).map(
    lambda t: (complex(t[0], t[1]), complex(t[2], t[3])))


@given(strip)
def test_beta_symmetries(ab):
    a, b = ab
    ref = beta_closed(a, b)
    assert beta_closed(b, a) == pytest.approx(ref, rel=1e-12)
    assert beta_closed(a, 1 - a - b) == pytest.approx(ref, rel=1e-11)


def test_beta_quarter():
    assert beta_closed(0.25, 0.25) == pytest.approx(G_QUARTER_SQ, rel=1e-13)
    q = beta_quadrature(0.25, 0.25)
    assert abs(q.value / G_QUARTER_SQ - 1) < 1e-6


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 0.45), st.floats(-1, 1), st.floats(0.1, 0.45), st.floats(-1, 1))
def test_quadrature_matches_closed_form(ar, ai, br, bi):
    a, b = complex(ar, ai), complex(br, bi)
    assert abs(complex(beta_quadrature(a, b)) / beta_closed(a, b) - 1) < 1e-6


def test_regularized_outside_the_strip():
    # Re(a + b) > 1: divergent at infinity, defined by continuation
    a, b = 0.7 + 0.2j, 0.6
    q = beta_quadrature(a, b)
    assert q.eps_used > 0
    assert abs(q.value / beta_closed(a, b) - 1) < 1e-4


def test_log_divergence_detected():
    with pytest.raises(PoleError):
        beta_closed(0.5, 0.5)
    with pytest.raises(NonConvergence):
        beta_quadrature(0.5, 0.5)


def test_blow_up_near_boundary():
    vals = [abs(beta_closed(a, a)) for a in (0.2, 0.05, 0.01)]
    assert vals[0] < vals[1] < vals[2]


def test_trivial_character_excluded():
    with pytest.raises(PreconditionError):
        hypergeom_phi(0, 0.3, 0.5, 4.0)


def test_phi_against_independent_quadrature():
    assert abs(complex(hypergeom_phi(0.4j, 0.35, 0.6, 5.0)) - PHI_AT_5) < 1e-9


def test_phi_leading_coefficient_converges():
    al, be, ga = 0.4j, 0.35 + 0.1j, 0.6
    lead = beta_closed(-al, ga)
    errs = []
    for x in (1e2, 1e3):
        v = complex(hypergeom_phi(al, be, ga, x))
        fitted = (v - beta_closed(al, be) * x ** (al + be - 1)) / x ** (be - 1)
        errs.append(abs(fitted / lead - 1))
    assert errs[0] < 1e-2 and errs[1] < 1e-3


def test_phi_asymptotic_even_in_x():
    a = phi_asymptotic(0.4j, 0.35, 0.6, 300.0)
    assert a == pytest.approx(phi_asymptotic(0.4j, 0.35, 0.6, -300.0))
    assert cmath.isfinite(a)
