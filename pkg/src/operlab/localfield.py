"""Local-field special functions over F = R (closed forms also for F = C).

Conventions: ``|s|_F`` is the usual absolute value for R and the squared
modulus for C.  The Tate factor over R is

    G_R(a) = 2 (2 pi)^(-a) Gamma(a) cos(pi a / 2),

which satisfies G(a) G(1 - a) = 1.  Over C we use
G_C(a) = (2 pi)^(1 - 2a) Gamma(a) / Gamma(1 - a).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .errors import NonConvergence, PoleError, PreconditionError


class FieldTag(enum.Enum):
    REAL = "real"
    COMPLEX = "complex"

    def norm(self, z):
        if self is FieldTag.REAL:
            return abs(z)
        return abs(z) ** 2


@dataclass(frozen=True)
class RegularizedIntegral:
    value: complex
    eps_used: float
    tail_estimate: float

    def __complex__(self):
        return complex(self.value)


_POLE_TOL = 1e-13


def _near_int(a: complex):
    k = round(a.real)
    return k if abs(a - k) < _POLE_TOL * max(1.0, abs(k)) else None


def _gamma_real_direct(a: complex) -> complex:
    # valid for Re a >= 1/2, where Gamma(a) has no poles
    k = _near_int(a)
    if k is not None and k % 2 == 1:
        return 0j
    log_mag = math.log(2.0) - a * math.log(2 * math.pi) + special.loggamma(a)
    return complex(cmath.exp(log_mag) * cmath.cos(math.pi * a / 2))


def _gamma_complex_direct(a: complex) -> complex:
    # (2pi)^(1-2a) Gamma(a)/Gamma(1-a); Gamma(1-a) has poles at a = 1, 2, ...
    k = _near_int(a)
    if k is not None and k >= 1:
        return 0j
    val = (1 - 2 * a) * math.log(2 * math.pi) + special.loggamma(a) - special.loggamma(1 - a)
    return complex(cmath.exp(val))


def gamma_local(a: complex, field: FieldTag = FieldTag.REAL) -> complex:
    """Tate gamma factor of the local field.

    Raises PoleError at a in {0, -2, -4, ...} (real) or {0, -1, -2, ...}
    (complex).
    """
    a = complex(a)
    direct = _gamma_real_direct if field is FieldTag.REAL else _gamma_complex_direct
    if a.real >= 0.5:
        return direct(a)
    dual = direct(1 - a)
    if dual == 0:
        raise PoleError(a)
    return 1.0 / dual


def _is_pole(a: complex, field: FieldTag) -> bool:
    k = _near_int(complex(a))
    if k is None or k > 0:
        return False
    return field is FieldTag.COMPLEX or k % 2 == 0


def _is_zero(a: complex, field: FieldTag) -> bool:
    k = _near_int(complex(a))
    if k is None or k < 1:
        return False
    return field is FieldTag.COMPLEX or k % 2 == 1


def beta_closed(alpha: complex, beta: complex, field: FieldTag = FieldTag.REAL) -> complex:
    """B(alpha, beta) = G(alpha) G(beta) / G(alpha + beta)."""
    for arg in (alpha, beta):
        if _is_pole(arg, field):
            raise PoleError(arg)
    if _is_zero(alpha + beta, field):
        raise PoleError(alpha + beta, "denominator factor vanishes")
    return gamma_local(alpha, field) * gamma_local(beta, field) / gamma_local(alpha + beta, field)


# ---------------------------------------------------------------------------
# quadrature of products of norm powers over R


def _quad_halfline(fun, tol):
    val, err = integrate.quad(fun, 0, np.inf, epsabs=tol, epsrel=tol, limit=500, complex_func=True)
    return complex(val), float(abs(err))


class _NormPowerIntegral:
    """Integral over R of prod |s - a_k|^{p_k}, split at the singular points.

    On a piece [a, a + d] the leading power d^(p+1)/(p+1) g(a) is taken in
    closed form and only r^p (g(r) - g(0)) goes to quadrature; the tails
    |s| > R are treated the same way in the variable 1/s.  An eps-shift
    p -> p + eps (finite points) or P -> P - eps (infinity, P = sum p) is
    applied only to the ends whose integral diverges.
    """

    def __init__(self, points: Sequence[float], exponents: Sequence[complex], tol=1e-11):
        order = np.argsort(points)
        self.points = [float(points[i]) for i in order]
        self.exponents = [complex(exponents[i]) for i in order]
        self.total = sum(self.exponents)
        self.tol = tol
        self.div_points = [p.real <= -1 for p in self.exponents]
        self.div_inf = self.total.real >= -1
        if any(p.real <= -2 for p in self.exponents) or self.total.real >= 0:
            raise NonConvergence("exponents outside the range handled by one subtraction")

    @property
    def needs_eps(self):
        return any(self.div_points) or self.div_inf

    def _rest(self, s, skip):
        out = 1.0 + 0j
        for k, (a, p) in enumerate(zip(self.points, self.exponents)):
            if k != skip:
                out *= abs(s - a) ** p
        return out

    def _near(self, k, direction, d, eps):
        a, p = self.points[k], self.exponents[k]
        if self.div_points[k]:
            p = p + eps
        g0 = self._rest(a, k)
        lead = g0 * d ** (p + 1) / (p + 1)

        def f(u):
            if u > 700:
                return 0j
            r = d * math.exp(-u)
            return r ** (p + 1) * (self._rest(a + direction * r, k) - g0)

        v, e = _quad_halfline(f, self.tol)
        return lead + v, e

    def _tail(self, sign, big, eps):
        P = self.total - (eps if self.div_inf else 0.0)
        lead = -big ** (P + 1) / (P + 1)

        def f(u):
            if u > 700:
                return 0j
            r = big * math.exp(u)
            h = 1.0 + 0j
            for a, p in zip(self.points, self.exponents):
                h *= abs(1 - sign * a / r) ** p
            return r ** (P + 1) * (h - 1)

        v, e = _quad_halfline(f, self.tol)
        return lead + v, e

    def evaluate(self, eps: float):
        pts = self.points
        big = 2 * max(abs(p) for p in pts) + 1
        pieces = []
        for k in range(len(pts)):
            left = pts[k] - pts[k - 1] if k > 0 else pts[0] + big
            right = pts[k + 1] - pts[k] if k < len(pts) - 1 else big - pts[-1]
            if k == 0:
                pieces.append(self._near(k, -1.0, left, eps))
            else:
                pieces.append(self._near(k, -1.0, left / 2, eps))
            if k == len(pts) - 1:
                pieces.append(self._near(k, 1.0, right, eps))
            else:
                pieces.append(self._near(k, 1.0, right / 2, eps))
        pieces.append(self._tail(-1.0, big, eps))
        pieces.append(self._tail(1.0, big, eps))
        return sum(v for v, _ in pieces), sum(e for _, e in pieces)


def _richardson3(v0, v1, v2):
    # extrapolation to eps = 0 from eps, eps/2, eps/4
    return (v0 - 6 * v1 + 8 * v2) / 3


def regularized_norm_integral(points, exponents, eps: float = 0.05, levels: int = 8, tol=1e-11,
                              rtol: float = 1e-4) -> RegularizedIntegral:
    """eps-regularized integral over R of prod |s - a_k|^{p_k} ds.

    Absolutely convergent integrals are computed directly (eps_used = 0).
    Otherwise eps_k = eps 2^-k for k < levels and the last three values are
    Richardson-extrapolated; NonConvergence if successive extrapolants
    disagree by more than rtol relative.
    """
    integ = _NormPowerIntegral(points, exponents, tol=tol)
    if not integ.needs_eps:
        value, err = integ.evaluate(0.0)
        return RegularizedIntegral(value, 0.0, err)
    eps_seq = [eps * 2.0 ** (-k) for k in range(levels)]
    values = [integ.evaluate(e)[0] for e in eps_seq]
    extrap = [_richardson3(*values[i:i + 3]) for i in range(len(values) - 2)]
    best = extrap[-1]
    tail = abs(extrap[-1] - extrap[-2]) if len(extrap) > 1 else abs(values[-1] - values[-2])
    if not np.isfinite(best) or tail > rtol * max(1.0, abs(best)):
        raise NonConvergence(f"eps-sequence failed to stabilize (change {tail:.3g})", values)
    return RegularizedIntegral(complex(best), eps_seq[-1], float(tail))


def beta_quadrature(alpha: complex, beta: complex, eps: float = 0.05, **kw) -> RegularizedIntegral:
    """Quadrature of B(alpha, beta) = int |s|^(alpha-1) |s-1|^(beta-1) ds over R."""
    return regularized_norm_integral([0.0, 1.0], [alpha - 1, beta - 1], eps=eps, **kw)


def hypergeom_phi(alpha: complex, beta: complex, gamma: complex, x: float, eps: float = 0.05,
                  **kw) -> RegularizedIntegral:
    """Phi(alpha, beta, gamma; x) = int |s|^(alpha-gamma) |s-1|^(gamma-1) |s-x|^(beta-1) ds."""
    alpha, beta, gamma = complex(alpha), complex(beta), complex(gamma)
    if abs(alpha.real) > 1e-14:
        raise PreconditionError("Re alpha must vanish")
    if alpha == 0:
        raise PreconditionError("alpha = 0 gives the trivial character, excluded")
    if not (0 < beta.real < 1 and 0 < gamma.real < 1):
        raise PreconditionError("need 0 < Re beta < 1 and 0 < Re gamma < 1")
    if x in (0, 1):
        raise PreconditionError("x must avoid 0 and 1")
    return regularized_norm_integral([0.0, 1.0, float(x)], [alpha - gamma, gamma - 1, beta - 1],
                                     eps=eps, **kw)


def phi_asymptotic(alpha, beta, gamma, x, field: FieldTag = FieldTag.REAL) -> complex:
    """Two-term large-|x| expansion of hypergeom_phi."""
    nx = field.norm(x)
    return (beta_closed(-alpha, gamma, field) * nx ** (beta - 1)
            + beta_closed(alpha, beta, field) * nx ** (alpha + beta - 1))
