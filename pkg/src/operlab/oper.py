"""PGL2-opers L = d^2 - v(x) with regular singularities at t_i and infinity.

    v(x) = sum_i lam_i(lam_i+2)/4 (x-t_i)^2 + sum_i mu_i/(x-t_i)

The polynomial part Q of a solution Phi = prod (x-t_i)^(-lam_i/2) Q solves

    P Q'' - A Q' - B Q = 0,   P = prod (x-t_i),  A = sum lam_i P_i,  B = sum muhat_i P_i,

with P_i = P/(x-t_i) and muhat_i = mu_i - mu_i^0.  The operator version
replaces muhat_i by the shifted Gaudin matrices (acting from the right).
Both are solved by the same triangular recursion at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .bethe import BetheRoots, bae_residual, bethe_eigenvalues
from .errors import ConstraintViolation, InconsistentSystem, ResonanceError, StencilTooCoarse
from .gaudin import GaudinMatrices, vacuum_eigenvalues
from .repspace import GaudinConfig, is_exact


@dataclass(frozen=True)
class Oper:
    points: Tuple
    weights: Tuple  # lam_0..lam_{m+1}
    mu: Tuple
    extra_poles: Tuple = ()  # (w, residue) pairs left over by a non-spectral Miura input

    @property
    def m(self):
        return len(self.points) - 1

    @property
    def n(self) -> int:
        return int(round(complex(sum(self.weights[:-1]) - self.weights[-1]).real / 2))

    @property
    def exact(self):
        return all(is_exact(x) for x in tuple(self.points) + tuple(self.weights) + tuple(self.mu))

    def double_pole(self, i):
        lam = self.weights[i]
        return lam * (lam + 2) / 4

    def v(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.zeros_like(x)
        for i, t in enumerate(self.points):
            t = complex(t)
            out = out + complex(self.double_pole(i)) / (x - t) ** 2 + complex(self.mu[i]) / (x - t)
        return out

    def constraint_residuals(self):
        lam_inf = self.weights[-1]
        rhs = lam_inf * (lam_inf + 2) / 4 - sum(self.double_pole(i) for i in range(len(self.points)))
        first = sum(self.mu)
        second = sum(t * mu for t, mu in zip(self.points, self.mu)) - rhs
        return first, second

    def second_constraint_rhs(self):
        lam_inf = self.weights[-1]
        return lam_inf * (lam_inf + 2) / 4 - sum(self.double_pole(i) for i in range(len(self.points)))

    def config(self) -> GaudinConfig:
        return GaudinConfig(self.points, self.weights)


def trivial_oper(points: Sequence) -> Oper:
    return Oper(tuple(points), tuple([0] * (len(points) + 1)), tuple([0] * len(points)))


def oper_from_mu(config: GaudinConfig, mu: Sequence, tol: float = 1e-8) -> Oper:
    op = Oper(config.points, config.weights, tuple(mu))
    r1, r2 = op.constraint_residuals()
    scale = max([1.0] + [abs(complex(x)) for x in mu])
    if abs(complex(r1)) > tol * scale or abs(complex(r2)) > tol * scale * max(1.0, max(abs(complex(t)) for t in config.points)):
        raise ConstraintViolation((complex(r1), complex(r2)))
    return op


def miura(config: GaudinConfig, w: BetheRoots) -> Oper:
    """Oper (d - u)(d + u) with u = sum lam_i/2(x-t_i) - sum 1/(x-w_j).

    The accessory parameters are the residues of u^2 - u' at t_i; residues
    at the w_j (minus the BAE left-hand sides) are kept in extra_poles.
    """
    mu = bethe_eigenvalues(w, config)
    extra = ()
    if len(w):
        res = -bae_residual(np.array(w.roots), np.array([complex(t) for t in config.points]),
                            np.array([complex(x) for x in config.finite_weights]))
        extra = tuple((complex(z), complex(r)) for z, r in zip(w.roots, res))
    return Oper(config.points, config.weights, mu, extra)


def miura_potential(config: GaudinConfig, w: BetheRoots, x):
    """u^2 - u' evaluated directly (independent of the residue bookkeeping)."""
    x = np.asarray(x, dtype=complex)
    u = np.zeros_like(x)
    du = np.zeros_like(x)
    for t, lam in zip(config.points, config.finite_weights):
        u = u + complex(lam) / (2 * (x - complex(t)))
        du = du - complex(lam) / (2 * (x - complex(t)) ** 2)
    for wj in w.roots:
        u = u - 1 / (x - wj)
        du = du + 1 / (x - wj) ** 2
    return u * u - du


# ---------------------------------------------------------------------------
# polynomial helpers (ascending coefficient lists, generic number type)


def _pmul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for a, x in enumerate(p):
        for b, y in enumerate(q):
            out[a + b] = out[a + b] + x * y
    return out


def _from_roots(roots):
    p = [1]
    for r in roots:
        p = _pmul(p, [-r, 1])
    return p


def structure_polynomials(points, weights):
    """P, A and the list of P_i, ascending coefficients."""
    P = _from_roots(points)
    Pi = [_from_roots([t for k, t in enumerate(points) if k != i]) for i in range(len(points))]
    A = [0] * len(points)
    for lam, p in zip(weights, Pi):
        A = [a + lam * c for a, c in zip(A, p)]
    return P, A, Pi


def _frobenius_infinity(points, weights, Bmats, n, identity, exact):
    """Solve P Q'' - A Q' - Q B = 0 for Q = sum_k Q_k x^(n-k), Q_0 = identity.

    Bmats[d] is the coefficient of x^d in B (matrices); products are
    Q_j @ B.  Returns (coefficient list, residual of unused equations).
    """
    m1 = len(points)
    P, A, _ = structure_polynomials(points, weights)
    deg_B = m1 - 1
    Bm = list(Bmats) + [identity * 0] * (deg_B - len(Bmats) + 1)
    top = Bm[m1 - 2] if m1 >= 2 else identity * 0
    scalar_top = top[0, 0]
    if exact:
        off = [top[i, j] for i in range(top.shape[0]) for j in range(top.shape[1]) if i != j]
        diag_ok = all(top[i, i] == scalar_top for i in range(top.shape[0]))
        if any(v != 0 for v in off) or not diag_ok:
            raise InconsistentSystem("coefficient of x^(m-1) in B is not scalar")
    Q = [identity]

    def equation(k, upto):
        """Coefficient of x^(n+m-1-k) of the expression using Q_0..Q_upto."""
        d = n + m1 - 2 - k
        total = identity * 0
        for j in range(0, min(upto, n) + 1):
            e = n - j  # power of x in the term Q_j x^e
            if e >= 2:
                pd = d - (e - 2)
                if 0 <= pd < len(P):
                    total = total + Q[j] * (P[pd] * e * (e - 1))
            if e >= 1:
                ad = d - (e - 1)
                if 0 <= ad < len(A):
                    total = total - Q[j] * (A[ad] * e)
            bd = d - e
            if 0 <= bd < len(Bm):
                total = total - Q[j] @ Bm[bd]
        return total

    for k in range(1, n + 1):
        e = n - k
        ck = e * (e - 1) - A[-1] * e - scalar_top if m1 >= 1 else 0
        if exact and ck == 0 or not exact and abs(complex(ck)) < 1e-12 * max(1.0, abs(complex(scalar_top))):
            raise ResonanceError(f"indicial coefficient vanishes at order {k} (weight at infinity is resonant)")
        Q.append(identity * 0)
        rest = equation(k, k)
        Q[k] = -rest / ck
    # leading equation (k = 0) and the low-order tail are consistency conditions
    checks = [equation(0, n)] + [equation(k, n) for k in range(n + 1, n + m1 - 1)]
    residual = max((float(np.abs(np.asarray(c, dtype=complex)).max(initial=0.0)) for c in checks), default=0.0)
    return Q, residual


def _muhat(op: Oper):
    vac = vacuum_eigenvalues(op.config())
    return [mu - v for mu, v in zip(op.mu, vac)]


@dataclass
class QPolynomial:
    coeffs: List  # descending: [1, q_1, ..., q_n]
    residual: float

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        return np.polyval(np.array([complex(c) for c in self.coeffs]), x)

    def roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.array([], dtype=complex)
        return np.roots(np.array([complex(c) for c in self.coeffs]))


def q_polynomial(op: Oper, check_tol: Optional[float] = None) -> QPolynomial:
    """Monic Q of degree n with prod (x-t_i)^(-lam_i/2) Q(x) in the kernel of L."""
    exact = op.exact
    points = list(op.points)
    lam = list(op.weights[:-1])
    muhat = _muhat(op)
    _, _, Pi = structure_polynomials(points, lam)
    deg = len(points) - 1
    B = [0] * deg if deg > 0 else []
    for mh, p in zip(muhat, Pi):
        B = [b + mh * c for b, c in zip(B, p)]
    if exact:
        ident = np.array([[Fraction(1)]], dtype=object)
        Bm = [np.array([[Fraction(b)]], dtype=object) for b in B]
    else:
        ident = np.eye(1, dtype=complex)
        Bm = [np.array([[complex(b)]]) for b in B]
    # the x^(m-1) coefficient of B is sum t_i muhat_i; it is scalar by construction
    coeffs, residual = _frobenius_infinity(points, lam, Bm, op.n, ident, exact)
    out = QPolynomial([c[0, 0] for c in coeffs], residual)
    if check_tol is not None and residual > check_tol:
        raise InconsistentSystem("Q-polynomial recursion is inconsistent", residual)
    return out


@dataclass
class QOperator:
    coeffs: List[np.ndarray]  # Q_0 = Id, Q_1..Q_n, descending powers
    residual: float
    exact: bool

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def numeric(self):
        return [np.asarray(c, dtype=complex) for c in self.coeffs]

    def __call__(self, x, order: int = 0):
        """Q(x) or its derivative of the given order."""
        n = self.degree
        total = None
        for k, c in enumerate(self.numeric()):
            e = n - k
            if e < order:
                continue
            fac = 1
            for r in range(order):
                fac *= e - r
            term = c * (fac * x ** (e - order))
            total = term if total is None else total + term
        if total is None:
            return np.zeros_like(self.numeric()[0])
        return total

    def eigen_polynomial(self, v: np.ndarray) -> np.ndarray:
        """Coefficients (descending) of the polynomial p with Q(x) v = p(x) v, via Rayleigh quotients."""
        v = np.asarray(v, dtype=complex)
        return np.array([np.vdot(v, c @ v) / np.vdot(v, v) for c in self.numeric()])


def baxter_q(config: GaudinConfig, mats: GaudinMatrices, tol: float = 1e-8) -> QOperator:
    """Matrix polynomial Q(x) = x^n Id + ... solving the universal oper equation."""
    points = list(config.points)
    lam = list(config.finite_weights)
    _, _, Pi = structure_polynomials(points, lam)
    dim = mats.dim
    exact = mats.exact
    deg = len(points) - 1
    if exact:
        ident = np.empty((dim, dim), dtype=object)
        ident[:] = Fraction(0)
        for k in range(dim):
            ident[k, k] = Fraction(1)
    else:
        ident = np.eye(dim, dtype=complex)
    Ghat = mats.Ghat if exact else mats.numeric("Ghat")
    Bm = [ident * 0 for _ in range(deg)]
    for g, p in zip(Ghat, Pi):
        for d in range(deg):
            Bm[d] = Bm[d] + g * p[d]
    coeffs, residual = _frobenius_infinity(points, lam, Bm, config.n, ident, exact)
    scale = max(1.0, max(float(np.abs(np.asarray(c, dtype=complex)).max(initial=0.0)) for c in coeffs))
    if residual > tol * scale:
        raise InconsistentSystem("operator recursion leaves a nonzero remainder", residual)
    return QOperator(coeffs, residual, exact)


def universal_oper_residual(H: Callable, mats: GaudinMatrices, xs: Sequence[complex], h: float = 1e-3,
                            stencil: int = 5) -> float:
    """max over xs of |(d^2 - sum lam_i/(x-t_i) d) H - H sum Ghat_i/(x-t_i)| by finite differences."""
    cfg = mats.config
    t = [complex(p) for p in cfg.points]
    lam = [complex(w) for w in cfg.finite_weights]
    Ghat = mats.numeric("Ghat")
    worst = 0.0
    for x in xs:
        x = complex(x)
        dist = min(abs(x - p) for p in t)
        if h * (stencil // 2) >= 0.1 * dist:
            raise StencilTooCoarse(f"step {h} too large at x={x}: nearest singular point at distance {dist:.3g}")
        if stencil == 5:
            Hm2, Hm1, H0, Hp1, Hp2 = (np.asarray(H(x + k * h), dtype=complex) for k in (-2, -1, 0, 1, 2))
            d1 = (Hm2 - 8 * Hm1 + 8 * Hp1 - Hp2) / (12 * h)
            d2 = (-Hm2 + 16 * Hm1 - 30 * H0 + 16 * Hp1 - Hp2) / (12 * h * h)
        else:
            Hm1, H0, Hp1 = (np.asarray(H(x + k * h), dtype=complex) for k in (-1, 0, 1))
            d1 = (Hp1 - Hm1) / (2 * h)
            d2 = (Hp1 - 2 * H0 + Hm1) / (h * h)
        res = d2 - sum(l / (x - p) for l, p in zip(lam, t)) * d1
        res = res - H0 @ sum(g / (x - p) for g, p in zip(Ghat, t))
        worst = max(worst, float(np.abs(res).max()))
    return worst
