"""Hecke eigenvalue functionals.

Three pieces live here: the scalar three-point Hecke integral over R and its
large-x expansion, the single-valued eigenvalue beta(x, xbar) built from a
Q-polynomial, and the chiral (residue at infinity) Hecke operator on
polynomial sectors with its restriction part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad_vec

from .errors import PathThroughSingularity, PreconditionError, TruncationInsufficient
from .gaudin import gaudin_matrices
from .localfield import FieldTag, beta_closed, gamma_local, regularized_norm_integral
from .oper import QOperator, baxter_q
from .repspace import GaudinConfig, Poly, WeightSector, build_sector, poly_add

# ---------------------------------------------------------------------------
# scalar three-point operator over R


@dataclass(frozen=True)
class Hecke3pt:
    value: complex
    q_plus: complex
    r_minus: complex
    tail: float

    def normalized(self, a, b, c, x) -> complex:
        """Value divided by the intertwiner normalization; even in a."""
        return self.value * abs(x) ** (-a / 2) / intertwiner_norm(a, b, c)


def _imaginary(*zs):
    for z in zs:
        if abs(complex(z).real) > 1e-14:
            raise PreconditionError(f"parameter {z} is not purely imaginary")


def hecke_exponents(a, b, c):
    return ((a - b + c - 1) / 2, (-a + b + c - 1) / 2, (a + b - c - 1) / 2)


def q_plus(a, b, c) -> complex:
    g = gamma_local
    return g((a + b - c + 1) / 2) / g((a + b + c + 1) / 2)


def r_minus(a, b, c) -> complex:
    g = gamma_local
    return g((a - b - c + 1) / 2) / g((a - b + c + 1) / 2)


def intertwiner_norm(a, b, c) -> complex:
    g = gamma_local
    return g((1 + a + b - c) / 2) * g((1 - a + b + c) / 2)


def hecke_3pt(a, b, c, x: float, eps: float = 0.05, **kw) -> Hecke3pt:
    """Quadrature of the three-point kernel |s|^p0 |s-1|^p1 |s-x|^p2 over R."""
    a, b, c = complex(a), complex(b), complex(c)
    _imaginary(a, b, c)
    if c == 0:
        raise PreconditionError("c = 0 is the logarithmic case")
    if x in (0, 1):
        raise PreconditionError("x must avoid 0 and 1")
    integ = regularized_norm_integral([0.0, 1.0, float(x)], hecke_exponents(a, b, c), eps=eps, **kw)
    return Hecke3pt(complex(integ.value), q_plus(a, b, c), r_minus(a, b, c), integ.tail_estimate)


def hecke_3pt_asymptotic(a, b, c, x: float) -> Tuple[complex, complex]:
    """The two terms of the large-|x| expansion (powers |x|^((a+b-1-c)/2) and |x|^((a+b-1+c)/2))."""
    a, b, c = complex(a), complex(b), complex(c)
    nx = abs(x)
    first = beta_closed((-a + b + c + 1) / 2, (a - b + c + 1) / 2, FieldTag.REAL) * nx ** ((a + b - c - 1) / 2)
    second = beta_closed((a + b - c + 1) / 2, (-a - b - c + 1) / 2, FieldTag.REAL) * nx ** ((a + b + c - 1) / 2)
    return first, second


# ---------------------------------------------------------------------------
# beta(x, xbar) from a Q-polynomial


@dataclass
class BetaValue:
    value: float
    integral: complex
    path_residual: float


@dataclass
class HeckeScan:
    xs: np.ndarray
    values: np.ndarray
    path_residual: float
    normalization: Dict[str, object] = field(default_factory=dict)


class QuaternionicBeta:
    """beta = |Phi|^2 Im int_{x0}^x Phi^-2 with Phi = prod (x-t_i)^(-lam_i/2) Q(x).

    For integral weights Phi^-2 = prod (x-t_i)^lam_i / Q^2 is rational, so
    only the poles at the roots of Q can obstruct single-valuedness.
    """

    def __init__(self, points, weights, q_coeffs, x0: Optional[float] = None, tol: float = 1e-13):
        self.t = np.array([float(complex(p).real) for p in points])
        if any(abs(complex(p).imag) > 0 for p in points):
            raise PreconditionError("marked points must be real")
        self.lam = [int(w) for w in weights]
        if any(w != int(w) or w < 0 for w in weights):
            raise PreconditionError("weights must be dominant integral")
        self.q = np.array([complex(c) for c in q_coeffs])
        self.roots = np.roots(self.q) if len(self.q) > 1 else np.zeros(0, complex)
        order = np.sort(self.t)
        self.x0 = float((order[0] + order[1]) / 2) if x0 is None and len(order) > 1 else float(
            order[0] - 1 if x0 is None else x0)
        self.tol = tol
        bad = np.concatenate([self.t, self.roots])
        if np.min(np.abs(bad - self.x0)) < 1e-9:
            raise PathThroughSingularity(f"basepoint {self.x0} is singular")

    def phi_sq_inv(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for t, l in zip(self.t, self.lam):
            out = out * (z - t) ** l
        return out / np.polyval(self.q, z) ** 2

    def phi_abs_sq(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.abs(np.polyval(self.q, z)) ** 2
        for t, l in zip(self.t, self.lam):
            out = out / np.abs(z - t) ** l
        return out

    def _segment(self, a, b):
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        d = b - a
        sing = np.concatenate([self.roots, self.t]) if len(self.roots) else self.t.astype(complex)
        for s in sing:
            dd = np.abs((d.conj() * (s - a)).imag)
            along = ((s - a) * d.conj()).real
            inside = (along > 0) & (along < np.abs(d) ** 2)
            if np.any(inside & (dd < 1e-12 * np.maximum(1, np.abs(d)))):
                raise PathThroughSingularity(f"segment passes through the singular point {s}")

        def f(tau):
            v = self.phi_sq_inv(a + tau * d) * d
            return np.concatenate([v.real.ravel(), v.imag.ravel()])

        val, _ = quad_vec(f, 0.0, 1.0, epsabs=self.tol, epsrel=self.tol, limit=2000)
        k = val.size // 2
        return (val[:k] + 1j * val[k:]).reshape(np.shape(a + d))

    def _polyline(self, corners):
        total = 0
        for a, b in zip(corners, corners[1:]):
            total = total + self._segment(a, b)
        return total

    def integral(self, x, route: str = "lifted"):
        """Integral from x0 to x along one of three routes.

        lifted: up (or down) from x0 by max(1, |Im x|), across, then straight to x.
        right / left: through the opposite half plane around every singular
        point on that side, then back to x.
        """
        x = np.asarray(x, dtype=complex)
        base = np.full_like(x, self.x0)
        side = np.where(x.imag >= 0, 1.0, -1.0)
        height = np.maximum(1.0, np.abs(x.imag))
        if route == "direct":
            return self._segment(base, x)
        if route == "lifted":
            up = base + 1j * side * height
            return self._polyline([base, up, x.real + 1j * side * height, x])
        if route not in ("right", "left"):
            raise ValueError(f"unknown route {route!r}")
        sing = np.concatenate([self.t, self.roots.real])
        span = float(np.max(np.abs(sing - self.x0))) + 1.0
        direction = 1.0 if route == "right" else -1.0
        far = self.x0 + direction * (span + np.abs(x.real - self.x0))
        down = base - 1j * side * height
        return self._polyline([base, down, far - 1j * side * height, far + 1j * x.imag, x])

    def path_residual(self, x) -> float:
        x = np.asarray(x, dtype=complex)
        ref = self.integral(x)
        worst = 0.0
        for route in ("right", "left"):
            other = self.integral(x, route)
            worst = max(worst, float(np.max(np.abs(self.phi_abs_sq(x) * (ref - other).imag))))
        return worst

    def sign(self, x):
        return np.where(np.asarray(x, dtype=complex).imag >= 0, 1.0, -1.0)

    def evaluate(self, x, route: str = "lifted"):
        x = np.asarray(x, dtype=complex)
        if np.any(np.abs(x.imag) == 0):
            raise PathThroughSingularity("x must lie off the real axis")
        integ = self.integral(x, route)
        return self.sign(x) * self.phi_abs_sq(x) * integ.imag, integ

    def wronskian(self, x: complex, h: float = 1e-4) -> complex:
        """W(Phi, Phi I) by central differences; equals 1 up to discretization."""
        def phi(z):
            val = np.polyval(self.q, z)
            for t, l in zip(self.t, self.lam):
                val = val * (z - t) ** (-l / 2)
            return val

        def psi(z):
            return phi(z) * self.integral(np.array([z]))[0]

        dphi = (phi(x + h) - phi(x - h)) / (2 * h)
        dpsi = (psi(x + h) - psi(x - h)) / (2 * h)
        return complex(phi(x) * dpsi - dphi * psi(x))

    def real_sign(self, x):
        """Sign of Phi^2 on the real axis: the normal derivative is this times W."""
        return np.sign(self.phi_sq_inv(np.asarray(x, dtype=float) + 0j).real)


def beta_quaternionic(qpoly, config: GaudinConfig, x: complex, x0: Optional[float] = None) -> BetaValue:
    coeffs = qpoly.coeffs if hasattr(qpoly, "coeffs") else qpoly
    beta = QuaternionicBeta(config.points, config.finite_weights, coeffs, x0)
    val, integ = beta.evaluate(np.array([x]))
    return BetaValue(float(val[0]), complex(integ[0]), beta.path_residual(np.array([x])))


def beta_grid(qpoly, config: GaudinConfig, re: Sequence[float], im: Sequence[float],
              x0: Optional[float] = None) -> HeckeScan:
    coeffs = qpoly.coeffs if hasattr(qpoly, "coeffs") else qpoly
    beta = QuaternionicBeta(config.points, config.finite_weights, coeffs, x0)
    X, Y = np.meshgrid(np.asarray(re, float), np.asarray(im, float))
    xs = (X + 1j * Y).ravel()
    vals, _ = beta.evaluate(xs)
    return HeckeScan(xs, vals, beta.path_residual(xs), {"x0": beta.x0, "sign": "positive above x0"})


def oper_pde_residual(beta: QuaternionicBeta, potential, xs, h: float = 1e-3) -> Tuple[float, float]:
    """Relative residuals of (d_x^2 - v) beta and its conjugate on a set of points.

    d_x = (d_a - i d_b)/2 for x = a + ib; fourth-order stencils.
    """
    xs = np.asarray(xs, dtype=complex)
    offs = [-2, -1, 0, 1, 2]
    w2 = np.array([-1, 16, -30, 16, -1]) / (12 * h * h)
    w1 = np.array([1, -8, 0, 8, -1]) / (12 * h)
    grid = np.array([[xs + p * h + 1j * q * h for p in offs] for q in offs])
    vals, _ = beta.evaluate(grid.ravel())
    B = vals.reshape(grid.shape)
    center = B[2, 2]
    d_aa = np.tensordot(w2, B[2], axes=(0, 0))
    d_bb = np.tensordot(w2, B[:, 2], axes=(0, 0))
    d_ab = np.tensordot(w1, np.tensordot(w1, B, axes=(0, 1)), axes=(0, 0))
    dxx = (d_aa - 2j * d_ab - d_bb) / 4
    dbb = (d_aa + 2j * d_ab - d_bb) / 4
    v = np.asarray(potential(xs), dtype=complex)
    scale = np.max(np.abs(dxx) + np.abs(v * center))
    r1 = np.max(np.abs(dxx - v * center)) / scale
    r2 = np.max(np.abs(dbb - np.conj(v) * center)) / scale
    return float(r1), float(r2)


# ---------------------------------------------------------------------------
# chiral operators: exact residues at infinity


def _binom(alpha, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out = out * (alpha - i) / (i + 1)
    return out


@dataclass(frozen=True)
class ChiralSetup:
    config: GaudinConfig
    r: int

    @property
    def m(self):
        return self.config.m

    @property
    def n(self):
        return self.config.n


def chiral_setup(points, weights, r: int) -> ChiralSetup:
    """Finite weights lam_0..lam_m with lam_{m+1} = r - 1."""
    if int(r) != r or r < 0:
        raise PreconditionError(f"r must be a non-negative integer, got {r}")
    cfg = GaudinConfig(tuple(points), tuple(weights) + (int(r) - 1,))
    if not cfg.exact:
        raise PreconditionError("chiral operators need rational points and weights")
    return ChiralSetup(cfg, int(r))


def _series_factor(var: int, alpha, order: int, nvars: int) -> List[Poly]:
    # (1 - y_var u)^alpha up to u^order
    out = []
    for k in range(order + 1):
        mono = [0] * nvars
        mono[var] = k
        c = _binom(alpha, k) * (-1) ** k
        out.append({tuple(mono): c} if c != 0 else {})
    return out


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Dict = {}
    for k1, v1 in p.items():
        for k2, v2 in q.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            out[k] = out.get(k, 0) + v1 * v2
    return {k: v for k, v in out.items() if v != 0}


def _series_mul(a: List[Poly], b: List[Poly], order: int) -> List[Poly]:
    out: List[Poly] = [{} for _ in range(order + 1)]
    for i, p in enumerate(a[:order + 1]):
        if not p:
            continue
        for j, q in enumerate(b[:order + 1 - i]):
            if q:
                out[i + j] = poly_add(out[i + j], _poly_mul(p, q))
    return out


def _residue(psi: Poly, setup: ChiralSetup, numerators: Sequence[Poly], order: int) -> Poly:
    """Coefficient of s^-1 of psi(c_j/(s-y_j)) prod (s-y_j)^lam_j at s = infinity.

    With u = 1/s the integrand is s^(n+r-1) F(u), so the residue is the
    u^(n+r) coefficient of F = sum_e psi_e prod c_j^e_j (1 - y_j u)^(lam_j - e_j).
    """
    cfg = setup.config
    m1 = cfg.m + 1
    nv = len(next(iter(numerators[0]))) if numerators[0] else m1 + 1
    need = setup.n + setup.r
    if need > order:
        raise TruncationInsufficient(f"residue sits at order {need}, series kept to {order}")
    total: Poly = {}
    for mono, coef in psi.items():
        if sum(mono) != setup.n:
            raise PreconditionError(f"psi must be homogeneous of degree {setup.n}")
        series: List[Poly] = [{(0,) * nv: Fraction(1)}] + [{} for _ in range(order)]
        pref: Poly = {(0,) * nv: Fraction(coef)}
        for j in range(m1):
            series = _series_mul(series, _series_factor(j, cfg.weights[j] - mono[j], order, nv), order)
            for _ in range(mono[j]):
                pref = _poly_mul(pref, numerators[j])
        total = poly_add(total, _poly_mul(pref, series[need]))
    return total


def _with_doubling(fn, setup: ChiralSetup, order: Optional[int]):
    order = setup.n + setup.r + 4 if order is None else order
    while True:
        try:
            return fn(order)
        except TruncationInsufficient:
            order *= 2


def chiral_hecke(psi: Poly, setup: ChiralSetup, order: Optional[int] = None) -> Poly:
    """Residue at infinity with arguments (t_j - x)/(s - y_j).

    The result is a polynomial in y_0..y_m and x, the last exponent slot
    holding the power of x.
    """
    m1 = setup.m + 1
    nv = m1 + 1
    nums = []
    for j, t in enumerate(setup.config.points):
        xmono = [0] * nv
        xmono[-1] = 1
        nums.append(poly_add({(0,) * nv: Fraction(t)}, {tuple(xmono): Fraction(-1)}))
    psi_ext = {tuple(k) + (0,): v for k, v in psi.items()}
    return _with_doubling(lambda o: _residue(psi_ext, setup, nums, o), setup, order)


def chiral_restriction(psi: Poly, setup: ChiralSetup, order: Optional[int] = None) -> Poly:
    m1 = setup.m + 1
    nums = [{(0,) * m1: Fraction(1)} for _ in range(m1)]
    return _with_doubling(lambda o: _residue(dict(psi), setup, nums, o), setup, order)


def split_x(p: Poly) -> Dict[int, Poly]:
    """Group a (y, x) polynomial by the power of x."""
    out: Dict[int, Poly] = {}
    for k, v in p.items():
        out.setdefault(k[-1], {})[k[:-1]] = v
    return out


def eval_x(p: Poly, x) -> Poly:
    out: Poly = {}
    for k, v in p.items():
        out = poly_add(out, {k[:-1]: v * x ** k[-1]})
    return out


@dataclass
class ChiralFactorization:
    kappa: Optional[Fraction]
    exact: bool
    sector: WeightSector
    qop: QOperator
    mismatches: int

    @property
    def degenerate(self) -> bool:
        # both sides vanish identically, no scalar to fix
        return self.kappa is None


def chiral_factorization(setup: ChiralSetup) -> ChiralFactorization:
    """Compare the chiral Hecke operator with R Q(x) coefficient-wise in x."""
    cfg = setup.config
    sector = build_sector(cfg)
    mats = gaudin_matrices(cfg, sector)
    qop = baxter_q(cfg, mats)
    restricted = [chiral_restriction(b, setup) for b in sector.basis]
    n = setup.n
    kappa = None
    mismatches = 0
    for c, b in enumerate(sector.basis):
        lhs = split_x(chiral_hecke(b, setup))
        for k in range(n + 1):
            # x^(n-k) coefficient of R Q(x) b = sum_r Q_k[r, c] R(b_r)
            rhs: Poly = {}
            for row in range(sector.dim):
                coef = qop.coeffs[k][row, c]
                if coef != 0:
                    rhs = poly_add(rhs, restricted[row], coef)
            got = lhs.get(n - k, {})
            keys = set(rhs) | set(got)
            for key in keys:
                a, bb = got.get(key, 0), rhs.get(key, 0)
                if bb == 0 and a == 0:
                    continue
                if bb == 0:
                    mismatches += 1
                    continue
                ratio = Fraction(a) / Fraction(bb)
                if kappa is None:
                    kappa = ratio
                elif ratio != kappa:
                    mismatches += 1
        for power in lhs:
            if power > n:
                mismatches += len(lhs[power])
    return ChiralFactorization(kappa, mismatches == 0 and kappa not in (None, 0), sector, qop, mismatches)


def target_sector(setup: ChiralSetup) -> WeightSector:
    """Translation-invariant polynomials of degree n + r, where the outputs live."""
    cfg = setup.config
    return build_sector(GaudinConfig.with_n(cfg.points, cfg.finite_weights, setup.n + setup.r))


def chiral_matrix(setup: ChiralSetup, x, source: Optional[WeightSector] = None,
                  target: Optional[WeightSector] = None) -> np.ndarray:
    """Matrix of the chiral Hecke operator at x between sector bases."""
    source = build_sector(setup.config) if source is None else source
    target = target_sector(setup) if target is None else target
    cols = []
    for b in source.basis:
        img = chiral_hecke(b, setup)
        if isinstance(x, (int, Fraction)):
            cols.append(target.coords(eval_x(img, Fraction(x)), check=True))
        else:
            num = {k: complex(v) for k, v in img.items()}
            cols.append(target.coords(eval_x(num, complex(x)), check=True))
    return np.array(cols, dtype=object if isinstance(x, (int, Fraction)) else complex).T.reshape(target.dim, source.dim)
