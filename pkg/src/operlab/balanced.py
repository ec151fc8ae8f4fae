"""Real-point opers: interval solutions, balancing data and the 4-point search.

All marked points are real, t_0 < ... < t_m, and infinity is the last point
t_{m+1}.  Weights are lam_j = -1 + c_j with c_j imaginary (c_j = 0 is the
untwisted case).  At each point the local exponents are (1 -+ c)/2 and we use
the c-uniform real basis

    P = (u_+ + u_-)/2,   L = (u_+ - u_-)/c        (L -> log solution as c -> 0)

built from Frobenius series u_pm = |s|^{(1 pm c)/2} sum_k c_k s^k on either
side of the point.  A real solution is a coefficient vector (A, B) for
A L + B P.  Frames on the two sides of a point share the same formulas in
|s|, so crossing a point is the identity on coefficient vectors; the
interval transfer matrices T_j carry everything.

Wronskians follow W(f, g) = f' g - f g', for which W(L, P) = 1 right of a
point and -1 left of it.  At infinity the coordinate is w = -1/x and
solutions are read as the -1/2-forms phi(w) = w psi(-1/w).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidConfig, PreconditionError, SeriesDivergence
from .localfield import FieldTag, gamma_local
from .monodromy import _Potential, transport_segment
from .oper import Oper

SERIES_ORDER = 80
SEED_FRACTION = 0.25


def gamma_cos(c: complex) -> complex:
    """Gamma(c) cos(pi c / 2), obtained from the Tate factor 2 (2 pi)^(-c) Gamma(c) cos(pi c / 2)."""
    return gamma_local(c, FieldTag.REAL) * (2 * math.pi) ** c / 2


def lambda_of(c: complex) -> complex:
    return cmath.exp(0.5j * math.pi * c)


def xi_of(c: complex) -> float:
    lam = lambda_of(c)
    return ((lam - 1 / lam) / (lam + 1 / lam)).real


def half_monodromy(c: complex) -> np.ndarray:
    """The displayed half-monodromy matrix J(Lambda), Lambda = exp(pi i c / 2)."""
    lam = lambda_of(c)
    s, d = lam + 1 / lam, lam - 1 / lam
    return (s / 2) * np.array([[1j, -(d * d) / (s * s)], [1, 1j]])


# ---------------------------------------------------------------------------
# local series


def _local_potential_series(points, a, mu, j, order):
    """Coefficients q_k of s^2 v(t_j + s) (finite j) or of the chart at infinity."""
    q = np.zeros(order + 1, dtype=complex)
    if j < len(points):
        tj = points[j]
        q[0] = a[j]
        if order >= 1:
            q[1] = mu[j]
        for i, ti in enumerate(points):
            if i == j:
                continue
            d = tj - ti
            for k in range(order - 1):
                sign = (-1) ** k
                q[k + 2] += a[i] * (k + 1) * sign / d ** (k + 2) + mu[i] * sign / d ** (k + 1)
    else:
        # s^2 vtilde(s), vtilde(w) = v(-1/w) / w^4
        for i, ti in enumerate(points):
            for k in range(order + 1):
                q[k] += (a[i] * (k + 1) + mu[i] * ti) * (-ti) ** k
    return q


def _frobenius(q, rho, order):
    """Coefficients of s^rho sum c_k s^k and their rho-derivatives."""
    c = np.zeros(order + 1, dtype=complex)
    dc = np.zeros(order + 1, dtype=complex)
    c[0] = 1.0
    for k in range(1, order + 1):
        D = (rho + k) * (rho + k - 1) - q[0]
        dD = 2 * (rho + k) - 1
        R = np.dot(q[1:k + 1], c[k - 1::-1])
        dR = np.dot(q[1:k + 1], dc[k - 1::-1])
        if abs(D) < 1e-12:
            raise SeriesDivergence(f"resonant exponent at order {k}")
        c[k] = R / D
        dc[k] = (dR - dD * c[k]) / D
    return c, dc


@dataclass
class LocalFrame:
    """Real basis (L, P) of solutions near one marked point, in its local chart."""

    index: int
    c: complex
    radius: float
    plus: np.ndarray
    minus: np.ndarray
    log: Tuple[np.ndarray, np.ndarray]

    def basis(self, s: float) -> np.ndarray:
        """[[L, P], [L', P']] at local coordinate s (derivatives in s)."""
        if s == 0 or abs(s) >= self.radius:
            raise PreconditionError(f"seed {s} outside the punctured disc of radius {self.radius}")
        r = abs(s)
        k = np.arange(len(self.plus))
        powers = s ** k
        dpowers = np.where(k > 0, k * s ** np.maximum(k - 1, 0), 0.0)
        tail = max(abs(self.plus[-1]), abs(self.minus[-1])) * r ** (len(k) - 1)
        if tail > 1e-15 * max(1.0, abs(self.plus[0])):
            raise SeriesDivergence(f"series tail {tail:.2e} at |s| = {r:.3g}")
        if self.c == 0:
            cs, dcs = self.log
            S0, dS0 = np.dot(cs, powers), np.dot(cs, dpowers)
            S1, dS1 = np.dot(dcs, powers), np.dot(dcs, dpowers)
            root = math.sqrt(r)
            P = root * S0
            dP = root * (0.5 * S0 / s + dS0)
            lg = math.log(r)
            L = P * lg + root * S1
            dL = dP * lg + P / s + root * (0.5 * S1 / s + dS1)
        else:
            vals = []
            for coef, rho in ((self.plus, (1 + self.c) / 2), (self.minus, (1 - self.c) / 2)):
                S, dS = np.dot(coef, powers), np.dot(coef, dpowers)
                base = cmath.exp(rho * math.log(r))
                vals.append((base * S, base * (rho * S / s + dS)))
            (up, dup), (um, dum) = vals
            P, dP = (up + um) / 2, (dup + dum) / 2
            L, dL = (up - um) / self.c, (dup - dum) / self.c
        return np.array([[L, P], [dL, dP]], dtype=complex)


def local_frame(op: Oper, j: int, order: int = SERIES_ORDER) -> LocalFrame:
    points = [float(complex(t).real) for t in op.points]
    a = [complex(op.double_pole(i)) for i in range(len(points))]
    mu = [complex(x) for x in op.mu]
    m1 = len(points)
    lam = complex(op.weights[j])
    c = lam + 1
    if abs(c.real) > 1e-12:
        raise PreconditionError(f"weight at point {j} is not of the form -1 + imaginary")
    c = complex(0, c.imag) if abs(c.imag) > 0 else 0
    q = _local_potential_series(points, a, mu, j, order)
    if j < m1:
        others = [abs(points[j] - t) for i, t in enumerate(points) if i != j]
        radius = min(others) if others else math.inf
    else:
        big = max(abs(t) for t in points)
        radius = 1 / big if big > 0 else math.inf
    if c == 0:
        cs, dcs = _frobenius(q, 0.5, order)
        return LocalFrame(j, 0, radius, cs, cs, (cs, dcs))
    plus, _ = _frobenius(q, (1 + c) / 2, order)
    minus, _ = _frobenius(q, (1 - c) / 2, order)
    return LocalFrame(j, c, radius, plus, minus, (plus, plus))


# ---------------------------------------------------------------------------
# normalized f and g


def f_vector(c: complex, theta: float) -> np.ndarray:
    """(A, B) of the f-type solution with parameter theta.

    Untwisted: f = -L + theta P.  Twisted: f = z u_- + conj(z) u_+ with
    z = -i sgn(gamma) |Gamma(c) cos(pi c/2)| exp(i gamma theta/2), c = i gamma,
    which tends to the untwisted vector as gamma -> 0.
    """
    if c == 0:
        return np.array([-1.0, theta])
    gam = c.imag
    mod = abs(gamma_cos(c))
    half = gam * theta / 2
    return np.array([-abs(gam) * mod * math.cos(half), 2 * mod * math.copysign(1, gam) * math.sin(half)])


def _z_of(c, theta):
    gam = c.imag
    return -1j * math.copysign(1, gam) * abs(gamma_cos(c)) * cmath.exp(0.5j * gam * theta)


def g_vector(c: complex, theta: float) -> np.ndarray:
    """(A, B) of g = ghat + i xi f with ghat = -pi/(c z) u_+, so that W(f, g) = pi."""
    if c == 0:
        return np.array([0.0, -math.pi])
    z = _z_of(c, theta)
    eta = -math.pi / (c * z)
    xi = xi_of(c)
    Bc = eta + 1j * xi * (z + z.conjugate())
    Ac = (c / 2) * (eta - 1j * xi * z + 1j * xi * z.conjugate())
    return np.array([Ac.real, Bc.real])


def f_scale(c: complex, v: np.ndarray) -> float:
    """Signed scale N with v = N f_vector(c, theta) for some theta (sign taken from -A)."""
    if c == 0:
        return float(-v[0])
    gam = c.imag
    mod = abs(gamma_cos(c))
    norm = math.hypot(v[0] / (abs(gam) * mod), v[1] / (2 * mod))
    return -norm if v[0] > 0 else norm


def f_theta(c: complex, v: np.ndarray) -> float:
    """theta of the normalized vector v / f_scale(v)."""
    u = v / f_scale(c, v)
    if c == 0:
        return float(u[1])
    gam = c.imag
    mod = abs(gamma_cos(c))
    half = math.atan2(u[1] * math.copysign(1, gam) / (2 * mod), -u[0] / (abs(gam) * mod))
    return 2 * half / gam


# ---------------------------------------------------------------------------
# transfer matrices


@dataclass
class IntervalTransfer:
    """Real transfer matrix from the right frame of t_j to the left frame of t_{j+1}."""

    index: int
    matrix: np.ndarray
    imag_residual: float
    seeds: Tuple[float, float]


class RealOper:
    """An oper with real marked points, centred so the chart at infinity is well conditioned."""

    def __init__(self, op: Oper, tol: float = 1e-12):
        pts = [complex(t) for t in op.points]
        if any(abs(p.imag) > 0 for p in pts):
            raise PreconditionError("balancing needs real marked points")
        xs = [p.real for p in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidConfig("marked points must be strictly increasing")
        self.original = op
        self.shift = sum(xs) / len(xs)
        self.op = Oper(tuple(x - self.shift for x in xs), tuple(op.weights), tuple(op.mu))
        self.tol = tol
        self.m = len(xs) - 1
        self.frames = [local_frame(self.op, j) for j in range(self.m + 2)]
        self.pot = _Potential(self.op)

    @property
    def points(self):
        return [complex(t).real for t in self.op.points]

    @property
    def cs(self):
        return [fr.c for fr in self.frames]

    def _seed(self, j):
        return SEED_FRACTION * self.frames[j].radius

    def transfer(self, j: int) -> IntervalTransfer:
        """T_j for the interval (t_j, t_{j+1}), with t_{m+1} = infinity and t_{m+2} = t_0."""
        t = self.points
        m = self.m
        tol = self.tol
        if j < m:
            sa, sb = self._seed(j), self._seed(j + 1)
            xa, xb = t[j] + sa, t[j + 1] - sb
            Y = transport_segment(self.pot, xa, xb, np.eye(2, dtype=complex), tol)
            Fa = self.frames[j].basis(sa)
            Fb = self.frames[j + 1].basis(-sb)
            T = np.linalg.solve(Fb, Y @ Fa)
            seeds = (sa, -sb)
        elif j == m:
            sa, wb = self._seed(m), -self._seed(m + 1)
            xa, xb = t[m] + sa, -1 / wb
            Y = transport_segment(self.pot, xa, xb, np.eye(2, dtype=complex), tol)
            C = np.array([[wb, 0], [1, 1 / wb]], dtype=complex)
            T = np.linalg.solve(self.frames[m + 1].basis(wb), C @ Y @ self.frames[m].basis(sa))
            seeds = (sa, wb)
        elif j == m + 1:
            wa, sb = self._seed(m + 1), self._seed(0)
            xa, xb = -1 / wa, t[0] - sb
            Y = transport_segment(self.pot, xa, xb, np.eye(2, dtype=complex), tol)
            Ci = np.array([[1 / wa, 0], [-1, wa]], dtype=complex)
            T = np.linalg.solve(self.frames[0].basis(-sb), Y @ Ci @ self.frames[m + 1].basis(wa))
            seeds = (wa, -sb)
        else:
            raise IndexError(j)
        return IntervalTransfer(j, T.real.copy(), float(np.abs(T.imag).max()), seeds)

    def transfers(self) -> List[IntervalTransfer]:
        return [self.transfer(j) for j in range(self.m + 2)]


# ---------------------------------------------------------------------------


@dataclass
class IntervalSolutions:
    index: int
    c: complex
    theta: float
    f: np.ndarray  # coefficient vectors in the right frame of t_j
    g: np.ndarray
    wronskian: float
    xi: float
    samples: Optional[np.ndarray] = None  # rows (x, f(x), g(x))


def wronskian_coeffs(u: np.ndarray, v: np.ndarray, side: int = 1) -> float:
    """W(u, v) = u'v - uv' for coefficient vectors on the given side of a point."""
    return float(side * (u[0] * v[1] - u[1] * v[0]))


def interval_solutions(op: Oper, j: int, theta: float = 0.0, samples: int = 0,
                       real: Optional[RealOper] = None) -> IntervalSolutions:
    """f_j, g_j on (t_j, t_{j+1}) normalized at t_j+ (j = m+1 is the interval through infinity)."""
    R = real or RealOper(op)
    frame = R.frames[j]
    c = frame.c
    f, g = f_vector(c, theta), g_vector(c, theta)
    W = wronskian_coeffs(f, g, 1)
    table = None
    if samples:
        table = _sample_interval(R, j, np.array([f, g]).T, samples)
    return IntervalSolutions(j, c, theta, f, g, W, xi_of(c) if c != 0 else 0.0, table)


def _sample_interval(R: RealOper, j: int, coeffs: np.ndarray, count: int) -> np.ndarray:
    """Values of the solutions with the given right-frame coefficients at points of I_j."""
    t = R.points + [math.inf]
    m = R.m
    if j > m:
        raise PreconditionError("sampling is provided for finite intervals")
    s0 = R._seed(j)
    x0 = t[j] + s0
    data0 = R.frames[j].basis(s0) @ coeffs
    hi = t[j + 1] - R._seed(j + 1) if j < m else t[j] + 4 * max(1.0, s0)
    xs = np.linspace(x0, hi, count)
    rows = []
    Y = np.eye(2, dtype=complex)
    prev = x0
    for x in xs:
        if x > prev:
            Y = transport_segment(R.pot, prev, x, Y, R.tol)
            prev = x
        vals = (Y @ data0)[0].real
        rows.append([x + R.shift, *vals])
    return np.array(rows)


# ---------------------------------------------------------------------------


@dataclass
class BalancedData:
    lambdas: List[complex]
    transfers: List[np.ndarray]
    monodromy: np.ndarray  # product of the transfers around the real circle
    theta: List[float]
    scales: List[float]
    a: List[float]
    b: List[float]
    B: List[np.ndarray]
    J: List[np.ndarray]
    residual: float
    trace_defect: float
    elliptic: bool = False
    notes: List[str] = field(default_factory=list)

    def balanced(self, tol: float = 1e-6) -> bool:
        return not self.elliptic and all(abs(x - 1) < tol for x in self.a)


def crossing_signs(m: int) -> List[int]:
    """Sign relating the frames on the two sides of each point: -1 at finite points, +1 at infinity."""
    return [-1] * (m + 1) + [1]


def circle_monodromy(Ts: Sequence[np.ndarray], m: int) -> np.ndarray:
    """Coefficient map once around the real circle starting right of t_0."""
    eps = crossing_signs(m)
    M = np.eye(2)
    for j, T in enumerate(Ts):
        M = eps[(j + 1) % (m + 2)] * T @ M
    return M


def connection_product(J: Sequence[np.ndarray], B: Sequence[np.ndarray], m: int) -> np.ndarray:
    """J_0 B_{m+1} J_{m+1} B_m ... J_1 B_0.

    The sign change at infinity already sits in the frames (crossing_signs),
    so the displayed J is used at every point here.
    """
    prod = np.eye(2, dtype=complex)
    for k in [0] + list(range(m + 1, 0, -1)):
        prod = prod @ J[k] @ B[k - 1 if k > 0 else m + 1]
    return prod


def _chain_start(M: np.ndarray, parabolic_tol: float = 1e-6) -> np.ndarray:
    """Real eigenvector of M for the eigenvalue nearest 1.

    Close to the parabolic locus the eigenvectors are only sqrt-conditioned;
    there the range of the nilpotent part M - (tr/2) Id is used instead.
    """
    tr, det = np.trace(M), np.linalg.det(M)
    scale = max(1.0, float(np.abs(M).max()))
    if abs(tr * tr / 4 - det) < parabolic_tol * scale ** 2:
        N = M - 0.5 * tr * np.eye(2)
        k = int(np.argmax(np.linalg.norm(N, axis=0)))
        if np.linalg.norm(N[:, k]) > 0:
            return N[:, k].copy()
    vals, vecs = np.linalg.eig(M)
    k = int(np.argmin(np.abs(vals - 1)))
    return vecs[:, k].real.copy()


def balance_check(op: Oper, real: Optional[RealOper] = None) -> BalancedData:
    """Connection data a_j, b_j along the real circle.

    The f-chain starts from the real eigenvector of the circle monodromy
    closest to eigenvalue 1 and is renormalized at every point; a_j is
    read off from g_j = b_j f_j - a_j g*_j at the far end of I_j.  For an
    elliptic circle monodromy no real chain exists and the data are NaN.
    """
    R = real or RealOper(op)
    m = R.m
    cs = R.cs
    eps = crossing_signs(m)
    Ts = [tr.matrix for tr in R.transfers()]
    M = circle_monodromy(Ts, m)
    tr = float(np.trace(M))
    det = float(np.linalg.det(M))
    J = [half_monodromy(c) for c in cs]
    lambdas = [lambda_of(c) for c in cs]
    nan = [math.nan] * (m + 2)
    if tr * tr - 4 * det < -1e-8 * max(1.0, float(np.abs(M).max()) ** 2):
        return BalancedData(lambdas, Ts, M, nan, nan, nan, nan, [], J, math.inf, tr - 2,
                            elliptic=True, notes=["elliptic circle monodromy: no real f-chain"])
    v = _chain_start(M)
    v = v / f_scale(cs[0], v)
    theta, scales, a, b, Bs = [], [], [], [], []
    for j in range(m + 2):
        nxt = (j + 1) % (m + 2)
        cj, cn = cs[j], cs[nxt]
        th = f_theta(cj, v)
        theta.append(th)
        fv = eps[nxt] * Ts[j] @ v
        gv = eps[nxt] * Ts[j] @ g_vector(cj, th)
        N = f_scale(cn, fv)
        gstar = g_vector(cn, f_theta(cn, fv))
        # far end: g_j = b f_j - a g*_j
        coef = np.linalg.solve(np.array([fv, -gstar]).T, gv)
        b.append(float(coef[0]))
        a.append(float(coef[1]))
        scales.append(N)
        Bs.append(np.array([[1, coef[0]], [0, -coef[1]]], dtype=complex))
        v = fv / N
    res = float(np.abs(connection_product(J, Bs, m) + np.eye(2)).max())
    return BalancedData(lambdas, Ts, M, theta, scales, a, b, Bs, J, res, tr - 2)


# ---------------------------------------------------------------------------


def accessory_from_mu0(points: Sequence[float], weights: Sequence[complex], mu0: float) -> Tuple[complex, ...]:
    """The other accessory parameters of a 4-point oper from mu_0 and the residue constraints."""
    if len(points) != 3:
        raise PreconditionError("the one-parameter family needs exactly three finite points")
    t0, t1, t2 = (float(t) for t in points)
    a = [w * (w + 2) / 4 for w in weights]
    rhs = a[3] - a[0] - a[1] - a[2] - t0 * mu0
    # mu1 + mu2 = -mu0, t1 mu1 + t2 mu2 = rhs
    mu2 = (rhs + t1 * mu0) / (t2 - t1)
    mu1 = -mu0 - mu2
    return (mu0, mu1, mu2)


def four_point_oper(points: Sequence[float], weights: Sequence[complex], mu0: float) -> Oper:
    return Oper(tuple(float(t) for t in points), tuple(complex(w) for w in weights),
                accessory_from_mu0(points, weights, mu0))


def _normalize_four(ts, lams):
    ts = list(ts)
    if len(ts) == 4:
        if not math.isinf(ts[-1]):
            raise PreconditionError("with four points the last one must be infinity")
        ts = ts[:3]
    if len(ts) != 3 or len(lams) != 4:
        raise PreconditionError("need three finite points plus infinity and four weights")
    return [float(t) for t in ts], [complex(w) for w in lams]


def trace_defect(ts, lams, mu0: float) -> float:
    R = RealOper(four_point_oper(ts, lams, mu0))
    M = circle_monodromy([tr.matrix for tr in R.transfers()], R.m)
    return float(np.trace(M)) - 2


@dataclass
class BalancedHit:
    mu0: float
    data: BalancedData
    accepted: bool


def find_balanced_4pt(lams: Sequence[complex], ts: Sequence[float], scan: Tuple[float, float],
                      steps: int = 200, xtol: float = 1e-12, atol: float = 1e-6,
                      return_all: bool = False):
    """Balanced opers in a one-parameter 4-point family.

    Scans mu_0 over the bracket for sign changes of tr(M) - 2 (M the real
    circle monodromy, which is parabolic at a balanced oper), refines each
    by bisection and keeps the roots whose connection data have all a_j = 1.
    """
    ts, lams = _normalize_four(ts, lams)
    lo, hi = scan
    grid = np.linspace(lo, hi, steps + 1)
    vals = [trace_defect(ts, lams, x) for x in grid]
    hits = []
    for x0, x1, v0, v1 in zip(grid, grid[1:], vals, vals[1:]):
        if v0 == 0:
            root = x0
        elif v0 * v1 < 0:
            a, b, fa = x0, x1, v0
            while b - a > xtol * max(1.0, abs(a)):
                mid = 0.5 * (a + b)
                fm = trace_defect(ts, lams, mid)
                if fm == 0:
                    a = b = mid
                    break
                if fm * fa < 0:
                    b = mid
                else:
                    a, fa = mid, fm
            root = 0.5 * (a + b)
        else:
            continue
        data = balance_check(four_point_oper(ts, lams, root))
        ok = data.balanced(atol)
        hits.append(BalancedHit(float(root), data, ok))
    if return_all:
        return hits
    return [h.mu0 for h in hits if h.accepted]
