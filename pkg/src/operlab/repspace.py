"""Polynomial models of sl2-modules and the singular weight sector.

A polynomial in y_0..y_m is a dict mapping exponent tuples to coefficients.
Coefficients are plain Python numbers, so rational inputs (int, Fraction)
stay exact and anything else falls back to complex floating point.

Each factor carries e = d/dy, h = -2y d/dy + lam, f = -y^2 d/dy + lam y.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidConfig

Monomial = Tuple[int, ...]
Poly = Dict[Monomial, object]


def is_exact(x) -> bool:
    return isinstance(x, Rational)


def as_number(x):
    """Normalize user input: keep ints/Fractions, parse rational strings, else complex."""
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return complex(x.replace(" ", ""))
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, (float, np.floating)) and float(x).is_integer():
        return Fraction(int(x))
    z = complex(x)
    return z.real if z.imag == 0 else z


@dataclass(frozen=True)
class GaudinConfig:
    """Marked points t_0..t_m, weights lam_0..lam_{m+1} (last one at infinity)."""

    points: Tuple
    weights: Tuple
    n: int = field(init=False)

    def __post_init__(self):
        pts = tuple(as_number(t) for t in self.points)
        wts = tuple(as_number(w) for w in self.weights)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)
        if len(pts) < 1:
            raise InvalidConfig("at least one marked point is required")
        if len(wts) != len(pts) + 1:
            raise InvalidConfig(f"need {len(pts) + 1} weights (one per point plus infinity), got {len(wts)}")
        for a, b in itertools.combinations(range(len(pts)), 2):
            if abs(complex(pts[a]) - complex(pts[b])) < 1e-12:
                raise InvalidConfig(f"marked points must be pairwise distinct: t{a} = t{b} = {pts[a]}")
        two_n = sum(wts[:-1]) - wts[-1]
        n = round(complex(two_n).real / 2)
        if abs(complex(two_n) - 2 * n) > 1e-9 or n < 0:
            raise InvalidConfig(f"sum of finite weights minus weight at infinity must be 2n with n >= 0, got {two_n}")
        object.__setattr__(self, "n", int(n))

    @classmethod
    def with_n(cls, points: Sequence, finite_weights: Sequence, n: int) -> "GaudinConfig":
        wts = [as_number(w) for w in finite_weights]
        return cls(tuple(points), tuple(wts) + (sum(wts) - 2 * n,))

    @property
    def m(self) -> int:
        return len(self.points) - 1

    @property
    def finite_weights(self):
        return self.weights[:-1]

    @property
    def lam_inf(self):
        return self.weights[-1]

    @property
    def exact(self) -> bool:
        return all(is_exact(x) for x in self.points + self.weights)

    def dominant_integral(self) -> bool:
        return all(is_exact(w) and w == int(w) and w >= 0 for w in self.weights)

    def real_points(self) -> bool:
        return all(complex(t).imag == 0 for t in self.points)


# ---------------------------------------------------------------------------
# polynomial arithmetic


def poly_add(p: Poly, q: Poly, scale=1) -> Poly:
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + scale * v
    return {k: v for k, v in out.items() if v != 0}


def poly_scale(p: Poly, c) -> Poly:
    if c == 0:
        return {}
    return {k: c * v for k, v in p.items()}


def poly_diff(p: Poly, i: int) -> Poly:
    out = {}
    for k, v in p.items():
        if k[i]:
            kk = list(k)
            kk[i] -= 1
            out[tuple(kk)] = v * k[i]
    return out


def poly_mul_var(p: Poly, i: int, power: int = 1) -> Poly:
    out = {}
    for k, v in p.items():
        kk = list(k)
        kk[i] += power
        out[tuple(kk)] = v
    return out


def poly_mul_diff(p: Poly, i: int, j: int) -> Poly:
    """Multiply by (y_i - y_j)."""
    return poly_add(poly_mul_var(p, i), poly_mul_var(p, j), -1)


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for k1, v1 in p.items():
        for k2, v2 in q.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            out[k] = out.get(k, 0) + v1 * v2
    return {k: v for k, v in out.items() if v != 0}


def poly_eval(p: Poly, y: Sequence) -> complex:
    total = 0
    for k, v in p.items():
        term = v
        for yi, e in zip(y, k):
            term = term * yi ** e
        total += term
    return total


def apply_e(p: Poly, i: int) -> Poly:
    return poly_diff(p, i)


def apply_h(p: Poly, i: int, lam) -> Poly:
    out = {}
    for k, v in p.items():
        c = (lam - 2 * k[i]) * v
        if c != 0:
            out[k] = c
    return out


def apply_f(p: Poly, i: int, lam) -> Poly:
    out = {}
    for k, v in p.items():
        c = (lam - k[i]) * v
        if c != 0:
            kk = list(k)
            kk[i] += 1
            out[tuple(kk)] = c
    return out


def monomials(nvars: int, degree: int, caps: Optional[Sequence[int]] = None):
    """Exponent tuples of the given total degree, in descending lex order."""
    out = []

    def rec(prefix, remaining, idx):
        if idx == nvars - 1:
            if caps is None or remaining <= caps[idx]:
                out.append(tuple(prefix + [remaining]))
            return
        top = remaining if caps is None else min(remaining, caps[idx])
        for k in range(top, -1, -1):
            rec(prefix + [k], remaining - k, idx + 1)

    if nvars == 0:
        return [()] if degree == 0 else []
    rec([], degree, 0)
    return out


# ---------------------------------------------------------------------------
# exact linear algebra


def rref(rows, ncols):
    """Reduced row echelon form over Fractions. Returns (matrix, pivot columns)."""
    mat = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = Fraction(1) / mat[r][c]
        mat[r] = [inv * x for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                fac = mat[i][c]
                mat[i] = [a - fac * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def nullspace_exact(rows, ncols):
    """Basis of the kernel; vector k has a 1 in the k-th free column."""
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis, free


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightSector:
    """Translation-invariant homogeneous polynomials of degree n in y_0..y_m."""

    m: int
    n: int
    degree_caps: Optional[Tuple[int, ...]]
    monomials: Tuple[Monomial, ...]
    basis: Tuple[Poly, ...]
    free: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def nvars(self) -> int:
        return self.m + 1

    def coords(self, p: Poly, check: bool = False, tol: float = 1e-9):
        """Coordinates of a sector element in the basis.

        The basis is dual to the free monomials, so coordinates are read off
        directly; with ``check`` the reconstruction is compared to ``p``.
        """
        vec = [p.get(self.monomials[f], 0) for f in self.free]
        if check:
            diff = poly_add(self.element(vec), p, -1)
            size = max([abs(complex(v)) for v in p.values()] + [1.0])
            if any(abs(complex(v)) > tol * size for v in diff.values()):
                raise ValueError("polynomial is not in the weight sector")
        return vec

    def element(self, vec) -> Poly:
        out: Poly = {}
        for c, b in zip(vec, self.basis):
            if c != 0:
                out = poly_add(out, b, c)
        return out

    def contains(self, p: Poly, tol: float = 1e-9) -> bool:
        if any(sum(k) != self.n for k in p):
            return False
        if self.degree_caps is not None and any(
                e > c for k in p for e, c in zip(k, self.degree_caps)):
            return False
        translated: Poly = {}
        for i in range(self.nvars):
            translated = poly_add(translated, poly_diff(p, i))
        return all(abs(complex(v)) <= tol for v in translated.values())


def uncapped_dimension(m: int, n: int) -> int:
    if m == 0:
        return 1 if n == 0 else 0
    return comb(n + m - 1, m - 1)


def sector_caps(config: GaudinConfig):
    caps = []
    for w in config.finite_weights:
        if not (is_exact(w) and w == int(w) and w >= 0):
            raise InvalidConfig(f"degree caps need non-negative integer weights, got {w}")
        caps.append(int(w))
    return tuple(caps)


def build_sector(config: GaudinConfig, capped: bool = False) -> WeightSector:
    m, n = config.m, config.n
    caps = sector_caps(config) if capped else None
    mons = monomials(m + 1, n, caps)
    lower = monomials(m + 1, n - 1, caps) if n > 0 else []
    index = {k: r for r, k in enumerate(lower)}
    rows = [[Fraction(0)] * len(mons) for _ in lower]
    for c, k in enumerate(mons):
        for i in range(m + 1):
            if k[i]:
                kk = list(k)
                kk[i] -= 1
                rows[index[tuple(kk)]][c] += k[i]
    vectors, free = nullspace_exact(rows, len(mons))
    basis = tuple({mons[c]: v for c, v in enumerate(vec) if v != 0} for vec in vectors)
    return WeightSector(m, n, caps, tuple(mons), basis, tuple(free))


@dataclass(frozen=True)
class AmbientSpace:
    """All polynomials in m+1 variables of total degree <= max_degree."""

    nvars: int
    max_degree: int

    @property
    def monomials(self):
        out = []
        for d in range(self.max_degree + 1):
            out.extend(monomials(self.nvars, d))
        return out


def generator_action(gen: str, factor: int, weight, space: AmbientSpace):
    """Matrix of e_i, h_i or f_i on the truncated ambient space.

    Column c is the image of monomial c; terms of degree above the
    truncation are dropped, so relations involving f are exact only on
    inputs of degree < max_degree.
    """
    if not 0 <= factor < space.nvars:
        raise IndexError(f"factor {factor} out of range")
    action = {"e": lambda p: apply_e(p, factor),
              "h": lambda p: apply_h(p, factor, weight),
              "f": lambda p: apply_f(p, factor, weight)}[gen]
    mons = space.monomials
    index = {k: r for r, k in enumerate(mons)}
    exact = is_exact(weight)
    mat = np.zeros((len(mons), len(mons)), dtype=object if exact else complex)
    if exact:
        mat[:] = Fraction(0)
    for c, k in enumerate(mons):
        for kk, v in action({k: Fraction(1) if exact else 1.0}).items():
            if kk in index:
                mat[index[kk], c] = v
    return mat
