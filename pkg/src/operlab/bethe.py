"""Bethe Ansatz equations: solver, Bethe vectors and eigenvalue formula.

BAE:  sum_i lam_i/(w_j - t_i) = sum_{s != j} 2/(w_j - w_s),  j = 1..n.

Solutions are searched by parameter homotopy.  The start system has
negative weights and real points, where every solution is real and there
is exactly one per distribution of the n roots among the m gaps between
consecutive points; those are found by constrained energy minimization.
The weights (and, if needed, the points) are then deformed to the target
along a complex detour, and damped Newton from random seeds supplements
the tracked endpoints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import Incomplete, PreconditionError, ZeroVector
from .repspace import (GaudinConfig, Poly, WeightSector, apply_f, build_sector, poly_add,
                       poly_scale, uncapped_dimension)

DEDUP_TOL = 1e-7


@dataclass(frozen=True)
class BetheRoots:
    roots: Tuple[complex, ...]
    residual: float = 0.0

    def __len__(self):
        return len(self.roots)

    def q_coefficients(self) -> np.ndarray:
        """Coefficients of prod (x - w_j), highest power first."""
        return np.poly(np.array(self.roots, dtype=complex)) if self.roots else np.array([1.0 + 0j])


def _as_complex(seq):
    return np.array([complex(x) for x in seq], dtype=complex)


def bae_residual(w, t, lam) -> np.ndarray:
    w, t, lam = np.asarray(w, complex), np.asarray(t, complex), np.asarray(lam, complex)
    n = len(w)
    out = (lam[None, :] / (w[:, None] - t[None, :])).sum(axis=1)
    if n > 1:
        out = out - _pair_inverse(w, 1).sum(axis=1) * 2
    return out


def _pair_inverse(w, power):
    # matrix of 1/(w_j - w_s)^power with zero diagonal
    d = w[:, None] - w[None, :]
    np.fill_diagonal(d, 1.0)
    inv = 1.0 / d ** power
    np.fill_diagonal(inv, 0.0)
    return inv


def _jac(w, t, lam):
    # dF_j/dw_j = -sum lam_i/(w_j-t_i)^2 + sum_s 2/(w_j-w_s)^2 ; dF_j/dw_s = -2/(w_j-w_s)^2
    n = len(w)
    inv2 = _pair_inverse(w, 2)
    diag = -(lam[None, :] / (w[:, None] - t[None, :]) ** 2).sum(axis=1) + 2 * inv2.sum(axis=1)
    J = -2 * inv2
    J[np.arange(n), np.arange(n)] = diag
    return J


def newton(w0, t, lam, tol=1e-12, maxiter=60, damping=True):
    """Damped Newton on the BAE. Returns (w, residual norm, converged)."""
    w = np.array(w0, dtype=complex)
    t, lam = _as_complex(t), _as_complex(lam)
    scale = max(1.0, float(np.abs(lam).sum()))
    F = bae_residual(w, t, lam)
    norm = float(np.linalg.norm(F))
    for _ in range(maxiter):
        if norm < tol * scale:
            return w, norm, True
        try:
            step = np.linalg.solve(_jac(w, t, lam), -F)
        except np.linalg.LinAlgError:
            return w, norm, False
        if not np.all(np.isfinite(step)):
            return w, norm, False
        alpha = 1.0
        while True:
            trial = w + alpha * step
            Ft = bae_residual(trial, t, lam)
            nt = float(np.linalg.norm(Ft))
            if np.isfinite(nt) and (nt < norm or not damping):
                break
            alpha /= 2
            if alpha < 1e-6:
                return w, norm, False
        w, F, norm = trial, Ft, nt
    return w, norm, norm < tol * scale


# ---------------------------------------------------------------------------
# start system: negative weights on real points


def _interval_start(t_sorted, alpha, counts):
    """Unique critical point with counts[k] roots in the k-th gap (alpha > 0 charges)."""
    w = []
    for k, c in enumerate(counts):
        a, b = t_sorted[k], t_sorted[k + 1]
        w.extend(a + (b - a) * (np.arange(1, c + 1) / (c + 1)))
    w = np.array(w, dtype=float)
    bounds = np.repeat(np.arange(len(counts)), counts)
    lo, hi = t_sorted[bounds], t_sorted[bounds + 1]
    lam = -2 * alpha

    def energy(x):
        if np.any(x <= lo) or np.any(x >= hi):
            return np.inf
        e = -np.sum(alpha[None, :] * np.log(np.abs(x[:, None] - t_sorted[None, :])))
        d = np.abs(x[:, None] - x[None, :])
        iu = np.triu_indices(len(x), 1)
        if np.any(d[iu] == 0):
            return np.inf
        return e - np.sum(np.log(d[iu]))

    E = energy(w)
    for _ in range(200):
        g = bae_residual(w, t_sorted, lam).real / 2
        H = _jac(w.astype(complex), t_sorted.astype(complex), lam.astype(complex)).real / 2
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step = -g
        if np.dot(step, g) > 0:
            step = -g
        alpha_ls = 1.0
        while alpha_ls > 1e-12:
            trial = w + alpha_ls * step
            Et = energy(trial)
            if Et <= E:
                break
            alpha_ls /= 2
        else:
            break
        w, E = trial, Et
        if np.linalg.norm(g) < 1e-14:
            break
    return w


def _compositions(n, k):
    for cut in itertools.combinations(range(n + k - 1), k - 1):
        parts, prev = [], -1
        for c in cut + (n + k - 1,):
            parts.append(c - prev - 1)
            prev = c
        yield tuple(parts)


def start_solutions(t_real: Sequence[float], alpha: Sequence[float], n: int):
    """All BAE solutions for real points and negative weights lam = -2 alpha."""
    order = np.argsort(t_real)
    ts = np.asarray(t_real, float)[order]
    al = np.asarray(alpha, float)[order]
    sols = []
    for counts in _compositions(n, len(ts) - 1):
        sols.append(_interval_start(ts, al, counts))
    return sols


# ---------------------------------------------------------------------------
# path tracking


@dataclass
class PathResult:
    w: np.ndarray
    status: str  # "ok", "escaped", "collision", "stalled"


def track(w0, t_path, lam_path, dt_path, dlam_path, min_step=1e-9, max_abs=1e7):
    """Follow a solution of F(w; s) = 0 from s = 0 to s = 1."""
    w = np.array(w0, dtype=complex)
    s, h = 0.0, 0.02
    while s < 1.0:
        h = min(h, 1.0 - s)
        t, lam = t_path(s), lam_path(s)
        J = _jac(w, t, lam)
        dF = (dlam_path(s)[None, :] / (w[:, None] - t[None, :])).sum(axis=1) \
            + (lam[None, :] * dt_path(s)[None, :] / (w[:, None] - t[None, :]) ** 2).sum(axis=1)
        try:
            dw = np.linalg.solve(J, -dF)
        except np.linalg.LinAlgError:
            return PathResult(w, "stalled")
        s1 = s + h
        t1, lam1 = t_path(s1), lam_path(s1)
        trial = w + h * dw
        ok = False
        size = max(1.0, float(np.abs(w).max()))
        for _ in range(6):
            F = bae_residual(trial, t1, lam1)
            try:
                corr = np.linalg.solve(_jac(trial, t1, lam1), -F)
            except np.linalg.LinAlgError:
                break
            trial = trial + corr
            if not np.all(np.isfinite(trial)):
                break
            if np.linalg.norm(corr) < 1e-10 * size:
                ok = True
                break
        if ok and np.linalg.norm(trial - w - h * dw) < 0.1 * size:
            w, s = trial, s1
            h *= 1.6
            if np.abs(w).max() > max_abs:
                return PathResult(w, "escaped")
        else:
            h /= 2
            if h < min_step:
                dmin = np.abs(w[:, None] - t[None, :]).min()
                if np.abs(w).max() > 1e3 * max(1.0, float(np.abs(t).max())):
                    return PathResult(w, "escaped")
                return PathResult(w, "collision" if dmin < 1e-3 else "stalled")
    return PathResult(w, "ok")


def _canonical(w):
    return np.array(sorted(w, key=lambda z: (round(z.real, 7), round(z.imag, 7))))


def _is_admissible(w, t, tol):
    if len(w) == 0:
        return True
    if np.abs(w[:, None] - t[None, :]).min() < tol:
        return False
    if len(w) > 1:
        d = np.abs(w[:, None] - w[None, :])
        np.fill_diagonal(d, np.inf)
        if d.min() < tol:
            return False
    return True


def _dedup(solutions):
    out = []
    for w in solutions:
        c = np.poly(w)
        scale = max(1.0, float(np.abs(c).max()))
        if not any(np.abs(c - np.poly(v)).max() < DEDUP_TOL * scale for v in out):
            out.append(w)
    return out


def expected_count(config: GaudinConfig) -> Optional[int]:
    """Number of admissible solutions guaranteed for generic points, if known."""
    fw = config.finite_weights
    if config.dominant_integral():
        return build_sector(config, capped=True).dim
    if config.real_points() and all(complex(w).imag == 0 and complex(w).real < 0 for w in fw):
        return uncapped_dimension(config.m, config.n)
    return None


def solve_bae(config: GaudinConfig, tol: float = 1e-10, seeds: int = 0, rng_seed: int = 0,
              strict: bool = True) -> List[BetheRoots]:
    """All admissible solutions found by homotopy plus multistart Newton."""
    n = config.n
    t = _as_complex(config.points)
    lam = _as_complex(config.finite_weights)
    if n == 0:
        return [BetheRoots(())]
    rng = np.random.default_rng(rng_seed)
    tol_adm = 1e-6 * max(1.0, float(np.abs(t).max()))
    exp = expected_count(config)
    found: List[np.ndarray] = []

    def absorb(candidates):
        nonlocal found
        for w in candidates:
            w, _, conv = newton(w, t, lam, tol=tol, maxiter=30)
            if conv and _is_admissible(w, t, tol_adm):
                found.append(_canonical(w))
        found = _dedup(found)

    if n == 1:
        # sum_i lam_i prod_{k != i} (w - t_k) = 0
        poly = np.zeros(len(t), dtype=complex)
        for i in range(len(t)):
            poly = poly + lam[i] * np.poly(np.delete(t, i))
        nz = np.flatnonzero(np.abs(poly) > 1e-14 * np.abs(poly).max())
        roots = np.roots(poly[nz[0]:]) if len(nz) else np.array([])
        absorb(np.array([r]) for r in roots)
    else:
        # repeat the homotopy with fresh detours while solutions are missing
        for attempt in range(4):
            absorb(_homotopy(t, lam, n, rng))
            if exp is None and attempt >= 1 or exp is not None and len(found) >= exp:
                break
        span = max(1.0, float(np.abs(t - t.mean()).max()))
        seeded = []
        for _ in range(seeds):
            w0 = t.mean() + span * (rng.normal(size=n) + 1j * rng.normal(size=n))
            w, _, conv = newton(w0, t, lam, tol=tol, maxiter=100)
            if conv:
                seeded.append(w)
        absorb(seeded)
    result = [BetheRoots(tuple(complex(z) for z in w),
                         float(np.linalg.norm(bae_residual(w, t, lam)))) for w in found]
    result.sort(key=lambda b: tuple(v for z in b.roots for v in (round(z.real, 9), round(z.imag, 9))))
    if strict and exp is not None and len(result) < exp:
        raise Incomplete(len(result), exp, result)
    return result


def _homotopy(t, lam, n, rng):
    m1 = len(t)
    real_t = bool(np.all(np.abs(t.imag) < 1e-14))
    t_start = np.sort(t.real) if real_t else np.arange(m1, dtype=float)
    order = np.argsort(t.real) if real_t else np.arange(m1)
    alpha = np.full(m1, 0.5)
    lam_start = (-2 * alpha).astype(complex)
    starts = start_solutions(t_start, alpha, n)
    # targets in the same ordering as t_start
    t_target = t[order]
    lam_target = lam[order]
    detour_l = 1j * (0.5 + rng.random(m1)) * np.sign(rng.normal(size=m1))
    detour_t = 0.5j * rng.normal(size=m1) if not real_t else np.zeros(m1)

    def lam_path(s):
        return lam_start + s * (lam_target - lam_start) + s * (1 - s) * detour_l

    def dlam_path(s):
        return (lam_target - lam_start) + (1 - 2 * s) * detour_l

    def t_path(s):
        return t_start + s * (t_target - t_start) + s * (1 - s) * detour_t

    def dt_path(s):
        return (t_target - t_start) + (1 - 2 * s) * detour_t

    out = []
    for w0 in starts:
        res = track(w0.astype(complex), t_path, lam_path, dt_path, dlam_path)
        if res.status == "ok":
            out.append(res.w)
    return out


# ---------------------------------------------------------------------------


def bethe_eigenvalues(w: BetheRoots, config: GaudinConfig) -> Tuple[complex, ...]:
    """mu_i = lam_i (sum_{k != i} lam_k / 2(t_i - t_k) - sum_j 1/(t_i - w_j))."""
    t, lam = config.points, config.finite_weights
    out = []
    for i in range(len(t)):
        acc = sum((lam[k] / (2 * (t[i] - t[k])) for k in range(len(t)) if k != i), 0)
        acc -= sum((1 / (t[i] - wj) for wj in w.roots), 0)
        out.append(complex(lam[i] * acc))
    return tuple(out)


def bethe_polynomial(w: BetheRoots, config: GaudinConfig, order: Optional[Sequence[int]] = None) -> Poly:
    """f(w_1)...f(w_n) applied to 1, with f(w) = sum_i f_i/(w - t_i)."""
    t, lam = config.points, config.finite_weights
    p: Poly = {(0,) * len(t): 1}
    roots = list(w.roots) if order is None else [w.roots[k] for k in order]
    for wj in reversed(roots):
        nxt: Poly = {}
        for i in range(len(t)):
            nxt = poly_add(nxt, poly_scale(apply_f(p, i, lam[i]), 1 / (wj - t[i])))
        p = nxt
    return p


def bethe_vector(w: BetheRoots, config: GaudinConfig, sector: WeightSector, tol: float = 1e-9):
    p = bethe_polynomial(w, config)
    size = max([abs(complex(v)) for v in p.values()] + [0.0])
    if size < 1e-12:
        raise ZeroVector("Bethe vector vanishes")
    vec = np.array([complex(v) for v in sector.coords(p, check=True, tol=tol)], dtype=complex)
    if np.linalg.norm(vec) < 1e-12 * size:
        raise ZeroVector("Bethe vector has no component in the sector")
    return vec
