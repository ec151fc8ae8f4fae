"""Quadratic Gaudin Hamiltonians on the weight sector and their joint spectrum."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .errors import NonDiagonalizable
from .repspace import (GaudinConfig, Poly, WeightSector, poly_add, poly_diff, poly_mul_diff,
                       poly_scale)


def vacuum_eigenvalues(config: GaudinConfig):
    """mu_i^0 = sum_{j != i} lam_i lam_j / 2(t_i - t_j): action on the constant 1."""
    t, lam = config.points, config.finite_weights
    out = []
    for i in range(len(t)):
        out.append(sum((lam[i] * lam[j] / (2 * (t[i] - t[j])) for j in range(len(t)) if j != i), 0))
    return tuple(out)


def apply_gaudin(p: Poly, i: int, config: GaudinConfig, shifted: bool = False) -> Poly:
    t, lam = config.points, config.finite_weights
    out: Poly = {}
    for j in range(len(t)):
        if j == i:
            continue
        inv = 1 / (t[i] - t[j])
        dij = poly_diff(poly_diff(p, i), j)
        term = poly_scale(poly_mul_diff(poly_mul_diff(dij, i, j), i, j), -1)
        mixed = poly_add(poly_scale(poly_diff(p, j), lam[i]), poly_diff(p, i), -lam[j])
        term = poly_add(term, poly_mul_diff(mixed, i, j))
        if not shifted:
            term = poly_add(term, poly_scale(p, lam[i] * lam[j] / 2))
        out = poly_add(out, poly_scale(term, inv))
    return out


def _zeros(dim: int, exact: bool):
    if exact:
        mat = np.empty((dim, dim), dtype=object)
        mat[:] = Fraction(0)
        return mat
    return np.zeros((dim, dim), dtype=complex)


@dataclass
class GaudinMatrices:
    config: GaudinConfig
    sector: WeightSector
    G: List[np.ndarray]
    Ghat: List[np.ndarray]
    exact: bool

    @property
    def dim(self) -> int:
        return self.sector.dim

    def numeric(self, which: str = "G") -> List[np.ndarray]:
        mats = self.G if which == "G" else self.Ghat
        return [np.asarray(mat, dtype=complex) for mat in mats]

    def max_commutator(self) -> float:
        G = self.numeric()
        worst = 0.0
        for a in range(len(G)):
            for b in range(a + 1, len(G)):
                worst = max(worst, float(np.abs(G[a] @ G[b] - G[b] @ G[a]).max(initial=0.0)))
        return worst

    def sum_identities(self):
        """Returns (sum G_i, sum t_i Ghat_i - n(n - lam - 1) Id) as arrays."""
        cfg = self.config
        n, lam = cfg.n, sum(cfg.finite_weights)
        total = sum(self.G[1:], self.G[0].copy())
        weighted = sum((t * g for t, g in zip(cfg.points[1:], self.Ghat[1:])), cfg.points[0] * self.Ghat[0])
        shift = n * (n - lam - 1)
        weighted = weighted - shift * np.eye(self.dim, dtype=int)
        return total, weighted


def gaudin_matrices(config: GaudinConfig, sector: WeightSector) -> GaudinMatrices:
    exact = config.exact
    G, Ghat = [], []
    vac = vacuum_eigenvalues(config)
    for i in range(config.m + 1):
        mat = _zeros(sector.dim, exact)
        for c, b in enumerate(sector.basis):
            vec = sector.coords(apply_gaudin(b, i, config))
            for r, v in enumerate(vec):
                mat[r, c] = v
        G.append(mat)
        Ghat.append(mat - vac[i] * np.eye(sector.dim, dtype=int))
    return GaudinMatrices(config, sector, G, Ghat, exact)


# ---------------------------------------------------------------------------


@dataclass
class JointSpectrum:
    eigenvalues: List[Tuple[complex, ...]]
    eigenvectors: np.ndarray  # columns
    multiplicities: List[int]
    residuals: List[float]
    min_gap: float

    def __len__(self):
        return len(self.eigenvalues)


def _sort_key(mu):
    return tuple(v for z in mu for v in (round(z.real, 9), round(z.imag, 9)))


def _cluster(values, tol):
    """Group indices of values closer than tol (single linkage)."""
    order = sorted(range(len(values)), key=lambda k: (values[k].real, values[k].imag))
    groups: List[List[int]] = []
    for k in order:
        for g in groups:
            if any(abs(values[k] - values[j]) <= tol for j in g):
                g.append(k)
                break
        else:
            groups.append([k])
    return groups


def _diagonalize_once(G, coeffs, tol):
    dim = G[0].shape[0]
    C = sum(c * g for c, g in zip(coeffs, G))
    scale = max(1.0, float(np.linalg.norm(C, 2)))
    vals, vecs = np.linalg.eig(C)
    groups = _cluster(list(vals), 1e-8 * scale)
    jordan = []
    columns, tuples, mults, residuals = [], [], [], []
    for g in groups:
        lam = np.mean(vals[g])
        rank = np.linalg.matrix_rank(C - lam * np.eye(dim), tol=max(1e-7 * scale, 1e3 * tol * scale))
        geo = dim - rank
        if geo < len(g):
            jordan.append((complex(lam), len(g), geo))
            continue
        if len(g) == 1:
            sub = vecs[:, g]
        else:
            # orthonormal basis of the eigenspace, split with the remaining operators
            _, _, vh = np.linalg.svd(C - lam * np.eye(dim))
            sub = vh[-len(g):].conj().T
            # split the eigenspace with the remaining operators
            proj = [np.linalg.pinv(sub) @ gm @ sub for gm in G]
            rng = np.random.default_rng(len(g))
            Cs = sum(rng.normal() * p for p in proj)
            _, w = np.linalg.eig(Cs)
            sub = sub @ w
        for col in sub.T:
            col = col / np.linalg.norm(col)
            mu = tuple(complex(np.vdot(col, gm @ col)) for gm in G)
            res = max(float(np.linalg.norm(gm @ col - mu_i * col)) for gm, mu_i in zip(G, mu))
            columns.append(col)
            tuples.append(mu)
            residuals.append(res)
        mults.extend([len(g)] * len(g))
    return jordan, columns, tuples, mults, residuals


def joint_diagonalize(mats: GaudinMatrices, tol: float = 1e-8, seed: int = 0,
                      draws: int = 3) -> JointSpectrum:
    """Joint eigen-decomposition of the commuting family G_0..G_m.

    Each draw diagonalizes a random real combination of the G_i; draws are
    cross-validated and the best conditioned one is returned.
    """
    G = mats.numeric()
    dim = mats.dim
    if dim == 0:
        return JointSpectrum([], np.zeros((0, 0), complex), [], [], float("inf"))
    rng = np.random.default_rng(seed)
    scale = max(1.0, max(float(np.abs(g).max(initial=0.0)) for g in G))
    results = []
    attempts = 0
    while len(results) < draws and attempts < 4 * draws:
        attempts += 1
        coeffs = rng.normal(size=len(G))
        jordan, cols, tuples, mults, res = _diagonalize_once(G, coeffs, tol)
        if jordan:
            raise NonDiagonalizable(
                "Jordan block in the Gaudin family: (eigenvalue, algebraic, geometric) = "
                + ", ".join(f"({lam:.6g}, {a}, {g})" for lam, a, g in jordan), jordan)
        # a draw whose combination nearly merges two joint eigenvalues is discarded
        if max(res) <= 1e-6 * scale:
            results.append((cols, tuples, mults, res))
    if not results:
        raise NonDiagonalizable("no random combination produced accurate joint eigenvectors")
    reference = sorted(results[0][1], key=_sort_key)
    for _, tuples, _, _ in results[1:]:
        other = sorted(tuples, key=_sort_key)
        if _set_distance(reference, other) > 1e-6 * scale:
            raise NonDiagonalizable("random combinations disagree on the joint spectrum")
    cols, tuples, mults, res = min(results, key=lambda r: np.linalg.cond(np.array(r[0]).T))
    order = sorted(range(len(tuples)), key=lambda k: _sort_key(tuples[k]))
    eigvals = [tuples[k] for k in order]
    vecs = np.array([cols[k] for k in order]).T
    gaps = [max(abs(a - b) for a, b in zip(eigvals[p], eigvals[q]))
            for p in range(len(eigvals)) for q in range(p + 1, len(eigvals))]
    return JointSpectrum(eigvals, vecs, [mults[k] for k in order], [res[k] for k in order],
                         min(gaps) if gaps else float("inf"))


def _set_distance(a, b) -> float:
    """Greedy matching distance between two lists of tuples."""
    if len(a) != len(b):
        return float("inf")
    remaining = list(b)
    worst = 0.0
    for mu in a:
        dists = [max(abs(x - y) for x, y in zip(mu, nu)) for nu in remaining]
        k = int(np.argmin(dists))
        worst = max(worst, dists[k])
        remaining.pop(k)
    return worst


def match_spectra(a, b) -> float:
    """Max deviation between two collections of mu-tuples, matched as sets."""
    return _set_distance(list(a), list(b))
