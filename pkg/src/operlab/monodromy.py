"""Monodromy of psi'' = v(x) psi by numerical transport, and its classification.

Solution data are columns (psi, psi').  Transport along a path maps the data
at its start to the data at its end; continuing along g1 and then g2 gives
T(g2) T(g1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import Ambiguous, SingularityTooClose, StepFailure
from .oper import Oper

DEFAULT_TOL = 1e-10


class _Potential:
    def __init__(self, op: Oper):
        self.t = np.array([complex(p) for p in op.points])
        self.a = np.array([complex(op.double_pole(i)) for i in range(len(op.points))])
        self.mu = np.array([complex(x) for x in op.mu])

    def __call__(self, z: complex) -> complex:
        r = 1.0 / (z - self.t)
        return complex(np.dot(self.a, r * r) + np.dot(self.mu, r))


def _check_margin(t, points, margin):
    if margin <= 0:
        return
    for z in points:
        d = np.abs(np.asarray(t) - z).min()
        if d < margin:
            raise SingularityTooClose(f"path passes within {d:.3g} of a singular point (margin {margin})")


def _segment_distance(a, b, t):
    ab = b - a
    if ab == 0:
        return abs(t - a)
    s = ((t - a) * ab.conjugate()).real / abs(ab) ** 2
    s = min(1.0, max(0.0, s))
    return abs(a + s * ab - t)


def _integrate(rhs, y0, tol):
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=tol, atol=tol * 1e-2)
    if not sol.success:
        raise StepFailure(sol.message)
    return sol.y[:, -1]


def transport_segment(pot: _Potential, a: complex, b: complex, Y: np.ndarray, tol: float) -> np.ndarray:
    d = b - a

    def rhs(tau, y):
        z = a + tau * d
        v = pot(z)
        return np.array([d * y[2], d * y[3], d * v * y[0], d * v * y[1]])

    return _integrate(rhs, Y.reshape(-1).astype(complex), tol).reshape(2, 2)


def transport_arc(pot: _Potential, center: complex, radius: float, theta0: float, theta1: float,
                  Y: np.ndarray, tol: float) -> np.ndarray:
    span = theta1 - theta0
    # split long arcs so each piece is well resolved
    pieces = max(1, int(math.ceil(abs(span) / (math.pi / 2))))
    for k in range(pieces):
        th_a = theta0 + span * k / pieces
        th_b = theta0 + span * (k + 1) / pieces
        dth = th_b - th_a

        def rhs(tau, y, th_a=th_a, dth=dth):
            e = cmath.exp(1j * (th_a + tau * dth))
            z = center + radius * e
            dz = 1j * radius * e * dth
            v = pot(z)
            return np.array([dz * y[2], dz * y[3], dz * v * y[0], dz * v * y[1]])

        Y = _integrate(rhs, Y.reshape(-1).astype(complex), tol).reshape(2, 2)
    return Y


def transport(op: Oper, path: Sequence[complex], tol: float = DEFAULT_TOL, margin: float = 1e-6) -> np.ndarray:
    """Transfer matrix of (psi, psi') along a polyline."""
    pot = _Potential(op)
    path = [complex(z) for z in path]
    for a, b in zip(path, path[1:]):
        d = min((_segment_distance(a, b, t) for t in pot.t), default=np.inf)
        if d < margin:
            raise SingularityTooClose(f"segment {a}->{b} passes within {d:.3g} of a singular point")
    Y = np.eye(2, dtype=complex)
    for a, b in zip(path, path[1:]):
        Y = transport_segment(pot, a, b, Y, tol)
    return Y


# ---------------------------------------------------------------------------


@dataclass
class MonodromyData:
    basepoint: complex
    radius: float
    generators: List[np.ndarray]
    infinity: np.ndarray
    loop_order: List[int]
    raw_determinants: List[complex]
    classification: Optional["Classification"] = None
    # C_i in the frame at the entry point of loop i; conjugate to generators[i]
    local: List[np.ndarray] = field(default_factory=list)
    # eigenvector columns of C_i in the same frame
    local_eigen: List[np.ndarray] = field(default_factory=list)
    # links[k]: transport from the entry of loop loop_order[k] to that of loop_order[k+1]
    links: List[np.ndarray] = field(default_factory=list)

    def pi1_product(self) -> np.ndarray:
        """M_inf M_{k_last} ... M_{k_first}; the identity for a consistent computation."""
        prod = np.eye(2, dtype=complex)
        for k in self.loop_order:
            prod = self.generators[k] @ prod
        return self.infinity @ prod

    def pi1_residual(self) -> float:
        return float(np.abs(self.pi1_product() - np.eye(2)).max())

    def conjugated(self, S: np.ndarray) -> "MonodromyData":
        Si = np.linalg.inv(S)
        return MonodromyData(self.basepoint, self.radius, [S @ g @ Si for g in self.generators],
                             S @ self.infinity @ Si, list(self.loop_order), list(self.raw_determinants),
                             local=list(self.local), local_eigen=list(self.local_eigen), links=list(self.links))

    def local_deviation(self) -> List[float]:
        """||C_i -+ Id|| in each loop's own frame.

        The leg from the basepoint can have condition number ~1e10 for large
        weights, which swamps the basepoint-frame deviation; scalarity is
        conjugation invariant, so it is judged here.
        """
        mats = self.local or self.generators
        return [scalar_deviation(g) for g in mats]


def default_geometry(points: Sequence[complex]):
    t = np.array([complex(p) for p in points])
    c = t.mean()
    diam = max([abs(a - b) for a in t for b in t] + [0.0])
    if diam == 0:
        diam = 1.0
    gaps = [abs(a - b) for i, a in enumerate(t) for b in t[i + 1:]]
    radius = 0.25 * (min(gaps) if gaps else 1.0)
    return c + 1j * diam, radius


def _sl2(M):
    d = np.linalg.det(M)
    return M / np.sqrt(d), d


def eigen_directions(M: np.ndarray, parabolic_tol: float = 1e-6) -> np.ndarray:
    """Unit eigenvector columns of a 2x2 matrix.

    Near a Jordan block eig() loses half the digits; there the single
    eigenvector is read from the range of M - (tr/2) Id instead.
    """
    half = np.trace(M) / 2
    N = M - half * np.eye(2)
    scale = max(1.0, float(np.abs(M).max()))
    if abs(np.linalg.det(N)) < parabolic_tol * scale ** 2 and np.abs(N).max() > parabolic_tol * scale:
        k = int(np.argmax(np.linalg.norm(N, axis=0)))
        v = N[:, k]
        return (v / np.linalg.norm(v)).reshape(2, 1)
    _, vecs = np.linalg.eig(M)
    return vecs / np.linalg.norm(vecs, axis=0)


def _link(pot, a, z, b, t, r, tol):
    """Transport between two entry points; direct if clear, else a lifted detour, else via b."""
    I = np.eye(2, dtype=complex)
    up = (z - a) * 1j / 2
    for path in ([a, z], [a, (a + z) / 2 + up, z], [a, (a + z) / 2 - up, z]):
        if all(_segment_distance(p, q, tk) >= r / 2 for p, q in zip(path, path[1:]) for tk in t):
            Y = I
            for p, q in zip(path, path[1:]):
                Y = transport_segment(pot, p, q, Y, tol)
            return Y
    return transport_segment(pot, b, z, I, tol) @ np.linalg.inv(transport_segment(pot, b, a, I, tol))


def monodromy_generators(op: Oper, basepoint: Optional[complex] = None, radius: Optional[float] = None,
                         tol: float = DEFAULT_TOL) -> MonodromyData:
    """Loops: straight to a circle around t_i, once counterclockwise, straight back.

    The way back is not integrated: with P the leg and C the circle,
    the generator is P^-1 C P.
    """
    pot = _Potential(op)
    t = pot.t
    b0, r0 = default_geometry(t)
    b = b0 if basepoint is None else complex(basepoint)
    r = r0 if radius is None else float(radius)
    _check_margin(t, [b], 2 * r)
    gens, dets, local, eig_local, entries = [], [], [], [], []
    for i, ti in enumerate(t):
        u = (b - ti) / abs(b - ti)
        entry = ti + r * u
        for k, tk in enumerate(t):
            if k != i and _segment_distance(b, entry, tk) < r:
                raise SingularityTooClose(f"approach to t{i} passes near t{k}; choose another basepoint")
        th = cmath.phase(u)
        P = transport_segment(pot, b, entry, np.eye(2, dtype=complex), tol)
        C = transport_arc(pot, ti, r, th, th + 2 * math.pi, np.eye(2, dtype=complex), tol)
        # det(P^-1 C P) = det C exactly; the product itself can be ~1e11 and cancel
        Cn, d = _sl2(C)
        gens.append(np.linalg.solve(P, Cn @ P))
        local.append(Cn)
        dets.append(complex(d))
        eig_local.append(eigen_directions(Cn))
        entries.append(entry)
    c = t.mean()
    R = abs(b - c)
    if np.abs(t - c).max() >= R:
        raise SingularityTooClose("basepoint does not lie outside all marked points")
    th = cmath.phase(b - c)
    Y = transport_arc(pot, c, R, th, th - 2 * math.pi, np.eye(2, dtype=complex), tol)
    Minf, d = _sl2(Y)
    dets.append(complex(d))
    order = sorted(range(len(t)), key=lambda k: cmath.phase(t[k] - b))
    links = []
    for i, j in zip(order, order[1:]):
        links.append(_link(pot, entries[i], entries[j], b, t, r, tol))
    return MonodromyData(b, r, gens, Minf, order, dets, local=local, local_eigen=eig_local, links=links)


# ---------------------------------------------------------------------------
# classification


@dataclass
class Classification:
    trivial_pgl2: bool
    unipotent: List[bool]
    scalar: List[bool]
    solvable: bool
    real_form: bool
    signature: Optional[Tuple[int, int]]
    generic: bool
    margins: Dict[str, float]
    ambiguous: List[str] = field(default_factory=list)

    def flags(self) -> Dict[str, object]:
        return {"trivial_pgl2": self.trivial_pgl2, "unipotent": list(self.unipotent),
                "solvable": self.solvable, "real_form": self.real_form,
                "signature": None if self.signature is None else list(self.signature),
                "generic": self.generic}


def scalar_deviation(M: np.ndarray) -> float:
    """min over signs of ||M -+ Id|| (max-entry norm)."""
    I = np.eye(2)
    return float(min(np.abs(M - I).max(), np.abs(M + I).max()))


def common_eigenvector_margin(gens: Sequence[np.ndarray]) -> float:
    """Smallest singular value of the stacked (M_j - rho_j Id) over eigenvector candidates."""
    nontrivial = [g for g in gens if scalar_deviation(g) > 1e-12]
    if not nontrivial:
        return 0.0
    best = np.inf
    for g in nontrivial:
        _, vecs = np.linalg.eig(g)
        for v in vecs.T:
            v = v / np.linalg.norm(v)
            blocks = []
            for M in gens:
                rho = np.vdot(v, M @ v)
                blocks.append((M - rho * np.eye(2)) / max(1.0, np.abs(M).max()))
            S = np.vstack(blocks)
            smin = np.linalg.svd(S, compute_uv=False)[-1]
            # the candidate itself: residual of v as a common eigenvector
            best = min(best, float(np.linalg.norm(S @ v)), float(smin))
    return best


def _sine(u, v):
    c = abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.sqrt(max(0.0, 1.0 - c * c))


def chained_eigen_margin(mono: MonodromyData, scalar_tol: float) -> float:
    """Common-eigenvector test between neighbouring loops, in the local frames.

    Eigenvectors of consecutive non-scalar loops are compared after transport
    between their entry points, in both directions; the better of the two is
    kept, since one direction is always the numerically stable one.  The
    margin is the worst link along the best consistent chain of choices.
    """
    dev = mono.local_deviation()
    chain, T = [], None
    for k, i in enumerate(mono.loop_order):
        if dev[i] > scalar_tol:
            chain.append((i, T))
            T = None
        if k < len(mono.links):
            T = mono.links[k] if T is None else mono.links[k] @ T
    if len(chain) < 2:
        return 0.0

    def link(u, Tij, v):
        return min(_sine(Tij @ u, v), _sine(np.linalg.solve(Tij, v), u))

    best = np.inf
    for start in mono.local_eigen[chain[0][0]].T:
        cur, worst = start, 0.0
        for i, Tij in chain[1:]:
            score, cur = min(((link(cur, Tij, v), k) for k, v in enumerate(mono.local_eigen[i].T)),
                             key=lambda p: p[0])
            cur = mono.local_eigen[i][:, cur]
            worst = max(worst, score)
        best = min(best, worst)
    return float(best)


def invariant_hermitian_forms(gens: Sequence[np.ndarray]):
    """Singular values and null vectors of h -> (M^* h M - h)_j on Hermitian 2x2 h."""
    basis = [np.array([[1, 0], [0, 0]], complex), np.array([[0, 0], [0, 1]], complex),
             np.array([[0, 1], [1, 0]], complex), np.array([[0, 1j], [-1j, 0]], complex)]
    cols = []
    for h in basis:
        blocks = [(M.conj().T @ h @ M - h) / max(1.0, np.abs(M).max() ** 2) for M in gens]
        flat = np.concatenate([b.reshape(-1) for b in blocks]) if blocks else np.zeros(0, complex)
        cols.append(np.concatenate([flat.real, flat.imag]))
    L = np.array(cols).T
    if L.size == 0:
        return np.zeros(4), np.eye(4), basis
    _, s, vh = np.linalg.svd(L)
    s = np.concatenate([s, np.zeros(4 - len(s))])
    return s, vh, basis


def classify(mono: MonodromyData, tol: float = 1e-6, strict: bool = True) -> Classification:
    gens = mono.generators
    dev = mono.local_deviation()
    scalar = [d < tol for d in dev]
    tr = [complex(np.trace(g)) for g in gens]
    unip = [not s and min(abs(x - 2), abs(x + 2)) < tol for s, x in zip(scalar, tr)]
    trivial = all(scalar)
    if trivial:
        solv_margin = 0.0
    elif mono.links:
        solv_margin = chained_eigen_margin(mono, tol)
    else:
        solv_margin = common_eigenvector_margin(gens)
    solvable = solv_margin < tol
    # +-Id preserves every Hermitian form, so there is nothing to test
    s, vh, basis = invariant_hermitian_forms(gens)
    real_margin = 0.0 if trivial else float(s[-1])
    real_form = real_margin < tol
    signature = None
    if real_form and not trivial:
        null_dim = int(np.sum(s < tol))
        coeffs = vh[-null_dim:]
        rng = np.random.default_rng(0)
        combo = rng.normal(size=null_dim) @ coeffs if null_dim > 1 else coeffs[0]
        h = sum(c * b for c, b in zip(combo, basis))
        ev = np.linalg.eigvalsh(h)
        if np.abs(ev).min() < tol * np.abs(ev).max():
            real_form = False
        else:
            pos, neg = int(np.sum(ev > 0)), int(np.sum(ev < 0))
            signature = (max(pos, neg), min(pos, neg))
    margins = {"scalar": max(dev) if dev else 0.0, "solvable": solv_margin, "real_form": real_margin}
    ambiguous = []
    for name, value in (("trivial_pgl2", margins["scalar"]), ("solvable", solv_margin),
                        ("real_form", real_margin)):
        if tol / 10 < value < tol * 10:
            ambiguous.append(name)
    cls = Classification(trivial, unip, scalar, solvable, real_form, signature,
                         not (trivial or solvable or real_form), margins, ambiguous)
    if strict and ambiguous:
        raise Ambiguous(f"margins within a decade of tol={tol}: {ambiguous}", cls)
    mono.classification = cls
    return cls
