"""Scenario runner: ``operlab <pipeline> --config file.toml [--out dir] [--seed n] [--jobs n]``.

Writes result.jsonl (one record per computed object) and, for hecke-scan,
grids/beta_<k>.csv.  Exit status: 0 ok, 2 configuration error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Dict, Iterable, List, Sequence

import numpy as np

from . import __version__
from .errors import InvalidConfig, OperlabError
from .scenario import PIPELINES, Scenario, load_scenario

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


# ---------------------------------------------------------------------------
# emission


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj) -> str:
    import json

    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, Rational) and not isinstance(obj, int):
        return json.dumps(str(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return '{"im":' + _fmt_float(obj.imag) + ',"re":' + _fmt_float(obj.real) + "}"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + _encode(obj[k]) for k in sorted(obj)) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps_record(record: Dict[str, Any]) -> str:
    """One JSON line; keys sorted, floats at 17 significant digits, complex as {im, re}."""
    return _encode(record)


def emit(records: Iterable[Dict[str, Any]], out_dir: str, name: str = "result.jsonl") -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps_record(rec) + "\n")
    return path


def write_grid(path: str, xs: Sequence[complex], values: Sequence[float]) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x_re,x_im,beta\n")
        for x, v in zip(xs, values):
            fh.write(f"{_fmt_float(x.real)},{_fmt_float(x.imag)},{_fmt_float(float(v))}\n")
    return path


# ---------------------------------------------------------------------------
# pipelines


def _pmap(fn: Callable, items: List, jobs: int) -> List:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def _sector(sc: Scenario):
    from .repspace import build_sector

    return build_sector(sc.config, capped=sc.capped)


def _solutions(sc: Scenario):
    from .bethe import solve_bae

    return solve_bae(sc.config, tol=sc.numeric.tol, rng_seed=sc.seed)


def _spectral_oper(sc: Scenario, w):
    from .bethe import bethe_eigenvalues
    from .oper import Oper

    return Oper(sc.config.points, sc.config.weights, bethe_eigenvalues(w, sc.config))


def run_spectrum(sc: Scenario, out: str) -> List[Dict]:
    from .gaudin import gaudin_matrices, joint_diagonalize

    mats = gaudin_matrices(sc.config, _sector(sc))
    spec = joint_diagonalize(mats, tol=sc.numeric.tol, seed=sc.seed)
    recs = [{"kind": "sector", "dim": mats.dim, "capped": sc.capped,
             "max_commutator": mats.max_commutator()}]
    for k, (mu, mult, res) in enumerate(zip(spec.eigenvalues, spec.multiplicities, spec.residuals)):
        recs.append({"kind": "eigenvalue", "index": k, "mu": list(mu), "multiplicity": mult, "residual": res})
    return recs


def run_bethe(sc: Scenario, out: str) -> List[Dict]:
    from .bethe import bae_residual, bethe_eigenvalues, expected_count

    sols = _solutions(sc)
    t = np.array([complex(p) for p in sc.config.points])
    lam = np.array([complex(w) for w in sc.config.finite_weights])
    recs = [{"kind": "count", "found": len(sols), "expected": expected_count(sc.config)}]
    for k, w in enumerate(sols):
        res = float(np.abs(bae_residual(np.array(w.roots, dtype=complex), t, lam)).max(initial=0.0))
        recs.append({"kind": "bethe", "index": k, "roots": list(w.roots),
                     "mu": list(bethe_eigenvalues(w, sc.config)), "residual": res})
    return recs


def run_oper_verify(sc: Scenario, out: str) -> List[Dict]:
    from .gaudin import gaudin_matrices, match_spectra
    from .oper import baxter_q, q_polynomial, universal_oper_residual

    recs = []
    for k, w in enumerate(_solutions(sc)):
        op = _spectral_oper(sc, w)
        q = q_polynomial(op)
        mismatch = match_spectra([(z,) for z in q.roots()], [(complex(z),) for z in w.roots]) if w.roots else 0.0
        r1, r2 = op.constraint_residuals()
        recs.append({"kind": "oper", "index": k, "mu": list(op.mu), "q_coefficients": [complex(c) for c in q.coeffs],
                     "recursion_residual": q.residual,
                     "root_mismatch": float(mismatch),
                     "constraints": [complex(r1), complex(r2)]})
    mats = gaudin_matrices(sc.config, _sector(sc))
    qop = baxter_q(sc.config, mats)
    G = mats.numeric()
    comm = max((float(np.abs(qop(x) @ g - g @ qop(x)).max(initial=0.0)) for x in sc.numeric.samples for g in G),
               default=0.0)
    recs.append({"kind": "baxter", "dim": mats.dim, "degree": qop.degree, "max_commutator": comm,
                 "universal_residual": universal_oper_residual(qop, mats, sc.numeric.samples)})
    return recs


def _monodromy_record(args):
    sc, k, w = args
    from .monodromy import classify, monodromy_generators, scalar_deviation

    op = _spectral_oper(sc, w)
    mono = monodromy_generators(op, tol=sc.numeric.ode_tol)
    cls = classify(mono, tol=sc.numeric.classify_tol, strict=False)
    return {"kind": "monodromy", "index": k, "mu": list(op.mu), "flags": cls.flags(), "margins": cls.margins,
            "ambiguous": list(cls.ambiguous), "pi1_residual": mono.pi1_residual(),
            "max_deviation": max((scalar_deviation(g) for g in mono.generators), default=0.0)}


def run_monodromy(sc: Scenario, out: str) -> List[Dict]:
    items = [(sc, k, w) for k, w in enumerate(_solutions(sc))]
    return _pmap(_monodromy_record, items, sc.jobs)


def run_balanced(sc: Scenario, out: str) -> List[Dict]:
    from .balanced import find_balanced_4pt

    b = sc.balanced
    hits = find_balanced_4pt(b.weights, b.points, b.scan, steps=b.steps, return_all=True)
    return [{"kind": "balanced", "mu0": h.mu0, "accepted": h.accepted, "a": list(h.data.a), "b": list(h.data.b),
             "product_residual": h.data.residual, "trace_defect": h.data.trace_defect} for h in hits]


def run_hecke(sc: Scenario, out: str) -> List[Dict]:
    from .hecke import QuaternionicBeta

    g = sc.grid
    re = np.linspace(g.re[0], g.re[1], int(g.re[2]))
    im = np.linspace(g.im[0], g.im[1], int(g.im[2]))
    X, Y = np.meshgrid(re, im)
    xs = (X + 1j * Y).ravel()
    recs = []
    for k, w in enumerate(_solutions(sc)):
        beta = QuaternionicBeta(sc.config.points, sc.config.finite_weights, w.q_coefficients())
        vals, _ = beta.evaluate(xs)
        path = write_grid(os.path.join(out, "grids", f"beta_{k}.csv"), xs, vals)
        recs.append({"kind": "beta", "index": k, "roots": list(w.roots), "x0": beta.x0,
                     "path_residual": beta.path_residual(xs), "grid": os.path.relpath(path, out),
                     "max_abs": float(np.abs(vals).max(initial=0.0))})
    return recs


def run_chiral(sc: Scenario, out: str) -> List[Dict]:
    from .hecke import chiral_factorization, chiral_setup

    ch = sc.chiral
    setup = chiral_setup(ch.points, ch.weights, ch.r)
    fac = chiral_factorization(setup)
    return [{"kind": "chiral", "n": setup.n, "r": setup.r, "dim": fac.sector.dim,
             "kappa": fac.kappa, "exact": fac.exact, "degenerate": fac.degenerate, "mismatches": fac.mismatches}]


RUNNERS = {"spectrum": run_spectrum, "bethe": run_bethe, "oper-verify": run_oper_verify,
           "monodromy": run_monodromy, "balanced-scan": run_balanced, "hecke-scan": run_hecke,
           "chiral-check": run_chiral}


def run(sc: Scenario, out: str) -> List[Dict]:
    records = RUNNERS[sc.kind](sc, out)
    header = {"kind": "scenario", "pipeline": sc.kind, "version": __version__, "knobs": sc.knobs()}
    return [header] + records


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="operlab", description="Gaudin model / oper numerical laboratory")
    p.add_argument("pipeline", choices=PIPELINES)
    p.add_argument("--config", required=True, help="scenario file (TOML)")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, default=None, help="overrides [scenario].seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.config, args.pipeline, args.seed, args.jobs)
    except InvalidConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        records = run(sc, args.out)
    except InvalidConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OperlabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        diag = {"kind": "error", "pipeline": sc.kind, "type": type(exc).__name__, "message": str(exc)}
        emit([diag], args.out)
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    emit(records, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
