"""Scenario files: a TOML document with a [gaudin] section plus per-pipeline knobs.

    [gaudin]
    points = [0, 1, 2]          # ints, floats or rational strings such as "1/2"
    weights = [1, 1, 1, 1]      # lam_0..lam_m and the weight at infinity
    capped = true               # finite-dimensional factors (dominant integral only)

    [numeric]
    tol = 1e-10                 # BAE / eigenvector tolerance
    ode_tol = 1e-10             # transport tolerance
    classify_tol = 1e-6
    samples = [0.37, "1.3+0.4j"]  # x-points for residual checks

    [balanced]                  # balanced-scan only
    points = [0, 1, 3]
    weights = [-1, -1, -1, -1]
    scan = [-1.0, 0.5]
    steps = 60

    [hecke]                     # hecke-scan only
    re = [-0.5, 2.5, 50]        # start, stop, count
    im = [0.1, 1.5, 50]

    [chiral]                    # chiral-check only; weights are lam_0..lam_m
    points = [0, 1]
    weights = ["1/2", "1/2"]
    r = 2
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .errors import InvalidConfig
from .repspace import GaudinConfig, as_number

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PIPELINES = ("spectrum", "bethe", "oper-verify", "monodromy", "balanced-scan", "hecke-scan", "chiral-check")


@dataclass(frozen=True)
class Numeric:
    tol: float = 1e-10
    ode_tol: float = 1e-10
    classify_tol: float = 1e-6
    samples: Tuple[complex, ...] = (0.37 + 0.21j, 1.3 + 0.4j, -0.8 + 0.9j)

    def __post_init__(self):
        for name in ("tol", "ode_tol", "classify_tol"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(f"numeric.{name} must be positive")


@dataclass(frozen=True)
class BalancedKnobs:
    points: Tuple[float, ...] = (0.0, 1.0, 3.0)
    weights: Tuple[complex, ...] = (-1, -1, -1, -1)
    scan: Tuple[float, float] = (-1.0, 0.5)
    steps: int = 60

    def __post_init__(self):
        if len(self.points) != 3 or len(self.weights) != 4:
            raise InvalidConfig("balanced needs three finite points and four weights")
        if len(set(self.points)) != 3:
            raise InvalidConfig("balanced.points must be pairwise distinct")
        if not self.scan[0] < self.scan[1]:
            raise InvalidConfig("balanced.scan must be an increasing bracket")
        if self.steps < 1:
            raise InvalidConfig("balanced.steps must be positive")


@dataclass(frozen=True)
class GridKnobs:
    re: Tuple[float, float, int] = (-0.5, 2.5, 50)
    im: Tuple[float, float, int] = (0.1, 1.5, 50)

    def __post_init__(self):
        for name in ("re", "im"):
            lo, hi, count = getattr(self, name)
            if not (hi > lo and int(count) == count and count > 0):
                raise InvalidConfig(f"hecke.{name} must be [start, stop, count] with stop > start, count > 0")


@dataclass(frozen=True)
class ChiralKnobs:
    points: Tuple = ()
    weights: Tuple = ()
    r: int = 0


@dataclass(frozen=True)
class Scenario:
    kind: str
    config: Optional[GaudinConfig]
    capped: bool = True
    numeric: Numeric = field(default_factory=Numeric)
    balanced: BalancedKnobs = field(default_factory=BalancedKnobs)
    grid: GridKnobs = field(default_factory=GridKnobs)
    chiral: ChiralKnobs = field(default_factory=ChiralKnobs)
    seed: int = 0
    jobs: int = 1

    def knobs(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"seed": self.seed, "tol": self.numeric.tol, "ode_tol": self.numeric.ode_tol,
                               "classify_tol": self.numeric.classify_tol}
        if self.kind == "balanced-scan":
            out.update(scan=list(self.balanced.scan), steps=self.balanced.steps)
        if self.kind == "hecke-scan":
            out.update(re=list(self.grid.re), im=list(self.grid.im))
        return out


def _numbers(values, name):
    if not isinstance(values, list):
        raise InvalidConfig(f"{name} must be a list")
    try:
        return tuple(as_number(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"{name}: cannot parse {values!r} ({exc})") from None


def _section(doc, name) -> Dict[str, Any]:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise InvalidConfig(f"[{name}] must be a table")
    return sec


def _only(sec: Dict[str, Any], allowed, name):
    extra = sorted(set(sec) - set(allowed))
    if extra:
        raise InvalidConfig(f"unknown keys in [{name}]: {', '.join(extra)}")


def parse_scenario(doc: Dict[str, Any], kind: str, seed: Optional[int] = None, jobs: int = 1) -> Scenario:
    if kind not in PIPELINES:
        raise InvalidConfig(f"unknown pipeline {kind!r}")
    if jobs < 1:
        raise InvalidConfig("--jobs must be at least 1")
    head = _section(doc, "scenario")
    _only(head, ("pipeline", "seed"), "scenario")
    if "pipeline" in head and head["pipeline"] != kind:
        raise InvalidConfig(f"scenario file is for {head['pipeline']!r}, not {kind!r}")
    seed = int(head.get("seed", 0)) if seed is None else seed
    if seed < 0:
        raise InvalidConfig("seed must be non-negative")

    g = _section(doc, "gaudin")
    _only(g, ("points", "weights", "capped"), "gaudin")
    config = None
    capped = bool(g.get("capped", True))
    if g:
        if "points" not in g or "weights" not in g:
            raise InvalidConfig("[gaudin] needs points and weights")
        config = GaudinConfig(_numbers(g["points"], "gaudin.points"), _numbers(g["weights"], "gaudin.weights"))
        if capped and not config.dominant_integral():
            capped = False
    elif kind in ("spectrum", "bethe", "oper-verify", "monodromy", "hecke-scan"):
        raise InvalidConfig(f"pipeline {kind} needs a [gaudin] section")

    num = _section(doc, "numeric")
    _only(num, ("tol", "ode_tol", "classify_tol", "samples"), "numeric")
    nk = {k: float(v) for k, v in num.items() if k != "samples"}
    if "samples" in num:
        nk["samples"] = tuple(complex(as_number(v)) for v in num["samples"])
    numeric = Numeric(**nk)

    bal = _section(doc, "balanced")
    _only(bal, ("points", "weights", "scan", "steps"), "balanced")
    bk: Dict[str, Any] = {}
    if "points" in bal:
        bk["points"] = tuple(float(complex(v).real) for v in _numbers(bal["points"], "balanced.points"))
    if "weights" in bal:
        bk["weights"] = tuple(complex(v) for v in _numbers(bal["weights"], "balanced.weights"))
    if "scan" in bal:
        bk["scan"] = tuple(float(v) for v in bal["scan"])
    if "steps" in bal:
        bk["steps"] = int(bal["steps"])
    balanced = BalancedKnobs(**bk)

    hk = _section(doc, "hecke")
    _only(hk, ("re", "im"), "hecke")
    grid = GridKnobs(**{k: (float(v[0]), float(v[1]), int(v[2])) for k, v in hk.items()})

    ch = _section(doc, "chiral")
    _only(ch, ("points", "weights", "r"), "chiral")
    chiral = ChiralKnobs()
    if ch or kind == "chiral-check":
        if not {"points", "weights", "r"} <= set(ch):
            raise InvalidConfig("[chiral] needs points, weights and r")
        chiral = ChiralKnobs(_numbers(ch["points"], "chiral.points"), _numbers(ch["weights"], "chiral.weights"),
                             int(ch["r"]))
    return Scenario(kind, config, capped, numeric, balanced, grid, chiral, seed, jobs)


def load_scenario(path: str, kind: str, seed: Optional[int] = None, jobs: int = 1) -> Scenario:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise InvalidConfig(f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise InvalidConfig(f"{path}: {exc}") from None
    return parse_scenario(doc, kind, seed, jobs)
