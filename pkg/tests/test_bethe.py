import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from operlab.bethe import (BetheRoots, bae_residual, bethe_eigenvalues, bethe_polynomial, bethe_vector,
                           solve_bae)
from operlab.gaudin import gaudin_matrices
from operlab.repspace import GaudinConfig, build_sector
from operlab.samples import fixture_config, random_dominant_configs


def test_fixture_roots():
    roots = sorted(w.roots[0].real for w in solve_bae(fixture_config()))
    assert roots == pytest.approx([1 - 1 / math.sqrt(3), 1 + 1 / math.sqrt(3)], abs=1e-13)


def test_linear_case_single_root():
    # lam = (1, 1, -2), t = (0, 1, 2): one finite root at 2/3
    sols = solve_bae(GaudinConfig.with_n((0, 1, 2), (1, 1, -2), 1), strict=False)
    assert len(sols) == 1
    assert sols[0].roots[0] == pytest.approx(2 / 3, abs=1e-12)


def test_empty_solution():
    assert solve_bae(GaudinConfig.with_n((0, 1), (1, 1), 0)) == [BetheRoots(())]


def test_bethe_vector_degree_one():
    cfg = fixture_config()
    sec = build_sector(cfg, capped=True)
    w = solve_bae(cfg)[0]
    vec = bethe_vector(w, cfg, sec)
    wj = w.roots[0]
    expect = {}
    for i, t in enumerate(cfg.points):
        mono = tuple(1 if k == i else 0 for k in range(3))
        expect[mono] = cfg.finite_weights[i] / (wj - t)
    want = np.array([complex(v) for v in sec.coords(expect)])
    assert np.allclose(vec, want, atol=1e-12)


def test_bethe_vector_vacuum():
    cfg = GaudinConfig.with_n((0, 1), (2, 1), 0)
    assert bethe_polynomial(BetheRoots(()), cfg) == {(0, 0): 1}


def test_bethe_vector_symmetric_in_roots():
    cfg = GaudinConfig.with_n((0, F(1, 2), 2), (2, 2, 1), 2)
    w = solve_bae(cfg)[0]
    a = bethe_polynomial(w, cfg, order=[0, 1])
    b = bethe_polynomial(w, cfg, order=[1, 0])
    assert set(a) == set(b)
    assert max(abs(complex(a[k]) - complex(b[k])) for k in a) < 1e-10


@pytest.mark.parametrize("cfg", random_dominant_configs(5, seed=11), ids=lambda c: f"m{c.m}n{c.n}")
def test_bethe_vectors_are_eigenvectors(cfg):
    sec = build_sector(cfg, capped=True)
    G = gaudin_matrices(cfg, sec).numeric()
    sols = solve_bae(cfg)
    assert len(sols) == sec.dim
    for w in sols:
        v = bethe_vector(w, cfg, sec)
        for g, mu in zip(G, bethe_eigenvalues(w, cfg)):
            assert np.linalg.norm(g @ v - mu * v) < 1e-8 * np.linalg.norm(v)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_accessory_constraints(seed):
    cfg = random_dominant_configs(1, seed=seed, max_dim=6)[0]
    lam_inf = cfg.lam_inf
    rhs = lam_inf * (lam_inf + 2) / 4 - sum(l * (l + 2) / 4 for l in cfg.finite_weights)
    for w in solve_bae(cfg):
        mu = bethe_eigenvalues(w, cfg)
        assert abs(sum(mu)) < 1e-10
        assert abs(sum(complex(t) * m for t, m in zip(cfg.points, mu)) - float(rhs)) < 1e-9
        res = bae_residual(np.array(w.roots), np.array([complex(t) for t in cfg.points]),
                           np.array([complex(l) for l in cfg.finite_weights]))
        assert np.abs(res).max(initial=0) < 1e-9


def test_fixture_eigenvalue():
    cfg = fixture_config()
    w = BetheRoots((1 + 1 / math.sqrt(3),))
    assert bethe_eigenvalues(w, cfg)[0].real == pytest.approx(-0.75 + 1 / (1 + 1 / math.sqrt(3)), abs=1e-14)
