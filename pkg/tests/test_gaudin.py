import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from operlab.errors import NonDiagonalizable
from operlab.gaudin import gaudin_matrices, joint_diagonalize, vacuum_eigenvalues
from operlab.repspace import GaudinConfig, build_sector
from operlab.samples import fixture_config


def _mats(cfg, capped=True):
    return gaudin_matrices(cfg, build_sector(cfg, capped=capped))


def test_vacuum_fixture():
    cfg = GaudinConfig.with_n((0, 1, 2), (1, 1, 1), 0)
    mats = _mats(cfg)
    assert mats.dim == 1
    assert mats.G[0][0, 0] == F(-3, 4)
    assert tuple(g[0, 0] for g in mats.G) == vacuum_eigenvalues(cfg)


def test_single_point_is_zero():
    mats = _mats(GaudinConfig.with_n((0,), (3,), 1))
    assert all(x == 0 for x in np.ravel(mats.G[0]))


def test_fixture_spectrum():
    spec = joint_diagonalize(_mats(fixture_config()))
    got = sorted(mu[0].real for mu in spec.eigenvalues)
    want = sorted(-0.75 + 1 / (1 + s / math.sqrt(3)) for s in (1, -1))
    assert np.allclose(got, want, atol=1e-12)
    assert max(spec.residuals) < 1e-12


def test_resonance_flagged():
    # sum lam = sum lam t = 0: the Hamiltonians act nilpotently off the vacuum
    cfg = GaudinConfig.with_n((0, 2, 1), (1, 1, -2), 1)
    with pytest.raises(NonDiagonalizable):
        joint_diagonalize(_mats(cfg, capped=False))


rational_configs = st.tuples(
    st.lists(st.integers(-6, 6), min_size=2, max_size=4, unique=True),
    st.lists(st.integers(0, 3), min_size=4, max_size=4),
    st.integers(0, 3),
).filter(lambda c: 2 * c[2] <= sum(c[1][:len(c[0])]))


@settings(max_examples=30, deadline=None)
@given(rational_configs)
def test_exact_commutation_and_sums(data):
    pts, lams, n = data
    cfg = GaudinConfig.with_n(tuple(F(p, 2) for p in pts), lams[:len(pts)], n)
    mats = _mats(cfg)
    G = mats.G
    for a in range(len(G)):
        for b in range(a + 1, len(G)):
            assert ((G[a].dot(G[b]) - G[b].dot(G[a])) == 0).all()
    total, weighted = mats.sum_identities()
    assert (np.asarray(total) == 0).all()
    assert (np.asarray(weighted) == 0).all()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_generic_capped_spectrum_is_simple(seed):
    rng = np.random.default_rng(seed)
    m1 = int(rng.integers(2, 5))
    lams = [int(x) for x in rng.integers(1, 3, size=m1)]
    n = int(rng.integers(0, sum(lams) // 2 + 1))
    cfg = GaudinConfig.with_n(tuple(np.sort(rng.uniform(-3, 3, m1)) + np.arange(m1)), lams, n)
    spec = joint_diagonalize(_mats(cfg))
    assert spec.min_gap > 0
    assert len(spec) == build_sector(cfg, capped=True).dim


def test_float_commutator_small():
    cfg = GaudinConfig.with_n((0.0, 0.731, 1.9, 3.3), (2, 1, 2, 1), 2)
    assert _mats(cfg).max_commutator() < 1e-10
