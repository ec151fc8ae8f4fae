from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from operlab.errors import InvalidConfig
from operlab.repspace import (AmbientSpace, GaudinConfig, apply_e, apply_h, build_sector, generator_action,
                              poly_add, poly_diff, uncapped_dimension)


def _spin_matrices(lam):
    # basis f^k v, k = 0..lam, of the (lam+1)-dimensional module
    d = lam + 1
    e = np.zeros((d, d))
    f = np.zeros((d, d))
    h = np.diag([lam - 2 * k for k in range(d)]).astype(float)
    for k in range(lam):
        f[k + 1, k] = 1
        e[k, k + 1] = (k + 1) * (lam - k)
    return e, f, h


def _singular_count(lams, n):
    """Brute force: dimension of ker(total e) in the tensor weight space of weight sum(lams) - 2n."""
    total_e = 0
    total_h = 0
    dims = [l + 1 for l in lams]
    for i, lam in enumerate(lams):
        e, _, h = _spin_matrices(lam)
        ops_e = [np.eye(d) for d in dims]
        ops_h = [np.eye(d) for d in dims]
        ops_e[i], ops_h[i] = e, h
        kron_e, kron_h = ops_e[0], ops_h[0]
        for a, b in zip(ops_e[1:], ops_h[1:]):
            kron_e, kron_h = np.kron(kron_e, a), np.kron(kron_h, b)
        total_e = total_e + kron_e
        total_h = total_h + kron_h
    idx = np.where(np.isclose(np.diag(total_h), sum(lams) - 2 * n))[0]
    if len(idx) == 0:
        return 0
    block = total_e[:, idx]
    return len(idx) - np.linalg.matrix_rank(block)


def test_linear_uncapped():
    sec = build_sector(GaudinConfig.with_n((0, 1, 2), (-1, -1, -1), 1))
    assert sec.dim == 2
    for b in sec.basis:
        assert sum(b.values()) == 0


def test_constants():
    sec = build_sector(GaudinConfig.with_n((0, 1, 2), (1, 1, 1), 0))
    assert sec.dim == 1 and sec.basis[0] == {(0, 0, 0): 1}


def test_three_spin_halves():
    sec = build_sector(GaudinConfig((0, 1, 2), (1, 1, 1, 1)), capped=True)
    assert sec.dim == 2 == _singular_count([1, 1, 1], 1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=4), st.integers(0, 4))
def test_capped_dimension_matches_tensor_decomposition(lams, n):
    if 2 * n > sum(lams):
        return
    cfg = GaudinConfig.with_n(tuple(range(len(lams))), lams, n)
    assert build_sector(cfg, capped=True).dim == _singular_count(lams, n)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 4))
def test_uncapped_basis_properties(m1, n):
    cfg = GaudinConfig.with_n(tuple(range(m1)), [F(-1, 2)] * m1, n)
    sec = build_sector(cfg)
    assert sec.dim == uncapped_dimension(m1 - 1, n)
    for b in sec.basis:
        assert all(sum(k) == n for k in b)
        assert sec.contains(b)
        total = {}
        for i in range(m1):
            total = poly_add(total, poly_diff(b, i))
        assert total == {}


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=4), st.integers(0, 3))
def test_total_weight(lams, n):
    if 2 * n > sum(lams):
        return
    cfg = GaudinConfig.with_n(tuple(range(len(lams))), lams, n)
    for b in build_sector(cfg, capped=True).basis:
        acc = {}
        for i, lam in enumerate(lams):
            acc = poly_add(acc, apply_h(b, i, lam))
        assert acc == poly_add({}, b, cfg.lam_inf)


def test_e_on_variable():
    assert apply_e({(1,): 1}, 0) == {(0,): 1}


def test_h_on_constant():
    assert apply_h({(0, 0): 1}, 1, F(5, 3)) == {(0, 0): F(5, 3)}


@pytest.mark.parametrize("lam", [F(2), F(-3, 2), F(1, 3)])
def test_commutator_relation(lam):
    space = AmbientSpace(2, 4)
    e, f, h = (generator_action(g, 0, lam, space) for g in "efh")
    low = [c for c, k in enumerate(space.monomials) if sum(k) < space.max_degree]
    lhs = (e.dot(f) - f.dot(e))[:, low]
    assert (lhs == h[:, low]).all()
    assert ((h.dot(e) - e.dot(h)) == 2 * e).all()


def test_float_weight_relation():
    space = AmbientSpace(1, 5)
    lam = 0.37 + 0.2j
    e, f, h = (generator_action(g, 0, lam, space) for g in "efh")
    low = [c for c, k in enumerate(space.monomials) if sum(k) < space.max_degree]
    assert np.abs((e @ f - f @ e - h)[:, low]).max() < 1e-12


def test_duplicate_points_rejected():
    with pytest.raises(InvalidConfig, match="distinct"):
        GaudinConfig((0, 1, 1), (1, 1, 1, 1))


def test_weight_balance_rejected():
    with pytest.raises(InvalidConfig):
        GaudinConfig((0, 1), (1, 1, 1))


def test_sector_is_deterministic():
    cfg = GaudinConfig.with_n((0, 1, 3, 7), (2, 1, 3, 1), 3)
    a, b = build_sector(cfg, capped=True), build_sector(cfg, capped=True)
    assert a.basis == b.basis
    assert list(a.monomials) == sorted(a.monomials, reverse=True)
