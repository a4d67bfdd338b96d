from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosefinetti.errors import CapacityError, MismatchError
from bosefinetti.operators import (
    hermitian_exp,
    is_hermitian,
    permutation_operator,
    swap,
    symmetrize,
    tensor_power,
    trace_distance,
)
from bosefinetti.occupation import sym_dim
from bosefinetti.symspace import embedding

from conftest import random_density, random_hermitian


def test_identity_permutation():
    assert np.array_equal(permutation_operator((0, 1, 2), 3, 1), np.eye(8))


def test_swap_matrix():
    expected = np.zeros((4, 4))
    for r, c in [(0, 0), (1, 2), (2, 1), (3, 3)]:
        expected[r, c] = 1
    assert np.array_equal(swap(1), expected)


def test_permutation_action_on_product():
    rng = np.random.default_rng(0)
    xs = [rng.normal(size=3) for _ in range(3)]
    pi = (2, 0, 1)
    u = permutation_operator(pi, 3, 2)
    lhs = u @ np.kron(np.kron(xs[0], xs[1]), xs[2])
    rhs = np.kron(np.kron(xs[pi[0]], xs[pi[1]]), xs[pi[2]])
    assert np.allclose(lhs, rhs, atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_permutation_inverse_and_unitarity(n):
    for pi in permutations(range(n)):
        inv = tuple(np.argsort(pi))
        u, ui = permutation_operator(pi, n, 1), permutation_operator(inv, n, 1)
        assert np.abs(u @ ui - np.eye(2**n)).max() <= 1e-12
        assert np.abs(u @ u.T - np.eye(2**n)).max() <= 1e-12


def test_invalid_permutation():
    with pytest.raises(ValueError):
        permutation_operator((0, 0, 1), 3, 1)


def test_symmetrize_examples():
    assert np.array_equal(symmetrize(1, 2), np.eye(3))
    s2 = symmetrize(2, 1)
    assert np.allclose(s2, (np.eye(4) + swap(1)) / 2)
    assert abs(np.trace(s2) - 3) < 1e-8
    assert abs(np.trace(symmetrize(3, 1)) - sym_dim(3, 1)) < 1e-8


@pytest.mark.parametrize("n,d", [(n, d) for n in range(1, 5) for d in range(3)])
def test_symmetrizer_absorbs_permutations(n, d):
    s = symmetrize(n, d)
    assert np.abs(s @ s - s).max() <= 1e-10
    assert abs(np.trace(s) - sym_dim(n, d)) <= 1e-8
    for pi in permutations(range(n)):
        u = permutation_operator(pi, n, d)
        assert np.abs(s @ u - s).max() <= 1e-12
        assert np.abs(u @ s - s).max() <= 1e-12
    j = embedding(n, d)
    assert np.abs(j @ j.T - s).max() <= 1e-10


def test_symmetrize_capacity():
    with pytest.raises(CapacityError):
        symmetrize(9, 1)


def test_tensor_power():
    assert np.array_equal(tensor_power(np.eye(2), 3), np.eye(8))
    assert np.allclose(tensor_power(np.diag([2.0, 3.0]), 2), np.diag([4, 6, 6, 9]))
    v = np.array([0.6, 0.8j])
    p = np.outer(v, v.conj())
    assert np.linalg.matrix_rank(tensor_power(p, 3)) == 1
    with pytest.raises(ValueError):
        tensor_power(p, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_tensor_power_trace(k, seed):
    a = random_hermitian(np.random.default_rng(seed), 2)
    tr = np.trace(tensor_power(a, k))
    assert abs(tr - np.trace(a) ** k) <= 1e-10 * max(1.0, abs(np.trace(a)) ** k)


def test_hermitian_exp_examples(rng):
    a = random_hermitian(rng, 4)
    assert np.array_equal(hermitian_exp(a, 0.0), np.eye(4))
    assert np.allclose(hermitian_exp(np.diag([0.0, 1.0]), -1.0), np.diag([1, np.exp(-1)]), atol=1e-15)
    e = hermitian_exp(a, 0.7)
    assert np.abs(e @ hermitian_exp(a, -0.7) - np.eye(4)).max() <= 1e-10
    assert np.abs(e @ a - a @ e).max() <= 1e-10
    assert is_hermitian(e) and np.linalg.eigvalsh(e).min() > 0


def test_hermitian_exp_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_exp(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)


def test_trace_distance_examples(rng):
    rho = random_density(rng, 3)
    assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-15)
    assert trace_distance(np.diag([1.0, 0]), np.diag([0.0, 1])) == pytest.approx(1)
    assert trace_distance(np.diag([0.5, 0.5]), np.diag([0.75, 0.25])) == pytest.approx(0.25)
    with pytest.raises(MismatchError):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_trace_distance_metric_properties(seed):
    rng = np.random.default_rng(seed)
    a, b = random_density(rng, 3), random_density(rng, 3)
    dab = trace_distance(a, b)
    assert 0 <= dab <= 1 + 1e-12
    assert dab == pytest.approx(trace_distance(b, a), abs=1e-14)
