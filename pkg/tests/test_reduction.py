from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosefinetti.definetti import limit_uniform, limit_uniform_exact
from bosefinetti.ensembles import uniform_weights
from bosefinetti.occupation import enumerate_occupations, sym_dim
from bosefinetti.operators import symmetrize, tensor_power
from bosefinetti.reduction import (
    ReductionWeights,
    diagonal_reduction_matrix,
    fn_weight,
    reduce_diagonal_ensemble,
    reduce_diagonal_exact,
    reduce_full,
    reduce_projector,
    reduce_sym,
)
from bosefinetti.symspace import basis_vector, from_tensor, to_tensor

from conftest import random_density


def test_reduce_projector_examples():
    assert np.allclose(reduce_projector((2, 0), 1), np.diag([1.0, 0.0]))
    # Oracle: explicit partial trace of the symmetric two-particle state.
    psi = basis_vector((1, 1), 1)
    oracle = reduce_full(np.outer(psi, psi), 2, 1, 1)
    assert np.allclose(reduce_projector((1, 1), 1), oracle)
    assert np.allclose(oracle, np.diag([0.5, 0.5]))
    for m in range(6):
        expected = np.zeros((sym_dim(m, 2),) * 2)
        expected[0, 0] = 1
        assert np.allclose(reduce_projector((5, 0, 0), m), expected)


def test_reduce_projector_rejects_large_m():
    with pytest.raises(ValueError):
        reduce_projector((1, 1), 3)


@pytest.mark.parametrize("n,d", [(n, d) for n in range(1, 7) for d in range(1, 3)])
def test_reduce_projector_matches_full_trace(n, d):
    for occ in enumerate_occupations(n, d):
        psi = basis_vector(occ, d)
        for m in range(n + 1):
            full = reduce_full(np.outer(psi, psi), n, m, d)
            assert np.abs(to_tensor(reduce_projector(occ, m), m, d) - full).max() <= 1e-12


def test_reduction_weights_rows_sum_to_one():
    for d in range(4):
        for n in range(7):
            for m in range(n + 1):
                w = ReductionWeights.build(n, m, d)
                for occ in enumerate_occupations(n, d):
                    row = w.row(occ)
                    assert sum(row) == 1
                    for occ_m, x in zip(enumerate_occupations(m, d), row):
                        if any(a > b for a, b in zip(occ_m, occ)):
                            assert x == 0


def test_diagonal_ensemble_examples():
    n, d = 4, 2
    occs = enumerate_occupations(n, d)
    point = np.zeros(len(occs))
    point[3] = 1.0
    assert np.allclose(reduce_diagonal_ensemble(point, n, 2, d), reduce_projector(occs[3], 2))
    # Average of reduce_projector over the three two-particle states.
    avg = sum(reduce_projector(o, 1) for o in enumerate_occupations(2, 1)) / 3
    assert np.allclose(reduce_diagonal_ensemble(uniform_weights(2, 1), 2, 1, 1), avg)
    assert np.allclose(avg, np.diag([0.5, 0.5]))
    w = np.random.default_rng(1).dirichlet(np.ones(len(occs)))
    assert np.allclose(reduce_diagonal_ensemble(w, n, n, d), np.diag(w))


def test_diagonal_ensemble_rejects_unnormalized():
    with pytest.raises(ValueError):
        reduce_diagonal_ensemble(np.array([0.5, 0.5, 0.5]), 2, 1, 1)


def test_float_matrix_matches_exact_weights():
    n, m, d = 7, 3, 2
    table = ReductionWeights.build(n, m, d)
    mat = diagonal_reduction_matrix(n, m, d)
    for a, occ in enumerate(enumerate_occupations(n, d)):
        assert np.allclose(mat[a], [float(x) for x in table.row(occ)], rtol=1e-14, atol=0)


def test_fn_weight_examples():
    assert fn_weight([0.2, 0.8], (0, 0), 10) == 1.0
    n = 10
    eps = 1e-3
    assert fn_weight([(2 - 1) / n - eps, 1 - (2 - 1) / n + eps], (2, 0), n) == 0.0


def test_fn_weight_uniform_convergence():
    occ_m = (2, 1, 1)
    m = sum(occ_m)
    grid = [(a, b, 1 - a - b) for a in np.linspace(0, 1, 21) for b in np.linspace(0, 1, 21) if a + b <= 1 + 1e-12]
    prev = None
    for n in [10, 40, 160, 640]:
        err = max(abs(fn_weight(np.clip(p, 0, 1), occ_m, n) - np.prod(np.power(np.clip(p, 0, 1), occ_m))) for p in grid)
        assert err <= 10 * m**2 / n
        if prev is not None:
            assert err < prev
        prev = err


def test_fn_weight_matches_lattice_weights():
    # At lattice points p = occ / n the gated ratio equals the exact reduction weight / multinomial.
    n, d = 6, 2
    table = ReductionWeights.build(n, 2, d)
    from bosefinetti.occupation import multinomial

    for occ in enumerate_occupations(n, d):
        for occ_m in enumerate_occupations(2, d):
            val = multinomial(2, occ_m) * fn_weight(np.array(occ) / n, occ_m, n)
            assert val == pytest.approx(float(table.table[(occ, occ_m)]), abs=1e-14)


def test_reduce_full_examples(rng):
    rho = random_density(rng, 2)
    assert np.allclose(reduce_full(tensor_power(rho, 4), 4, 2, 1), tensor_power(rho, 2))
    big = random_density(rng, 8)
    assert np.array_equal(reduce_full(big, 3, 3, 1), big)
    assert np.allclose(reduce_full(symmetrize(2, 1) / 3, 2, 1, 1), np.diag([0.5, 0.5]))


def test_reduce_full_preserves_trace_and_positivity(rng):
    rho = random_density(rng, 27)
    for m in range(4):
        red = reduce_full(rho, 3, m, 2)
        assert abs(np.trace(red) - 1) <= 1e-12
        assert np.linalg.eigvalsh(red).min() >= -1e-10


@pytest.mark.parametrize("n,d", [(n, d) for n in range(1, 7) for d in range(3)])
def test_reduce_sym_matches_full(rng, n, d):
    rho = random_density(rng, sym_dim(n, d))
    full = to_tensor(rho, n, d)
    for m in range(n + 1):
        expected = from_tensor(reduce_full(full, n, m, d), m, d)
        assert np.abs(reduce_sym(rho, n, m, d) - expected).max() <= 1e-10


def test_reduce_sym_diagonal_consistency(rng):
    n, d = 8, 2
    w = rng.dirichlet(np.ones(sym_dim(n, d)))
    for m in range(n + 1):
        assert np.abs(reduce_sym(np.diag(w), n, m, d) - reduce_diagonal_ensemble(w, n, m, d)).max() <= 1e-12
    assert np.array_equal(reduce_sym(np.diag(w), n, n, d), np.diag(w))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2), st.data())
def test_chain_rule(n, d, data):
    m2 = data.draw(st.integers(0, n))
    m1 = data.draw(st.integers(0, m2))
    seed = data.draw(st.integers(0, 2**31 - 1))
    rho = random_density(np.random.default_rng(seed), sym_dim(n, d))
    direct = reduce_sym(rho, n, m1, d)
    chained = reduce_sym(reduce_sym(rho, n, m2, d), m2, m1, d)
    assert np.abs(direct - chained).max() <= 1e-12


def test_exact_reduction_of_uniform_limits():
    for d in range(4):
        for m in range(7):
            big = limit_uniform_exact(m + 1, d)
            assert reduce_diagonal_exact(big, m + 1, m, d) == limit_uniform_exact(m, d)
            obj = np.diag(np.array(big, dtype=object))
            obj[obj == 0] = Fraction(0)
            out = reduce_sym(obj, m + 1, m, d)
            assert [out[i, i] for i in range(out.shape[0])] == limit_uniform_exact(m, d)


def test_reduce_sym_of_limit_uniform_float():
    for m in range(1, 5):
        assert np.allclose(reduce_sym(limit_uniform(m + 2, 2), m + 2, m, 2), limit_uniform(m, 2), atol=1e-15)
