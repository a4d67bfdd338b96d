"""Partial traces of bosonic densities.

Three engines, which must agree wherever they overlap:

* occupation-diagonal densities: closed-form binomial weights,
* general densities on the symmetric subspace: branching of ``Psi_n`` into
  ``Psi_m ⊗ Psi_{n-m}``,
* full product space: plain partial trace over the trailing factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, prod, sqrt
from typing import Sequence

import numpy as np

from .errors import MismatchError, check_tensor_capacity
from .occupation import (
    Occupation,
    enumerate_occupations,
    multinomial,
    occupation_array,
    occupation_index,
    sym_dim,
)

SIMPLEX_TOL = 1e-12


def _check_m(n: int, m: int):
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")


def projector_weight(occ_n: Sequence[int], occ_m: Sequence[int]) -> Fraction:
    """Exact coefficient of ``P_m`` in the ``m``-particle reduction of ``P_n``."""
    n, m = sum(occ_n), sum(occ_m)
    num = prod(comb(a, b) for a, b in zip(occ_n, occ_m))
    return Fraction(num, comb(n, m))


@dataclass(frozen=True)
class ReductionWeights:
    """Exact table of reduction weights ``(occ_n, occ_m) -> Fraction``."""

    n: int
    m: int
    d: int
    table: dict[tuple[Occupation, Occupation], Fraction]

    @classmethod
    def build(cls, n: int, m: int, d: int) -> "ReductionWeights":
        _check_m(n, m)
        small = enumerate_occupations(m, d)
        table = {
            (occ_n, occ_m): projector_weight(occ_n, occ_m)
            for occ_n in enumerate_occupations(n, d)
            for occ_m in small
        }
        return cls(n, m, d, table)

    def row(self, occ_n: Occupation) -> list[Fraction]:
        return [self.table[(occ_n, occ_m)] for occ_m in enumerate_occupations(self.m, self.d)]


def reduce_projector(occ: Sequence[int], m: int) -> np.ndarray:
    """Reduction of ``P_occ`` to ``m`` particles, as a diagonal matrix."""
    occ = tuple(occ)
    n, d = sum(occ), len(occ) - 1
    _check_m(n, m)
    w = [float(projector_weight(occ, occ_m)) for occ_m in enumerate_occupations(m, d)]
    return np.diag(w)


def _falling(x: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(x, dtype=float)
    for r in range(k):
        out = out * (x - r)
    return out


def diagonal_reduction_matrix(n: int, m: int, d: int) -> np.ndarray:
    """Matrix ``R`` with ``R[a, b]`` the weight of ``P_{m_b}`` in the reduction of ``P_{n_a}``.

    Computed as ``C(m, m_b) * prod_i (n_i)_(m_i) / (n)_(m)`` in floating point
    using falling factorials, which vanish automatically when ``m_i > n_i``.
    """
    _check_m(n, m)
    big = occupation_array(n, d).astype(float)
    small = enumerate_occupations(m, d)
    denom = float(np.prod([n - r for r in range(m)]))
    out = np.empty((big.shape[0], len(small)))
    for b, occ_m in enumerate(small):
        col = np.full(big.shape[0], float(multinomial(m, occ_m)) / denom)
        for i, mi in enumerate(occ_m):
            if mi:
                col *= _falling(big[:, i], mi)
        out[:, b] = col
    return out


def reduce_diagonal_weights(weights: np.ndarray, n: int, m: int, d: int) -> np.ndarray:
    """Diagonal of the ``m``-particle reduction of ``sum_n w(n) P_n``."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (sym_dim(n, d),):
        raise MismatchError(f"weights have shape {w.shape}, expected ({sym_dim(n, d)},)")
    if np.any(w < -SIMPLEX_TOL) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must form a probability vector")
    return w @ diagonal_reduction_matrix(n, m, d)


def reduce_diagonal_ensemble(weights: np.ndarray, n: int, m: int, d: int) -> np.ndarray:
    return np.diag(reduce_diagonal_weights(weights, n, m, d))


def reduce_diagonal_exact(weights: Sequence[Fraction], n: int, m: int, d: int) -> list[Fraction]:
    """Rational-arithmetic version of :func:`reduce_diagonal_weights`."""
    _check_m(n, m)
    big = enumerate_occupations(n, d)
    if len(weights) != len(big):
        raise MismatchError(f"got {len(weights)} weights, expected {len(big)}")
    out = []
    for occ_m in enumerate_occupations(m, d):
        out.append(sum((Fraction(w) * projector_weight(occ_n, occ_m) for w, occ_n in zip(weights, big)), Fraction(0)))
    return out


def fn_weight(p: Sequence[float], occ_m: Sequence[int], n: int) -> float:
    """Gated falling-factorial ratio approximating ``prod p_i^{m_i}`` at finite ``n``."""
    p = np.asarray(p, dtype=float)
    occ_m = tuple(occ_m)
    if p.shape != (len(occ_m),):
        raise MismatchError(f"p has shape {p.shape}, occupation has length {len(occ_m)}")
    if np.any(p < -SIMPLEX_TOL) or abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"{p} is not on the simplex")
    m = sum(occ_m)
    if n < m:
        raise ValueError(f"need n >= {m}, got {n}")
    if any(pi <= (mi - 1) / n for pi, mi in zip(p, occ_m)):
        return 0.0
    num = 1.0
    for pi, mi in zip(p, occ_m):
        for r in range(mi):
            num *= pi - r / n
    den = 1.0
    for r in range(m):
        den *= 1.0 - r / n
    return num / den


def reduce_full(rho: np.ndarray, n: int, m: int, d: int) -> np.ndarray:
    """Partial trace over the last ``n - m`` tensor factors."""
    _check_m(n, m)
    check_tensor_capacity(n, d)
    keep, drop = (d + 1) ** m, (d + 1) ** (n - m)
    if rho.shape != (keep * drop, keep * drop):
        raise MismatchError(f"operator shape {rho.shape} does not match n={n}, d={d}")
    return np.einsum("aibi->ab", rho.reshape(keep, drop, keep, drop))


def branching(n: int, m: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Index and coefficient tables for ``Psi_{m'+k} = sum c Psi_{m'} ⊗ Psi_k``.

    Returns arrays of shape ``(sym_dim(n-m), sym_dim(m))``: the position of
    ``m' + k`` in the ``n``-particle basis and ``sqrt(prod C(n_i, m'_i) / C(n, m))``.
    """
    _check_m(n, m)
    small = enumerate_occupations(m, d)
    rest = enumerate_occupations(n - m, d)
    index = occupation_index(n, d)
    denom = comb(n, m)
    idx = np.empty((len(rest), len(small)), dtype=np.int64)
    coef = np.empty((len(rest), len(small)))
    for a, k in enumerate(rest):
        for b, mm in enumerate(small):
            occ = tuple(x + y for x, y in zip(mm, k))
            idx[a, b] = index[occ]
            coef[a, b] = sqrt(prod(comb(x, y) for x, y in zip(occ, mm)) / denom)
    return idx, coef


def reduce_sym(rho: np.ndarray, n: int, m: int, d: int) -> np.ndarray:
    """Partial trace computed entirely in occupation coordinates.

    Occupation-diagonal inputs are routed through the closed-form diagonal
    weights, so they reproduce :func:`reduce_diagonal_ensemble` exactly.
    Object arrays of :class:`~fractions.Fraction` (diagonal only) are reduced
    in exact rational arithmetic.
    """
    _check_m(n, m)
    size = sym_dim(n, d)
    if rho.shape != (size, size):
        raise MismatchError(f"operator shape {rho.shape} != ({size}, {size})")
    if m == n:
        return rho.copy()
    if rho.dtype == object:
        if any(rho[a, b] != 0 for a in range(size) for b in range(size) if a != b):
            raise ValueError("exact reduction only supports occupation-diagonal operators")
        small = reduce_diagonal_exact([rho[a, a] for a in range(size)], n, m, d)
        out = np.full((len(small), len(small)), Fraction(0), dtype=object)
        for a, x in enumerate(small):
            out[a, a] = x
        return out
    if np.count_nonzero(rho - np.diag(np.diag(rho))) == 0:
        diag = np.diag(rho)
        out = diag.real @ diagonal_reduction_matrix(n, m, d)
        if np.iscomplexobj(rho):
            out = out + 1j * (diag.imag @ diagonal_reduction_matrix(n, m, d))
        return np.diag(out)
    idx, coef = branching(n, m, d)
    # block[k, a, b] = rho[idx[k, a], idx[k, b]]
    block = rho[idx[:, :, None], idx[:, None, :]]
    return np.einsum("ka,kab,kb->ab", coef, block, coef)
