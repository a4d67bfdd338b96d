"""Operators on the symmetric subspace in occupation coordinates.

Basis vectors are the normalized symmetrized products ``Psi_n``; all phases
are positive, so the occupation basis coincides with the usual bosonic Fock
states and one- and two-body operators lift through ladder algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import MismatchError, check_tensor_capacity
from .occupation import (
    enumerate_occupations,
    multinomial,
    occupation_index,
    sym_dim,
    tensor_profiles,
)
from .operators import require_hermitian, swap


@dataclass(frozen=True)
class SymOperator:
    """Matrix on the ``n``-boson symmetric subspace in the occupation basis."""

    matrix: np.ndarray
    n: int
    d: int

    def __post_init__(self):
        size = sym_dim(self.n, self.d)
        if self.matrix.shape != (size, size):
            raise MismatchError(f"matrix shape {self.matrix.shape} != ({size}, {size})")


def embedding(n: int, d: int) -> np.ndarray:
    """Isometry ``J`` whose columns are the ``Psi_n`` in product coordinates.

    ``J^† J = I`` and ``J J^†`` is the symmetrizing projector.
    """
    dim = check_tensor_capacity(n, d)
    index = occupation_index(n, d)
    occs = enumerate_occupations(n, d)
    profiles = tensor_profiles(n, d)
    cols = np.array([index[tuple(row)] for row in profiles.tolist()], dtype=np.int64)
    norms = np.array([1.0 / sqrt(multinomial(n, occ)) for occ in occs])
    j = np.zeros((dim, len(occs)))
    j[np.arange(dim), cols] = norms[cols]
    return j


def basis_vector(occ, d: int) -> np.ndarray:
    """``Psi_occ`` as a vector in ``(C^{d+1})^{⊗n}``."""
    occ = tuple(occ)
    if len(occ) != d + 1:
        raise MismatchError(f"occupation {occ} has length {len(occ)}, expected {d + 1}")
    n = sum(occ)
    return embedding(n, d)[:, occupation_index(n, d)[occ]].copy()


def to_tensor(a: np.ndarray, n: int, d: int) -> np.ndarray:
    """``J a J^†``: symmetric-basis matrix to product coordinates."""
    j = embedding(n, d)
    return j @ a @ j.T


def from_tensor(a: np.ndarray, n: int, d: int) -> np.ndarray:
    """``J^† a J``: compress a product-coordinate operator to the symmetric basis."""
    j = embedding(n, d)
    return j.T @ a @ j


def _check_one_body(t: np.ndarray) -> int:
    require_hermitian(t, "one-body operator")
    return t.shape[0] - 1


def lift_one_body(t: np.ndarray, n: int) -> np.ndarray:
    """Matrix of ``sum_i T_i`` on the symmetric subspace.

    Built as ``sum_jk T_jk a_j^† a_k``.
    """
    d = _check_one_body(t)
    occs = enumerate_occupations(n, d)
    index = occupation_index(n, d)
    out = np.zeros((len(occs), len(occs)), dtype=np.result_type(t, float))
    for col, occ in enumerate(occs):
        for k in range(d + 1):
            if occ[k] == 0:
                continue
            lowered = list(occ)
            amp_k = sqrt(lowered[k])
            lowered[k] -= 1
            for j in range(d + 1):
                if t[j, k] == 0:
                    continue
                raised = list(lowered)
                amp = amp_k * sqrt(raised[j] + 1)
                raised[j] += 1
                out[index[tuple(raised)], col] += t[j, k] * amp
    return out


def lift_two_body(v: np.ndarray, n: int) -> np.ndarray:
    """Matrix of ``sum_{i<j} V_ij`` on the symmetric subspace.

    Normal-ordered form ``(1/2) sum <jk|V|lm> a_j^† a_k^† a_m a_l`` with the
    two-body matrix elements read off in the product basis.
    """
    q = int(round(sqrt(v.shape[0])))
    d = q - 1
    v4 = v.reshape(q, q, q, q)
    occs = enumerate_occupations(n, d)
    index = occupation_index(n, d)
    out = np.zeros((len(occs), len(occs)), dtype=np.result_type(v, float))
    for col, occ in enumerate(occs):
        for l in range(q):
            for m in range(q):
                state = list(occ)
                if state[m] == 0:
                    continue
                amp = sqrt(state[m])
                state[m] -= 1
                if state[l] == 0:
                    continue
                amp *= sqrt(state[l])
                state[l] -= 1
                for j in range(q):
                    for k in range(q):
                        coef = v4[j, k, l, m]
                        if coef == 0:
                            continue
                        raised = list(state)
                        a2 = amp * sqrt(raised[k] + 1)
                        raised[k] += 1
                        a2 *= sqrt(raised[j] + 1)
                        raised[j] += 1
                        out[index[tuple(raised)], col] += 0.5 * coef * a2
    return out


def check_swap_symmetric(v: np.ndarray, tol: float = 1e-10):
    q = int(round(sqrt(v.shape[0])))
    if q * q != v.shape[0] or v.shape != (q * q, q * q):
        raise MismatchError(f"two-body operator has shape {v.shape}")
    require_hermitian(v, "two-body operator")
    s = swap(q - 1)
    scale = max(np.abs(v).max(initial=0.0), 1.0)
    if np.abs(v @ s - s @ v).max() > tol * scale:
        raise ValueError("two-body operator does not commute with SWAP")


def lift_two_body_meanfield(t: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """Mean-field Hamiltonian ``sum T_i + (1/(n-1)) sum_{i<j} V_ij`` on the symmetric subspace."""
    if n < 2:
        raise ValueError(f"mean-field Hamiltonian needs n >= 2, got {n}")
    d = _check_one_body(t)
    check_swap_symmetric(v)
    if v.shape[0] != (d + 1) ** 2:
        raise MismatchError(f"V has shape {v.shape}, T has shape {t.shape}")
    h = lift_one_body(t, n) + lift_two_body(v, n) / (n - 1)
    return (h + h.conj().T) / 2


def pair_operator(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``W = T ⊗ I + I ⊗ T + V``; the mean-field Hamiltonian is ``(1/(n-1)) sum_{i<j} W_ij``."""
    q = t.shape[0]
    eye = np.eye(q)
    return np.kron(t, eye) + np.kron(eye, t) + v
