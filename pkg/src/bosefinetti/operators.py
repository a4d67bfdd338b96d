"""Dense operators on ``(C^{d+1})^{⊗n}``.

Product basis index convention: factor 1 is the most significant digit in
base ``d + 1``, which is the convention of :func:`numpy.kron`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .errors import LIMITS, CapacityError, MismatchError, check_tensor_capacity
from .occupation import tensor_digits

HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class DenseOperator:
    """Square matrix tagged with its tensor factorization."""

    matrix: np.ndarray
    local_dim: int
    factors: int

    def __post_init__(self):
        if self.matrix.shape != (self.dim, self.dim):
            raise MismatchError(
                f"matrix shape {self.matrix.shape} does not match {self.local_dim}^{self.factors}"
            )

    @property
    def dim(self) -> int:
        return self.local_dim**self.factors


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = max(np.abs(a).max(initial=0.0), 1.0)
    return bool(np.abs(a - a.conj().T).max(initial=0.0) <= rtol * scale)


def require_hermitian(a: np.ndarray, name: str = "operator", rtol: float = HERMITIAN_RTOL):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MismatchError(f"{name} must be square, got shape {a.shape}")
    if not is_hermitian(a, rtol):
        raise ValueError(f"{name} is not Hermitian")


def is_density(a: np.ndarray, tol: float = 1e-10) -> bool:
    if not is_hermitian(a, tol):
        return False
    if abs(np.trace(a) - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh((a + a.conj().T) / 2).min() >= -tol)


def _digits_to_index(digits: np.ndarray, q: int) -> np.ndarray:
    idx = np.zeros(digits.shape[0], dtype=np.int64)
    for k in range(digits.shape[1]):
        idx = idx * q + digits[:, k]
    return idx


def _validate_permutation(pi: Sequence[int], n: int) -> tuple[int, ...]:
    pi = tuple(int(x) for x in pi)
    if sorted(pi) != list(range(n)):
        raise ValueError(f"{pi} is not a permutation of 0..{n - 1}")
    return pi


def permutation_indices(pi: Sequence[int], n: int, d: int) -> np.ndarray:
    """Row index hit by each product basis column under ``U_pi``.

    ``pi`` is 0-based: ``pi[k]`` is the source factor of output factor ``k``,
    i.e. ``U_pi (x_0 ⊗ ... ⊗ x_{n-1}) = x_{pi[0]} ⊗ ... ⊗ x_{pi[n-1]}``.
    """
    pi = _validate_permutation(pi, n)
    digits = tensor_digits(n, d)
    return _digits_to_index(digits[:, list(pi)], d + 1)


def permutation_operator(pi: Sequence[int], n: int, d: int) -> np.ndarray:
    """Unitary permutation operator ``U_pi`` as a dense matrix."""
    dim = check_tensor_capacity(n, d)
    rows = permutation_indices(pi, n, d)
    u = np.zeros((dim, dim))
    u[rows, np.arange(dim)] = 1.0
    return u


def swap(d: int) -> np.ndarray:
    return permutation_operator((1, 0), 2, d)


def symmetrize(n: int, d: int) -> np.ndarray:
    """Symmetrizing projector ``(1/n!) sum_pi U_pi`` by explicit permutation sum.

    Only available for ``n <= LIMITS.max_permutation_n``; larger systems should
    use the occupation basis (see :func:`bosefinetti.symspace.embedding`).
    """
    if n > LIMITS.max_permutation_n:
        raise CapacityError(f"permutation sum for n={n} exceeds n <= {LIMITS.max_permutation_n}")
    dim = check_tensor_capacity(n, d)
    counts = np.zeros((dim, dim))
    cols = np.arange(dim)
    digits = tensor_digits(n, d)
    n_perm = 0
    for pi in permutations(range(n)):
        rows = _digits_to_index(digits[:, list(pi)], d + 1)
        np.add.at(counts, (rows, cols), 1.0)
        n_perm += 1
    return counts / n_perm


def tensor_power(a: np.ndarray, k: int) -> np.ndarray:
    if k < 1:
        raise ValueError(f"tensor power needs k >= 1, got {k}")
    size = a.shape[0] ** k
    if size > LIMITS.max_tensor_dim:
        raise CapacityError(f"tensor power dimension {size} exceeds {LIMITS.max_tensor_dim}")
    out = a
    for _ in range(k - 1):
        out = np.kron(out, a)
    return out


def embed_one_body(t: np.ndarray, site: int, n: int) -> np.ndarray:
    """``I ⊗ ... ⊗ t ⊗ ... ⊗ I`` with ``t`` on factor ``site`` (0-based)."""
    q = t.shape[0]
    return np.kron(np.kron(np.eye(q**site), t), np.eye(q ** (n - site - 1)))


def embed_two_body(v: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    """Two-body operator ``v`` acting on factors ``i`` and ``j`` (0-based, i != j)."""
    q = int(round(np.sqrt(v.shape[0])))
    if q * q != v.shape[0] or i == j:
        raise ValueError("need a two-factor operator and distinct sites")
    d = q - 1
    check_tensor_capacity(n, d)
    # Bring factors (i, j) to the front, apply v there, move back.
    rest = [k for k in range(n) if k not in (i, j)]
    order = [i, j] + rest
    # Output factor k of U_pi is input factor pi[k].
    u = permutation_operator(order, n, d)
    local = np.kron(v, np.eye(q ** (n - 2)))
    return u.T @ local @ u


def hermitian_exp(a: np.ndarray, s: float) -> np.ndarray:
    """``exp(s * a)`` for Hermitian ``a`` via eigendecomposition."""
    require_hermitian(a)
    if s == 0:
        return np.eye(a.shape[0], dtype=a.dtype)
    evals, evecs = np.linalg.eigh(a)
    return (evecs * np.exp(s * evals)) @ evecs.conj().T


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of ``rho - sigma``."""
    if rho.shape != sigma.shape:
        raise MismatchError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    diff = rho - sigma
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def trace_norm(a: np.ndarray) -> float:
    return float(np.linalg.svd(a, compute_uv=False).sum())


def matrix_unit(j: int, k: int, d: int) -> np.ndarray:
    """Rank-one ``Q_jk`` mapping ``e_k`` to ``e_j``."""
    q = np.zeros((d + 1, d + 1))
    q[j, k] = 1.0
    return q
