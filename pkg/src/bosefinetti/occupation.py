"""Occupation-number multi-indices for the symmetric subspace.

Occupation vectors for fixed ``(n, d)`` are enumerated in descending
lexicographic order: ``(n, 0, ..., 0)`` first and ``(0, ..., 0, n)`` last,
so the condensed ground-state configuration always sits at index 0.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial, prod
from typing import Iterator, Sequence

import numpy as np

from .errors import MismatchError, check_sym_capacity

Occupation = tuple[int, ...]


def _compositions(n: int, parts: int) -> Iterator[Occupation]:
    if parts == 1:
        yield (n,)
        return
    for head in range(n, -1, -1):
        for tail in _compositions(n - head, parts - 1):
            yield (head,) + tail


@lru_cache(maxsize=256)
def _enumerate_cached(n: int, d: int) -> tuple[Occupation, ...]:
    return tuple(_compositions(n, d + 1))


def enumerate_occupations(n: int, d: int) -> list[Occupation]:
    """All occupation vectors with ``d + 1`` entries summing to ``n``.

    Raises:
        ValueError: if ``n`` or ``d`` is negative.
        CapacityError: if ``C(n + d, d)`` exceeds the configured limit.
    """
    if n < 0 or d < 0:
        raise ValueError(f"need n >= 0 and d >= 0, got n={n}, d={d}")
    check_sym_capacity(n, d)
    return list(_enumerate_cached(n, d))


@lru_cache(maxsize=256)
def occupation_array(n: int, d: int) -> np.ndarray:
    """Enumeration as a read-only ``(sym_dim, d + 1)`` integer array."""
    arr = np.array(enumerate_occupations(n, d), dtype=np.int64).reshape(-1, d + 1)
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=256)
def occupation_index(n: int, d: int) -> dict[Occupation, int]:
    """Map from occupation vector to its position in the canonical order."""
    return {occ: i for i, occ in enumerate(enumerate_occupations(n, d))}


def sym_dim(n: int, d: int) -> int:
    """Dimension ``C(n + d, d)`` of the ``n``-boson symmetric subspace."""
    if n < 0 or d < 0:
        raise ValueError(f"need n >= 0 and d >= 0, got n={n}, d={d}")
    return comb(n + d, d)


def multinomial(n: int, occ: Sequence[int]) -> int:
    """Exact multinomial coefficient ``n! / prod(n_i!)``."""
    if any(k < 0 for k in occ):
        raise ValueError(f"negative occupation in {tuple(occ)}")
    if sum(occ) != n:
        raise MismatchError(f"occupation {tuple(occ)} sums to {sum(occ)}, expected {n}")
    return factorial(n) // prod(factorial(k) for k in occ)


def occupation_profile(indices: Sequence[int], d: int) -> Occupation:
    """Count how often each level ``0..d`` appears in ``indices``."""
    counts = [0] * (d + 1)
    for x in indices:
        if not 0 <= x <= d:
            raise ValueError(f"index {x} outside 0..{d}")
        counts[x] += 1
    return tuple(counts)


def tensor_profiles(n: int, d: int) -> np.ndarray:
    """Occupation profile of every product basis index of ``(C^{d+1})^{⊗n}``.

    Row ``x`` holds the counts of the base-``(d+1)`` digits of ``x``, with
    factor 1 as the most significant digit.
    """
    q = d + 1
    digits = tensor_digits(n, d)
    counts = np.zeros((q**n, q), dtype=np.int64)
    for level in range(q):
        counts[:, level] = (digits == level).sum(axis=1)
    return counts


def tensor_digits(n: int, d: int) -> np.ndarray:
    q = d + 1
    idx = np.arange(q**n)
    digits = np.empty((q**n, n), dtype=np.int64)
    for k in range(n - 1, -1, -1):
        digits[:, k] = idx % q
        idx = idx // q
    return digits
