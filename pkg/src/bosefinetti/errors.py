"""Exception types and desk-scale capacity limits."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb


class CapacityError(RuntimeError):
    """Requested object exceeds the configured memory/size limits."""


class MismatchError(ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative change {achieved:.3e})")
        self.achieved = achieved


@dataclass
class Limits:
    max_sym_dim: int = 10**6
    max_tensor_dim: int = 2**24
    max_permutation_n: int = 8


LIMITS = Limits()


def check_sym_capacity(n: int, d: int) -> int:
    size = comb(n + d, d)
    if size > LIMITS.max_sym_dim:
        raise CapacityError(f"symmetric dimension C({n}+{d},{d}) = {size} exceeds {LIMITS.max_sym_dim}")
    return size


def check_tensor_capacity(n: int, d: int) -> int:
    size = (d + 1) ** n
    if size > LIMITS.max_tensor_dim:
        raise CapacityError(f"tensor dimension {d + 1}^{n} = {size} exceeds {LIMITS.max_tensor_dim}")
    return size
