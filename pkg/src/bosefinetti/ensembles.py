"""Finite-n bosonic ensembles: uniform, noninteracting Gibbs, mean-field Gibbs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import MismatchError
from .occupation import occupation_array, sym_dim
from .operators import require_hermitian
from .symspace import check_swap_symmetric, lift_two_body_meanfield

Kind = Literal["uniform", "noninteracting", "meanfield"]


@dataclass
class EnsembleSpec:
    """Which ensemble to build and at what temperature.

    ``scaled=True`` uses the effective inverse temperature ``beta / n``.
    For ``kind="noninteracting"`` the one-body operator is ``diag(epsilons)``
    in the standard basis; a non-diagonal ``T`` goes through the mean-field
    path with ``V = 0``.
    """

    kind: Kind
    d: int
    n: Optional[int] = None
    beta: float = 0.0
    scaled: bool = True
    epsilons: Optional[list[float]] = None
    T: Optional[np.ndarray] = field(default=None, repr=False)
    V: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("uniform", "noninteracting", "meanfield"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.d < 0:
            raise ValueError(f"d must be >= 0, got {self.d}")
        q = self.d + 1
        if self.kind == "noninteracting":
            if self.epsilons is None or len(self.epsilons) != q:
                raise MismatchError(f"noninteracting ensemble needs {q} epsilons")
        if self.kind == "meanfield":
            if self.T is None:
                raise ValueError("meanfield ensemble needs T")
            self.T = np.asarray(self.T)
            self.V = np.zeros((q * q, q * q)) if self.V is None else np.asarray(self.V)
            if self.T.shape != (q, q):
                raise MismatchError(f"T has shape {self.T.shape}, expected ({q}, {q})")
            require_hermitian(self.T, "T")
            check_swap_symmetric(self.V)

    def beta_eff(self, n: Optional[int] = None) -> float:
        n = self.n if n is None else n
        if self.scaled:
            if n is None or n <= 0:
                raise ValueError("scaled temperature needs a positive particle number")
            return self.beta / n
        return self.beta

    def one_body(self) -> np.ndarray:
        if self.kind == "meanfield":
            return self.T
        if self.kind == "noninteracting":
            return np.diag(np.asarray(self.epsilons, dtype=float))
        return np.zeros((self.d + 1, self.d + 1))

    def two_body(self) -> np.ndarray:
        q = self.d + 1
        return self.V if self.kind == "meanfield" else np.zeros((q * q, q * q))

    def weights(self, n: Optional[int] = None) -> np.ndarray:
        """Occupation weights for the diagonal kinds (uniform, noninteracting)."""
        n = self.n if n is None else n
        if self.kind == "uniform":
            return uniform_weights(n, self.d)
        if self.kind == "noninteracting":
            return noninteracting_weights(n, self.d, self.beta_eff(n), self.epsilons)
        raise ValueError("meanfield ensembles are not occupation-diagonal")

    def density(self, n: Optional[int] = None) -> np.ndarray:
        n = self.n if n is None else n
        if self.kind == "meanfield":
            return gibbs_meanfield(n, self.d, self.beta_eff(n), self.T, self.V)
        return np.diag(self.weights(n))


def uniform_weights(n: int, d: int) -> np.ndarray:
    size = occupation_array(n, d).shape[0]
    return np.full(size, 1.0 / size)


def uniform_ensemble(n: int, d: int) -> np.ndarray:
    """Normalized symmetrizer ``Sigma_n / Tr Sigma_n`` in the occupation basis."""
    return np.diag(uniform_weights(n, d))


def noninteracting_weights(n: int, d: int, beta_eff: float, epsilons: Sequence[float]) -> np.ndarray:
    """Boltzmann weights ``prod_i exp(-beta n_i eps_i) / Z`` over occupation vectors."""
    eps = np.asarray(epsilons, dtype=float)
    if eps.shape != (d + 1,):
        raise MismatchError(f"need {d + 1} epsilons, got {eps.shape}")
    occ = occupation_array(n, d)
    log_w = -beta_eff * (occ @ eps)
    if not np.all(np.isfinite(log_w)):
        raise OverflowError("non-finite Boltzmann exponent")
    log_w -= log_w.max()
    w = np.exp(log_w)
    return w / w.sum()


def gibbs_noninteracting(n: int, d: int, beta_eff: float, epsilons: Sequence[float]) -> np.ndarray:
    return np.diag(noninteracting_weights(n, d, beta_eff, epsilons))


def gibbs_from_hamiltonian(h: np.ndarray, beta: float) -> np.ndarray:
    """Normalized ``exp(-beta h)`` with a spectral shift against overflow."""
    require_hermitian(h, "Hamiltonian")
    evals, evecs = np.linalg.eigh((h + h.conj().T) / 2)
    log_w = -beta * evals
    log_w -= log_w.max()
    w = np.exp(log_w)
    w /= w.sum()
    rho = (evecs * w) @ evecs.conj().T
    return (rho + rho.conj().T) / 2


def gibbs_meanfield(n: int, d: int, beta_eff: float, t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Mean-field Gibbs density on the ``n``-boson symmetric subspace."""
    if t.shape != (d + 1, d + 1):
        raise MismatchError(f"T has shape {t.shape}, expected ({d + 1}, {d + 1})")
    h = lift_two_body_meanfield(t, v, n)
    assert h.shape[0] == sym_dim(n, d)
    return gibbs_from_hamiltonian(h, beta_eff)
