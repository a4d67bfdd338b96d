"""Limit states as mixtures of tensor powers of vector states.

Vector states are parametrized by a simplex point ``p`` (squared moduli) and a
torus point ``theta`` (phases): ``v = sum_j exp(i theta_j) sqrt(p_j) e_j``.
The mixing measure is the uniform measure on the simplex times the torus,
optionally reweighted by a Boltzmann factor in the mean-field energy of ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import factorial, prod
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import CapacityError, MismatchError
from .occupation import enumerate_occupations, multinomial, occupation_array, occupation_profile
from .operators import require_hermitian
from .quadrature import integrate_simplex
from .reduction import SIMPLEX_TOL
from .symspace import check_swap_symmetric, to_tensor

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class SimplexPhasePoint:
    p: tuple[float, ...]
    theta: tuple[float, ...]

    def __post_init__(self):
        if len(self.p) != len(self.theta):
            raise MismatchError("p and theta must have the same length")
        if min(self.p) < 0 or abs(sum(self.p) - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"{self.p} is not on the simplex")


def v_map(point: SimplexPhasePoint) -> np.ndarray:
    p = np.asarray(point.p, dtype=float)
    theta = np.asarray(point.theta, dtype=float)
    return np.exp(1j * theta) * np.sqrt(p)


def v_batch(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Vectorized ``v(p, theta)`` for arrays of shape ``(K, d + 1)``."""
    return np.exp(1j * theta) * np.sqrt(p)


def sym_amplitudes(v: np.ndarray, m: int) -> np.ndarray:
    """Components of ``v^{⊗m}`` in the ``m``-boson occupation basis.

    ``<Psi_mm, v^{⊗m}> = sqrt(C(m, mm)) prod_i v_i^{mm_i}``. ``v`` may be a
    single vector or a batch of shape ``(K, d + 1)``.
    """
    v = np.asarray(v)
    single = v.ndim == 1
    vb = np.atleast_2d(v)
    d = vb.shape[1] - 1
    occ = occupation_array(m, d)
    coef = np.sqrt([float(multinomial(m, tuple(o))) for o in occ.tolist()])
    amps = np.ones((vb.shape[0], occ.shape[0]), dtype=complex)
    for i in range(d + 1):
        powers = occ[:, i]
        for k in np.unique(powers):
            if k == 0:
                continue
            cols = powers == k
            amps[:, cols] *= (vb[:, i] ** k)[:, None]
    amps *= coef
    return amps[0] if single else amps


def dirichlet_moment(occ_m: Sequence[int], d: int) -> Fraction:
    """``∫ prod p_i^{m_i}`` against normalized Lebesgue measure on the simplex.

    Closed form ``d! prod m_i! / (m + d)!``.
    """
    occ_m = tuple(occ_m)
    if len(occ_m) != d + 1:
        raise MismatchError(f"occupation {occ_m} has length {len(occ_m)}, expected {d + 1}")
    m = sum(occ_m)
    return Fraction(factorial(d) * prod(factorial(k) for k in occ_m), factorial(m + d))


def limit_uniform_exact(m: int, d: int) -> list[Fraction]:
    """Diagonal of the uniform limit state on ``m`` bosons, in exact rationals."""
    return [multinomial(m, occ) * dirichlet_moment(occ, d) for occ in enumerate_occupations(m, d)]


def limit_uniform(m: int, d: int) -> np.ndarray:
    return np.diag([float(x) for x in limit_uniform_exact(m, d)])


def limit_condensate(m: int, d: int) -> np.ndarray:
    """Pure condensate ``P_{(m, 0, ..., 0)}``, the fixed-temperature limit with a unique ground level."""
    out = np.zeros((len(enumerate_occupations(m, d)),) * 2)
    out[0, 0] = 1.0
    return out


def _boltzmann_moments(p: np.ndarray, occ: np.ndarray, coef: np.ndarray, beta: float, eps: np.ndarray) -> np.ndarray:
    energy = p @ eps
    shift = eps.min() if beta >= 0 else eps.max()
    w = np.exp(-beta * (energy - shift))
    mono = np.prod(p[:, None, :] ** occ[None, :, :], axis=2) * coef
    return np.column_stack([w, mono * w[:, None]])


def limit_noninteracting(
    m: int,
    d: int,
    beta: float,
    epsilons: Sequence[float],
    rtol: float = 1e-8,
    mc_samples: int = 10**6,
    seed: int = 0,
    return_error: bool = False,
):
    """Limit of the ``m``-particle reductions of noninteracting Gibbs states at ``beta / n``.

    Diagonal coefficients ``C(m, mm) ∫ prod p_i^{mm_i} exp(-beta eps·p) / Z``.
    Uses adaptive simplex quadrature for ``d <= 4`` and self-normalized Monte
    Carlo with error bars above that.

    Returns:
        The density matrix, or ``(density, error)`` when ``return_error`` is set,
        where ``error`` is the achieved relative change (quadrature) or per-entry
        standard errors (Monte Carlo).
    """
    eps = np.asarray(epsilons, dtype=float)
    if eps.shape != (d + 1,):
        raise MismatchError(f"need {d + 1} epsilons, got {eps.shape}")
    occ = occupation_array(m, d)
    coef = np.array([float(multinomial(m, tuple(o))) for o in occ.tolist()])
    if d <= 4:
        vals, err = integrate_simplex(lambda p: _boltzmann_moments(p, occ, coef, beta, eps), d, rtol=rtol)
        diag = vals[1:] / vals[0]
    else:
        from .montecarlo import simplex_ratio_estimate

        diag, err = simplex_ratio_estimate(
            lambda p: _boltzmann_moments(p, occ, coef, beta, eps), d, mc_samples, seed
        )
    rho = np.diag(diag)
    return (rho, err) if return_error else rho


@dataclass
class DeFinettiWeight:
    """Density of the mixing measure relative to the uniform simplex × torus measure.

    ``form="uniform"`` is the constant 1. ``form="boltzmann"`` is proportional
    to ``exp(-beta E(v))`` with ``E(v) = <v, T v> + <v⊗v, V v⊗v> / 2``.
    """

    form: Literal["uniform", "boltzmann"] = "uniform"
    beta: float = 0.0
    T: Optional[np.ndarray] = field(default=None, repr=False)
    V: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.form not in ("uniform", "boltzmann"):
            raise ValueError(f"unknown weight form {self.form!r}")
        if self.form == "boltzmann":
            if self.T is None:
                raise ValueError("boltzmann weight needs T")
            self.T = np.asarray(self.T)
            require_hermitian(self.T, "T")
            q = self.T.shape[0]
            self.V = np.zeros((q * q, q * q)) if self.V is None else np.asarray(self.V)
            check_swap_symmetric(self.V)

    def energy(self, v: np.ndarray) -> np.ndarray:
        one = np.einsum("si,ij,sj->s", v.conj(), self.T, v).real
        vv = np.einsum("si,sj->sij", v, v).reshape(v.shape[0], -1)
        two = np.einsum("sa,ab,sb->s", vv.conj(), self.V, vv).real
        return one + two / 2

    def energy_floor(self) -> float:
        """Lower (``beta >= 0``) or upper (``beta < 0``) bound on ``E(v)`` over unit vectors."""
        t_eval = np.linalg.eigvalsh(self.T)
        v_eval = np.linalg.eigvalsh(self.V)
        if self.beta >= 0:
            return float(t_eval[0] + v_eval[0] / 2)
        return float(t_eval[-1] + v_eval[-1] / 2)

    def log_weight(self, v: np.ndarray) -> np.ndarray:
        """Log-weights shifted by a sample-independent constant so they never exceed 0."""
        if self.form == "uniform":
            return np.zeros(v.shape[0])
        return -self.beta * (self.energy(v) - self.energy_floor())

    def log_shift(self) -> float:
        """Constant ``c`` with ``weight = exp(log_weight + c)``."""
        if self.form == "uniform":
            return 0.0
        return -self.beta * self.energy_floor()


def phase_integral(j: Sequence[int], k: Sequence[int], d: int) -> int:
    """Average of ``prod_r exp(i(theta_{j_r} - theta_{k_r}))`` over the torus: 1 or 0."""
    return int(occupation_profile(j, d) == occupation_profile(k, d))


@dataclass(frozen=True)
class PhaseAverageCheck:
    averaged: np.ndarray
    expected: np.ndarray
    max_deviation: float


def phase_average_exact(m: int, d: int, p: Sequence[float], max_tuples: int = 3**8) -> PhaseAverageCheck:
    """Torus average of ``P_v^{⊗m}`` at fixed ``p``, built from index tuples.

    Keeps only pairs of index tuples with equal occupation profiles and compares
    with ``sum_mm C(m, mm) prod p_i^{mm_i} P_mm`` in product coordinates.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (d + 1,) or p.min() < 0 or abs(p.sum() - 1) > SIMPLEX_TOL:
        raise ValueError(f"{p} is not a point of the {d}-simplex")
    q = d + 1
    if q ** (2 * m) > max_tuples:
        raise CapacityError(f"{q ** (2 * m)} index-tuple pairs exceeds {max_tuples}")
    tuples = list(product(range(q), repeat=m))
    profiles = [occupation_profile(t, d) for t in tuples]
    sq = np.sqrt(p)
    out = np.zeros((q**m, q**m))
    for a, ja in enumerate(tuples):
        for b, kb in enumerate(tuples):
            if profiles[a] == profiles[b]:
                out[a, b] = prod(sq[x] for x in ja) * prod(sq[x] for x in kb)
    diag = [multinomial(m, occ) * prod(pi**mi for pi, mi in zip(p, occ)) for occ in enumerate_occupations(m, d)]
    expected = to_tensor(np.diag(diag), m, d)
    return PhaseAverageCheck(out, expected, float(np.abs(out - expected).max()))
