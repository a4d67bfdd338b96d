"""Numerical checks that finite-n reductions approach their limit states."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from math import factorial
from typing import Iterator, Literal, Optional, Sequence

import numpy as np
from scipy.special import gammainc, i0

from .definetti import DeFinettiWeight, limit_condensate, limit_noninteracting, limit_uniform
from .ensembles import EnsembleSpec
from .errors import CapacityError
from .montecarlo import (
    FreeEnergyEstimate,
    MomentAccumulator,
    boltzmann_density,
    free_energy,
    mc_estimate_moment,
    run_blocks,
    sample_simplex_torus,
)
from .quadrature import integrate_simplex
from .operators import hermitian_exp, trace_norm, trace_distance
from .reduction import reduce_diagonal_weights, reduce_full, reduce_sym
from .symspace import lift_two_body_meanfield, pair_operator, to_tensor

LimitKind = Literal["uniform", "noninteracting", "condensate", "meanfield"]
CSV_COLUMNS = ("n", "m", "beta", "scaled", "trace_distance", "sigma_ref", "wall_time_s")


@dataclass
class SweepRow:
    n: int
    m: int
    beta: float
    scaled: bool
    trace_distance: float
    sigma_ref: float
    wall_time_s: float
    skipped: bool = False


@dataclass
class SweepResult:
    rows: list[SweepRow]
    metadata: dict = field(default_factory=dict)

    @property
    def distances(self) -> np.ndarray:
        return np.array([r.trace_distance for r in self.rows])

    def to_csv(self, record_timings: bool = False) -> str:
        """CSV text with 17 significant digits; timings are ``nan`` unless recorded."""
        lines = [",".join(CSV_COLUMNS)]
        for r in self.rows:
            wall = _fmt(r.wall_time_s) if record_timings else "nan"
            lines.append(
                f"{r.n},{r.m},{_fmt(r.beta)},{str(r.scaled).lower()},"
                f"{_fmt(r.trace_distance)},{_fmt(r.sigma_ref)},{wall}"
            )
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def reference_sigma(stderr: np.ndarray) -> float:
    """Trace-distance scale of an entrywise-uncertain reference.

    ``(1/2) ||delta||_1 <= (1/2) sqrt(D) ||delta||_F`` with ``||delta||_F``
    estimated by the root sum of squared entrywise standard errors.
    """
    dim = stderr.shape[0]
    return float(0.5 * np.sqrt(dim * np.sum(stderr**2)))


def limit_state(
    spec: EnsembleSpec,
    limit: LimitKind,
    m: int,
    mc_samples: int = 10**6,
    seed: int = 0,
    workers: Optional[int] = None,
) -> tuple[np.ndarray, float, dict]:
    """Limit object for a sweep: ``(density, sigma_ref, info)``."""
    d = spec.d
    if limit == "uniform":
        return limit_uniform(m, d), 0.0, {}
    if limit == "condensate":
        if spec.kind != "noninteracting":
            raise ValueError("condensate limit is defined for noninteracting ensembles")
        eps = np.asarray(spec.epsilons, dtype=float)
        if not np.all(eps[1:] > eps[0]):
            # Degenerate ground levels have no single condensate state.
            raise ValueError("condensate limit needs epsilon_0 strictly below the other levels")
        return limit_condensate(m, d), 0.0, {}
    if limit == "noninteracting":
        t = spec.one_body()
        if np.count_nonzero(t - np.diag(np.diag(t))):
            raise ValueError("noninteracting limit needs a diagonal one-body operator")
        rho, err = limit_noninteracting(m, d, spec.beta, np.diag(t).real, return_error=True)
        return rho, 0.0, {"quadrature_relative_change": float(np.max(err))}
    if limit == "meanfield":
        weight = DeFinettiWeight("boltzmann", spec.beta, spec.one_body(), spec.two_body())
        est = mc_estimate_moment(m, d, weight, mc_samples, seed, workers)
        info = {"z": est.z, "z_stderr": est.z_stderr, "trace_deviation": est.trace_deviation}
        return est.density, reference_sigma(est.stderr), info
    raise ValueError(f"unknown limit {limit!r}")


def finite_reduction(spec: EnsembleSpec, n: int, m: int) -> np.ndarray:
    """``m``-particle reduction of the ensemble at ``n`` particles, in the occupation basis."""
    if spec.kind == "meanfield":
        return reduce_sym(spec.density(n), n, m, spec.d)
    return np.diag(reduce_diagonal_weights(spec.weights(n), n, m, spec.d))


def iter_sweep(
    spec: EnsembleSpec,
    ref: np.ndarray,
    sigma: float,
    m: int,
    n_list: Sequence[int],
) -> Iterator[SweepRow]:
    """Yield one row per ``n`` (ascending) against a precomputed limit state."""
    for n in sorted(n_list):
        t0 = time.perf_counter()
        try:
            dist = min(max(trace_distance(finite_reduction(spec, n, m), ref), 0.0), 1.0)
            skipped = False
        except CapacityError:
            dist, skipped = float("nan"), True
        yield SweepRow(n, m, float(spec.beta), spec.scaled, dist, sigma, time.perf_counter() - t0, skipped)


def sweep_to_limit(
    spec: EnsembleSpec,
    limit: LimitKind,
    m: int,
    n_list: Sequence[int],
    mc_samples: int = 10**6,
    seed: int = 0,
    workers: Optional[int] = None,
) -> SweepResult:
    """Trace distance of finite-n reductions to a limit state, for each ``n`` in ``n_list``.

    Rows that exceed capacity are kept with ``skipped=True`` and a NaN distance.
    """
    if any(n < m for n in n_list):
        raise ValueError(f"every n must be >= m={m}")
    ref, sigma, info = limit_state(spec, limit, m, mc_samples, seed, workers)
    rows = list(iter_sweep(spec, ref, sigma, m, n_list))
    meta = {"limit": limit, "seed": seed, "mc_samples": mc_samples if limit == "meanfield" else None, **info}
    return SweepResult(rows, meta)


@dataclass
class ClaimRow:
    n: int
    deviation: float


@dataclass
class ClaimResult:
    j: int
    m: int
    d: int
    rhs: np.ndarray
    rows: list[ClaimRow]

    @property
    def deviations(self) -> np.ndarray:
        return np.array([r.deviation for r in self.rows])


def _power_moment(h: np.ndarray, j: int, n: int, m: int, d: int) -> np.ndarray:
    """``{(H_n)^j Sigma_n}_{:m} / Tr Sigma_n`` in the ``m``-boson occupation basis."""
    dim = h.shape[0]
    hj = np.linalg.matrix_power(h, j) / dim
    return reduce_sym(hj, n, m, d)


def claim_rhs(j: int, m: int, t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``2^{-j} {W_{m+1,m+2} ... W_{m+2j-1,m+2j} S_{m+2j}}_{:m}`` in product coordinates."""
    q = t.shape[0]
    d = q - 1
    total = m + 2 * j
    s = to_tensor(limit_uniform(total, d), total, d)
    w = pair_operator(t, v)
    left = np.eye(q**m)
    for _ in range(j):
        left = np.kron(left, w)
    return reduce_full(left @ s, total, m, d) / 2**j


def verify_claim(
    j: int, m: int, n_list: Sequence[int], t: np.ndarray, v: np.ndarray, d: int
) -> ClaimResult:
    """Max-entry deviation between ``n^{-j} {(H_n)^j Sigma_n}_{:m} / Tr Sigma_n`` and its limit."""
    rhs = claim_rhs(j, m, t, v)
    rows = []
    for n in sorted(n_list):
        h = lift_two_body_meanfield(t, v, n)
        lhs = to_tensor(_power_moment(h, j, n, m, d), m, d) / float(n) ** j
        rows.append(ClaimRow(n, float(np.abs(lhs - rhs).max())))
    return ClaimResult(j, m, d, rhs, rows)


@dataclass
class SeriesResult:
    truncated: np.ndarray
    exact: np.ndarray
    remainder_bound: float
    deviation: float
    atol: float = 1e-12

    @property
    def within_bound(self) -> bool:
        # atol absorbs roundoff once the analytic remainder drops below it.
        return self.deviation <= self.remainder_bound + self.atol


def exp_tail(x: float, order: int) -> float:
    """``sum_{j > order} x^j / j!`` for ``x >= 0``."""
    return float(np.exp(x) * gammainc(order + 1, x))


def verify_series(
    order: int, beta: float, n: int, m: int, t: np.ndarray, v: np.ndarray, d: int
) -> SeriesResult:
    """Truncate the exponential series of the scaled Gibbs operator and bound the remainder.

    Compares ``sum_{j<=order} (-beta/n)^j / j! {(H_n)^j Sigma_n}_{:m} / Tr Sigma_n``
    with ``{exp(-beta H_n / n) Sigma_n}_{:m} / Tr Sigma_n`` in trace norm, against
    ``sum_{j>order} |beta|^j ||W||^j / j!``.
    """
    h = lift_two_body_meanfield(t, v, n)
    dim = h.shape[0]
    exact = reduce_sym(hermitian_exp(h, -beta / n) / dim, n, m, d)
    truncated = np.zeros_like(exact, dtype=np.result_type(exact, h))
    hj = np.eye(dim, dtype=h.dtype)
    for k in range(order + 1):
        if k:
            hj = hj @ h
        truncated = truncated + (-beta / n) ** k / factorial(k) * reduce_sym(hj / dim, n, m, d)
    w_norm = float(np.linalg.norm(pair_operator(t, v), 2))
    bound = exp_tail(abs(beta) * w_norm, order)
    return SeriesResult(truncated, exact, bound, trace_norm(truncated - exact))


def sweep_rows_as_dicts(result: SweepResult) -> list[dict]:
    return [asdict(r) for r in result.rows]


@dataclass
class FreeEnergyCheck:
    optimum: FreeEnergyEstimate
    log_partition_value: float
    perturbed: list[FreeEnergyEstimate]

    def optimum_matches(self, n_sigma: float = 3.0) -> bool:
        return abs(self.optimum.value - self.log_partition_value) <= n_sigma * self.optimum.stderr

    def optimum_is_minimal(self, n_sigma: float = 3.0) -> list[bool]:
        f0 = self.optimum
        return [
            f0.value <= f.value + n_sigma * np.hypot(f0.stderr, f.stderr) for f in self.perturbed
        ]


def verify_free_energy(
    beta: float,
    h: np.ndarray,
    samples: int,
    seed: int,
    perturbations: int = 20,
    strength: float = 1.0,
    workers: Optional[int] = None,
) -> FreeEnergyCheck:
    """Compare the free energy of the Boltzmann density with random perturbations of it.

    Each perturbation multiplies the Boltzmann density by
    ``exp(a·p + b cos(theta_0 - theta_1 + phi))`` with random ``a, b, phi``
    drawn from a generator seeded by ``seed`` and renormalizes.
    """
    h = np.asarray(h)
    d = h.shape[0] - 1
    if d < 1:
        raise ValueError("perturbations need at least two levels")
    base, z = boltzmann_density(beta, h)
    target = -np.log(z) / beta
    opt = free_energy(base, beta, h, samples, seed, workers=workers)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(99,)))
    diagonal = not np.count_nonzero(h - np.diag(np.diag(h)))
    eps = np.diag(h).real
    results = []
    for k in range(perturbations):
        a = rng.normal(0.0, strength, d + 1)
        b = abs(rng.normal(0.0, strength))
        phi = rng.uniform(0, 2 * np.pi)

        def raw(p, theta, a=a, b=b, phi=phi):
            return base(p, theta) * np.exp(p @ a + b * np.cos(theta[:, 0] - theta[:, 1] + phi))

        if diagonal:
            # Boltzmann factor and tilt combine into exp((a - beta eps)·p); phases give I0(b).
            mass, _ = integrate_simplex(lambda p: np.exp(p @ (a - beta * eps) - np.max(a - beta * eps)), d)
            norm = float(mass) * np.exp(np.max(a - beta * eps)) / z * i0(b)
        else:
            norm = _mc_mean(raw, d, 4 * samples, seed, 1000 + k, workers)
        results.append(free_energy(lambda p, t, raw=raw, norm=norm: raw(p, t) / norm, beta, h, samples, seed, workers=workers))
    return FreeEnergyCheck(opt, float(target), results)


def _mc_mean(f, d: int, samples: int, seed: int, stream: int, workers) -> float:
    def block(rng, size):
        p, theta = sample_simplex_torus(rng, size, d)
        return MomentAccumulator.from_batch(np.asarray(f(p, theta))[:, None])

    return float(run_blocks(block, samples, seed, stream, workers).mean[0])
