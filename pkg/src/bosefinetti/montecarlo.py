"""Monte Carlo over the simplex × torus with reproducible, mergeable blocks.

Samples are drawn in fixed-size blocks. Block ``b`` of stream ``s`` under
seed ``seed`` uses a Philox generator keyed by ``(seed, s, b)``, and block
statistics are merged in block order, so results do not depend on how many
workers evaluate the blocks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .definetti import DeFinettiWeight, sym_amplitudes, v_batch
from .quadrature import integrate_simplex
from .occupation import sym_dim

BLOCK_SIZE = 4096
WORKERS_ENV = "BOSEFINETTI_WORKERS"

STREAM_MOMENT = 0
STREAM_FREE_ENERGY = 1
STREAM_SIMPLEX = 2


def worker_count(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(ss))


def sample_simplex(rng: np.random.Generator, size: int, d: int) -> np.ndarray:
    """Uniform points on the simplex (Dirichlet(1, ..., 1)) from normalized exponentials."""
    e = rng.standard_exponential((size, d + 1))
    return e / e.sum(axis=1, keepdims=True)


def sample_simplex_torus(rng: np.random.Generator, size: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    p = sample_simplex(rng, size, d)
    theta = rng.uniform(0.0, 2 * np.pi, (size, d + 1))
    return p, theta


def _block_sizes(samples: int, block_size: int) -> list[int]:
    full, rest = divmod(samples, block_size)
    return [block_size] * full + ([rest] if rest else [])


@dataclass
class MomentAccumulator:
    """Streaming statistics of weighted samples ``Y_s = w_s X_s`` and weights ``w_s``.

    Tracks the mean and centered second moment of ``Y`` (entrywise), of ``w``,
    and their centered cross moment; enough for the self-normalized ratio
    estimate ``mean(Y) / mean(w)`` and its delta-method standard error.
    For vector-valued samples the full co-moment matrix of ``Y`` is kept too.
    Merging follows the pairwise update of Chan et al.
    """

    count: int = 0
    mean: Optional[np.ndarray] = None
    m2: Optional[np.ndarray] = None
    w_mean: float = 0.0
    w_m2: float = 0.0
    cross: Optional[np.ndarray] = None
    comoment: Optional[np.ndarray] = None

    @classmethod
    def from_batch(cls, x: np.ndarray, w: Optional[np.ndarray] = None) -> "MomentAccumulator":
        k = x.shape[0]
        w = np.ones(k) if w is None else np.asarray(w, dtype=float)
        y = x * w.reshape((k,) + (1,) * (x.ndim - 1))
        mean = y.mean(axis=0)
        dy = y - mean
        w_mean = float(w.mean())
        dw = w - w_mean
        return cls(
            count=k,
            mean=mean,
            m2=(np.abs(dy) ** 2).sum(axis=0),
            w_mean=w_mean,
            w_m2=float(dw @ dw),
            cross=np.tensordot(dw, dy, axes=(0, 0)),
            comoment=dy.conj().T @ dy if x.ndim == 2 else None,
        )

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        n = self.count + other.count
        f = other.count / n
        g = self.count * other.count / n
        dy = other.mean - self.mean
        dw = other.w_mean - self.w_mean
        return MomentAccumulator(
            count=n,
            mean=self.mean + dy * f,
            m2=self.m2 + other.m2 + np.abs(dy) ** 2 * g,
            w_mean=self.w_mean + dw * f,
            w_m2=self.w_m2 + other.w_m2 + dw * dw * g,
            cross=self.cross + other.cross + dw * dy * g,
            comoment=None
            if self.comoment is None
            else self.comoment + other.comoment + np.outer(dy.conj(), dy) * g,
        )

    def ratio(self) -> np.ndarray:
        return self.mean / self.w_mean

    def ratio_stderr(self) -> np.ndarray:
        """Delta-method standard error of :meth:`ratio`, entrywise."""
        if self.count < 2:
            raise ValueError("need at least two samples for error bars")
        r = self.ratio()
        resid = self.m2 - 2 * np.real(np.conj(r) * self.cross) + np.abs(r) ** 2 * self.w_m2
        resid = np.maximum(resid, 0.0)
        return np.sqrt(resid / (self.count * (self.count - 1))) / abs(self.w_mean)

    def ratio_bias(self) -> np.ndarray:
        """Leading ``O(1/N)`` bias estimate of the self-normalized ratio."""
        r = self.ratio()
        n = self.count
        return (r * self.w_m2 - self.cross) / (n * (n - 1) * self.w_mean**2)

    def stderr(self) -> np.ndarray:
        """Standard error of ``mean(Y)``."""
        if self.count < 2:
            raise ValueError("need at least two samples for error bars")
        return np.sqrt(self.m2 / (self.count * (self.count - 1)))

    def covariance(self) -> np.ndarray:
        """Sample covariance matrix of vector-valued ``Y``."""
        if self.comoment is None:
            raise ValueError("co-moment only tracked for vector-valued samples")
        return self.comoment / (self.count - 1)


def run_blocks(
    fn: Callable[[np.random.Generator, int], MomentAccumulator],
    samples: int,
    seed: int,
    stream: int,
    workers: Optional[int] = None,
    block_size: int = BLOCK_SIZE,
) -> MomentAccumulator:
    sizes = _block_sizes(samples, block_size)
    jobs = [(block_rng(seed, stream, b), size) for b, size in enumerate(sizes)]
    nw = worker_count(workers)
    if nw == 1:
        parts = [fn(rng, size) for rng, size in jobs]
    else:
        with ThreadPoolExecutor(nw) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    acc = MomentAccumulator()
    for part in parts:
        acc = acc.merge(part)
    return acc


@dataclass(frozen=True)
class MomentEstimate:
    density: np.ndarray
    stderr: np.ndarray
    z: float
    z_stderr: float
    bias: np.ndarray
    trace_deviation: float
    samples: int
    seed: int


def mc_estimate_moment(
    m: int,
    d: int,
    weight: DeFinettiWeight,
    samples: int,
    seed: int,
    workers: Optional[int] = None,
) -> MomentEstimate:
    """Estimate ``∫ P_v^{⊗m} weight(v)`` on the ``m``-boson symmetric subspace.

    ``p`` is uniform on the simplex and ``theta`` uniform on the torus; the
    weight is self-normalized on the same sample stream, which also yields
    the estimate of the normalizing constant ``Z``.
    """
    if samples < 2:
        raise ValueError("need at least two samples for error bars")
    sym_dim(m, d)

    def block(rng: np.random.Generator, size: int) -> MomentAccumulator:
        p, theta = sample_simplex_torus(rng, size, d)
        v = v_batch(p, theta)
        a = sym_amplitudes(v, m)
        x = a[:, :, None] * a.conj()[:, None, :]
        log_w = weight.log_weight(v)
        if np.any(log_w > 0) or not np.all(np.isfinite(log_w)):
            raise OverflowError("importance weight overflow")
        return MomentAccumulator.from_batch(x, np.exp(log_w))

    acc = run_blocks(block, samples, seed, STREAM_MOMENT, workers)
    est = acc.ratio()
    trace = np.trace(est).real
    density = est / trace
    density = (density + density.conj().T) / 2
    shift = np.exp(weight.log_shift())
    z_se = np.sqrt(acc.w_m2 / (acc.count * (acc.count - 1)))
    return MomentEstimate(
        density=density,
        stderr=acc.ratio_stderr(),
        z=float(acc.w_mean * shift),
        z_stderr=float(z_se * shift),
        bias=acc.ratio_bias(),
        trace_deviation=float(abs(trace - 1.0)),
        samples=samples,
        seed=seed,
    )


def simplex_ratio_estimate(
    f: Callable[[np.ndarray], np.ndarray], d: int, samples: int, seed: int, workers: Optional[int] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Self-normalized estimate of ``∫ f[1:] / ∫ f[0]`` over the uniform simplex.

    ``f`` maps simplex points ``(K, d + 1)`` to ``(K, 1 + D)``; column 0 is the
    (positive) weight and columns ``1:`` are the weighted integrands.
    """

    def block(rng, size):
        vals = f(sample_simplex(rng, size, d))
        w = vals[:, 0]
        return MomentAccumulator.from_batch(vals[:, 1:] / w[:, None], w)

    acc = run_blocks(block, samples, seed, STREAM_SIMPLEX, workers)
    return acc.ratio(), acc.ratio_stderr()


@dataclass(frozen=True)
class FreeEnergyEstimate:
    value: float
    stderr: float
    norm: float
    norm_stderr: float


def free_energy(
    density: Callable[[np.ndarray, np.ndarray], np.ndarray],
    beta: float,
    h: np.ndarray,
    samples: int,
    seed: int,
    norm_tol: float = 1e-6,
    workers: Optional[int] = None,
) -> FreeEnergyEstimate:
    """Monte Carlo estimate of ``∫ <v, H v> f + (1/beta) ∫ f ln f``.

    ``density(p, theta)`` is a density with respect to the uniform measure on
    simplex × torus. The estimate is self-normalized on the sample: with
    sample means ``A = <E f>``, ``B = <f>``, ``C = <f ln f>`` it returns
    ``A/B + (C/B - ln B)/beta``, with a delta-method standard error. The same
    seed gives the same sample points for every density, so differences
    between densities are estimated with common random numbers.

    Raises:
        ValueError: if ``beta == 0``, ``density`` is not positive on the sample,
            or its sample mean differs from 1 by more than ``norm_tol`` plus
            five standard errors.
    """
    if beta == 0:
        raise ValueError("free energy needs beta != 0")
    h = np.asarray(h)
    d = h.shape[0] - 1

    def block(rng, size):
        p, theta = sample_simplex_torus(rng, size, d)
        v = v_batch(p, theta)
        f = np.asarray(density(p, theta), dtype=float)
        if np.any(f <= 0) or not np.all(np.isfinite(f)):
            raise ValueError("density must be strictly positive and finite")
        e = np.einsum("si,ij,sj->s", v.conj(), h, v).real
        stats = np.column_stack([e * f, f, f * np.log(f)])
        return MomentAccumulator.from_batch(stats)

    acc = run_blocks(block, samples, seed, STREAM_FREE_ENERGY, workers)
    a, b, c = acc.mean
    n = acc.count
    cov = acc.covariance().real
    grad = np.array([1 / b, -a / b**2 - c / (beta * b**2) - 1 / (beta * b), 1 / (beta * b)])
    value = a / b + (c / b - np.log(b)) / beta
    stderr = float(np.sqrt(max(grad @ cov @ grad, 0.0) / n))
    b_se = float(np.sqrt(cov[1, 1] / n))
    if abs(b - 1.0) > norm_tol + 5 * b_se:
        raise ValueError(f"density is not normalized: sample mean {b:.6g} ± {b_se:.2g}")
    return FreeEnergyEstimate(float(value), stderr, float(b), b_se)



def boltzmann_density(beta: float, h: np.ndarray) -> tuple[Callable[[np.ndarray, np.ndarray], np.ndarray], float]:
    """Density ``exp(-beta <v, H v>) / Z`` on simplex × torus, with ``Z`` by quadrature.

    The pushforward of the uniform simplex × torus measure under ``v`` is the
    unitarily invariant measure on the unit sphere, so ``Z`` only depends on
    the spectrum of ``H`` and reduces to a simplex integral.
    """
    h = np.asarray(h)
    d = h.shape[0] - 1
    eps = np.linalg.eigvalsh(h)
    shift = eps.min() if beta >= 0 else eps.max()
    mass, _ = integrate_simplex(lambda p: np.exp(-beta * (p @ eps - shift)), d)
    z = float(mass) * np.exp(-beta * shift)

    def density(p: np.ndarray, theta: np.ndarray) -> np.ndarray:
        v = v_batch(p, theta)
        e = np.einsum("si,ij,sj->s", v.conj(), h, v).real
        return np.exp(-beta * (e - shift)) * (np.exp(-beta * shift) / z)

    return density, z
