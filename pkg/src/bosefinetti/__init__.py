"""Bosonic Gibbs ensembles on finite-dimensional spaces and their de Finetti limits."""

from .convergence import sweep_to_limit, verify_claim, verify_free_energy, verify_series
from .definetti import (
    DeFinettiWeight,
    SimplexPhasePoint,
    dirichlet_moment,
    limit_condensate,
    limit_noninteracting,
    limit_uniform,
    phase_average_exact,
    v_map,
)
from .ensembles import EnsembleSpec, gibbs_meanfield, gibbs_noninteracting, uniform_ensemble
from .errors import CapacityError, MismatchError, QuadratureError
from .montecarlo import MomentAccumulator, free_energy, mc_estimate_moment
from .occupation import enumerate_occupations, multinomial, occupation_profile, sym_dim
from .operators import hermitian_exp, permutation_operator, symmetrize, tensor_power, trace_distance
from .reduction import reduce_diagonal_ensemble, reduce_full, reduce_projector, reduce_sym
from .symspace import embedding, lift_one_body, lift_two_body_meanfield, pair_operator

__all__ = [
    "CapacityError",
    "DeFinettiWeight",
    "EnsembleSpec",
    "MismatchError",
    "MomentAccumulator",
    "QuadratureError",
    "SimplexPhasePoint",
    "dirichlet_moment",
    "embedding",
    "enumerate_occupations",
    "free_energy",
    "gibbs_meanfield",
    "gibbs_noninteracting",
    "hermitian_exp",
    "lift_one_body",
    "lift_two_body_meanfield",
    "limit_condensate",
    "limit_noninteracting",
    "limit_uniform",
    "mc_estimate_moment",
    "multinomial",
    "occupation_profile",
    "pair_operator",
    "permutation_operator",
    "phase_average_exact",
    "reduce_diagonal_ensemble",
    "reduce_full",
    "reduce_projector",
    "reduce_sym",
    "sweep_to_limit",
    "sym_dim",
    "symmetrize",
    "tensor_power",
    "trace_distance",
    "uniform_ensemble",
    "v_map",
    "verify_claim",
    "verify_free_energy",
    "verify_series",
]
