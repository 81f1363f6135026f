"""Exact and simulated cover times of finite Markov chains, checked against
hitting-time and generic-chaining bounds.
"""
__version__ = "0.1.0"

from .chain import (
    MarkovChain,
    check_metric,
    commute_distance,
    escape_probability,
    expected_hitting_times,
    is_reversible,
    load_chain,
    return_times,
    sqrt_metric,
    stationary_distribution,
)
from .chaining import (
    AdmissibleSequence,
    GammaEstimate,
    NetSequence,
    covering_radius,
    dudley_bound,
    exact_gamma,
    functional_value,
    gamma_lower_packing,
    greedy_gamma_upper,
    loglog_comparison,
)
from .cover import (
    CoverTimeEstimate,
    bdnp_restart_check,
    chaining_cover_certificate,
    cov,
    cov_minus,
    cov_plus,
    exact_cover_expectation,
    excursion_visit_law,
    key_estimate_check,
    kklv_tail_check,
    matthews_bounds,
    matthews_refined_lower,
    matthews_sandwich,
    mc_cover_time,
    monotonicity_check,
)
from .errors import (
    CapacityError,
    ConfigError,
    CovchainError,
    NumericalError,
    PreconditionError,
    StructuralError,
    ValidationError,
)
from .growth import (
    GrowthInstance,
    check_growth_instance,
    cycle_identity_check,
    growth_step_verify,
    one_way_sparsify,
)
from .kernels import BACKEND
from .reports import BoundReport
from .zoo import N, kklv_tree, make_zoo_chain, tree_spec
