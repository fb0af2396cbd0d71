"""Empirical copula processes under weighted metrics, with rank statistics,
the Pickands estimator and a two-variate Hardy-Krause calculus."""

from ._validation import DomainError, InvalidArgumentError, QuadratureError
from .copulas import CopulaModel, check_condition_2_1, parse_model, simplex_full
from .empirical import (
    EmpiricalCopula,
    PseudoObservations,
    RankTransformer,
    UniformSample,
    WeightSpec,
    alpha_n,
    bar_C_process,
    empirical_copula,
    generalized_inverse,
    hat_C_process,
    marginal_alpha,
    marginal_beta,
    max_jump,
    oscillation_modulus,
    pseudo_observations,
    weight,
    weighted_alpha_sup,
    weighted_beta_sup,
    weighted_sup_distance,
)
from .experiments import (
    autocorr_study,
    clt_study,
    emit,
    run_conditions_diagnostics,
    run_hk_fuzz,
    run_wdist_study,
)
from .hk import (
    GridFunction2D,
    SignedGridMeasure,
    hk_variation,
    integration_by_parts,
    jordan_decompose,
    ls_integral,
    measure_from_function,
)
from .pickands import PickandsEstimator, b_process, pickands_estimate, pickands_study
from .rank import (
    RankStatistic,
    ScoreFunction,
    parse_score,
    rank_autocorrelation,
    rank_statistic,
    score_admissibility,
    score_gaussian_pml,
    score_vdw,
    score_wilcoxon,
    sigma2_iid,
)
from .rng import stream
from .simulation import GeneratorSpec, generate, lag_pair_sample, parse_generator

__version__ = "0.1.0"
