"""Stein-loss shrinkage estimation for covariance matrices of known rank.

The package covers the factor model X = B Z with a p x r factor B: estimators
of sigma = B B^T from the Gram matrix S = X X^T, the entropy (Stein) loss in
full-rank and rank-aware forms, exact risks of the scaled Gram estimators,
and a reproducible Monte Carlo risk engine with paired dominance checks.
"""

from .errors import (
    ConfigError,
    LeadingBlockError,
    RankError,
    RankWarning,
    SimulationError,
    SpectrumError,
    SteinshrinkError,
    ValidationError,
)
from .matdecomp import (
    EigenPair,
    LqFactorization,
    SymPsdMatrix,
    log_pos_eig_product,
    lq_positive,
    pinv_psd,
    pos_eig_product,
    rank_tolerance,
    sample_lq,
    sym_eigen_top,
)
from .randmat import (
    CovarianceModel,
    SampleData,
    SeedSpec,
    draw_sample,
    scenario_sigma,
    singular_model,
    standard_normal_matrix,
)
from .loss import (
    ExactRisk,
    digamma,
    e_log_chisq,
    exact_risk_bc,
    exact_risk_js,
    pade_bounds,
    stein_loss,
    stein_loss_singular,
)
from .estimators import (
    Estimate,
    SampleContext,
    ShrinkageSpec,
    b_value,
    best_constant,
    canonical_label,
    empirical_bayes,
    haff,
    james_stein,
    js_weights,
    lambda_bounds,
    make_estimator,
    modified_js,
    modified_st,
    shrinkage,
    solve_lambda,
    stein_orth,
    unbiased,
)
from .risksim import (
    DominanceVerdict,
    EstimatorRisk,
    ExperimentConfig,
    REFERENCE_RISKS,
    RiskReport,
    SteinHaffResult,
    Table1Row,
    dominance_report,
    simulate_risk,
    stein_haff_check,
    table1_csv,
    table1_suite,
)

__version__ = "0.1.0"
