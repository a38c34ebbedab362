"""Bayesian inference for log-odds in stratified contingency tables.

Binomial counts in 2x2xN (and multinomial JxKxN) tables are modeled on
the log-odds scale with normal, normal-inverse-Wishart, or pseudo-count
priors.  A latent-variable augmentation makes every conditional exactly
normal, giving a closed-form EM algorithm for posterior modes and an
exact Gibbs sampler for full posteriors.
"""

__version__ = "0.1.0"

from .em import EMConfig, EMState, e_step, ecm_fit, em_fit, log_posterior, m_step
from .estimators import MultinomialPolyaGammaGibbs, PolyaGammaEM, PolyaGammaGibbs
from .exceptions import (
    ElicitationError,
    ElicitationWarning,
    NumericalError,
    PGTablesError,
    PriorParseError,
    TableParseError,
)
from .gibbs import (
    GibbsConfig,
    PosteriorChain,
    PosteriorSummary,
    batch_means_mcse,
    run_gibbs,
    summarize,
)
from .multinomial import MultinomialChain, multinomial_gibbs, softmax_probs, summarize_multinomial
from .polya_gamma import (
    DEFAULT_TRUNCATION,
    PGParams,
    TruncationConfig,
    pg_laplace,
    pg_mean,
    pg_mean_array,
    pg_sample,
    pg_sample_array,
    pg_tilted_conditional,
)
from .priors import (
    MatrixNormalPrior,
    NIWHyper,
    NormalPrior,
    ZPseudoCounts,
    apply_pseudo_counts,
    iw_from_moments,
    iw_prior_mean,
    load_prior_json,
    moments_from_iw,
    skene_wakefield_prior,
    z_log_density,
)
from .tables import (
    BinomialCell,
    MultinomialTable,
    TwoArmTable,
    kappa,
    load_multinomial_csv,
    load_two_arm_csv,
    mle_log_odds,
    skene_wakefield_table,
)

__all__ = [
    "__version__",
    "BinomialCell",
    "DEFAULT_TRUNCATION",
    "ElicitationError",
    "ElicitationWarning",
    "EMConfig",
    "EMState",
    "GibbsConfig",
    "MatrixNormalPrior",
    "MultinomialChain",
    "MultinomialPolyaGammaGibbs",
    "MultinomialTable",
    "NIWHyper",
    "NormalPrior",
    "NumericalError",
    "PGParams",
    "PGTablesError",
    "PolyaGammaEM",
    "PolyaGammaGibbs",
    "PosteriorChain",
    "PosteriorSummary",
    "PriorParseError",
    "TableParseError",
    "TruncationConfig",
    "TwoArmTable",
    "ZPseudoCounts",
    "apply_pseudo_counts",
    "batch_means_mcse",
    "e_step",
    "ecm_fit",
    "em_fit",
    "iw_from_moments",
    "iw_prior_mean",
    "kappa",
    "load_multinomial_csv",
    "load_prior_json",
    "load_two_arm_csv",
    "log_posterior",
    "m_step",
    "mle_log_odds",
    "moments_from_iw",
    "multinomial_gibbs",
    "pg_laplace",
    "pg_mean",
    "pg_mean_array",
    "pg_sample",
    "pg_sample_array",
    "pg_tilted_conditional",
    "run_gibbs",
    "skene_wakefield_prior",
    "skene_wakefield_table",
    "softmax_probs",
    "summarize",
    "summarize_multinomial",
    "z_log_density",
]
