"""Estimator-style front ends over the EM and Gibbs engines.

These follow the scikit-learn conventions: hyperparameters are plain
constructor arguments (so ``get_params``/``set_params``/``clone`` work),
``fit`` consumes a table and stores results in trailing-underscore
attributes, and reading results before fitting raises ``NotFittedError``.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .em import EMConfig, ecm_fit, em_fit
from .gibbs import GibbsConfig, run_gibbs, summarize
from .multinomial import multinomial_gibbs, summarize_multinomial
from .polya_gamma import DEFAULT_TRUNCATION, TruncationConfig
from .priors import MatrixNormalPrior, NIWHyper, NormalPrior, ZPseudoCounts
from .tables import MultinomialTable, TwoArmTable

__all__ = ["PolyaGammaEM", "PolyaGammaGibbs", "MultinomialPolyaGammaGibbs"]


def _as_two_arm(X):
    if isinstance(X, TwoArmTable):
        return X
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != 4:
        raise ValueError(
            "X must be a TwoArmTable or an (N, 4) array of "
            "(treatment successes, treatment total, control successes, control total)"
        )
    return TwoArmTable(X[:, [0, 2]], X[:, [1, 3]])


def _pseudo(pseudo_a, pseudo_b):
    if pseudo_a is None and pseudo_b is None:
        return None
    return ZPseudoCounts(0.5 if pseudo_a is None else pseudo_a, 0.5 if pseudo_b is None else pseudo_b)


class PolyaGammaEM(BaseEstimator):
    """MAP log-odds estimation for two-arm tables.

    With update_hyper="none" the bivariate normal prior (prior_mu,
    prior_sigma) stays fixed; other modes re-estimate mu (and sigma)
    each sweep, optionally penalized toward the inverse-Wishart
    (niw_d, niw_B).  pseudo_a/pseudo_b fold in Z-prior pseudo-counts.
    """

    def __init__(
        self,
        prior_mu=(0.0, 0.0),
        prior_sigma=((4.0, 0.0), (0.0, 4.0)),
        tol=1e-8,
        max_iter=10_000,
        update_hyper="none",
        pseudo_a=None,
        pseudo_b=None,
        niw_d=None,
        niw_B=None,
    ):
        self.prior_mu = prior_mu
        self.prior_sigma = prior_sigma
        self.tol = tol
        self.max_iter = max_iter
        self.update_hyper = update_hyper
        self.pseudo_a = pseudo_a
        self.pseudo_b = pseudo_b
        self.niw_d = niw_d
        self.niw_B = niw_B

    def fit(self, X, y=None):
        table = _as_two_arm(X)
        prior = NormalPrior(self.prior_mu, self.prior_sigma)
        config = EMConfig(tol=self.tol, max_iter=self.max_iter, update_hyper=self.update_hyper)
        z = _pseudo(self.pseudo_a, self.pseudo_b)
        if (self.niw_d is None) != (self.niw_B is None):
            raise ValueError("niw_d and niw_B must be given together")
        penalty = None if self.niw_d is None else NIWHyper(self.niw_d, self.niw_B)
        if self.update_hyper == "none":
            if penalty is not None:
                raise ValueError("an inverse-Wishart penalty requires update_hyper='mu_and_sigma'")
            state = em_fit(table, prior, z=z, config=config)
        else:
            state = ecm_fit(table, prior, z=z, config=config, niw_penalty=penalty)
        self.psi_ = state.psi
        self.omega_ = state.omega
        self.mu_ = state.mu
        self.sigma_ = state.sigma
        self.n_iter_ = state.n_iter
        self.converged_ = state.converged
        self.log_posterior_ = state.log_posterior
        return self

    def predict(self, X=None):
        """Fitted success probabilities per cell, shape (N, 2)."""
        check_is_fitted(self, "psi_")
        return 1.0 / (1.0 + np.exp(-self.psi_))


class PolyaGammaGibbs(BaseEstimator):
    """Posterior sampling for two-arm tables.

    Passing (niw_d, niw_B) activates the inverse-Wishart hyperprior on
    sigma with a flat prior on mu; otherwise (prior_mu, prior_sigma)
    are held fixed.
    """

    def __init__(
        self,
        prior_mu=(0.0, 0.0),
        prior_sigma=((4.0, 0.0), (0.0, 4.0)),
        niw_d=None,
        niw_B=None,
        pseudo_a=None,
        pseudo_b=None,
        iters=20_000,
        burnin=5_000,
        thin=1,
        seed=0,
        trunc_k=None,
    ):
        self.prior_mu = prior_mu
        self.prior_sigma = prior_sigma
        self.niw_d = niw_d
        self.niw_B = niw_B
        self.pseudo_a = pseudo_a
        self.pseudo_b = pseudo_b
        self.iters = iters
        self.burnin = burnin
        self.thin = thin
        self.seed = seed
        self.trunc_k = trunc_k

    def _config(self):
        trunc = DEFAULT_TRUNCATION if self.trunc_k is None else TruncationConfig(self.trunc_k)
        return GibbsConfig(
            iters=self.iters, burnin=self.burnin, thin=self.thin, seed=self.seed, trunc=trunc
        )

    def fit(self, X, y=None):
        table = _as_two_arm(X)
        if (self.niw_d is None) != (self.niw_B is None):
            raise ValueError("niw_d and niw_B must be given together")
        if self.niw_d is not None:
            prior = NIWHyper(self.niw_d, self.niw_B)
        else:
            prior = NormalPrior(self.prior_mu, self.prior_sigma)
        chain = run_gibbs(table, prior, config=self._config(), z=_pseudo(self.pseudo_a, self.pseudo_b))
        self.chain_ = chain
        self.summary_ = summarize(chain)
        self.psi_ = chain.psi.mean(axis=0)
        self.mu_ = chain.mu.mean(axis=0)
        self.sigma_ = chain.sigma.mean(axis=0)
        return self

    def predict(self, X=None):
        """Posterior-mean success probabilities per cell, shape (N, 2)."""
        check_is_fitted(self, "chain_")
        return (1.0 / (1.0 + np.exp(-self.chain_.psi))).mean(axis=0)


class MultinomialPolyaGammaGibbs(BaseEstimator):
    """Posterior sampling for J x K x N multinomial tables.

    Defaults build a weakly-informative matrix-normal prior at fit time:
    zero mean, identity row and column covariances sized to the table.
    """

    def __init__(
        self,
        M=None,
        sigma_rows=None,
        sigma_cols=None,
        iters=20_000,
        burnin=5_000,
        thin=1,
        seed=0,
        trunc_k=None,
    ):
        self.M = M
        self.sigma_rows = sigma_rows
        self.sigma_cols = sigma_cols
        self.iters = iters
        self.burnin = burnin
        self.thin = thin
        self.seed = seed
        self.trunc_k = trunc_k

    def fit(self, X, y=None):
        if not isinstance(X, MultinomialTable):
            raise ValueError("X must be a MultinomialTable")
        _, n_treat, n_out = X.shape
        free = n_out - 1
        prior = MatrixNormalPrior(
            np.zeros((n_treat, free)) if self.M is None else self.M,
            np.eye(n_treat) if self.sigma_rows is None else self.sigma_rows,
            np.eye(free) if self.sigma_cols is None else self.sigma_cols,
        )
        trunc = DEFAULT_TRUNCATION if self.trunc_k is None else TruncationConfig(self.trunc_k)
        config = GibbsConfig(
            iters=self.iters, burnin=self.burnin, thin=self.thin, seed=self.seed, trunc=trunc
        )
        chain = multinomial_gibbs(X, prior, config=config)
        self.chain_ = chain
        self.summary_ = summarize_multinomial(chain)
        self.psi_ = chain.psi.mean(axis=0)
        self.probs_ = chain.mean_probs()
        return self

    def predict(self, X=None):
        """Posterior-mean outcome probabilities, shape (N, J, K)."""
        check_is_fitted(self, "chain_")
        return self.probs_
