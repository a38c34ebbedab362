"""MAP estimation of per-center log-odds by EM, with optional hyperparameter updates.

The complete-data model augments each binomial cell with a latent
Polya-Gamma precision omega.  Conditional on the current iterate the
E step replaces omega by its closed-form mean n' tanh(psi/2)/(2 psi);
the M step is then a per-center 2x2 ridge regression.  With
``update_hyper`` set, additional conditional-maximization steps update
mu (sample mean of Psi) and Sigma (MLE divisor N), turning the EM map
into an ECM map for the joint mode over (Psi, mu, Sigma) under a flat
hyperprior, or a penalized mode when an inverse-Wishart penalty is
supplied.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import spd2_factor, spd2_solve_factored
from .polya_gamma import pg_mean_array
from .priors import NIWHyper, NormalPrior, apply_pseudo_counts
from .tables import TwoArmTable, kappa

__all__ = [
    "EMConfig",
    "EMState",
    "e_step",
    "m_step",
    "em_fit",
    "ecm_fit",
    "log_posterior",
    "log_posterior_gradient",
    "initial_psi",
]

_UPDATE_MODES = ("none", "mu_only", "mu_and_sigma")

# Smallest admissible eigenvalue for a CM-updated Sigma, and the ridge
# added when the update degenerates (N < 3 or collinear psi).
_SIGMA_EIG_FLOOR = 1e-8
_SIGMA_RIDGE = 1e-6


@dataclass(frozen=True)
class EMConfig:
    """Convergence knobs: stop when the max-abs parameter change drops below tol."""

    tol: float = 1e-8
    max_iter: int = 10_000
    update_hyper: str = "none"

    def __post_init__(self):
        if not (isinstance(self.tol, (int, float)) and math.isfinite(self.tol) and self.tol > 0):
            raise ValueError(f"tol must be a positive real, got {self.tol}")
        if not (isinstance(self.max_iter, (int, np.integer)) and self.max_iter >= 1):
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")
        if self.update_hyper not in _UPDATE_MODES:
            raise ValueError(f"update_hyper must be one of {_UPDATE_MODES}, got {self.update_hyper!r}")


@dataclass
class EMState:
    """Terminal iterate: log-odds matrix, E-step weights, hyperparameters, diagnostics."""

    psi: np.ndarray
    omega: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    n_iter: int
    converged: bool
    log_posterior: float


def e_step(psi, totals):
    """Conditional mean of the latent precisions: n' tanh(psi/2)/(2 psi), n'/4 at 0."""
    return pg_mean_array(totals, psi)


def m_step(omega, kap, prior: NormalPrior):
    """Per-center solve of (diag(omega_i) + Sigma^-1) psi_i = kappa_i + Sigma^-1 mu."""
    omega = np.asarray(omega, dtype=float)
    kap = np.asarray(kap, dtype=float)
    sigma_inv = np.linalg.inv(prior.sigma)
    return _m_step_raw(omega, kap, prior.mu, sigma_inv)


def _m_step_raw(omega, kap, mu, sigma_inv):
    n = omega.shape[0]
    prec = np.broadcast_to(sigma_inv, (n, 2, 2)).copy()
    prec[:, 0, 0] += omega[:, 0]
    prec[:, 1, 1] += omega[:, 1]
    rhs = kap + sigma_inv @ mu
    return spd2_solve_factored(spd2_factor(prec), rhs)


def log_posterior(psi, successes, totals, mu, sigma, niw_penalty=None):
    """Exact log posterior of (Psi, mu, Sigma) up to a parameter-free constant.

    Sum of the binomial log likelihood in logit form, the bivariate
    normal log density of each psi_i, and (optionally) the
    inverse-Wishart log penalty on Sigma.  Constant terms that depend
    only on the data are dropped.
    """
    psi = np.asarray(psi, dtype=float)
    successes = np.asarray(successes, dtype=float)
    totals = np.asarray(totals, dtype=float)
    loglik = float(np.sum(successes * psi - totals * np.logaddexp(0.0, psi)))
    diff = psi - mu
    sigma_inv = np.linalg.inv(sigma)
    quad = float(np.einsum("ij,jk,ik->", diff, sigma_inv, diff))
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0:
        raise np.linalg.LinAlgError("sigma is not positive definite")
    n = psi.shape[0]
    out = loglik - 0.5 * quad - 0.5 * n * logdet - n * math.log(2.0 * math.pi)
    if niw_penalty is not None:
        out += (
            -0.5 * (niw_penalty.d + 3.0) * logdet
            - 0.5 * float(np.trace(niw_penalty.B @ sigma_inv))
        )
    return out


def log_posterior_gradient(psi, successes, totals, mu, sigma):
    """d/d psi_ij of log_posterior at fixed (mu, Sigma): y' - n' logistic(psi) - prior pull."""
    psi = np.asarray(psi, dtype=float)
    sigma_inv = np.linalg.inv(sigma)
    logistic = 1.0 / (1.0 + np.exp(-psi))
    return np.asarray(successes) - np.asarray(totals) * logistic - (psi - mu) @ sigma_inv


def initial_psi(table: TwoArmTable, clamp=5.0):
    """Starting iterate: per-cell log-odds MLE clamped to [-clamp, clamp], 0 if empty."""
    start = table.mle_log_odds()
    start = np.where(np.isnan(start), 0.0, start)
    return np.clip(start, -clamp, clamp)


def em_fit(table: TwoArmTable, prior: NormalPrior, z=None, config: EMConfig = None) -> EMState:
    """EM for the per-center log-odds with fixed (mu, Sigma).

    ``z`` folds Z-prior pseudo-counts into the table first.  Returns the
    terminal state; non-convergence within max_iter is reported through
    the ``converged`` flag, not an exception.
    """
    config = config or EMConfig()
    if config.update_hyper != "none":
        raise ValueError("em_fit keeps hyperparameters fixed; use ecm_fit to update them")
    return _fit_loop(table, prior, z, config, niw_penalty=None)


def ecm_fit(
    table: TwoArmTable,
    init: NormalPrior,
    z=None,
    config: EMConfig = None,
    niw_penalty: NIWHyper = None,
) -> EMState:
    """ECM: EM sweeps interleaved with conditional-maximization hyperparameter updates.

    Per sweep: E step, Psi update at the current (mu, Sigma), then
    mu <- mean(Psi) and (in mu_and_sigma mode) Sigma <- N^-1 sum of
    outer products about the just-updated mu.  ``init`` seeds (mu,
    Sigma).  ``niw_penalty`` switches the Sigma update to the penalized
    mode (B + S)/(d + N + 3).
    """
    config = config or EMConfig(update_hyper="mu_and_sigma")
    if config.update_hyper == "none":
        raise ValueError("ecm_fit updates hyperparameters; use em_fit for fixed (mu, Sigma)")
    if niw_penalty is not None and config.update_hyper != "mu_and_sigma":
        raise ValueError("an inverse-Wishart penalty only applies when Sigma is updated")
    if config.update_hyper == "mu_and_sigma" and table.n_centers < 2:
        raise ValueError("updating Sigma requires at least 2 centers")
    return _fit_loop(table, init, z, config, niw_penalty)


def _fit_loop(table, prior, z, config, niw_penalty):
    eff = apply_pseudo_counts(table, z)
    successes, totals = eff.successes, eff.totals
    kap = kappa(successes, totals)
    psi = initial_psi(eff)
    mu = prior.mu.copy()
    sigma = prior.sigma.copy()
    sigma_inv = np.linalg.inv(sigma)
    n = table.n_centers

    converged = False
    n_iter = 0
    for n_iter in range(1, config.max_iter + 1):
        omega = e_step(psi, totals)
        psi_next = _m_step_raw(omega, kap, mu, sigma_inv)
        delta = np.max(np.abs(psi_next - psi))
        psi = psi_next

        if config.update_hyper != "none":
            mu_next = psi.mean(axis=0)
            delta = max(delta, float(np.max(np.abs(mu_next - mu))))
            mu = mu_next
            if config.update_hyper == "mu_and_sigma":
                diff = psi - mu
                scatter = diff.T @ diff
                if niw_penalty is None:
                    sigma_next = scatter / n
                else:
                    sigma_next = (niw_penalty.B + scatter) / (niw_penalty.d + n + 3.0)
                if np.linalg.eigvalsh(sigma_next)[0] < _SIGMA_EIG_FLOOR:
                    sigma_next = sigma_next + _SIGMA_RIDGE * np.eye(2)
                    warnings.warn(
                        "covariance update was nearly singular; added a "
                        f"{_SIGMA_RIDGE:g} ridge to keep it positive definite",
                        RuntimeWarning,
                        stacklevel=3,
                    )
                delta = max(delta, float(np.max(np.abs(sigma_next - sigma))))
                sigma = sigma_next
            sigma_inv = np.linalg.inv(sigma)

        if delta < config.tol:
            converged = True
            break

    return EMState(
        psi=psi,
        omega=e_step(psi, totals),
        mu=mu,
        sigma=sigma,
        n_iter=n_iter,
        converged=converged,
        log_posterior=log_posterior(psi, successes, totals, mu, sigma, niw_penalty),
    )
