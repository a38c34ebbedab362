"""Gibbs sampler for the two-arm model and posterior summarization.

One sweep updates, in order: the latent Polya-Gamma precisions Omega
cell by cell, the per-center log-odds pairs Psi from their exact
bivariate-normal conditionals, and (under the inverse-Wishart
hyperprior) the population parameters mu and Sigma.  Every conditional
is sampled exactly, so there is no accept/reject step and the chain is
reproducible bit for bit given a seed and a fixed series truncation.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import spd2_factor, spd2_sample_factored, spd2_solve_factored
from .em import initial_psi
from .exceptions import NumericalError
from .polya_gamma import DEFAULT_TRUNCATION, TruncationConfig, pg_sample_array
from .priors import NIWHyper, NormalPrior, apply_pseudo_counts
from .tables import ARMS, TwoArmTable, kappa
from .validation import check_rng

__all__ = [
    "GibbsConfig",
    "PosteriorChain",
    "PosteriorSummary",
    "update_omega",
    "update_psi",
    "update_hyper",
    "sample_inverse_wishart",
    "run_gibbs",
    "summarize",
    "batch_means_mcse",
]

_HYPER_MODES = ("fixed_mu_sigma", "niw")
_HYPER_COLUMNS = ("mu_1", "mu_2", "sigma_11", "sigma_12", "sigma_22")


@dataclass(frozen=True)
class GibbsConfig:
    """Chain-length and reproducibility settings.

    hyper_mode selects fixed (mu, Sigma) versus the inverse-Wishart
    hyperprior layer; None means infer it from the prior object handed
    to run_gibbs.
    """

    iters: int = 20_000
    burnin: int = 5_000
    thin: int = 1
    seed: int = 0
    trunc: TruncationConfig = field(default_factory=lambda: DEFAULT_TRUNCATION)
    hyper_mode: str = None

    def __post_init__(self):
        if not (isinstance(self.iters, (int, np.integer)) and self.iters >= 1):
            raise ValueError(f"iters must be a positive integer, got {self.iters}")
        if not (isinstance(self.burnin, (int, np.integer)) and 0 <= self.burnin < self.iters):
            raise ValueError(f"burnin must satisfy 0 <= burnin < iters, got {self.burnin}")
        if not (isinstance(self.thin, (int, np.integer)) and self.thin >= 1):
            raise ValueError(f"thin must be a positive integer, got {self.thin}")
        if not isinstance(self.seed, (int, np.integer)):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")
        if not isinstance(self.trunc, TruncationConfig):
            raise ValueError("trunc must be a TruncationConfig")
        if self.hyper_mode is not None and self.hyper_mode not in _HYPER_MODES:
            raise ValueError(f"hyper_mode must be one of {_HYPER_MODES}, got {self.hyper_mode!r}")

    @property
    def n_draws(self) -> int:
        return (self.iters - self.burnin) // self.thin


class PosteriorChain:
    """Retained draws of (Psi, mu, Sigma), one row per kept sweep.

    ``chain_ids`` tags each draw with its source chain when several
    chains are concatenated; None for a single chain.  Pure Gibbs, so
    the acceptance rate is identically 1.
    """

    acceptance_rate = 1.0

    def __init__(self, psi, mu, sigma, labels, config=None, chain_ids=None):
        self.psi = np.asarray(psi, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        self.sigma = np.asarray(sigma, dtype=float)
        m = self.psi.shape[0]
        if self.psi.ndim != 3 or self.psi.shape[2] != 2:
            raise ValueError(f"psi draws must have shape (M, N, 2), got {self.psi.shape}")
        if self.mu.shape != (m, 2) or self.sigma.shape != (m, 2, 2):
            raise ValueError("mu and sigma draw counts must match psi")
        self.labels = tuple(str(l) for l in labels)
        if len(self.labels) != self.psi.shape[1]:
            raise ValueError("labels length must match the number of centers")
        self.config = config
        self.chain_ids = None if chain_ids is None else np.asarray(chain_ids, dtype=int)
        if self.chain_ids is not None and self.chain_ids.shape != (m,):
            raise ValueError("chain_ids must have one entry per draw")

    def __len__(self):
        return self.psi.shape[0]

    @property
    def n_centers(self) -> int:
        return self.psi.shape[1]

    def param_names(self):
        names = [f"psi_{label}_{arm}" for label in self.labels for arm in ARMS]
        return names + list(_HYPER_COLUMNS)

    def to_matrix(self):
        """Draws as an (M, 2N + 5) matrix in param_names() column order."""
        m = len(self)
        flat_psi = self.psi.reshape(m, -1)
        hyper = np.column_stack(
            [
                self.mu[:, 0],
                self.mu[:, 1],
                self.sigma[:, 0, 0],
                self.sigma[:, 0, 1],
                self.sigma[:, 1, 1],
            ]
        )
        return np.hstack([flat_psi, hyper])

    @classmethod
    def concat(cls, chains):
        """Stack chains from independent runs, tagging draws with 1-based chain ids."""
        chains = list(chains)
        if not chains:
            raise ValueError("need at least one chain")
        first = chains[0]
        if any(c.labels != first.labels for c in chains):
            raise ValueError("chains disagree on center labels")
        ids = np.concatenate(
            [np.full(len(c), i + 1, dtype=int) for i, c in enumerate(chains)]
        )
        return cls(
            np.concatenate([c.psi for c in chains]),
            np.concatenate([c.mu for c in chains]),
            np.concatenate([c.sigma for c in chains]),
            first.labels,
            config=first.config,
            chain_ids=ids if len(chains) > 1 else None,
        )

    def to_csv(self, path, manifest=None):
        """Write draws with round-trippable full-precision decimals.

        A leading comment line records the manifest file this run
        belongs to when one is given.
        """
        matrix = self.to_matrix()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if manifest is not None:
                fh.write(f"# manifest: {manifest}\n")
            writer = csv.writer(fh)
            header = self.param_names()
            if self.chain_ids is not None:
                writer.writerow(["chain"] + header)
                for cid, row in zip(self.chain_ids, matrix):
                    writer.writerow([int(cid)] + [repr(float(v)) for v in row])
            else:
                writer.writerow(header)
                for row in matrix:
                    writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
        if not rows:
            raise ValueError("chain file is empty")
        header, data = rows[0], rows[1:]
        has_ids = header and header[0] == "chain"
        if has_ids:
            header = header[1:]
        if len(header) < 7 or list(header[-5:]) != list(_HYPER_COLUMNS):
            raise ValueError("chain file does not end with the mu/sigma columns")
        labels = []
        for name in header[:-5:2]:
            if not (name.startswith("psi_") and name.endswith("_treatment")):
                raise ValueError(f"unexpected draw column {name!r}")
            labels.append(name[len("psi_") : -len("_treatment")])
        values = np.array([[float(v) for v in (r[1:] if has_ids else r)] for r in data])
        ids = np.array([int(r[0]) for r in data]) if has_ids else None
        m = values.shape[0]
        psi = values[:, :-5].reshape(m, len(labels), 2)
        mu = values[:, -5:-3]
        sigma = np.empty((m, 2, 2))
        sigma[:, 0, 0] = values[:, -3]
        sigma[:, 0, 1] = sigma[:, 1, 0] = values[:, -2]
        sigma[:, 1, 1] = values[:, -1]
        return cls(psi, mu, sigma, labels, chain_ids=ids)


def update_omega(psi, totals, trunc=None, rng=None):
    """Draw each cell's latent precision from its tilted conditional PG(n', psi).

    Empty cells (n' = 0) get omega = 0, the degenerate point mass.
    """
    return pg_sample_array(totals, psi, trunc=trunc, rng=rng)


def update_psi(omega, kap, mu, sigma, rng):
    """Draw each center's log-odds pair from its exact normal conditional.

    Precision diag(omega_i) + Sigma^-1, mean solving against
    kappa_i + Sigma^-1 mu.
    """
    omega = np.asarray(omega, dtype=float)
    kap = np.asarray(kap, dtype=float)
    sigma_inv = np.linalg.inv(sigma)
    n = omega.shape[0]
    prec = np.broadcast_to(sigma_inv, (n, 2, 2)).copy()
    prec[:, 0, 0] += omega[:, 0]
    prec[:, 1, 1] += omega[:, 1]
    try:
        factor = spd2_factor(prec)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"log-odds conditional is not positive definite: {exc}") from exc
    mean = spd2_solve_factored(factor, kap + sigma_inv @ mu)
    return spd2_sample_factored(factor, mean, rng)


def _sample_wishart2(df, scale_chol, rng):
    # Bartlett construction: lower-triangular A with chi-square diagonal.
    a11 = math.sqrt(rng.chisquare(df))
    a21 = rng.standard_normal()
    a22 = math.sqrt(rng.chisquare(df - 1.0))
    m = scale_chol @ np.array([[a11, 0.0], [a21, a22]])
    return m @ m.T


def sample_inverse_wishart(df, scale, rng):
    """Draw Sigma from IW(df, scale): Sigma^-1 ~ Wishart(df, scale^-1), E = scale/(df-3)."""
    if df <= 1.0:
        raise ValueError(f"inverse-Wishart needs df > 1 in dimension 2, got {df}")
    rng = check_rng(rng)
    scale = np.asarray(scale, dtype=float)
    try:
        wishart_scale_chol = np.linalg.cholesky(np.linalg.inv(scale))
        lam = _sample_wishart2(float(df), wishart_scale_chol, rng)
        sigma = np.linalg.inv(lam)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"inverse-Wishart scale is not positive definite: {exc}") from exc
    return 0.5 * (sigma + sigma.T)


def update_hyper(psi, sigma, hyper: NIWHyper, rng):
    """Draw (mu, Sigma) given Psi: normal for mu, then inverse-Wishart for Sigma.

    mu | Psi, Sigma is N(mean(Psi), Sigma/N) under the flat mu prior;
    Sigma | Psi, mu is IW(d + N, B + scatter about the new mu).
    """
    psi = np.asarray(psi, dtype=float)
    n = psi.shape[0]
    rng = check_rng(rng)
    chol = np.linalg.cholesky(np.asarray(sigma, dtype=float) / n)
    mu = psi.mean(axis=0) + chol @ rng.standard_normal(2)
    diff = psi - mu
    sigma_new = sample_inverse_wishart(hyper.d + n, hyper.B + diff.T @ diff, rng)
    return mu, sigma_new


def run_gibbs(table: TwoArmTable, prior, config: GibbsConfig = None, z=None) -> PosteriorChain:
    """Run the full sampler and return the post-burn-in, thinned chain.

    ``prior`` is either a NormalPrior (fixed mu, Sigma) or an NIWHyper
    (mu and Sigma sampled per sweep); config.hyper_mode, when set, must
    agree with the prior type.  ``z`` folds Z-prior pseudo-counts into
    the table before sampling.
    """
    config = config or GibbsConfig()
    if isinstance(prior, NormalPrior):
        mode = "fixed_mu_sigma"
    elif isinstance(prior, NIWHyper):
        mode = "niw"
    else:
        raise TypeError(
            "prior must be a NormalPrior or NIWHyper; pseudo-count priors enter via z="
        )
    if config.hyper_mode is not None and config.hyper_mode != mode:
        raise ValueError(
            f"config.hyper_mode={config.hyper_mode!r} does not match a {type(prior).__name__} prior"
        )

    eff = apply_pseudo_counts(table, z)
    totals = eff.totals
    kap = kappa(eff.successes, totals)
    n = table.n_centers
    rng = np.random.default_rng(config.seed)

    psi = initial_psi(eff)
    if mode == "niw":
        sigma = prior.B / (prior.d - 3.0)
        mu = psi.mean(axis=0)
    else:
        sigma = prior.sigma.copy()
        mu = prior.mu.copy()

    keep = config.n_draws
    psi_draws = np.empty((keep, n, 2))
    mu_draws = np.empty((keep, 2))
    sigma_draws = np.empty((keep, 2, 2))
    stored = 0
    for sweep in range(1, config.iters + 1):
        omega = update_omega(psi, totals, trunc=config.trunc, rng=rng)
        psi = update_psi(omega, kap, mu, sigma, rng)
        if mode == "niw":
            mu, sigma = update_hyper(psi, sigma, prior, rng)
        if sweep > config.burnin and (sweep - config.burnin) % config.thin == 0 and stored < keep:
            psi_draws[stored] = psi
            mu_draws[stored] = mu
            sigma_draws[stored] = sigma
            stored += 1

    return PosteriorChain(
        psi_draws[:stored], mu_draws[:stored], sigma_draws[:stored], table.labels, config=config
    )


@dataclass
class PosteriorSummary:
    """Per-scalar moments and central 95% intervals, plus P(mu_1 > mu_2)."""

    scalars: dict
    p_mu1_gt_mu2: float
    n_draws: int

    def __getitem__(self, name):
        return self.scalars[name]

    def to_dict(self):
        return {
            "n_draws": self.n_draws,
            "p_mu1_gt_mu2": self.p_mu1_gt_mu2,
            "scalars": self.scalars,
        }


def summarize(chain: PosteriorChain) -> PosteriorSummary:
    """Empirical mean, sd, and 2.5/97.5% quantiles for every tracked scalar."""
    if len(chain) == 0:
        raise ValueError("cannot summarize an empty chain")
    matrix = chain.to_matrix()
    names = chain.param_names()
    lo, hi = np.quantile(matrix, [0.025, 0.975], axis=0)
    means = matrix.mean(axis=0)
    sds = matrix.std(axis=0, ddof=1) if len(chain) > 1 else np.zeros(matrix.shape[1])
    scalars = {
        name: {
            "mean": float(means[j]),
            "sd": float(sds[j]),
            "q2.5": float(lo[j]),
            "q97.5": float(hi[j]),
        }
        for j, name in enumerate(names)
    }
    p_gt = float(np.mean(chain.mu[:, 0] > chain.mu[:, 1]))
    return PosteriorSummary(scalars=scalars, p_mu1_gt_mu2=p_gt, n_draws=len(chain))


def batch_means_mcse(x, n_batches=20):
    """Monte-Carlo standard error of the mean by non-overlapping batch means."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("batch_means_mcse expects a 1-D draw sequence")
    if x.size < 2 * n_batches:
        raise ValueError(f"need at least {2 * n_batches} draws for {n_batches} batches")
    size = x.size // n_batches
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))
