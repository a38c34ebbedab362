"""Gibbs sampler for J x K x N multinomial tables under a softmax parameterization.

Cell probabilities are p_ijk = exp(psi_ijk) / sum_l exp(psi_ijl) with the
last outcome's logit pinned to zero for identifiability, so each center
carries a J x (K-1) matrix of free logits with a matrix-normal prior.
Holding the other outcomes fixed, outcome k of center i reduces to a
binomial-logit problem in the shifted variable psi - c, where the offset
c_ijk = log sum_{l != k} exp(psi_ijl); a Polya-Gamma draw per cell then
makes the J-vector psi_{i.k} conditionally normal.
"""

import csv

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import logsumexp

from .exceptions import NumericalError
from .gibbs import GibbsConfig
from .polya_gamma import pg_sample_array
from .priors import MatrixNormalPrior
from .tables import MultinomialTable

__all__ = [
    "softmax_probs",
    "add_baseline_column",
    "compute_offset",
    "MultinomialChain",
    "multinomial_gibbs",
    "summarize_multinomial",
]


def softmax_probs(psi):
    """Softmax along the last axis via the max-shifted exponential."""
    psi = np.asarray(psi, dtype=float)
    shifted = psi - psi.max(axis=-1, keepdims=True)
    numer = np.exp(shifted)
    return numer / numer.sum(axis=-1, keepdims=True)


def add_baseline_column(free_psi):
    """Append the identically-zero baseline logit as the last outcome column."""
    free_psi = np.asarray(free_psi, dtype=float)
    return np.concatenate([free_psi, np.zeros(free_psi.shape[:-1] + (1,))], axis=-1)


def compute_offset(psi_full, i, j, k):
    """Offset c_ijk = log sum over outcomes l != k of exp(psi_ijl)."""
    row = np.asarray(psi_full, dtype=float)[i, j]
    return float(logsumexp(np.delete(row, k)))


def _block_offsets(full_center, k):
    # log-sum-exp over the other outcome columns, all treatments at once
    return logsumexp(np.delete(full_center, k, axis=1), axis=1)


class MultinomialChain:
    """Retained draws of the free logits, shape (M, N, J, K-1).

    The baseline outcome's logit is identically zero and not stored.
    CSV columns are psi_<center>_<treatment>_<outcome>; center and
    treatment labels must not contain underscores for the file to be
    re-readable.
    """

    def __init__(self, psi, center_labels, treatment_labels, outcome_labels, config=None):
        self.psi = np.asarray(psi, dtype=float)
        if self.psi.ndim != 4:
            raise ValueError(f"expected draws with shape (M, N, J, K-1), got {self.psi.shape}")
        self.center_labels = tuple(str(x) for x in center_labels)
        self.treatment_labels = tuple(str(x) for x in treatment_labels)
        self.outcome_labels = tuple(str(x) for x in outcome_labels)
        m, n, j, kf = self.psi.shape
        if (len(self.center_labels), len(self.treatment_labels)) != (n, j):
            raise ValueError("label lengths must match the draw shape")
        if len(self.outcome_labels) != kf + 1:
            raise ValueError("outcome labels must include the baseline (stored last)")
        self.config = config

    def __len__(self):
        return self.psi.shape[0]

    def param_names(self):
        return [
            f"psi_{c}_{t}_{o}"
            for c in self.center_labels
            for t in self.treatment_labels
            for o in self.outcome_labels[:-1]
        ]

    def to_matrix(self):
        return self.psi.reshape(len(self), -1)

    def mean_probs(self):
        """Posterior mean of the softmax probabilities, shape (N, J, K)."""
        return softmax_probs(add_baseline_column(self.psi)).mean(axis=0)

    def to_csv(self, path, manifest=None):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if manifest is not None:
                fh.write(f"# manifest: {manifest}\n")
            writer = csv.writer(fh)
            writer.writerow(self.param_names())
            for row in self.to_matrix():
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
        if not rows:
            raise ValueError("chain file is empty")
        header, data = rows[0], rows[1:]
        centers, treatments, outcomes = [], [], []
        for name in header:
            if not name.startswith("psi_"):
                raise ValueError(f"unexpected draw column {name!r}")
            parts = name[4:].split("_", 2)
            if len(parts) != 3:
                raise ValueError(f"cannot parse draw column {name!r}")
            c, t, o = parts
            if c not in centers:
                centers.append(c)
            if t not in treatments:
                treatments.append(t)
            if o not in outcomes:
                outcomes.append(o)
        values = np.array([[float(v) for v in r] for r in data])
        m = values.shape[0]
        psi = values.reshape(m, len(centers), len(treatments), len(outcomes))
        # the stored outcomes are the free ones; the baseline label is unknown
        return cls(psi, centers, treatments, list(outcomes) + ["baseline"])


def multinomial_gibbs(
    table: MultinomialTable, prior: MatrixNormalPrior, config: GibbsConfig = None
) -> MultinomialChain:
    """Sample the free logits by sweeping (center, outcome) blocks.

    Per block the offsets are recomputed from the current state, the
    latent precisions are drawn cell by cell, and the J treatments'
    logits for that outcome are drawn jointly from their normal
    conditional under the matrix-normal prior (column k regressed on
    the other K-1 free columns).
    """
    config = config or GibbsConfig()
    if config.hyper_mode == "niw":
        raise ValueError("the multinomial sampler has no hyperprior layer")
    n_centers, n_treat, n_out = table.shape
    free = n_out - 1
    if prior.shape != (n_treat, free):
        raise ValueError(
            f"prior mean must be J x (K-1) = ({n_treat}, {free}), got {prior.shape}"
        )
    counts = table.counts
    totals = table.totals()
    kap = table.kappa()
    rng = np.random.default_rng(config.seed)

    sr_inv = np.linalg.inv(prior.sigma_rows)
    sc = prior.sigma_cols
    gammas, schurs = [], []
    for k in range(free):
        others = [l for l in range(free) if l != k]
        if others:
            block = sc[np.ix_(others, others)]
            g = np.linalg.solve(block, sc[others, k])
            schur = sc[k, k] - sc[k, others] @ g
        else:
            g = None
            schur = sc[k, k]
        if schur <= 0:
            raise NumericalError("column covariance has a non-positive conditional variance")
        gammas.append(g)
        schurs.append(float(schur))

    # start from clamped per-cell logit MLEs relative to the baseline count
    with np.errstate(divide="ignore", invalid="ignore"):
        start = np.log(counts[:, :, :free] / counts[:, :, free:])
    psi = np.clip(np.where(np.isfinite(start), start, 0.0), -5.0, 5.0)

    keep = config.n_draws
    draws = np.empty((keep, n_centers, n_treat, free))
    stored = 0
    for sweep in range(1, config.iters + 1):
        for i in range(n_centers):
            full = add_baseline_column(psi[i])
            for k in range(free):
                offsets = _block_offsets(full, k)
                omega = pg_sample_array(
                    totals[i], full[:, k] - offsets, trunc=config.trunc, rng=rng
                )
                if gammas[k] is None:
                    m_cond = prior.M[:, k]
                else:
                    others = [l for l in range(free) if l != k]
                    m_cond = prior.M[:, k] + (psi[i][:, others] - prior.M[:, others]) @ gammas[k]
                prior_prec = sr_inv / schurs[k]
                precision = prior_prec + np.diag(omega)
                rhs = kap[i, :, k] + omega * offsets + prior_prec @ m_cond
                try:
                    low = np.linalg.cholesky(precision)
                except np.linalg.LinAlgError as exc:
                    raise NumericalError(f"block conditional not positive definite: {exc}") from exc
                mean = cho_solve((low, True), rhs)
                noise = solve_triangular(low.T, rng.standard_normal(n_treat), lower=False)
                psi[i][:, k] = mean + noise
                full[:, k] = psi[i][:, k]
        if sweep > config.burnin and (sweep - config.burnin) % config.thin == 0 and stored < keep:
            draws[stored] = psi
            stored += 1

    return MultinomialChain(
        draws[:stored],
        table.center_labels,
        table.treatment_labels,
        table.outcome_labels,
        config=config,
    )


def summarize_multinomial(chain: MultinomialChain):
    """Per-logit mean, sd, and central 95% interval, keyed by column name."""
    if len(chain) == 0:
        raise ValueError("cannot summarize an empty chain")
    matrix = chain.to_matrix()
    lo, hi = np.quantile(matrix, [0.025, 0.975], axis=0)
    means = matrix.mean(axis=0)
    sds = matrix.std(axis=0, ddof=1) if len(chain) > 1 else np.zeros(matrix.shape[1])
    return {
        name: {
            "mean": float(means[j]),
            "sd": float(sds[j]),
            "q2.5": float(lo[j]),
            "q97.5": float(hi[j]),
        }
        for j, name in enumerate(chain.param_names())
    }
