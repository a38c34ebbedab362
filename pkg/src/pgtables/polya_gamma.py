"""The Polya-Gamma distribution family PG(a, c).

A PG(a, c) random variable is an infinite weighted sum of independent
Gamma(a, 1) variables,

    omega  =  (1 / 2 pi^2) * sum_{k>=1} g_k / ((k - 1/2)^2 + c^2 / (4 pi^2)),

sampled here by truncating the series after ``n_terms`` terms.  The family
is closed under exponential tilting by exp(-c^2 omega / 2), which is what
makes it the conjugate augmentation law for binomial logits: the full
conditional of the latent precision given a log-odds value psi and a cell
total n is PG(n, psi).

Closed forms used throughout:

    E[omega]             = a * tanh(c/2) / (2 c)        (a/4 at c = 0)
    E[exp(-omega t / 2)] = [cosh(c/2) / cosh(sqrt(c^2 + t)/2)]^a

PG(0, c) is a point mass at zero (empty gamma sum), which is how cells
with zero total count are handled.
"""

import math
from dataclasses import dataclass

import numpy as np

from .validation import check_rng

__all__ = [
    "PGParams",
    "TruncationConfig",
    "pg_mean",
    "pg_laplace",
    "pg_sample",
    "pg_tilted_conditional",
    "pg_mean_array",
    "pg_sample_array",
]

_TWO_PI_SQ = 2.0 * math.pi ** 2

# Gamma-matrix draws below this total size are done in one vectorized call;
# larger requests accumulate term by term to bound memory.
_MAX_BLOCK = 4_000_000


@dataclass(frozen=True)
class PGParams:
    """Shape ``a`` and tilt ``c`` of a PG(a, c) law.

    ``a`` may be any nonnegative real (fractional shapes arise from
    pseudo-count priors; a = 0 is the point mass at zero).  The law
    depends on ``c`` only through c^2.
    """

    a: float
    c: float

    def __post_init__(self):
        a = float(self.a)
        c = float(self.c)
        if not math.isfinite(a) or not math.isfinite(c):
            raise ValueError(f"PG parameters must be finite, got a={self.a}, c={self.c}")
        if a < 0:
            raise ValueError(f"PG shape a must be nonnegative, got {a}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class TruncationConfig:
    """Number of gamma terms retained in the truncated series."""

    n_terms: int = 200

    def __post_init__(self):
        if int(self.n_terms) != self.n_terms or self.n_terms < 1:
            raise ValueError(f"n_terms must be a positive integer, got {self.n_terms}")
        object.__setattr__(self, "n_terms", int(self.n_terms))


DEFAULT_TRUNCATION = TruncationConfig()


def _mean_ratio(c):
    """tanh(c/2) / (2c), elementwise, with a series expansion near c = 0."""
    c = np.asarray(c, dtype=float)
    small = np.abs(c) < 1e-4
    safe = np.where(small, 1.0, c)
    out = np.where(small, 0.25 - c * c / 48.0, np.tanh(safe / 2.0) / (2.0 * safe))
    return out


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def pg_mean(params: PGParams) -> float:
    """Mean of PG(a, c): a * tanh(c/2) / (2c), with limit a/4 at c = 0."""
    return float(params.a * _mean_ratio(params.c))


def pg_mean_array(a, c):
    """Elementwise PG mean for arrays of shapes and tilts."""
    a = np.asarray(a, dtype=float)
    return a * _mean_ratio(c)


def pg_laplace(params: PGParams, t) -> float:
    """Laplace transform E[exp(-omega t / 2)] of PG(a, c), for t >= 0.

    Equals [cosh(c/2) / cosh(sqrt(c^2 + t)/2)]^a, evaluated in log space
    so that large arguments do not overflow.
    """
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"transform argument t must be nonnegative, got {t}")
    a, c = params.a, params.c
    log_val = a * (_log_cosh(c / 2.0) - _log_cosh(math.sqrt(c * c + t) / 2.0))
    return float(np.exp(log_val))


def _series_denominators(c_sq, n_terms):
    k = np.arange(1, n_terms + 1) - 0.5
    return k * k + np.asarray(c_sq)[..., None] / (4.0 * math.pi ** 2)


def pg_sample(params: PGParams, trunc: TruncationConfig | None = None, rng=None, size=None):
    """Draw from PG(a, c) via the truncated gamma series.

    Parameters
    ----------
    params : PGParams
    trunc : TruncationConfig, optional
        Series truncation; defaults to 200 terms.
    rng : None, int, or numpy Generator
    size : int, optional
        Number of i.i.d. draws.  ``None`` returns a scalar.

    Returns
    -------
    float or ndarray of positive reals (exactly zero when a = 0).
    """
    trunc = trunc or DEFAULT_TRUNCATION
    rng = check_rng(rng)
    scalar = size is None
    n = 1 if scalar else int(size)
    if n < 0:
        raise ValueError(f"size must be nonnegative, got {size}")
    a, c = params.a, params.c
    n_terms = trunc.n_terms
    denom = np.squeeze(_series_denominators(c * c, n_terms))
    if n * n_terms <= _MAX_BLOCK:
        gammas = rng.gamma(a, 1.0, size=(n, n_terms))
        out = (gammas / denom).sum(axis=1) / _TWO_PI_SQ
    else:
        out = np.zeros(n)
        for j in range(n_terms):
            out += rng.gamma(a, 1.0, size=n) / denom[j]
        out /= _TWO_PI_SQ
    return float(out[0]) if scalar else out


def pg_sample_array(a, c, trunc: TruncationConfig | None = None, rng=None):
    """One PG(a_i, c_i) draw per element of the broadcast (a, c) arrays.

    Elements with a = 0 come out exactly zero.  Used by the Gibbs engines
    to refresh a whole table of latent precisions in one call.
    """
    trunc = trunc or DEFAULT_TRUNCATION
    rng = check_rng(rng)
    a, c = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(c, dtype=float))
    if np.any(a < 0) or not np.all(np.isfinite(a)) or not np.all(np.isfinite(c)):
        raise ValueError("PG shapes must be finite and nonnegative, tilts finite")
    denom = _series_denominators(c * c, trunc.n_terms)
    gammas = rng.gamma(a[..., None], 1.0, size=denom.shape)
    return (gammas / denom).sum(axis=-1) / _TWO_PI_SQ


def pg_tilted_conditional(n, psi) -> PGParams:
    """Conditional law of the latent precision: (omega | psi, data) ~ PG(n, psi)."""
    n = float(n)
    if not math.isfinite(n) or n < 0:
        raise ValueError(f"cell total n must be a nonnegative real, got {n}")
    return PGParams(a=n, c=float(psi))
