"""Prior specifications for the per-center log-odds pairs.

Three families for the two-arm model:

* ``NormalPrior``: fixed bivariate normal N(mu, sigma) on (psi_i1, psi_i2).
* ``NIWHyper``: inverse-Wishart hyperprior IW(d, B) on the shared Sigma,
  paired with a flat prior on mu.  Convention: Lambda = Sigma^-1 ~
  Wishart(d, B^-1), so E(Sigma) = B/(d - 3) for 2x2 Sigma.
* ``ZPseudoCounts``: independent Z-distribution priors on each cell's
  log-odds, equivalent to adding a prior successes and b prior failures.

Plus ``MatrixNormalPrior`` for the multinomial extension.  All are
immutable value objects and parse from a small JSON vocabulary.
"""

import json
import math
import warnings

import numpy as np
from scipy.special import betaln

from .exceptions import ElicitationError, ElicitationWarning, PriorParseError
from .tables import TwoArmTable
from .validation import as_readonly, check_spd

__all__ = [
    "NormalPrior",
    "NIWHyper",
    "ZPseudoCounts",
    "MatrixNormalPrior",
    "iw_from_moments",
    "moments_from_iw",
    "iw_prior_mean",
    "apply_pseudo_counts",
    "z_log_density",
    "parse_prior",
    "load_prior_json",
    "skene_wakefield_prior",
]


class NormalPrior:
    """Fixed bivariate normal prior on each center's (treatment, control) log-odds."""

    def __init__(self, mu, sigma):
        mu = as_readonly(mu)
        if mu.shape != (2,) or not np.all(np.isfinite(mu)):
            raise ValueError(f"mu must be a finite 2-vector, got shape {mu.shape}")
        self.mu = mu
        self.sigma = as_readonly(check_spd(sigma, name="sigma", dim=2))

    def precision(self):
        return np.linalg.inv(self.sigma)

    def __repr__(self):
        return f"NormalPrior(mu={self.mu.tolist()}, sigma={self.sigma.tolist()})"


class NIWHyper:
    """Inverse-Wishart hyperprior IW(d, B) on Sigma with flat prior on mu.

    Requires d > 3 so that the prior mean E(Sigma) = B/(d - 3) exists.
    """

    def __init__(self, d, B):
        d = float(d)
        if not math.isfinite(d) or d <= 3:
            raise ValueError(f"degrees of freedom must exceed 3, got {d}")
        self.d = d
        self.B = as_readonly(check_spd(B, name="B", dim=2))

    def __repr__(self):
        return f"NIWHyper(d={self.d}, B={self.B.tolist()})"


class ZPseudoCounts:
    """Z-prior as pseudo-data: a prior successes and b prior failures per cell.

    a and b may be scalars or (N, 2) arrays; both must be strictly positive.
    The Jeffreys choice a = b = 1/2 is the default.
    """

    def __init__(self, a=0.5, b=0.5):
        a = as_readonly(np.asarray(a, dtype=float))
        b = as_readonly(np.asarray(b, dtype=float))
        for name, arr in (("a", a), ("b", b)):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"pseudo-counts {name} must be finite and positive")
        if a.ndim not in (0, 2) or b.ndim not in (0, 2):
            raise ValueError("pseudo-counts must be scalars or (N, 2) arrays")
        self.a = a
        self.b = b

    def __repr__(self):
        return f"ZPseudoCounts(a={self.a.tolist()}, b={self.b.tolist()})"


class MatrixNormalPrior:
    """Matrix-normal MN(M, Sigma_R, Sigma_C) on each center's J x (K-1) logit block.

    Sigma_R couples treatments (rows), Sigma_C couples the K-1 free
    outcome logits (columns); the baseline outcome's logit is pinned at 0.
    """

    def __init__(self, M, sigma_rows, sigma_cols):
        M = as_readonly(np.atleast_2d(M))
        if M.ndim != 2 or not np.all(np.isfinite(M)):
            raise ValueError("M must be a finite J x (K-1) matrix")
        self.M = M
        self.sigma_rows = as_readonly(check_spd(sigma_rows, name="Sigma_R", dim=M.shape[0]))
        self.sigma_cols = as_readonly(check_spd(sigma_cols, name="Sigma_C", dim=M.shape[1]))

    @property
    def shape(self):
        return self.M.shape

    def __repr__(self):
        j, km1 = self.M.shape
        return f"MatrixNormalPrior(J={j}, K-1={km1})"


def iw_from_moments(e_sigma_delta2, e_sigma_lambda2, e_rho, d) -> NIWHyper:
    """Map elicited moments of (sigma_delta^2, sigma_lambda^2, rho) to IW(d, B).

    The treatment log-odds is the control log-odds plus an offset, so its
    prior variance is sigma_lambda^2 + sigma_delta^2 + 2 rho sigma_lambda
    sigma_delta and the cross term is sigma_lambda^2 + rho sigma_lambda
    sigma_delta.  Scaling the implied E(Sigma) by d - 3 gives B.
    """
    vals = {"E_sd2": e_sigma_delta2, "E_sl2": e_sigma_lambda2, "E_rho": e_rho, "d": d}
    for name, v in vals.items():
        if not math.isfinite(float(v)):
            raise ElicitationError(f"{name} must be finite, got {v}")
    e_sd2, e_sl2, e_rho, d = (float(v) for v in vals.values())
    if e_sd2 <= 0 or e_sl2 <= 0:
        raise ElicitationError("prior variances E_sd2 and E_sl2 must be positive")
    if not -1.0 < e_rho < 1.0:
        raise ElicitationError(f"E_rho must lie in (-1, 1), got {e_rho}")
    if d <= 3:
        raise ElicitationError(f"degrees of freedom must exceed 3, got {d}")
    rho_s = e_rho * math.sqrt(e_sl2 * e_sd2)
    mean_sigma = np.array(
        [
            [e_sl2 + e_sd2 + 2.0 * rho_s, e_sl2 + rho_s],
            [e_sl2 + rho_s, e_sl2],
        ]
    )
    B = (d - 3.0) * mean_sigma
    eigvals = np.linalg.eigvalsh(B)
    if eigvals[0] <= 0:
        raise ElicitationError("elicited moments imply a non-positive-definite scale matrix B")
    if eigvals[1] / eigvals[0] > 100.0:
        warnings.warn(
            f"elicited scale matrix B is nearly singular (condition number "
            f"{eigvals[1] / eigvals[0]:.3g}); check E_rho",
            ElicitationWarning,
            stacklevel=2,
        )
    return NIWHyper(d, B)


def moments_from_iw(hyper: NIWHyper):
    """Exact inverse of iw_from_moments: (E_sd2, E_sl2, E_rho)."""
    mean_sigma = hyper.B / (hyper.d - 3.0)
    e_sl2 = mean_sigma[1, 1]
    rho_s = mean_sigma[0, 1] - e_sl2
    e_sd2 = mean_sigma[0, 0] - e_sl2 - 2.0 * rho_s
    if e_sl2 <= 0 or e_sd2 <= 0:
        raise ElicitationError("scale matrix is not in the image of the moment map")
    return e_sd2, e_sl2, rho_s / math.sqrt(e_sl2 * e_sd2)


def iw_prior_mean(hyper: NIWHyper):
    """Prior expectation E(Sigma) = B/(d - 3)."""
    return hyper.B / (hyper.d - 3.0)


def apply_pseudo_counts(table: TwoArmTable, z) -> TwoArmTable:
    """Fold Z-prior pseudo-data into the counts: y' = y + a, n' = n + a + b.

    Passing z=None is the no-prior (a = b = 0) limit and returns the table
    unchanged.  Effective counts are fractional in general; downstream
    code must accept non-integer totals.
    """
    if z is None:
        return table
    a = np.broadcast_to(z.a, table.successes.shape)
    b = np.broadcast_to(z.b, table.successes.shape)
    return TwoArmTable(table.successes + a, table.totals + a + b, labels=table.labels)


def z_log_density(psi, a=0.5, b=0.5):
    """Log density of the Z(a, b) prior on the log-odds scale.

    p(psi) = exp(a psi) / ((1 + exp(psi))^(a+b) Beta(a, b)); at a = b = 1/2
    this is the Jeffreys prior (1/pi) e^(psi/2) / (1 + e^psi).
    """
    a, b = float(a), float(b)
    if a <= 0 or b <= 0:
        raise ValueError(f"Z prior requires a, b > 0, got a={a}, b={b}")
    psi = np.asarray(psi, dtype=float)
    out = a * psi - (a + b) * np.logaddexp(0.0, psi) - betaln(a, b)
    return float(out) if out.ndim == 0 else out


def _require(spec, key, kind=None):
    if key not in spec:
        raise PriorParseError(f"prior spec is missing required field {key!r}")
    value = spec[key]
    if kind is not None and not isinstance(value, kind):
        raise PriorParseError(f"prior field {key!r} has the wrong type")
    return value


def parse_prior(spec):
    """Build a prior object from its JSON dict form.

    Recognized shapes:
      {"type": "normal", "mu": [...], "sigma": [[...]]}
      {"type": "niw", "d": ..., "B": [[...]]}
      {"type": "niw-moments", "E_sd2": ..., "E_sl2": ..., "E_rho": ..., "d": ...}
      {"type": "z", "a": ..., "b": ...}
      {"type": "matrix-normal", "M": [[...]], "Sigma_R": [[...]], "Sigma_C": [[...]]}
    """
    if not isinstance(spec, dict):
        raise PriorParseError("prior spec must be a JSON object")
    kind = spec.get("type")
    try:
        if kind == "normal":
            return NormalPrior(_require(spec, "mu"), _require(spec, "sigma"))
        if kind == "niw":
            return NIWHyper(_require(spec, "d"), _require(spec, "B"))
        if kind == "niw-moments":
            return iw_from_moments(
                _require(spec, "E_sd2"), _require(spec, "E_sl2"),
                _require(spec, "E_rho"), _require(spec, "d"),
            )
        if kind == "z":
            return ZPseudoCounts(spec.get("a", 0.5), spec.get("b", 0.5))
        if kind == "matrix-normal":
            return MatrixNormalPrior(
                _require(spec, "M"), _require(spec, "Sigma_R"), _require(spec, "Sigma_C")
            )
    except ElicitationError:
        raise
    except (TypeError, ValueError) as exc:
        raise PriorParseError(f"invalid {kind!r} prior: {exc}") from exc
    raise PriorParseError(
        f"unknown prior type {kind!r}; expected one of "
        "'normal', 'niw', 'niw-moments', 'z', 'matrix-normal'"
    )


def load_prior_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PriorParseError(f"prior file is not valid JSON: {exc}") from exc
    return parse_prior(spec)


def skene_wakefield_prior() -> NIWHyper:
    """The d = 4 inverse-Wishart hyperprior used with the eight-center example."""
    return NIWHyper(4.0, [[0.754, 0.857], [0.857, 1.480]])
