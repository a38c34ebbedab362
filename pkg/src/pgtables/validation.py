"""Shared input-validation helpers."""

import numbers

import numpy as np


def check_rng(rng=None):
    """Coerce ``rng`` (None, int seed, or Generator) to a numpy Generator."""
    if rng is None:
        return np.random.default_rng()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, numbers.Integral):
        return np.random.default_rng(int(rng))
    raise ValueError(f"rng must be None, an integer seed, or a numpy Generator, got {rng!r}")


def check_finite_scalar(x, name):
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x


def check_spd(matrix, name="matrix", dim=None):
    """Validate a symmetric positive-definite matrix; returns a float64 copy.

    Symmetry is checked to a small relative tolerance and positive
    definiteness via Cholesky.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValueError(f"{name} must be {dim}x{dim}, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} must have finite entries")
    if not np.allclose(m, m.T, rtol=1e-10, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    m = 0.5 * (m + m.T)
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{name} must be positive definite") from exc
    return m


def as_readonly(arr):
    """Return a float64 array with the writeable flag cleared."""
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out
