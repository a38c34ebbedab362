"""Batched 2x2 symmetric-positive-definite solves via closed-form Cholesky.

Every per-center conditional in the two-arm model is 2-dimensional, so a
hand-rolled vectorized factorization beats looping over
``numpy.linalg`` calls by orders of magnitude inside the samplers.
"""

import numpy as np

__all__ = [
    "spd2_factor",
    "spd2_solve",
    "spd2_solve_factored",
    "spd2_sample_factored",
]


def spd2_factor(A):
    """Cholesky factors (l11, l21, l22) of (..., 2, 2) SPD matrices."""
    A = np.asarray(A, dtype=float)
    a, b, c = A[..., 0, 0], A[..., 1, 0], A[..., 1, 1]
    if not np.all(a > 0):
        raise np.linalg.LinAlgError("matrix is not positive definite")
    l11 = np.sqrt(a)
    l21 = b / l11
    rem = c - l21 * l21
    if not np.all(rem > 0):
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return l11, l21, np.sqrt(rem)


def spd2_solve_factored(factor, rhs):
    """Solve L L' x = rhs for (..., 2) right-hand sides."""
    l11, l21, l22 = factor
    z1 = rhs[..., 0] / l11
    z2 = (rhs[..., 1] - l21 * z1) / l22
    x2 = z2 / l22
    x1 = (z1 - l21 * x2) / l11
    return np.stack((x1, x2), axis=-1)


def spd2_solve(A, rhs):
    return spd2_solve_factored(spd2_factor(A), rhs)


def spd2_sample_factored(factor, mean, rng):
    """Draw from N(mean, P^-1) given the Cholesky factor L of the precision P.

    With z ~ N(0, I), x = mean + L^-T z has covariance (L L')^-1.
    """
    l11, l21, l22 = factor
    z = rng.standard_normal(np.shape(mean))
    u2 = z[..., 1] / l22
    u1 = (z[..., 0] - l21 * u2) / l11
    return mean + np.stack((u1, u2), axis=-1)
