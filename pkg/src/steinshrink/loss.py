"""Entropy (Stein) loss, its rank-aware extension, and exact risk formulas.

The full-rank loss of an estimate delta for a positive definite sigma is

    L_p(delta, sigma) = tr(sigma^-1 delta) - log det(sigma^-1 delta) - p,

which is nonnegative and zero only at delta = sigma.  When sigma has rank
r < p the determinant is replaced by the product of the q leading eigenvalues
of pinv(sigma) @ delta, with q the rank of that product; the resulting loss
compares estimates on the column space of sigma.

Exact risks of the scaled Gram estimators are finite alternating-style sums
over log-chi-square moments, E[log chisq_k] = log 2 + psi(k/2), evaluated
through a local digamma implementation so results are identical across SciPy
versions.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .matdecomp import _entries, check_symmetric, log_pos_eig_product

# Asymptotic expansion psi(x) ~ log x - 1/(2x) - sum_k c_k x^(-2k), accurate to
# ~1e-16 once x >= 8; smaller arguments are shifted up by the recurrence
# psi(x+1) = psi(x) + 1/x.
_DIGAMMA_SHIFT = 8.0
_DIGAMMA_TAIL = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: float) -> float:
    """Digamma function psi(x) for positive real x."""
    x = float(x)
    if not x > 0.0:
        raise ValidationError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    for coeff in reversed(_DIGAMMA_TAIL):
        tail = inv2 * (coeff + tail)
    return acc + math.log(x) - 0.5 / x - tail


def e_log_chisq(k: int) -> float:
    """E[log W] for W ~ chi-square with k degrees of freedom."""
    if k != int(k) or k < 1:
        raise ValidationError(f"degrees of freedom must be a positive integer, got {k}")
    return math.log(2.0) + digamma(int(k) / 2.0)


class ExactRisk(NamedTuple):
    value: float
    n: int
    r: int
    q: int
    m: int


def _check_dims(n: int, r: int) -> tuple[int, int]:
    if n != int(n) or r != int(r) or n < 1 or r < 1:
        raise ValidationError(f"n and r must be positive integers, got n={n}, r={r}")
    return min(int(n), int(r)), max(int(n), int(r))


def exact_risk_bc(n: int, r: int) -> ExactRisk:
    """Exact entropy risk of the best constant-multiple estimator S / max(n, r)."""
    q, m = _check_dims(n, r)
    value = q * math.log(m) - sum(e_log_chisq(m - i + 1) for i in range(1, q + 1))
    return ExactRisk(value=value, n=int(n), r=int(r), q=q, m=m)


def exact_risk_js(n: int, r: int) -> ExactRisk:
    """Exact entropy risk of the triangular-factor estimator with optimal weights."""
    q, m = _check_dims(n, r)
    value = sum(
        math.log(n + r - 2 * i + 1) - e_log_chisq(m - i + 1) for i in range(1, q + 1)
    )
    return ExactRisk(value=value, n=int(n), r=int(r), q=q, m=m)


def _cholesky_lower(a: np.ndarray, what: str) -> np.ndarray:
    try:
        return scipy.linalg.cholesky(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise ValidationError(f"{what} is not positive definite") from exc


def _loss_given_chol(delta: np.ndarray, sigma_chol: np.ndarray) -> float:
    """Full-rank loss with the Cholesky factor of sigma precomputed."""
    p = sigma_chol.shape[0]
    f = _cholesky_lower(delta, "delta")
    a = scipy.linalg.solve_triangular(sigma_chol, f, lower=True, check_finite=False)
    trace = float(np.einsum("ij,ij->", a, a))
    logdet = 2.0 * float(
        np.sum(np.log(np.diagonal(f))) - np.sum(np.log(np.diagonal(sigma_chol)))
    )
    return trace - logdet - p


def stein_loss(delta, sigma) -> float:
    """Entropy loss for positive definite delta and sigma of equal dimension.

    Evaluated through Cholesky factors: with sigma = G G^T and delta = F F^T,
    tr(sigma^-1 delta) = ||G^-1 F||_F^2 and the log-determinant is a sum over
    factor diagonals.  No explicit inverse or determinant is formed.
    """
    d = check_symmetric(_entries(delta))
    s = check_symmetric(_entries(sigma))
    if d.shape != s.shape:
        raise ValidationError(f"dimension mismatch: {d.shape} vs {s.shape}")
    return _loss_given_chol(d, _cholesky_lower(s, "sigma"))


def stein_loss_singular(delta, sigma_pinv, q: int) -> float:
    """Rank-aware entropy loss tr(M) - log prodeig_q(M) - q with M = sigma_pinv @ delta.

    ``q`` is the rank of the product, min(rank sigma, rank delta); the q
    leading eigenvalues of M must be positive reals (they are whenever the
    column spaces are in general position).
    """
    d = check_symmetric(_entries(delta))
    sp = check_symmetric(_entries(sigma_pinv))
    if d.shape != sp.shape:
        raise ValidationError(f"dimension mismatch: {d.shape} vs {sp.shape}")
    m = sp @ d
    return float(np.trace(m)) - log_pos_eig_product(m, q) - q


def pade_bounds(x):
    """Rational bounds 2x/(2+x) <= log(1+x) <= x(6+x)/(2(3+2x)) for x >= 0.

    Accepts scalars or arrays; returns (lower, upper).
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValidationError("bounds hold for nonnegative arguments only")
    lower = 2.0 * arr / (2.0 + arr)
    upper = arr * (6.0 + arr) / (2.0 * (3.0 + 2.0 * arr))
    if np.isscalar(x) or arr.ndim == 0:
        return float(lower), float(upper)
    return lower, upper
