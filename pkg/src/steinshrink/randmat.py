"""Seeded random-matrix generation for the factor model X = B Z.

B is a p x r factor of full column rank, Z has independent standard normal
entries, so S = X X^T follows a (possibly singular) Wishart distribution with
scale sigma = B B^T of rank r.  All randomness flows through SeedSpec, which
derives independent, reproducible streams per replication via SeedSequence
spawn keys; the stream does not depend on worker count or draw order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankError, SimulationError, ValidationError
from .matdecomp import (
    EigenPair,
    SymPsdMatrix,
    pinv_psd,
    rank_tolerance,
    sym_eigen_top,
)

# attempts at a usable draw before giving up (failures have probability zero
# under a continuous sampling distribution, so hitting the cap means a bug)
MAX_DRAW_ATTEMPTS = 8


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a replication index identifying one derived stream."""

    master_seed: int
    replication_index: int = 0

    def __post_init__(self):
        if self.master_seed < 0:
            raise ValidationError("master_seed must be a nonnegative integer")
        if self.replication_index < 0:
            raise ValidationError("replication_index must be a nonnegative integer")

    def generator(self, attempt: int = 0) -> np.random.Generator:
        """Fresh generator for this (replication, attempt) pair."""
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.replication_index, attempt)
        )
        return np.random.default_rng(seq)


@dataclass(frozen=True)
class CovarianceModel:
    """Population description: dimensions, factor B, sigma and its pseudoinverse."""

    p: int
    n: int
    r: int
    factor: np.ndarray
    sigma: SymPsdMatrix
    sigma_pinv: SymPsdMatrix

    def __post_init__(self):
        if not 1 <= self.r <= self.p:
            raise ValidationError(f"need 1 <= r <= p, got r={self.r}, p={self.p}")
        if self.n < 1:
            raise ValidationError(f"need n >= 1, got n={self.n}")
        factor = np.asarray(self.factor, dtype=float)
        if factor.shape != (self.p, self.r):
            raise ValidationError(
                f"factor shape {factor.shape} does not match (p, r)=({self.p}, {self.r})"
            )
        if self.sigma.dim != self.p or self.sigma_pinv.dim != self.p:
            raise ValidationError("sigma dimensions do not match p")
        object.__setattr__(self, "factor", factor)

    @property
    def q(self) -> int:
        """Almost-sure rank of a sample Gram matrix."""
        return min(self.n, self.r)

    @property
    def m(self) -> int:
        return max(self.n, self.r)


@dataclass(frozen=True)
class SampleData:
    """One draw: observations X, Gram matrix S = X X^T and its top eigenpairs."""

    x: np.ndarray
    s: SymPsdMatrix
    eig: EigenPair
    q: int


def standard_normal_matrix(rows: int, cols: int, seed: SeedSpec) -> np.ndarray:
    """A rows x cols matrix of iid standard normals from the seeded stream."""
    if rows < 0 or cols < 0:
        raise ValidationError("matrix dimensions must be nonnegative")
    return seed.generator().standard_normal((rows, cols))


def scenario_sigma(case: int, p: int, n: int) -> CovarianceModel:
    """Full-rank diagonal benchmark population.

    Case 1 is the identity; cases 2 and 3 have p-point log-linear spectra
    running from 10 down to 10^(1/p) and from 100 down to 100^(1/p).
    """
    if case not in (1, 2, 3):
        raise ValidationError(f"unknown scenario case {case}; expected 1, 2 or 3")
    if p < 1 or n < 1:
        raise ValidationError("p and n must be positive")
    if case == 1:
        d = np.ones(p)
    else:
        base = 10.0 if case == 2 else 100.0
        d = base ** (1.0 - np.arange(p) / p)
    sigma = SymPsdMatrix(entries=np.diag(d), declared_rank=p)
    sigma_pinv = SymPsdMatrix(entries=np.diag(1.0 / d), declared_rank=p)
    return CovarianceModel(
        p=p, n=n, r=p, factor=np.diag(np.sqrt(d)), sigma=sigma, sigma_pinv=sigma_pinv
    )


def singular_model(p: int, r: int, n: int, seed: SeedSpec) -> CovarianceModel:
    """Rank-r population sigma = B B^T with a standard normal factor B."""
    if not 1 <= r <= p:
        raise ValidationError(f"need 1 <= r <= p, got r={r}, p={p}")
    if n < 1:
        raise ValidationError("n must be positive")
    for attempt in range(MAX_DRAW_ATTEMPTS):
        b = seed.generator(attempt).standard_normal((p, r))
        svals = np.linalg.svd(b, compute_uv=False)
        if svals[-1] > rank_tolerance(max(p, r), float(svals[0])):
            break
    else:
        raise SimulationError(
            f"could not draw a full-column-rank {p} x {r} factor "
            f"in {MAX_DRAW_ATTEMPTS} attempts"
        )
    entries = b @ b.T
    entries = 0.5 * (entries + entries.T)
    sigma = SymPsdMatrix(entries=entries, declared_rank=r)
    return CovarianceModel(
        p=p, n=n, r=r, factor=b, sigma=sigma, sigma_pinv=pinv_psd(sigma)
    )


def draw_sample(model: CovarianceModel, seed: SeedSpec) -> SampleData:
    """Draw X = B Z and return it with S and its top-q eigenpairs.

    Draws whose Gram matrix is rank deficient or has tied leading eigenvalues
    are re-drawn from a derived sub-stream (both are probability-zero events
    kept out of the data so downstream factorizations are well defined).
    """
    q = model.q
    for attempt in range(MAX_DRAW_ATTEMPTS):
        rng = seed.generator(attempt)
        z = rng.standard_normal((model.r, model.n))
        x = model.factor @ z
        s = x @ x.T
        s = 0.5 * (s + s.T)
        try:
            eig = sym_eigen_top(s, q, factor=x if model.n < model.p else None)
        except RankError:
            continue
        if eig.tie_flag:
            continue
        return SampleData(x=x, s=SymPsdMatrix(entries=s, declared_rank=q), eig=eig, q=q)
    raise SimulationError(
        f"no usable sample after {MAX_DRAW_ATTEMPTS} attempts "
        f"(p={model.p}, r={model.r}, n={model.n})"
    )
