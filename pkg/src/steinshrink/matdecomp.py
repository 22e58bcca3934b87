"""Deterministic matrix decomposition kernels for low-rank covariance work.

Everything here is rank-aware: operations take or report an explicit rank q
and fail loudly (RankError / SpectrumError) instead of silently padding with
noise eigenvalues.  Conventions fixed across the package:

* eigenvalues are returned in descending order;
* each eigenvector is scaled so its largest-magnitude entry is positive;
* triangular factors carry a positive diagonal.

These conventions make every factorization unique, so repeated runs are
bit-identical and Monte Carlo experiments reproduce exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LeadingBlockError, RankError, SpectrumError, ValidationError

_EPS = float(np.finfo(float).eps)

# max relative asymmetry tolerated before an input is rejected as non-symmetric
SYMMETRY_RTOL = 1e-12
# adjacent eigenvalues closer than this (relative to the largest) count as tied
TIE_RTOL = 1e-10


def rank_tolerance(dim: int, scale: float) -> float:
    """Cutoff below which an eigenvalue or singular value counts as zero."""
    return dim * _EPS * scale


def check_symmetric(a: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate that ``a`` is square and symmetric to relative tolerance ``rtol``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    gap = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if gap > rtol * max(scale, 1.0):
        raise ValidationError(
            f"matrix is not symmetric: max |A - A^T| = {gap:.3e} exceeds tolerance"
        )
    return a


def _entries(mat) -> np.ndarray:
    """Accept either a raw array or a SymPsdMatrix wrapper."""
    if isinstance(mat, SymPsdMatrix):
        return mat.entries
    return np.asarray(mat, dtype=float)


@dataclass(frozen=True)
class SymPsdMatrix:
    """A symmetric positive semidefinite matrix with a declared rank.

    Construction checks shape, symmetry and the declared-rank range only;
    ``validate()`` runs the full spectral check (PSD within tolerance, and the
    number of eigenvalues above the rank cutoff equal to ``declared_rank``).
    """

    entries: np.ndarray
    declared_rank: int

    def __post_init__(self):
        entries = check_symmetric(self.entries)
        if not 0 <= int(self.declared_rank) <= entries.shape[0]:
            raise ValidationError(
                f"declared_rank {self.declared_rank} out of range for dim {entries.shape[0]}"
            )
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "declared_rank", int(self.declared_rank))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def validate(self) -> "SymPsdMatrix":
        """Spectral check: no eigenvalue below -tol, exactly declared_rank above tol."""
        w = np.linalg.eigvalsh(self.entries)
        scale = max(abs(float(w[0])), abs(float(w[-1]))) if w.size else 0.0
        tol = rank_tolerance(self.dim, scale)
        if w.size and float(w[0]) < -tol:
            raise ValidationError(
                f"matrix is not positive semidefinite: min eigenvalue {w[0]:.3e}"
            )
        above = int(np.count_nonzero(w > tol))
        if above != self.declared_rank:
            raise RankError(
                f"declared rank {self.declared_rank} but {above} eigenvalues above cutoff"
            )
        return self


@dataclass(frozen=True)
class EigenPair:
    """Top eigenpairs of a symmetric PSD matrix.

    ``vectors`` is column-orthonormal (p x q), ``values`` descending and
    positive.  ``tie_flag`` marks numerically coincident adjacent eigenvalues,
    which make the eigenvector basis non-unique.
    """

    vectors: np.ndarray
    values: np.ndarray
    tie_flag: bool = False

    @property
    def q(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class LqFactorization:
    """Factorization A = tee @ vee.T with lower-triangular leading block.

    ``tee`` has shape (p, q) with its top q x q block lower triangular with
    positive diagonal; ``vee`` has orthonormal columns (n, q).
    """

    tee: np.ndarray
    vee: np.ndarray


def _fix_vector_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the largest-magnitude entry is positive."""
    if vecs.size == 0:
        return vecs
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0.0] = 1.0
    return vecs * signs


def _has_tie(values: np.ndarray) -> bool:
    if values.shape[0] < 2:
        return False
    return bool(np.min(values[:-1] - values[1:]) <= TIE_RTOL * values[0])


def sym_eigen_top(s, q: int, factor: np.ndarray | None = None) -> EigenPair:
    """Top-q eigenpairs of a symmetric PSD matrix, eigenvalues descending.

    Parameters
    ----------
    s : array or SymPsdMatrix
        The p x p symmetric PSD matrix.
    q : int
        Number of leading eigenpairs requested, 1 <= q <= p.
    factor : array, optional
        A matrix X with s = X @ X.T.  When X has fewer columns than rows the
        decomposition is routed through the small Gram matrix X.T @ X and the
        eigenvectors of s are recovered as H = X V L^(-1/2).  This is both
        faster and more accurate than factoring the rank-deficient p x p
        matrix directly.

    Raises
    ------
    ValidationError
        If s is not symmetric (or has eigenvalues materially below zero).
    RankError
        If fewer than q eigenvalues exceed the rank cutoff.
    """
    a = check_symmetric(_entries(s))
    p = a.shape[0]
    if not 1 <= q <= p:
        raise ValidationError(f"q={q} out of range for a {p} x {p} matrix")

    if factor is not None:
        x = np.asarray(factor, dtype=float)
        if x.ndim != 2 or x.shape[0] != p:
            raise ValidationError(f"factor shape {x.shape} incompatible with dim {p}")
        if x.shape[1] < p:
            return _eigen_from_factor(x, q)

    w, u = np.linalg.eigh(a)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    u = u[:, order]
    scale = max(abs(float(w[0])), abs(float(w[-1]))) if w.size else 0.0
    tol = rank_tolerance(p, scale)
    if float(w[-1]) < -tol:
        raise ValidationError(
            f"matrix is not positive semidefinite: min eigenvalue {w[-1]:.3e}"
        )
    if int(np.count_nonzero(w > tol)) < q:
        raise RankError(f"requested q={q} eigenpairs but numerical rank is lower")
    values = w[:q].copy()
    vectors = _fix_vector_signs(u[:, :q].copy())
    return EigenPair(vectors=vectors, values=values, tie_flag=_has_tie(values))


def _eigen_from_factor(x: np.ndarray, q: int) -> EigenPair:
    # Gram route: eigenvalues of X X^T above zero equal those of X^T X
    g = x.T @ x
    w, v = np.linalg.eigh(g)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    scale = abs(float(w[0])) if w.size else 0.0
    tol = rank_tolerance(max(x.shape), scale)
    if q > w.shape[0] or int(np.count_nonzero(w > tol)) < q:
        raise RankError(f"requested q={q} eigenpairs but numerical rank is lower")
    values = w[:q].copy()
    vectors = x @ (v[:, :q] / np.sqrt(values))
    vectors = _fix_vector_signs(vectors)
    return EigenPair(vectors=vectors, values=values, tie_flag=_has_tie(values))


def lq_positive(a: np.ndarray) -> LqFactorization:
    """Unique LQ factorization A = T V^T with positive-diagonal triangular T.

    ``a`` must be q x n with full row rank and q <= n.  Computed as a
    Householder QR of A^T followed by a diagonal sign flip, which is
    numerically stable and deterministic.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValidationError(f"expected a 2-d array, got shape {a.shape}")
    q, n = a.shape
    if q == 0 or n == 0 or q > n:
        raise RankError(f"a {q} x {n} matrix cannot have full row rank q <= n")
    qmat, rmat = np.linalg.qr(a.T)
    diag = np.diagonal(rmat)
    tol = rank_tolerance(max(q, n), float(np.max(np.abs(diag))) if diag.size else 0.0)
    if np.any(np.abs(diag) <= tol):
        raise RankError("matrix is numerically row-rank deficient")
    signs = np.where(diag < 0.0, -1.0, 1.0)
    tee = rmat.T * signs
    vee = qmat * signs
    return LqFactorization(tee=tee, vee=vee)


def sample_lq(x: np.ndarray, q: int) -> LqFactorization:
    """Tall LQ factorization X = T V^T driven by the leading q x n block.

    The top q rows of X are LQ-factored to give the triangular block and the
    orthonormal V; the remaining rows are projected onto V.  The leading block
    must have full row rank, otherwise LeadingBlockError is raised (for
    samples from a continuous distribution this happens with probability
    zero, so callers treat it as a re-drawable event).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValidationError(f"expected a 2-d array, got shape {x.shape}")
    p, n = x.shape
    if not 1 <= q <= min(p, n):
        raise ValidationError(f"q={q} out of range for a {p} x {n} matrix")
    try:
        head = lq_positive(x[:q, :])
    except RankError as exc:
        raise LeadingBlockError(
            f"leading {q} x {n} block is numerically row-rank deficient"
        ) from exc
    if q == p:
        tee = head.tee
    else:
        tee = np.vstack([head.tee, x[q:, :] @ head.vee])
    return LqFactorization(tee=tee, vee=head.vee)


def pinv_psd(s) -> SymPsdMatrix:
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Eigenvalues above the rank cutoff are inverted, the rest are zeroed.  The
    result is exactly symmetrized and carries the numerical rank.
    """
    a = check_symmetric(_entries(s))
    p = a.shape[0]
    w, u = np.linalg.eigh(a)
    scale = max(abs(float(w[0])), abs(float(w[-1]))) if w.size else 0.0
    tol = rank_tolerance(p, scale)
    if w.size and float(w[0]) < -tol:
        raise ValidationError(
            f"matrix is not positive semidefinite: min eigenvalue {w[0]:.3e}"
        )
    keep = w > tol
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    out = (u * inv) @ u.T
    out = 0.5 * (out + out.T)
    return SymPsdMatrix(entries=out, declared_rank=int(np.count_nonzero(keep)))


def _positive_eigenvalues(m: np.ndarray, q: int) -> np.ndarray:
    """The q largest-magnitude eigenvalues, validated as positive reals."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not 1 <= q <= a.shape[0]:
        raise ValidationError(f"q={q} out of range for a {a.shape[0]} x {a.shape[0]} matrix")
    w = np.linalg.eigvals(a)
    order = np.argsort(-np.abs(w), kind="stable")
    w = w[order]
    scale = float(np.abs(w[0]))
    top = w[:q]
    if np.any(np.abs(top.imag) > np.sqrt(_EPS) * max(scale, 1.0)):
        raise SpectrumError(
            "leading eigenvalues have a material imaginary part; expected positive reals"
        )
    real = top.real.copy()
    if np.any(real <= rank_tolerance(a.shape[0], scale)):
        raise SpectrumError("leading eigenvalues are not all positive")
    return real


def pos_eig_product(m, q: int) -> float:
    """Product of the q leading (largest-magnitude) eigenvalues of ``m``.

    The product generalizes the determinant to rank-deficient products such
    as pinv(sigma) @ delta.  The q leading eigenvalues must be positive reals,
    otherwise SpectrumError is raised.  Prefer ``log_pos_eig_product`` inside
    loss computations, which cannot overflow.
    """
    return float(np.prod(_positive_eigenvalues(_entries(m), q)))


def log_pos_eig_product(m, q: int) -> float:
    """Logarithm of ``pos_eig_product``, computed as a sum of logs."""
    return float(np.sum(np.log(_positive_eigenvalues(_entries(m), q))))
