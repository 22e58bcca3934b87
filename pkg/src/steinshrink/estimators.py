"""Covariance estimators for the factor model X = B Z under entropy loss.

All estimators act on a SampleContext holding X, S = X X^T and the top-q
eigenpairs of S, where q = min(n, r) is the almost-sure rank of S and r is the
assumed rank of the population covariance.  Labels follow a small grammar:

    UB           S / n, the unbiased scaling
    BC           S / max(n, r), the best constant multiple
    JS           triangular-factor estimator with risk-optimal weights
    ST           eigenframe estimator reusing the same weights
    EB(b)        (S + lambda_b P) / c, expanding S off its column space
    SH(b)        EB(b) minus its column-space inflation
    mJS(b)       JS plus the EB null-space component (requires p = r > n)
    mST(b)       ST plus the EB null-space component (requires p = r > n)
    HF(c)        (S + c u I) / p with u = 1 / tr pinv(S) (requires p > n)

with b one of the data-driven rules b0, b1, bstar, or a numeric constant in
[0, q).  The shrinkage level lambda_b solves sum_i lambda / (l_i + lambda) = b
over the positive eigenvalues l_i of S.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, RankWarning, ValidationError
from .matdecomp import EigenPair, SymPsdMatrix, rank_tolerance, sample_lq, sym_eigen_top
from .randmat import SampleData

_EPS = float(np.finfo(float).eps)

# reject b this close to q, where the shrinkage root diverges
B_GUARD = 1e-6

_B_KINDS = ("b0", "b1", "bstar")


@dataclass(frozen=True)
class ShrinkageSpec:
    """Shrinkage configuration: the b rule plus root-solver controls."""

    b_kind: str | float = "b0"
    solver_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if isinstance(self.b_kind, str):
            if self.b_kind not in _B_KINDS:
                raise ValidationError(
                    f"unknown b rule {self.b_kind!r}; expected one of {_B_KINDS} or a number"
                )
        else:
            if not math.isfinite(self.b_kind) or self.b_kind < 0.0:
                raise ValidationError("a constant b must be finite and nonnegative")
        if not self.solver_tol > 0.0:
            raise ValidationError("solver_tol must be positive")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be at least 1")


@dataclass(frozen=True)
class Estimate:
    """An estimator output: the matrix, a label, and solver diagnostics."""

    matrix: SymPsdMatrix
    label: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.entries

    @property
    def declared_rank(self) -> int:
        return self.matrix.declared_rank


@dataclass(frozen=True)
class SampleContext:
    """Everything an estimator needs from one sample: X, S, eigenpairs, dims."""

    x: np.ndarray
    s: SymPsdMatrix
    eig: EigenPair
    n: int
    r: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2:
            raise ValidationError(f"x must be 2-d, got shape {x.shape}")
        p, n = x.shape
        if n != self.n:
            raise ValidationError(f"x has {n} columns but n={self.n}")
        if not 1 <= self.r <= p:
            raise ValidationError(f"need 1 <= r <= p, got r={self.r}, p={p}")
        if self.s.dim != p:
            raise ValidationError("S dimension does not match x")
        if self.eig.q != min(self.n, self.r):
            raise ValidationError(
                f"eigenpair count {self.eig.q} != q = min(n, r) = {min(self.n, self.r)}"
            )
        object.__setattr__(self, "x", x)

    @property
    def p(self) -> int:
        return self.x.shape[0]

    @property
    def q(self) -> int:
        return min(self.n, self.r)

    @property
    def m(self) -> int:
        return max(self.n, self.r)

    @property
    def ell(self) -> np.ndarray:
        """Positive sample eigenvalues, descending."""
        return self.eig.values

    @classmethod
    def from_data(cls, x, r: int | None = None) -> "SampleContext":
        """Build a context from raw observations, factoring S on the small side."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValidationError(f"x must be a nonempty 2-d array, got shape {x.shape}")
        p, n = x.shape
        if r is None:
            r = p
        q = min(n, r)
        s = x @ x.T
        s = 0.5 * (s + s.T)
        eig = sym_eigen_top(s, q, factor=x if n < p else None)
        return cls(x=x, s=SymPsdMatrix(entries=s, declared_rank=q), eig=eig, n=n, r=r)

    @classmethod
    def from_sample(cls, sample: SampleData, r: int) -> "SampleContext":
        return cls(x=sample.x, s=sample.s, eig=sample.eig, n=sample.x.shape[1], r=r)


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _as_psd(s) -> SymPsdMatrix:
    """Wrap a raw Gram matrix, measuring its rank if not already declared."""
    if isinstance(s, SymPsdMatrix):
        return s
    arr = np.asarray(s, dtype=float)
    w = np.linalg.eigvalsh(arr)
    scale = max(abs(float(w[0])), abs(float(w[-1]))) if w.size else 0.0
    rank = int(np.count_nonzero(w > rank_tolerance(w.shape[0], scale)))
    return SymPsdMatrix(entries=arr, declared_rank=rank)


def js_weights(n: int, r: int) -> np.ndarray:
    """Risk-optimal triangular-class weights d_i = 1 / (n + r - 2i + 1), i = 1..q."""
    if n < 1 or r < 1:
        raise ValidationError("n and r must be positive")
    i = np.arange(1, min(n, r) + 1)
    return 1.0 / (n + r - 2 * i + 1)


def unbiased(s, n: int) -> Estimate:
    """S / n, unbiased for sigma."""
    if n < 1:
        raise ValidationError("n must be positive")
    s = _as_psd(s)
    return Estimate(matrix=SymPsdMatrix(s.entries / n, s.declared_rank), label="UB")


def best_constant(s, n: int, r: int) -> Estimate:
    """S / max(n, r), the constant multiple with smallest entropy risk."""
    if n < 1 or r < 1:
        raise ValidationError("n and r must be positive")
    s = _as_psd(s)
    return Estimate(
        matrix=SymPsdMatrix(s.entries / max(n, r), s.declared_rank), label="BC"
    )


def james_stein(x, n: int, r: int) -> Estimate:
    """Triangular-factor estimator T diag(d) T^T from the sample LQ of X."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != n:
        raise ValidationError(f"x shape {x.shape} incompatible with n={n}")
    if not 1 <= r <= x.shape[0]:
        raise ValidationError(f"need 1 <= r <= p, got r={r}, p={x.shape[0]}")
    q = min(n, r)
    fac = sample_lq(x, q)
    d = js_weights(n, r)
    entries = _sym((fac.tee * d) @ fac.tee.T)
    return Estimate(matrix=SymPsdMatrix(entries, q), label="JS")


def stein_orth(s, n: int, r: int, eig: EigenPair | None = None) -> Estimate:
    """Eigenframe estimator H diag(l_i d_i) H^T with the triangular-class weights."""
    if n < 1 or r < 1:
        raise ValidationError("n and r must be positive")
    q = min(n, r)
    if eig is None:
        eig = sym_eigen_top(s, q)
    if eig.q != q:
        raise ValidationError(f"eigenpair count {eig.q} != q = {q}")
    phi = eig.values * js_weights(n, r)
    entries = _sym((eig.vectors * phi) @ eig.vectors.T)
    return Estimate(matrix=SymPsdMatrix(entries, q), label="ST")


def lambda_bounds(ell, b: float) -> tuple[float, float]:
    """Bracketing interval for the shrinkage root, tight when eigenvalues are equal.

    For 0 < b < q the root lies in

        (b / (q - b)) * q / tr(S^+)  <=  lambda  <=  (b / (q - b)) * tr(S) / q,

    and additionally lambda <= b / ((1 - b) tr(S^+)) when b < 1.
    """
    ell = _check_spectrum(ell)
    q = ell.shape[0]
    b = _check_b(b, q)
    if b == 0.0:
        return 0.0, 0.0
    tr = float(np.sum(ell))
    tr_inv = float(np.sum(1.0 / ell))
    lo = (b / (q - b)) * q / tr_inv
    hi = (b / (q - b)) * tr / q
    if b < 1.0:
        hi = min(hi, b / ((1.0 - b) * tr_inv))
    return lo, hi


def _check_spectrum(ell) -> np.ndarray:
    ell = np.atleast_1d(np.asarray(ell, dtype=float))
    if ell.ndim != 1 or ell.shape[0] < 1:
        raise ValidationError("expected a nonempty 1-d array of eigenvalues")
    if not np.all(np.isfinite(ell)) or np.any(ell <= 0.0):
        raise ValidationError("eigenvalues must be positive and finite")
    return ell


def _check_b(b: float, q: int) -> float:
    b = float(b)
    if not math.isfinite(b) or b < 0.0 or b >= q:
        raise ValidationError(f"b must lie in [0, q) = [0, {q}), got {b}")
    if b > q - B_GUARD:
        raise ValidationError(
            f"b = {b} is within {B_GUARD} of q = {q}; the shrinkage root diverges there"
        )
    return b


def solve_lambda(ell, b: float, solver_tol: float = 1e-12, max_iter: int = 200) -> float:
    """Root of sum_i lambda / (l_i + lambda) = b over the positive spectrum.

    The left side is increasing and concave in lambda, so a bracketed Newton
    iteration started inside the analytic bounds converges quadratically.
    Returns 0 exactly when b = 0.
    """
    ell = _check_spectrum(ell)
    q = ell.shape[0]
    b = _check_b(b, q)
    if b == 0.0:
        return 0.0

    def g(lam: float) -> float:
        return float(np.sum(lam / (ell + lam)))

    lo, hi = lambda_bounds(ell, b)
    # rounding guards: the analytic bounds are tight for equal eigenvalues
    lo *= 1.0 - 1e-12
    hi *= 1.0 + 1e-12
    if g(lo) > b:
        lo = 0.0
    for _ in range(200):
        if g(hi) >= b:
            break
        hi *= 2.0

    residual_tol = max(1e-13, 8.0 * q * _EPS)
    lam = math.sqrt(lo * hi) if lo > 0.0 else 0.5 * (lo + hi)
    val = g(lam) - b
    for _ in range(max_iter):
        if val > 0.0:
            hi = lam
        else:
            lo = lam
        deriv = float(np.sum(ell / (ell + lam) ** 2))
        candidate = lam - val / deriv if deriv > 0.0 else 0.5 * (lo + hi)
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        step_small = abs(candidate - lam) <= solver_tol * max(abs(lam), abs(candidate))
        lam = candidate
        val = g(lam) - b
        if abs(val) <= residual_tol and step_small:
            break
    if abs(val) > 1e-10:
        raise ConfigError(
            f"shrinkage root solver did not converge: residual {abs(val):.3e} "
            f"after {max_iter} iterations"
        )
    return float(lam)


def b_value(kind, *, n: int, r: int, ell=None) -> float:
    """Resolve a b rule to a number for sample dimensions (n, r).

    With q = min(n, r) and m = max(n, r):

    * ``b0``    c0 q / (1 + c0) with c0 = 6(q + 1) / (3m - 4q - 4), requiring
                3m - 4q - 4 > 0;
    * ``b1``    (1 + l_min / l_max) * b0, requiring the sample spectrum;
    * ``bstar`` cs / (1 + cs) with cs = 2(q - 1) / (m - q + 1), requiring
                q >= 2 and m - q - 1 > 0;
    * a number  used as given.

    Any result outside [0, q - 1e-6] is rejected with ConfigError.
    """
    if n < 1 or r < 1:
        raise ValidationError("n and r must be positive")
    q, m = min(n, r), max(n, r)
    if isinstance(kind, str):
        if kind in ("b0", "b1"):
            denom = 3 * m - 4 * q - 4
            if denom <= 0:
                raise ConfigError(
                    f"rule {kind!r} needs 3*max(n,r) - 4*min(n,r) - 4 > 0; "
                    f"got {denom} at (n, r) = ({n}, {r})"
                )
            c0 = 6.0 * (q + 1) / denom
            b = c0 * q / (1.0 + c0)
            if kind == "b1":
                if ell is None:
                    raise ValidationError("rule 'b1' needs the sample eigenvalues")
                ell = _check_spectrum(ell)
                b *= 1.0 + float(np.min(ell)) / float(np.max(ell))
        elif kind == "bstar":
            if q < 2:
                raise ConfigError(f"rule 'bstar' needs min(n, r) >= 2, got q = {q}")
            if m - q - 1 <= 0:
                raise ConfigError(
                    f"rule 'bstar' needs max(n,r) - min(n,r) - 1 > 0; "
                    f"got {m - q - 1} at (n, r) = ({n}, {r})"
                )
            cs = 2.0 * (q - 1) / (m - q + 1)
            b = cs / (1.0 + cs)
        else:
            raise ConfigError(f"unknown b rule {kind!r}")
    else:
        b = float(kind)
    if not 0.0 <= b <= q - B_GUARD:
        raise ConfigError(
            f"b rule {kind!r} gave b = {b:.6g} outside [0, q - {B_GUARD}] at "
            f"(n, r) = ({n}, {r})"
        )
    return float(b)


def _b_label(b_kind) -> str:
    if isinstance(b_kind, str):
        return b_kind
    return format(float(b_kind), "g")


def _resolve_shrinkage(ctx: SampleContext, spec: ShrinkageSpec) -> tuple[float, float]:
    b = b_value(spec.b_kind, n=ctx.n, r=ctx.r, ell=ctx.ell)
    lam = solve_lambda(ctx.ell, b, spec.solver_tol, spec.max_iter)
    return b, lam


def empirical_bayes(ctx: SampleContext, spec: ShrinkageSpec = ShrinkageSpec()) -> Estimate:
    """Shrinkage toward a scaled identity prior.

    For r <= n the estimate is (S + lambda_b H H^T) / n, full rank r on the
    column space of S; for p >= r > n it is (S + lambda_b I) / r, full rank p
    whenever lambda_b > 0.
    """
    b, lam = _resolve_shrinkage(ctx, spec)
    label = f"EB({_b_label(spec.b_kind)})"
    diag = {"b": b, "lambda_hat": lam}
    if ctx.r <= ctx.n:
        h = ctx.eig.vectors
        entries = _sym((ctx.s.entries + lam * (h @ h.T)) / ctx.n)
        rank = ctx.r
    else:
        entries = (ctx.s.entries + lam * np.eye(ctx.p)) / ctx.r
        if lam > 0.0:
            rank = ctx.p
        else:
            rank = ctx.q
            warnings.warn(
                "zero shrinkage level leaves the estimate rank deficient", RankWarning
            )
    return Estimate(matrix=SymPsdMatrix(entries, rank), label=label, diagnostics=diag)


def shrinkage(ctx: SampleContext, spec: ShrinkageSpec = ShrinkageSpec()) -> Estimate:
    """The empirical-Bayes estimate with its column-space inflation removed.

    For r <= n this is exactly S / n; for p >= r > n it is
    (S + lambda_b (I - H H^T)) / r, which expands S only off its column space.
    """
    b, lam = _resolve_shrinkage(ctx, spec)
    label = f"SH({_b_label(spec.b_kind)})"
    diag = {"b": b, "lambda_hat": lam}
    if ctx.r <= ctx.n:
        entries = ctx.s.entries / ctx.n
        rank = ctx.r
    else:
        h = ctx.eig.vectors
        proj = np.eye(ctx.p) - h @ h.T
        entries = _sym((ctx.s.entries + lam * proj) / ctx.r)
        if lam > 0.0:
            rank = ctx.p
        else:
            rank = ctx.q
            warnings.warn(
                "zero shrinkage level leaves the estimate rank deficient", RankWarning
            )
    return Estimate(matrix=SymPsdMatrix(entries, rank), label=label, diagnostics=diag)


def _null_space_component(ctx: SampleContext, lam: float) -> np.ndarray:
    h = ctx.eig.vectors
    return (lam / ctx.p) * (np.eye(ctx.p) - h @ h.T)


def _require_square_deficient(ctx: SampleContext, what: str) -> None:
    if not (ctx.p == ctx.r and ctx.r > ctx.n):
        raise ConfigError(
            f"{what} requires p = r > n, got (p, r, n) = ({ctx.p}, {ctx.r}, {ctx.n})"
        )


def modified_js(ctx: SampleContext, spec: ShrinkageSpec = ShrinkageSpec()) -> Estimate:
    """Triangular-factor estimator completed to full rank on the null space."""
    _require_square_deficient(ctx, "mJS")
    b, lam = _resolve_shrinkage(ctx, spec)
    core = james_stein(ctx.x, ctx.n, ctx.r)
    entries = _sym(core.entries + _null_space_component(ctx, lam))
    rank = ctx.p if lam > 0.0 else ctx.q
    return Estimate(
        matrix=SymPsdMatrix(entries, rank),
        label=f"mJS({_b_label(spec.b_kind)})",
        diagnostics={"b": b, "lambda_hat": lam},
    )


def modified_st(ctx: SampleContext, spec: ShrinkageSpec = ShrinkageSpec()) -> Estimate:
    """Eigenframe estimator completed to full rank on the null space."""
    _require_square_deficient(ctx, "mST")
    b, lam = _resolve_shrinkage(ctx, spec)
    phi = ctx.ell * js_weights(ctx.n, ctx.r)
    h = ctx.eig.vectors
    entries = _sym((h * phi) @ h.T + _null_space_component(ctx, lam))
    rank = ctx.p if lam > 0.0 else ctx.q
    return Estimate(
        matrix=SymPsdMatrix(entries, rank),
        label=f"mST({_b_label(spec.b_kind)})",
        diagnostics={"b": b, "lambda_hat": lam},
    )


def haff(ctx: SampleContext, c: float) -> Estimate:
    """(S + c u I) / p with u = 1 / tr pinv(S), an identity-direction expansion."""
    c = float(c)
    if not math.isfinite(c) or c < 0.0:
        raise ValidationError("c must be finite and nonnegative")
    if ctx.p <= ctx.n:
        raise ConfigError(f"HF requires p > n, got (p, n) = ({ctx.p}, {ctx.n})")
    u = 1.0 / float(np.sum(1.0 / ctx.ell))
    entries = (ctx.s.entries + c * u * np.eye(ctx.p)) / ctx.p
    rank = ctx.p if c > 0.0 else ctx.q
    return Estimate(
        matrix=SymPsdMatrix(entries, rank),
        label=f"HF({format(c, 'g')})",
        diagnostics={"u": u},
    )


_LABEL_RE = re.compile(r"^([A-Za-z]+)(?:\(([^()]+)\))?$")


def parse_label(label: str) -> tuple[str, str | None]:
    """Split an estimator label like 'EB(b0)' into ('EB', 'b0')."""
    m = _LABEL_RE.match(label.strip())
    if m is None:
        raise ConfigError(f"malformed estimator label {label!r}")
    return m.group(1), m.group(2)


def parse_b_kind(arg: str):
    """Normalize a b-rule argument: 'b0' / 'b1' / 'bstar' (alias 'b*') or a float."""
    arg = arg.strip()
    if arg == "b*":
        return "bstar"
    if arg in _B_KINDS:
        return arg
    try:
        return float(arg)
    except ValueError:
        raise ConfigError(f"unknown b rule {arg!r}") from None


def make_estimator(
    label: str, solver_tol: float = 1e-12, max_iter: int = 200
) -> Callable[[SampleContext], Estimate]:
    """Turn a label into a callable SampleContext -> Estimate.

    Raises ConfigError for labels outside the grammar described in the module
    docstring.
    """
    name, arg = parse_label(label)
    if name in ("UB", "BC", "JS", "ST"):
        if arg is not None:
            raise ConfigError(f"estimator {name} takes no argument, got {label!r}")
        if name == "UB":
            return lambda ctx: unbiased(ctx.s, ctx.n)
        if name == "BC":
            return lambda ctx: best_constant(ctx.s, ctx.n, ctx.r)
        if name == "JS":
            return lambda ctx: james_stein(ctx.x, ctx.n, ctx.r)
        return lambda ctx: stein_orth(ctx.s, ctx.n, ctx.r, eig=ctx.eig)
    if name in ("EB", "SH", "mJS", "mST"):
        if arg is None:
            raise ConfigError(f"estimator {name} needs a b rule, e.g. {name}(b0)")
        spec = ShrinkageSpec(
            b_kind=parse_b_kind(arg), solver_tol=solver_tol, max_iter=max_iter
        )
        fn = {
            "EB": empirical_bayes,
            "SH": shrinkage,
            "mJS": modified_js,
            "mST": modified_st,
        }[name]
        return lambda ctx: fn(ctx, spec)
    if name == "HF":
        if arg is None:
            raise ConfigError("estimator HF needs a numeric expansion constant, e.g. HF(1)")
        try:
            c = float(arg)
        except ValueError:
            raise ConfigError(f"HF argument must be numeric, got {arg!r}") from None
        return lambda ctx: haff(ctx, c)
    raise ConfigError(f"unknown estimator {name!r}")


def canonical_label(label: str) -> str:
    """Normalize a label (e.g. 'EB(b*)' to 'EB(bstar)', 'HF(1.0)' to 'HF(1)')."""
    name, arg = parse_label(label)
    if arg is None:
        return name
    if name in ("EB", "SH", "mJS", "mST"):
        return f"{name}({_b_label(parse_b_kind(arg))})"
    if name == "HF":
        return f"{name}({format(float(arg), 'g')})"
    return label


def predicted_rank(label: str, p: int, n: int, r: int) -> int:
    """Output rank of an estimator at dimensions (p, n, r), assuming b > 0 rules."""
    name, arg = parse_label(label)
    q = min(n, r)
    if name in ("UB", "BC", "JS", "ST"):
        return q
    if name in ("EB", "SH"):
        if r <= n:
            return r
        if arg is not None and _is_zero_arg(arg):
            return q
        return p
    if name in ("mJS", "mST"):
        return q if (arg is not None and _is_zero_arg(arg)) else p
    if name == "HF":
        return q if (arg is not None and _is_zero_arg(arg)) else p
    raise ConfigError(f"unknown estimator {name!r}")


def _is_zero_arg(arg: str) -> bool:
    try:
        return float(arg) == 0.0
    except ValueError:
        return False
