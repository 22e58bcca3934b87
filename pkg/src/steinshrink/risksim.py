"""Monte Carlo risk engine with paired comparisons and published benchmarks.

A RiskReport stores the full matrix of per-replication losses, so estimators
drawn on the same streams can be compared pairwise (dominance checks) without
rerunning.  Replication i always consumes the stream derived from
(master_seed, i), which makes reports bit-identical across worker counts; the
worker pool only changes who computes which rows, never what the rows are.

``REFERENCE_RISKS`` holds published simulated risks (mean and standard error
at 2000 replications) for the three diagonal benchmark populations, used by
``table1_suite`` to cross-check this implementation against an independent
one.  A reproduced cell counts as consistent when the two means agree within
four combined standard errors plus a 0.05 slack for their finite-precision
reporting.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from io import StringIO

import numpy as np

from .errors import (
    ConfigError,
    RankError,
    SimulationError,
    SpectrumError,
    ValidationError,
)
from .estimators import (
    SampleContext,
    b_value,
    canonical_label,
    make_estimator,
    parse_b_kind,
    parse_label,
    predicted_rank,
)
from .loss import _cholesky_lower, _loss_given_chol, stein_loss_singular
from .randmat import CovarianceModel, SeedSpec, draw_sample, scenario_sigma, singular_model

DEFAULT_MASTER_SEED = 1729

# reserved stream index for drawing the population factor in singular models,
# far above any replication index
_MODEL_STREAM = 2**40
# reserved stream index for identity-check draws
_CHECK_STREAM = 2**40 + 1

_SCENARIOS = ("case1", "case2", "case3", "singular")
_LOSS_MODES = ("full-rank", "singular")

CSV_HEADER = "scenario,p,n,r,estimator,mean_loss,std_err,replications,seed"


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation experiment: population, dimensions, estimators, controls."""

    scenario: str
    p: int
    n: int
    estimators: tuple
    r: int | None = None
    replications: int = 2000
    master_seed: int = DEFAULT_MASTER_SEED
    loss_mode: str = "full-rank"
    workers: int = 1
    solver_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.r is None:
            if self.scenario == "singular":
                raise ConfigError("scenario 'singular' needs an explicit rank r")
            object.__setattr__(self, "r", self.p)


def preflight(config: ExperimentConfig) -> None:
    """Reject configurations that cannot produce a valid report.

    Checks everything knowable without data: scenario and dimension ranges,
    estimator label grammar and duplicate labels, feasibility of the b rules
    at these dimensions, estimator shape preconditions, and (in full-rank
    loss mode) that every estimator is full rank so the loss is defined.
    """
    if config.scenario not in _SCENARIOS:
        raise ConfigError(
            f"unknown scenario {config.scenario!r}; expected one of {_SCENARIOS}"
        )
    if config.p < 1 or config.n < 1:
        raise ConfigError("p and n must be positive")
    if not 1 <= config.r <= config.p:
        raise ConfigError(f"need 1 <= r <= p, got r={config.r}, p={config.p}")
    if config.scenario != "singular" and config.r != config.p:
        raise ConfigError(
            f"scenario {config.scenario!r} is full rank; r must equal p"
        )
    if config.replications < 2:
        raise ConfigError("replications must be at least 2")
    if config.workers < 1:
        raise ConfigError("workers must be at least 1")
    if config.loss_mode not in _LOSS_MODES:
        raise ConfigError(
            f"unknown loss mode {config.loss_mode!r}; expected one of {_LOSS_MODES}"
        )
    if not config.estimators:
        raise ConfigError("at least one estimator is required")
    canon = [canonical_label(lbl) for lbl in config.estimators]
    if len(set(canon)) != len(canon):
        raise ConfigError(f"duplicate estimator labels in {config.estimators}")
    for lbl in config.estimators:
        make_estimator(lbl, config.solver_tol, config.max_iter)
        _static_feasibility(lbl, config.p, config.n, config.r)
    if config.loss_mode == "full-rank":
        if config.r != config.p:
            raise ConfigError("full-rank loss needs a full-rank population (r = p)")
        for lbl in config.estimators:
            if predicted_rank(lbl, config.p, config.n, config.r) != config.p:
                raise ConfigError(
                    f"estimator {lbl!r} is rank deficient at "
                    f"(p, n, r) = ({config.p}, {config.n}, {config.r}); "
                    "use the singular loss mode"
                )


def _static_feasibility(label: str, p: int, n: int, r: int) -> None:
    name, arg = parse_label(label)
    if name in ("EB", "SH", "mJS", "mST"):
        if name in ("mJS", "mST") and not (p == r and r > n):
            raise ConfigError(
                f"estimator {label!r} requires p = r > n, got "
                f"(p, r, n) = ({p}, {r}, {n})"
            )
        # data-free feasibility; the b1 rule shares b0's dimension
        # precondition, its value depends on the draw and is checked per draw
        kind = parse_b_kind(arg)
        if kind == "b1":
            kind = "b0"
        b_value(kind, n=n, r=r)
    elif name == "HF":
        if p <= n:
            raise ConfigError(f"estimator {label!r} requires p > n, got p={p}, n={n}")


@dataclass(frozen=True)
class EstimatorRisk:
    """Aggregated Monte Carlo risk for one estimator."""

    label: str
    mean_loss: float
    std_err: float
    replications: int
    mean_lambda: float | None = None
    mean_b: float | None = None


@dataclass(frozen=True)
class RiskReport:
    """Simulation output: per-estimator risks plus the paired loss matrix."""

    config: ExperimentConfig
    risks: tuple
    failures: int
    valid: bool
    wall_time: float
    losses: np.ndarray = field(repr=False)

    def risk(self, label: str) -> EstimatorRisk:
        want = canonical_label(label)
        for est in self.risks:
            if est.label == want:
                return est
        raise ValidationError(f"no estimator labelled {label!r} in this report")

    def paired_losses(self, label: str) -> np.ndarray:
        """Per-replication losses for one estimator, failures dropped."""
        want = canonical_label(label)
        canon = [est.label for est in self.risks]
        if want not in canon:
            raise ValidationError(f"no estimator labelled {label!r} in this report")
        col = self.losses[:, canon.index(want)]
        ok = ~np.isnan(self.losses).any(axis=1)
        return col[ok]

    def to_csv(self) -> str:
        out = StringIO()
        out.write(CSV_HEADER + "\n")
        cfg = self.config
        for est in self.risks:
            out.write(
                f"{cfg.scenario},{cfg.p},{cfg.n},{cfg.r},{est.label},"
                f"{est.mean_loss:.6g},{est.std_err:.6g},{est.replications},"
                f"{cfg.master_seed}\n"
            )
        return out.getvalue()

    def to_json_dict(self) -> dict:
        cfg = self.config
        return {
            "scenario": cfg.scenario,
            "p": cfg.p,
            "n": cfg.n,
            "r": cfg.r,
            "replications": cfg.replications,
            "seed": cfg.master_seed,
            "loss_mode": cfg.loss_mode,
            "failures": self.failures,
            "valid": self.valid,
            "wall_time": self.wall_time,
            "estimators": [
                {
                    "label": est.label,
                    "mean_loss": est.mean_loss,
                    "std_err": est.std_err,
                    "replications": est.replications,
                    "mean_lambda": est.mean_lambda,
                    "mean_b": est.mean_b,
                }
                for est in self.risks
            ],
        }


def _build_model(config: ExperimentConfig) -> CovarianceModel:
    if config.scenario == "singular":
        return singular_model(
            config.p, config.r, config.n, SeedSpec(config.master_seed, _MODEL_STREAM)
        )
    case = int(config.scenario[-1])
    return scenario_sigma(case, config.p, config.n)


def _make_loss_evaluator(config: ExperimentConfig, model: CovarianceModel):
    if config.loss_mode == "full-rank":
        chol = _cholesky_lower(model.sigma.entries, "sigma")
        return lambda est: _loss_given_chol(est.entries, chol)
    pinv = model.sigma_pinv
    rank_sigma = model.r

    def evaluate(est):
        q = min(rank_sigma, est.declared_rank)
        return stein_loss_singular(est.matrix, pinv, q)

    return evaluate


def _run_rows(config: ExperimentConfig, start: int, stop: int):
    """Compute loss and diagnostic rows for replication indices [start, stop)."""
    model = _build_model(config)
    fns = [
        make_estimator(lbl, config.solver_tol, config.max_iter)
        for lbl in config.estimators
    ]
    evaluate = _make_loss_evaluator(config, model)
    k = len(fns)
    losses = np.full((stop - start, k), np.nan)
    lambdas = np.full((stop - start, k), np.nan)
    bees = np.full((stop - start, k), np.nan)
    for row, index in enumerate(range(start, stop)):
        try:
            sample = draw_sample(model, SeedSpec(config.master_seed, index))
            ctx = SampleContext.from_sample(sample, config.r)
            loss_row = np.empty(k)
            lam_row = np.full(k, np.nan)
            b_row = np.full(k, np.nan)
            for col, fn in enumerate(fns):
                est = fn(ctx)
                loss_row[col] = evaluate(est)
                lam_row[col] = est.diagnostics.get("lambda_hat", np.nan)
                b_row[col] = est.diagnostics.get("b", np.nan)
        except (RankError, SpectrumError, SimulationError, ConfigError):
            # rank and spectrum failures have probability zero and are simply
            # skipped; data-driven b rules can also fall outside [0, q) on
            # freak draws, which is likewise a per-draw event
            continue
        losses[row] = loss_row
        lambdas[row] = lam_row
        bees[row] = b_row
    return losses, lambdas, bees


def _chunk_worker(args):
    config, start, stop = args
    return _run_rows(config, start, stop)


def simulate_risk(config: ExperimentConfig) -> RiskReport:
    """Run the experiment and aggregate mean losses with standard errors.

    Replications that fail (rank, spectrum, or per-draw rule violations) are
    excluded from every estimator's aggregate; the report is flagged invalid
    when more than 1% of replications fail.
    """
    preflight(config)
    start_time = time.perf_counter()
    n_rep = config.replications
    if config.workers == 1:
        losses, lambdas, bees = _run_rows(config, 0, n_rep)
    else:
        chunk = max(1, math.ceil(n_rep / (config.workers * 4)))
        spans = [(s, min(s + chunk, n_rep)) for s in range(0, n_rep, chunk)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_chunk_worker, [(config, a, b) for a, b in spans]))
        losses = np.vstack([part[0] for part in parts])
        lambdas = np.vstack([part[1] for part in parts])
        bees = np.vstack([part[2] for part in parts])
    ok = ~np.isnan(losses).any(axis=1)
    n_ok = int(np.count_nonzero(ok))
    failures = n_rep - n_ok
    if n_ok < 2:
        raise SimulationError(
            f"only {n_ok} of {n_rep} replications produced a usable draw"
        )
    sub = losses[ok]
    means = sub.mean(axis=0)
    errs = sub.std(axis=0, ddof=1) / math.sqrt(n_ok)
    risks = []
    for col, lbl in enumerate(config.estimators):
        risks.append(
            EstimatorRisk(
                label=canonical_label(lbl),
                mean_loss=float(means[col]),
                std_err=float(errs[col]),
                replications=n_ok,
                mean_lambda=_column_mean(lambdas[ok][:, col]),
                mean_b=_column_mean(bees[ok][:, col]),
            )
        )
    return RiskReport(
        config=config,
        risks=tuple(risks),
        failures=failures,
        valid=failures <= 0.01 * n_rep,
        wall_time=time.perf_counter() - start_time,
        losses=losses,
    )


def _column_mean(col: np.ndarray) -> float | None:
    vals = col[~np.isnan(col)]
    if vals.size == 0:
        return None
    return float(vals.mean())


@dataclass(frozen=True)
class DominanceVerdict:
    """Paired comparison: mean loss difference (better minus worse) and verdict."""

    better: str
    worse: str
    mean_diff: float
    std_err: float
    replications: int
    verdict: str


def dominance_report(report: RiskReport, pairs) -> list[DominanceVerdict]:
    """Check claimed risk orderings on paired per-replication losses.

    For each (better, worse) pair the verdict is CONSISTENT when the mean of
    loss(better) - loss(worse) does not exceed four standard errors of that
    paired difference, and VIOLATION otherwise.
    """
    out = []
    for better, worse in pairs:
        a = report.paired_losses(better)
        b = report.paired_losses(worse)
        diff = a - b
        n = diff.shape[0]
        mean = float(diff.mean())
        se = float(diff.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        verdict = "CONSISTENT" if mean <= 4.0 * se else "VIOLATION"
        out.append(
            DominanceVerdict(
                better=canonical_label(better),
                worse=canonical_label(worse),
                mean_diff=mean,
                std_err=se,
                replications=n,
                verdict=verdict,
            )
        )
    return out


def format_dominance(verdicts) -> str:
    lines = []
    for v in verdicts:
        lines.append(
            f"{v.better} vs {v.worse}: mean_diff={v.mean_diff:.6g} "
            f"se={v.std_err:.6g} n={v.replications} {v.verdict}"
        )
    return "\n".join(lines)


@dataclass(frozen=True)
class SteinHaffResult:
    """Monte Carlo check of the rank-aware integration-by-parts identity."""

    p: int
    r: int
    n: int
    c: float
    replications: int
    lhs_mean: float
    rhs_mean: float
    mean_diff: float
    std_err: float
    exact: float
    consistent: bool


def stein_haff_check(
    p: int,
    r: int,
    n: int,
    c: float = 1.0,
    replications: int = 100_000,
    master_seed: int = DEFAULT_MASTER_SEED,
) -> SteinHaffResult:
    """Verify E[tr pinv(sigma) H Phi H^T] against its eigenvalue-side expression.

    Uses the linear spectral statistic Phi = diag(c * l_i), whose derivative
    term is the constant c.  The eigenvalue side per draw is

        sum_i ( (|n - r| - 1) phi_i / l_i + 2 c ) + 2 sum_{i<j} (phi_i - phi_j) / (l_i - l_j),

    which for this Phi integrates to exactly c * min(n,r) * max(n,r).  The
    check passes when the two sample means agree within four standard errors
    of their paired difference.
    """
    if replications < 2:
        raise ConfigError("replications must be at least 2")
    c = float(c)
    if c < 0.0:
        raise ValidationError("c must be nonnegative")
    model = singular_model(p, r, n, SeedSpec(master_seed, _MODEL_STREAM))
    q = model.q
    rng = SeedSpec(master_seed, _CHECK_STREAM).generator()
    pinv = model.sigma_pinv.entries
    lhs = np.empty(replications)
    rhs = np.empty(replications)
    batch = 20_000
    done = 0
    iu = np.triu_indices(q, k=1)
    absdiff = abs(n - r)
    while done < replications:
        size = min(batch, replications - done)
        z = rng.standard_normal((size, r, n))
        x = np.matmul(model.factor, z)
        s = np.matmul(x, np.transpose(x, (0, 2, 1)))
        s = 0.5 * (s + np.transpose(s, (0, 2, 1)))
        w, u = np.linalg.eigh(s)
        vals = w[:, ::-1][:, :q]
        vecs = u[:, :, ::-1][:, :, :q]
        phi = c * vals
        quad = np.einsum("bpk,bpk->bk", vecs, np.matmul(pinv, vecs))
        lhs[done : done + size] = np.sum(phi * quad, axis=1)
        head = np.sum((absdiff - 1) * (phi / vals), axis=1) + 2.0 * c * q
        if q > 1:
            num = phi[:, :, None] - phi[:, None, :]
            den = vals[:, :, None] - vals[:, None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(den != 0.0, num / den, 0.0)
            head = head + 2.0 * np.sum(ratio[:, iu[0], iu[1]], axis=1)
        rhs[done : done + size] = head
        done += size
    diff = lhs - rhs
    mean_diff = float(diff.mean())
    se = float(diff.std(ddof=1) / math.sqrt(replications))
    return SteinHaffResult(
        p=p,
        r=r,
        n=n,
        c=c,
        replications=replications,
        lhs_mean=float(lhs.mean()),
        rhs_mean=float(rhs.mean()),
        mean_diff=mean_diff,
        std_err=se,
        exact=c * min(n, r) * max(n, r),
        consistent=abs(mean_diff) <= 4.0 * se or (se == 0.0 and mean_diff == 0.0),
    )


# Published simulated risks (mean and standard error at 2000 replications)
# for the three diagonal benchmark populations under the full-rank entropy
# loss.  Keys are (case, p, n); columns follow TABLE_ESTIMATORS.
TABLE_ESTIMATORS = ("EB(b0)", "mST(b0)", "EB(b1)", "mST(b1)", "EB(bstar)")

REFERENCE_RISKS = {
    (1, 50, 5): {
        "EB(b0)": (28.6, 0.07),
        "mST(b0)": (28.5, 0.08),
        "EB(b1)": (18.4, 0.08),
        "mST(b1)": (18.2, 0.09),
        "EB(bstar)": (113.4, 0.10),
    },
    (1, 50, 15): {
        "EB(b0)": (5.0, 0.01),
        "mST(b0)": (2.7, 0.02),
        "EB(b1)": (4.8, 0.01),
        "mST(b1)": (2.0, 0.02),
        "EB(bstar)": (86.2, 0.06),
    },
    (1, 50, 25): {
        "EB(b0)": (24.3, 0.08),
        "mST(b0)": (8.7, 0.02),
        "EB(b1)": (26.5, 0.10),
        "mST(b1)": (9.6, 0.03),
        "EB(bstar)": (67.3, 0.06),
    },
    (1, 100, 5): {
        "EB(b0)": (115.8, 0.13),
        "mST(b0)": (115.8, 0.13),
        "EB(b1)": (82.4, 0.16),
        "mST(b1)": (82.3, 0.16),
        "EB(bstar)": (301.1, 0.14),
    },
    (1, 100, 25): {
        "EB(b0)": (13.3, 0.02),
        "mST(b0)": (10.8, 0.03),
        "EB(b1)": (10.4, 0.02),
        "mST(b1)": (7.3, 0.03),
        "EB(bstar)": (228.7, 0.07),
    },
    (1, 100, 50): {
        "EB(b0)": (41.2, 0.08),
        "mST(b0)": (14.1, 0.02),
        "EB(b1)": (44.3, 0.09),
        "mST(b1)": (15.4, 0.02),
        "EB(bstar)": (165.3, 0.06),
    },
    (1, 150, 5): {
        "EB(b0)": (230.7, 0.16),
        "mST(b0)": (230.7, 0.16),
        "EB(b1)": (170.9, 0.22),
        "mST(b1)": (170.9, 0.22),
        "EB(bstar)": (516.7, 0.18),
    },
    (1, 150, 40): {
        "EB(b0)": (18.0, 0.02),
        "mST(b0)": (13.7, 0.03),
        "EB(b1)": (14.9, 0.01),
        "mST(b1)": (9.6, 0.03),
        "EB(bstar)": (377.5, 0.06),
    },
    (1, 150, 75): {
        "EB(b0)": (59.0, 0.07),
        "mST(b0)": (19.9, 0.02),
        "EB(b1)": (63.1, 0.08),
        "mST(b1)": (21.5, 0.02),
        "EB(bstar)": (276.1, 0.06),
    },
    (2, 50, 5): {
        "EB(b0)": (26.0, 0.07),
        "mST(b0)": (25.9, 0.08),
        "EB(b1)": (19.1, 0.07),
        "mST(b1)": (18.9, 0.08),
        "EB(bstar)": (105.6, 0.12),
    },
    (2, 50, 15): {
        "EB(b0)": (13.3, 0.02),
        "mST(b0)": (11.0, 0.01),
        "EB(b1)": (14.4, 0.03),
        "mST(b1)": (11.6, 0.02),
        "EB(bstar)": (81.7, 0.07),
    },
    (2, 50, 25): {
        "EB(b0)": (44.2, 0.13),
        "mST(b0)": (27.6, 0.06),
        "EB(b1)": (46.3, 0.14),
        "mST(b1)": (28.9, 0.07),
        "EB(bstar)": (65.1, 0.06),
    },
    (2, 100, 5): {
        "EB(b0)": (103.0, 0.14),
        "mST(b0)": (102.9, 0.14),
        "EB(b1)": (75.4, 0.17),
        "mST(b1)": (75.3, 0.17),
        "EB(bstar)": (282.9, 0.17),
    },
    (2, 100, 25): {
        "EB(b0)": (23.7, 0.01),
        "mST(b0)": (21.3, 0.01),
        "EB(b1)": (23.7, 0.01),
        "mST(b1)": (20.8, 0.01),
        "EB(bstar)": (217.6, 0.08),
    },
    (2, 100, 50): {
        "EB(b0)": (76.7, 0.12),
        "mST(b0)": (48.2, 0.06),
        "EB(b1)": (79.5, 0.13),
        "mST(b1)": (49.9, 0.06),
        "EB(bstar)": (160.5, 0.06),
    },
    (2, 150, 5): {
        "EB(b0)": (207.4, 0.18),
        "mST(b0)": (207.4, 0.18),
        "EB(b1)": (155.4, 0.23),
        "mST(b1)": (155.4, 0.23),
        "EB(bstar)": (488.0, 0.21),
    },
    (2, 150, 40): {
        "EB(b0)": (35.6, 0.01),
        "mST(b0)": (31.3, 0.01),
        "EB(b1)": (36.1, 0.01),
        "mST(b1)": (31.1, 0.01),
        "EB(bstar)": (361.2, 0.08),
    },
    (2, 150, 75): {
        "EB(b0)": (110.7, 0.11),
        "mST(b0)": (69.6, 0.06),
        "EB(b1)": (114.5, 0.12),
        "mST(b1)": (71.9, 0.06),
        "EB(bstar)": (268.6, 0.06),
    },
    (3, 50, 5): {
        "EB(b0)": (35.7, 0.02),
        "mST(b0)": (35.6, 0.02),
        "EB(b1)": (38.4, 0.08),
        "mST(b1)": (38.2, 0.07),
        "EB(bstar)": (87.1, 0.14),
    },
    (3, 50, 15): {
        "EB(b0)": (61.9, 0.17),
        "mST(b0)": (59.2, 0.16),
        "EB(b1)": (65.1, 0.20),
        "mST(b1)": (62.2, 0.18),
        "EB(bstar)": (70.8, 0.09),
    },
    (3, 50, 25): {
        "EB(b0)": (125.6, 0.33),
        "mST(b0)": (105.7, 0.27),
        "EB(b1)": (127.5, 0.34),
        "mST(b1)": (107.2, 0.28),
        "EB(bstar)": (59.8, 0.07),
    },
    (3, 100, 5): {
        "EB(b0)": (87.4, 0.11),
        "mST(b0)": (87.4, 0.11),
        "EB(b1)": (77.2, 0.08),
        "mST(b1)": (77.2, 0.08),
        "EB(bstar)": (237.3, 0.21),
    },
    (3, 100, 25): {
        "EB(b0)": (99.4, 0.12),
        "mST(b0)": (96.7, 0.12),
        "EB(b1)": (104.7, 0.15),
        "mST(b1)": (101.8, 0.14),
        "EB(bstar)": (188.8, 0.10),
    },
    (3, 100, 50): {
        "EB(b0)": (219.5, 0.31),
        "mST(b0)": (186.2, 0.25),
        "EB(b1)": (221.8, 0.32),
        "mST(b1)": (188.1, 0.26),
        "EB(bstar)": (148.2, 0.07),
    },
    (3, 150, 5): {
        "EB(b0)": (165.1, 0.18),
        "mST(b0)": (165.1, 0.18),
        "EB(b1)": (135.9, 0.17),
        "mST(b1)": (135.9, 0.17),
        "EB(bstar)": (415.0, 0.26),
    },
    (3, 150, 40): {
        "EB(b0)": (154.4, 0.13),
        "mST(b0)": (149.7, 0.12),
        "EB(b1)": (161.3, 0.16),
        "mST(b1)": (156.1, 0.14),
        "EB(bstar)": (318.2, 0.10),
    },
    (3, 150, 75): {
        "EB(b0)": (317.2, 0.31),
        "mST(b0)": (269.7, 0.25),
        "EB(b1)": (320.3, 0.31),
        "mST(b1)": (272.2, 0.26),
        "EB(bstar)": (249.2, 0.07),
    },
}

ALL_TABLE_CELLS = tuple(sorted(REFERENCE_RISKS))

# default reproduction subset: moderate dimensions across all three cases
DEFAULT_TABLE_CELLS = tuple(
    (case, p, n) for case in (1, 2, 3) for (p, n) in ((50, 15), (50, 25), (100, 25))
)

# slack added to the four-combined-standard-error tolerance, covering the one
# decimal place the reference means are rounded to
TABLE_SLACK = 0.05


@dataclass(frozen=True)
class Table1Row:
    case: int
    p: int
    n: int
    estimator: str
    mean_loss: float
    std_err: float
    ref_mean: float
    ref_se: float
    tolerance: float
    verdict: str


def table1_suite(
    cells=None,
    replications: int = 2000,
    master_seed: int = DEFAULT_MASTER_SEED,
    workers: int = 1,
) -> list[Table1Row]:
    """Reproduce benchmark risk cells and compare against the published values.

    Each cell (case, p, n) runs the five tabulated estimators for
    ``replications`` paired draws under the full-rank entropy loss.  A cell
    row is CONSISTENT when |ours - published| <= 4 (ref_se + our_se) + 0.05.
    """
    if cells is None:
        cells = DEFAULT_TABLE_CELLS
    rows = []
    for cell in cells:
        case, p, n = cell
        if cell not in REFERENCE_RISKS:
            raise ConfigError(f"no published values for cell {cell}")
        config = ExperimentConfig(
            scenario=f"case{case}",
            p=p,
            n=n,
            estimators=TABLE_ESTIMATORS,
            replications=replications,
            master_seed=master_seed,
            loss_mode="full-rank",
            workers=workers,
        )
        report = simulate_risk(config)
        for label in TABLE_ESTIMATORS:
            est = report.risk(label)
            ref_mean, ref_se = REFERENCE_RISKS[cell][label]
            tol = 4.0 * (ref_se + est.std_err) + TABLE_SLACK
            verdict = (
                "CONSISTENT" if abs(est.mean_loss - ref_mean) <= tol else "DEVIATION"
            )
            rows.append(
                Table1Row(
                    case=case,
                    p=p,
                    n=n,
                    estimator=label,
                    mean_loss=est.mean_loss,
                    std_err=est.std_err,
                    ref_mean=ref_mean,
                    ref_se=ref_se,
                    tolerance=tol,
                    verdict=verdict,
                )
            )
    return rows


def table1_csv(rows) -> str:
    out = StringIO()
    out.write(
        "case,p,n,estimator,mean_loss,std_err,ref_mean,ref_se,tolerance,verdict\n"
    )
    for row in rows:
        out.write(
            f"{row.case},{row.p},{row.n},{row.estimator},{row.mean_loss:.6g},"
            f"{row.std_err:.6g},{row.ref_mean:.6g},{row.ref_se:.6g},"
            f"{row.tolerance:.6g},{row.verdict}\n"
        )
    return out.getvalue()
