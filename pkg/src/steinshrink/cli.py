"""Command line interface.

Subcommands:

* ``simulate``    run a Monte Carlo risk experiment from a JSON config
* ``exact-risk``  print closed-form risks of the scaled Gram estimators
* ``estimate``    apply one estimator to a CSV data matrix
* ``verify``      run a named property suite and report pass/fail lines

Exit codes: 0 on success, 1 when a verify suite finds violations, 2 for
configuration or validation problems, 3 when a simulation cannot produce
usable draws.  The environment variable STEINSHRINK_SEED, when set, overrides
the master seed from the config.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, SimulationError, ValidationError
from .estimators import SampleContext, make_estimator, parse_label
from .loss import exact_risk_bc, exact_risk_js
from .risksim import ExperimentConfig, simulate_risk
from .verify import SUITES, run_suite

_CONFIG_REQUIRED = ("scenario", "p", "n", "estimators")
_CONFIG_OPTIONAL = ("r", "replications", "master_seed", "loss_mode", "workers")

# maps --replications onto each suite's own count argument
_SUITE_COUNT_ARG = {
    "lambda": "instances",
    "pade": "points",
    "moments": "draws",
    "digamma": "draws",
    "steinhaff": "replications",
    "dominance": "replications",
}


def load_config(path: str) -> dict:
    """Read and strictly validate a simulate config file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(_CONFIG_REQUIRED) - set(_CONFIG_OPTIONAL)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = [key for key in _CONFIG_REQUIRED if key not in raw]
    if missing:
        raise ConfigError(f"missing config keys: {missing}")
    if not isinstance(raw["estimators"], list) or not all(
        isinstance(lbl, str) for lbl in raw["estimators"]
    ):
        raise ConfigError("config key 'estimators' must be a list of labels")
    for key in ("p", "n", "r", "replications", "master_seed", "workers"):
        if key in raw and raw[key] is not None and not isinstance(raw[key], int):
            raise ConfigError(f"config key {key!r} must be an integer")
    return raw


def cmd_simulate(args) -> int:
    raw = load_config(args.config)
    seed_env = os.environ.get("STEINSHRINK_SEED")
    if seed_env is not None:
        try:
            raw["master_seed"] = int(seed_env)
        except ValueError as exc:
            raise ConfigError(
                f"STEINSHRINK_SEED must be an integer, got {seed_env!r}"
            ) from exc
    if args.workers is not None:
        raw["workers"] = args.workers
    raw["estimators"] = tuple(raw["estimators"])
    config = ExperimentConfig(**raw)
    report = simulate_risk(config)
    if args.format == "csv":
        text = report.to_csv()
    else:
        text = json.dumps(report.to_json_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        if args.format == "csv":
            # shrinkage diagnostics ride in a sidecar so the CSV stays a pure
            # risk table
            diag = {
                est.label: {"mean_lambda": est.mean_lambda, "mean_b": est.mean_b}
                for est in report.risks
            }
            side = Path(args.out).with_suffix(".diag.json")
            side.write_text(json.dumps(diag, indent=2) + "\n", encoding="utf-8")
        print(
            f"wrote {args.out}: {len(report.risks)} estimators, "
            f"{report.failures} failed replications, "
            f"{report.wall_time:.2f}s"
        )
    else:
        sys.stdout.write(text)
    if not report.valid:
        print("warning: more than 1% of replications failed", file=sys.stderr)
    return 0


def cmd_exact_risk(args) -> int:
    if args.n < 1 or args.r < 1:
        raise ConfigError("n and r must be positive integers")
    bc = exact_risk_bc(args.n, args.r)
    js = exact_risk_js(args.n, args.r)
    print(f"BC risk at (n={args.n}, r={args.r}): {bc.value:.6g}")
    print(f"JS risk at (n={args.n}, r={args.r}): {js.value:.6g}")
    return 0


def _read_matrix(path: str) -> np.ndarray:
    rows = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            for lineno, row in enumerate(csv.reader(handle), start=1):
                if not row or all(cell.strip() == "" for cell in row):
                    continue
                try:
                    rows.append([float(cell) for cell in row])
                except ValueError as exc:
                    raise ValidationError(
                        f"{path}:{lineno}: non-numeric entry ({exc})"
                    ) from exc
                if len(rows) > 1 and len(rows[-1]) != len(rows[0]):
                    raise ValidationError(
                        f"{path}:{lineno}: ragged row, expected {len(rows[0])} columns"
                    )
    except OSError as exc:
        raise ConfigError(f"cannot read data {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def cmd_estimate(args) -> int:
    x = _read_matrix(args.data)
    label = args.estimator
    name, arg = parse_label(label)
    if arg is None and args.b is not None:
        label = f"{name}({args.b})"
    elif args.b is not None:
        raise ConfigError("give the b rule either inside the label or via --b, not both")
    fn = make_estimator(label)
    r = args.r if args.r is not None else x.shape[0]
    ctx = SampleContext.from_data(x, r=r)
    est = fn(ctx)
    lines = [",".join(format(v, ".12g") for v in row) for row in est.entries]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    summary = f"estimator {est.label}: rank {est.declared_rank} of p={est.matrix.dim}"
    if "lambda_hat" in est.diagnostics:
        summary += f", lambda_hat {est.diagnostics['lambda_hat']:.6g}"
    print(summary, file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    kwargs = {}
    if args.replications is not None:
        key = _SUITE_COUNT_ARG.get(args.suite)
        if key is None:
            raise ConfigError(f"suite {args.suite!r} does not take --replications")
        kwargs[key] = args.replications
    results = run_suite(args.suite, seed=args.seed, **kwargs)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        failed += 0 if res.passed else 1
        print(f"{status} {res.name}: {res.detail}")
    print(f"suite {args.suite}: {len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steinshrink",
        description="Shrinkage covariance estimation under entropy loss",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo risk experiment")
    sim.add_argument("--config", required=True, help="JSON experiment config")
    sim.add_argument("--out", help="output path (default stdout)")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--workers", type=int, help="override worker count")
    sim.set_defaults(func=cmd_simulate)

    exact = sub.add_parser("exact-risk", help="closed-form risks of scaled Gram estimators")
    exact.add_argument("--n", type=int, required=True)
    exact.add_argument("--r", type=int, required=True)
    exact.set_defaults(func=cmd_exact_risk)

    est = sub.add_parser("estimate", help="apply one estimator to a CSV data matrix")
    est.add_argument("--data", required=True, help="CSV with one row per variable")
    est.add_argument("--estimator", required=True, help="label, e.g. UB or EB(b0)")
    est.add_argument("--b", help="b rule when not written inside the label")
    est.add_argument("--r", type=int, help="assumed rank of the population (default p)")
    est.add_argument("--out", help="output path (default stdout)")
    est.set_defaults(func=cmd_estimate)

    ver = sub.add_parser("verify", help="run a property suite")
    ver.add_argument("--suite", required=True, choices=sorted(SUITES))
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--replications", type=int, default=None, help="override the suite's sample count")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 3


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
