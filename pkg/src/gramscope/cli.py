"""Command-line front end: synth | estimate | batch | check-theory.

Exit codes: 0 success, 1 check/assert failure, 2 config error, 3 I/O
error. GRAMSCOPE_LOG in {error, warn, info, debug} controls verbosity.
Flags override config-file values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .batch import batch_spec_from_json, run_batch
from .estimator import estimate, evaluate, trial_config_from_json
from .gram import (
    gram_to_json,
    knowledge_projective,
    knowledge_relax,
    numerical_rank,
    r_qm,
    rank_certificate,
)
from .solver import SdpProblem, SolverOptions, solve_trace_min
from .synth import (
    born_table,
    dump_json,
    ensemble_to_json,
    finite_shot_table,
    sample_ensemble,
    table_from_json,
    table_to_csv,
    table_to_json,
    validate_table,
)
from .theory import run_all_checks

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3

log = logging.getLogger("gramscope")


class ConfigError(Exception):
    pass


def _setup_logging() -> None:
    level = {
        "error": logging.ERROR,
        "warn": logging.WARNING,
        "info": logging.INFO,
        "debug": logging.DEBUG,
    }.get(os.environ.get("GRAMSCOPE_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def _apply_overrides(cfg: dict, args, keys) -> dict:
    mapping = {
        "seed": "seed",
        "shots": "shots",
        "epsilon": "epsilon",
        "tau": "tau",
        "jobs": "jobs",
    }
    cfg = dict(cfg)
    for flag, key in mapping.items():
        if flag in keys and getattr(args, flag.replace("-", "_"), None) is not None:
            cfg[key] = getattr(args, flag.replace("-", "_"))
    if "max-iters" in keys or "tol" in keys:
        solver = dict(cfg.get("solver", {}))
        if getattr(args, "max_iters", None) is not None:
            solver["max_iters"] = args.max_iters
        if getattr(args, "tol", None) is not None:
            solver["primal_tol"] = args.tol
            solver["dual_tol"] = args.tol
        if solver:
            cfg["solver"] = solver
    return cfg


def cmd_synth(args) -> int:
    cfg = _apply_overrides(_load_json(args.config), args, {"seed", "shots"})
    try:
        d = int(cfg["d"])
        w = int(cfg["n_states"])
        v = int(cfg["n_measurements"])
        k = int(cfg.get("n_outcomes", d))
        shots = cfg.get("shots")
        seed = int(cfg.get("seed", 0))
        degeneracies = cfg.get("degeneracies")
        mixed = bool(cfg.get("mixed_states", False))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad synth config: {exc}") from exc
    if degeneracies is None and k != d:
        raise ConfigError(f"non-degenerate projective measurements need n_outcomes = d, got K={k}, d={d}")
    if degeneracies is not None and len(degeneracies) != k:
        raise ConfigError(f"degeneracy pattern has {len(degeneracies)} outcomes, config says {k}")
    rng = np.random.default_rng(seed)
    ens = sample_ensemble(d, w, v, rng, mixed=mixed, degeneracies=degeneracies)
    table = born_table(ens) if shots is None else finite_shot_table(ens, int(shots), rng)
    validate_table(table)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_json(ensemble_to_json(ens), out / "ensemble.json")
    dump_json(table_to_json(table), out / "table.json")
    (out / "table.csv").write_text(table_to_csv(table))
    log.info("wrote ensemble and table for d=%d, W=%d, V=%d to %s", d, w, v, out)
    return EXIT_OK


def _estimate_from_data(cfg: dict, out: Path) -> int:
    """Single solve + certify on a previously recorded table (no ground
    truth, no augmentation loop)."""
    data_dir = Path(cfg["data"])
    table = table_from_json(_load_json(str(data_dir / "table.json")))
    try:
        d = int(cfg["d"])
    except (KeyError, ValueError) as exc:
        raise ConfigError("estimating from data needs 'd' in the config") from exc
    kn = knowledge_projective(table, d, cfg.get("degeneracies"))
    eps = float(cfg.get("epsilon", 0.0))
    if eps > 0:
        kn = knowledge_relax(kn, eps, scope="data")
    opts = SolverOptions(**cfg.get("solver", {}))
    prob = SdpProblem(
        n=kn.n, knowledge=kn, radius=r_qm(table.n_states, table.n_measurements, d)
    )
    g_hat, report = solve_trace_min(prob, opts)
    target_rank = numerical_rank(table.values)
    certified = rank_certificate(g_hat, target_rank, float(cfg.get("tau", 1e-4)))
    result = {
        "certified": certified,
        "target_rank": target_rank,
        "report": report.to_json(),
    }
    out.mkdir(parents=True, exist_ok=True)
    dump_json(result, out / "estimate.json")
    dump_json(gram_to_json(g_hat), out / "g_hat.json")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _apply_overrides(
        _load_json(args.config),
        args,
        {"seed", "shots", "epsilon", "tau", "max-iters", "tol"},
    )
    out = Path(args.out)
    if "data" in cfg:
        return _estimate_from_data(cfg, out)
    try:
        trial = trial_config_from_json(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad trial config: {exc}") from exc
    est, truth = estimate(trial)
    metrics = evaluate(est, truth, threshold=trial.failure_threshold)
    result = {
        "certified": est.certified,
        "target_rank": est.target_rank,
        "augmentations": est.augmentations,
        "report": est.report.to_json(),
        "metrics": metrics.to_json(),
    }
    out.mkdir(parents=True, exist_ok=True)
    dump_json(result, out / "estimate.json")
    if args.dump:
        dump_json(gram_to_json(est.g_hat), out / "g_hat.json")
        dump_json(ensemble_to_json(truth), out / "ground_truth.json")
        dump_json(table_to_json(born_table(truth)), out / "table.json")
    log.info(
        "estimate: certified=%s augmentations=%d max_err=%.2e",
        est.certified,
        est.augmentations,
        metrics.max_entry_error,
    )
    return EXIT_OK


def cmd_batch(args) -> int:
    obj = _apply_overrides(_load_json(args.config), args, {"seed", "jobs"})
    if "seed" in obj:  # flag name maps onto the batch master seed
        obj["master_seed"] = obj.pop("seed")
    try:
        spec = batch_spec_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad batch spec: {exc}") from exc
    out = Path(args.out)
    (out / "trials").mkdir(parents=True, exist_ok=True)
    report, records = run_batch(spec)
    per = spec.trials_per_template
    for idx, record in enumerate(records):
        ti, tr = divmod(idx, per)
        dump_json(record, out / "trials" / f"template{ti}_trial{tr:03d}.json")
    dump_json(report.to_json(), out / "report.json")
    dump_json(report.timing_json(), out / "timing.json")
    (out / "summary.csv").write_text(report.summary_csv())
    for t in report.templates:
        log.info(
            "d=%d (%d,%d): %d/%d successes",
            t["d"],
            t["start_point"][0],
            t["start_point"][1],
            t["successes"],
            t["trials"],
        )
    return EXIT_OK


def cmd_check_theory(args) -> int:
    try:
        results = run_all_checks(args.n, args.trials, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for name, res in results.items():
        if name == "ok":
            continue
        status = "pass" if res["ok"] else "FAIL"
        print(f"{name}: {status}")
        if not res["ok"]:
            print(f"  counterexample: {json.dumps(res)}")
    return EXIT_OK if results["ok"] else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramscope",
        description="Gram-matrix completion experiments for state-measurement tomography",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate an ensemble and its data table")
    p_synth.add_argument("--config", required=True)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--seed", type=int)
    p_synth.add_argument("--shots", type=int)
    p_synth.set_defaults(func=cmd_synth)

    p_est = sub.add_parser("estimate", help="run one estimation trial or solve saved data")
    p_est.add_argument("--config", required=True)
    p_est.add_argument("--out", required=True)
    p_est.add_argument("--seed", type=int)
    p_est.add_argument("--shots", type=int)
    p_est.add_argument("--epsilon", type=float)
    p_est.add_argument("--tau", type=float)
    p_est.add_argument("--max-iters", type=int)
    p_est.add_argument("--tol", type=float)
    p_est.add_argument("--dump", action="store_true", help="also write g_hat / table / ground truth")
    p_est.set_defaults(func=cmd_estimate)

    p_batch = sub.add_parser("batch", help="run a batch of trials and summarize")
    p_batch.add_argument("--config", required=True)
    p_batch.add_argument("--out", required=True)
    p_batch.add_argument("--seed", type=int)
    p_batch.add_argument("--jobs", type=int)
    p_batch.set_defaults(func=cmd_batch)

    p_check = sub.add_parser("check-theory", help="run the structural self-checks")
    p_check.add_argument("--n", type=int, default=3, help="matrix size for brute-force checks")
    p_check.add_argument("--trials", type=int, default=1000)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.set_defaults(func=cmd_check_theory)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
