"""Command-line entry point: ``python -m irs_secrecy <command> [flags]``.

Failures print one JSON line ``{"error": <kind>, "message": ...}`` on stderr.
Usage errors and unreadable config files exit with status 2, other failures
with status 1.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..baselines import alternating_optimize
from ..channel import derive_seed
from ..cognn import Checkpoint, CheckpointError, evaluate, train
from ..secrecy import objective
from . import selftest
from .array_response import peaks_match_targets, trained_response, write_csv
from .config import ConfigError, ExperimentConfig, load_config
from .sweep import VARIANT_OF, datasets, run_sweep
from .timing import TIMING_COLUMNS, timing_compare, timing_table

COMMANDS = ("train", "eval", "sweep", "array-response", "timing", "grad-check", "selftest")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with [channel] [train] [ao] [sweep]")
    common.add_argument("--seed", type=int, help="root seed")
    common.add_argument("--scenario", choices=("external", "internal"))
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--scheme", choices=tuple(VARIANT_OF) + ("ao",))
    common.add_argument("--paper-scale", action="store_true", help="full-size parameters and training budget")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="irs_secrecy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("train", parents=[common], help="train a CO-GNN or degraded variant")
    p = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint (or AO) on the held-out set")
    p.add_argument("--checkpoint", type=Path)
    sub.add_parser("sweep", parents=[common], help="secrecy rate versus the [sweep] variable")
    p = sub.add_parser("array-response", parents=[common], help="IRS array response of trained phases")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--grid-points", type=int, default=101)
    p = sub.add_parser("timing", parents=[common], help="loading and solve time, CO-GNN versus AO")
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--samples", type=int, default=10)
    sub.add_parser("grad-check", parents=[common], help="central-difference gradient checks")
    p = sub.add_parser("selftest", parents=[common], help="constraint, equivariance, gradient and oracle suites")
    p.add_argument("--quick", action="store_true")
    return parser


def resolve_config(args) -> ExperimentConfig:
    base = ExperimentConfig.paper_scale() if args.paper_scale else ExperimentConfig()
    cfg = load_config(args.config, base=base) if args.config else base
    kw = {}
    if args.seed is not None:
        kw["root_seed"] = args.seed
    if args.scenario is not None:
        kw["scenario"] = args.scenario
    if args.out is not None:
        kw["output_dir"] = str(args.out)
    if args.scheme is not None and args.command == "sweep":
        kw["schemes"] = (args.scheme,)
    cfg = replace(cfg, **kw)
    cfg.validate()
    return cfg


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_train(args, cfg: ExperimentConfig) -> int:
    scheme = args.scheme or "cognn"
    if scheme == "ao":
        raise UsageError("AO is solved per realization and has nothing to train")
    tr, te = datasets(cfg)
    ckpt, report = train(tr, cfg.scenario_obj(), replace(cfg.train, root_seed=cfg.root_seed), cfg.p_t,
                         variant=VARIANT_OF[scheme], holdout=te)
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"ckpt_{scheme}.bin"
    ckpt.save(path)
    with open(out / f"train_{scheme}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "mean_loss", "mean_sum_secrecy", "wall_clock"])
        w.writerows([e.epoch, f"{e.mean_loss:.10g}", f"{e.mean_secrecy:.10g}", f"{e.wall_clock:.4g}"]
                    for e in report.epochs)
    _emit({"checkpoint": str(path), "stop_reason": report.stop_reason, "best_epoch": report.best_epoch,
           "best_loss": report.best_loss, "heldout_sum_secrecy": report.final_eval})
    return 0


def _load_checkpoint(path: Path) -> Checkpoint:
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    return Checkpoint.load(path)


def cmd_eval(args, cfg: ExperimentConfig) -> int:
    _, te = datasets(replace(cfg, train_samples=1))
    scenario = cfg.scenario_obj()
    if args.scheme == "ao":
        n = min(cfg.ao_samples, len(te))
        vals = [objective(te.realizations[i], alternating_optimize(
            te.realizations[i], scenario, cfg.p_t, cfg.ao, derive_seed(cfg.root_seed, i, 200)).allocation,
            scenario).sum_secrecy for i in range(n)]
    else:
        if args.checkpoint is None:
            raise UsageError("eval needs --checkpoint unless --scheme ao")
        vals = evaluate(_load_checkpoint(args.checkpoint).model(), te, scenario, cfg.p_t)
    vals = np.asarray(vals)
    _emit({"samples": len(vals), "mean_sum_secrecy": float(vals.mean()),
           "std_error": float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0})
    return 0


def cmd_sweep(args, cfg: ExperimentConfig) -> int:
    rows = run_sweep(cfg)
    failed = [r for r in rows if r.flag.startswith("failed")]
    _emit({"csv": str(cfg.out_dir() / "sweep.csv"), "rows": len(rows), "failed": len(failed)})
    return 1 if failed else 0


def cmd_array_response(args, cfg: ExperimentConfig) -> int:
    ckpt = _load_checkpoint(args.checkpoint)
    surface, peaks, users = trained_response(ckpt, cfg.fading(), cfg.p_t, cfg.root_seed, args.grid_points)
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    path = out / "array_response.csv"
    write_csv(path, surface)
    _emit({"csv": str(path), "peaks": peaks, "users": users,
           "peaks_at_users": peaks_match_targets(peaks, users, surface.step)})
    return 0


def cmd_timing(args, cfg: ExperimentConfig) -> int:
    _, te = datasets(replace(cfg, train_samples=1, test_samples=args.samples))
    scenario = cfg.scenario_obj()
    schemes = {"cognn": None}
    if args.checkpoint is not None and args.checkpoint.is_file():
        path = args.checkpoint
        schemes["cognn"] = (lambda: Checkpoint.load(path).model(),
                            lambda model: model.infer(te.pilots, cfg.p_t, te.random_phi))
    schemes["ao"] = (lambda: te.realizations,
                     lambda reals: [alternating_optimize(r, scenario, cfg.p_t, cfg.ao, i)
                                    for i, r in enumerate(reals)])
    rows = timing_compare(schemes, len(te), args.repeats)
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "timing.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_COLUMNS)
        w.writerows(timing_table(rows))
    _emit({r.scheme: {"per_sample_seconds": r.per_sample, "flag": r.flag} for r in rows})
    return 0


def cmd_grad_check(args, cfg: ExperimentConfig) -> int:
    result = selftest.gradient_suite()
    _emit({"passed": bool(result.passed), "detail": result.detail,
           "ops": {name: err for name, err in selftest.op_checks()}})
    return 0 if result.passed else 1


def cmd_selftest(args, cfg: ExperimentConfig) -> int:
    results = selftest.run_all(quick=args.quick)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


HANDLERS = {"train": cmd_train, "eval": cmd_eval, "sweep": cmd_sweep, "array-response": cmd_array_response,
            "timing": cmd_timing, "grad-check": cmd_grad_check, "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(f"missing command; choose from {', '.join(COMMANDS)}")
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
        cfg = resolve_config(args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except FileNotFoundError as exc:
        return _fail("config", str(exc), 2)
    except ConfigError as exc:
        return _fail("config", str(exc), 2)
    try:
        return HANDLERS[args.command](args, cfg)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except (FileNotFoundError, CheckpointError) as exc:
        return _fail("input", str(exc), 1)
    except Exception as exc:
        return _fail("runtime", f"{type(exc).__name__}: {exc}", 1)


if __name__ == "__main__":
    sys.exit(main())
