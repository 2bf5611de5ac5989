"""Command line front end for the cohort simulator.

`cohortsim run` executes a seeded closed-loop experiment and writes a
deterministic JSON report plus a plain-text confusion matrix.  The run owns
its data directory: any previous contents are removed so two runs of the
same config produce byte-identical event logs.

`cohortsim gen` writes just the synthetic cohort, for inspection.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

from .errors import CoachError
from .sim import (
    confusion_text,
    load_experiment_config,
    report_to_json,
    run_experiment,
    synth_cohort,
)


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    out = Path(args.out)
    data_dir = Path(args.data_dir) if args.data_dir else out.with_name(out.stem + "-data")
    if data_dir.exists():
        shutil.rmtree(data_dir)
    data_dir.mkdir(parents=True)

    result = run_experiment(config, data_dir)
    report = result["report"]

    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report_to_json(report), encoding="utf-8")
    matrix = confusion_text(report)
    out.with_suffix(".txt").write_text(matrix, encoding="utf-8")

    print(matrix, end="")
    print(f"report: {out}")
    print(f"event log: {data_dir / 'events.ndjson'} "
          f"({report['events_total']} events)")
    print(f"runtime: {result['runtime_seconds']:.2f}s")

    if config.assert_min_accuracy is not None:
        if report["post_model_accuracy"] < config.assert_min_accuracy:
            print(f"FAIL: accuracy {report['post_model_accuracy']:.4f} "
                  f"< required {config.assert_min_accuracy:.4f}", file=sys.stderr)
            return 1
        print(f"accuracy check passed "
              f"({report['post_model_accuracy']:.4f} >= "
              f"{config.assert_min_accuracy:.4f})")
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    cohort = synth_cohort(args.n, seed=args.seed)
    doc = {
        "schema_version": 1,
        "n": args.n,
        "seed": args.seed,
        "users": [u.to_dict() for u in cohort],
    }
    text = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.n} users to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohortsim", description="seeded closed-loop coaching experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("--config", required=True, help="experiment config (JSON)")
    run.add_argument("--out", required=True, help="report output path (JSON)")
    run.add_argument("--data-dir", default=None,
                     help="event log directory (default: <out>-data, wiped per run)")
    run.set_defaults(func=_cmd_run)

    gen = sub.add_parser("gen", help="generate a synthetic cohort")
    gen.add_argument("--n", type=int, default=150, help="cohort size")
    gen.add_argument("--seed", type=int, default=42, help="generator seed")
    gen.add_argument("--out", default=None, help="output path (default: stdout)")
    gen.set_defaults(func=_cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CoachError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
