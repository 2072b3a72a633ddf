"""Command-line entry point: ``run``, ``compare`` and ``spa-demo``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    ExperimentConfig,
    UsageError,
    compare,
    load_config_file,
    load_reports,
    parse_assignments,
    run_experiment,
)
from .optimizers import OPTIMIZERS
from .spa import worked_example_text
from .topology import VARIANTS

USAGE_ERROR = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spadepso", description="SpadePSO experiments")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="seeded repeated runs of one optimizer on one problem")
    r.add_argument("--optimizer", choices=OPTIMIZERS)
    r.add_argument("--problem", help="F1..F16, sphere, ssrp, ode or ode-params")
    r.add_argument("--dim", type=int)
    r.add_argument("--runs", type=int)
    r.add_argument("--seed", type=int, help="base seed; run r uses seed + r")
    r.add_argument("--budget", type=int, help="evaluations per run")
    r.add_argument("--topology", choices=VARIANTS)
    r.add_argument("--out", help="output directory for report files")
    r.add_argument("--config", help="flat key = value file; flags override it")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="parameter override, repeatable (e.g. --set w=0.9,0.4)")
    r.add_argument("--workers", type=int)
    r.add_argument("--problem-seed", type=int, help="seed of the benchmark shift/rotation")
    r.add_argument("--data-dir", help="directory of <fn>_D<dim>.txt transform files")
    r.add_argument("--record-spa", action="store_true", help="write per-iteration selection logs")

    c = sub.add_parser("compare", help="Wilcoxon comparison of two sets of reports")
    c.add_argument("--a", nargs="+", required=True, help="report files or directories")
    c.add_argument("--b", nargs="+", required=True, help="report files or directories")
    c.add_argument("--out", help="also write the verdict table as CSV here")

    sub.add_parser("spa-demo", help="print the selection steps on a five-particle example")
    return p


def _experiment_from_args(args) -> ExperimentConfig:
    settings = load_config_file(args.config) if args.config else {"overrides": {}}
    cli = parse_assignments(args.set)
    settings["overrides"].update(cli.pop("overrides"))
    settings.update(cli)
    for name in ("optimizer", "problem", "dim", "runs", "seed", "budget", "topology", "out", "workers",
                 "problem_seed", "data_dir"):
        value = getattr(args, name)
        if value is not None:
            settings[name] = value
    if args.record_spa:
        settings["record_spa"] = True
    if "problem" not in settings:
        raise UsageError("--problem is required")
    return ExperimentConfig.from_dict(settings)


def _cmd_run(args) -> int:
    config = _experiment_from_args(args)
    report = run_experiment(config)
    agg = report.aggregate()
    print(f"{config.optimizer} on {config.problem} D={config.dim}: {config.runs} runs, "
          f"budget {report.provenance['budget']}")
    print(f"best {agg['best']:.6e}  mean {agg['mean']:.6e}  std {agg['std']:.6e}")
    if config.out:
        print(f"report written to {Path(config.out) / config.stem}.json")
    return 0


def _cmd_compare(args) -> int:
    table = compare(load_reports(args.a), load_reports(args.b))
    print(table.text(), end="")
    if args.out:
        Path(args.out).write_text(table.csv())
    return 0


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "compare":
            return _cmd_compare(args)
        print(worked_example_text(), end="")
        return 0
    except UsageError as exc:
        print(f"spadepso: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
