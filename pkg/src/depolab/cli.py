"""Command-line interface: train, compare, ablate, route, plot."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import accounting, experiment, router
from .errors import ConfigError, TrainingFault


def _load(args) -> experiment.ExperimentConfig:
    if args.config:
        cfg = experiment.load_config(args.config)
    else:
        cfg = experiment.ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "steps", None) is not None:
        cfg = replace(cfg, steps=args.steps)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _add_common(sub, steps=True):
    sub.add_argument("--config", help="path to a key = value config file")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--out", help="override the output directory")
    if steps:
        sub.add_argument("--steps", type=int, help="override the step count")


def cmd_train(args) -> int:
    cfg = _load(args)
    result = experiment.run_experiment(cfg)
    experiment.save_run_outputs(result, cfg.out_dir)
    rewards = [m.mean_reward for m in result.metrics if m.mean_reward is not None]
    last = rewards[-1] if rewards else float("nan")
    print(f"{cfg.regime}: {cfg.steps} steps, final mean reward {last:.4f}, outputs in {cfg.out_dir}")
    return 0


def cmd_compare(args) -> int:
    cfg = _load(args)
    results, rows = experiment.run_compare(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for regime, result in results.items():
        experiment.save_run_outputs(result, out / regime)
    accounting.write_summary_csv(rows, out / "compare.csv")
    experiment.write_resolved_config(cfg, out / "resolved_config.ini")
    for row in rows:
        print(
            f"{row['regime']}: total {row['total']:.1f} units "
            f"({row['ratio_vs_grpo']:.2f}x grpo)"
        )
    if args.figures:
        from . import plots

        plots.plot_compare(out)
    return 0


def cmd_ablate(args) -> int:
    cfg = _load(args)
    rows = experiment.run_ablation(cfg, args.axis)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"ablate_{args.axis}.csv"
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(row)
    if args.figures:
        from . import plots

        plots.plot_ablation(path)
    return 0


def cmd_route(args) -> int:
    cfg = _load(args)
    if args.from_run:
        cfg = replace(cfg, router=replace(cfg.router, from_run=args.from_run))
    reports = experiment.run_route(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "route.csv"
    router.write_route_csv(reports, path)
    for rep in reports:
        print(
            f"tau={rep.tau:g}: accuracy {rep.accuracy:.4f}, "
            f"{rep.queries_to_small}/{rep.queries_to_small + rep.queries_to_large} to small"
        )
    if args.figures:
        from . import plots

        plots.plot_route(path)
    return 0


def cmd_plot(args) -> int:
    from . import plots

    written = plots.plot_any(args.run, args.out)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depolab",
        description="Desk-scale difficulty-estimated policy optimization laboratory",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("train", help="run one experiment config")
    _add_common(sub)
    sub.set_defaults(func=cmd_train)

    sub = subs.add_parser("compare", help="run all regimes on matched seeds")
    _add_common(sub)
    sub.add_argument("--no-figures", dest="figures", action="store_false")
    sub.set_defaults(func=cmd_compare, figures=True)

    sub = subs.add_parser("ablate", help="matched-seed estimator ablations")
    _add_common(sub)
    sub.add_argument("--axis", required=True, choices=experiment.ABLATION_AXES)
    sub.add_argument("--no-figures", dest="figures", action="store_false")
    sub.set_defaults(func=cmd_ablate, figures=True)

    sub = subs.add_parser("route", help="tau sweep with a frozen estimator")
    _add_common(sub, steps=False)
    sub.add_argument("--from-run", help="train output directory with snapshots to route with")
    sub.add_argument("--no-figures", dest="figures", action="store_false")
    sub.set_defaults(func=cmd_route, figures=True)

    sub = subs.add_parser("plot", help="render figures from metrics/summary files")
    sub.add_argument("--run", required=True, help="directory holding metrics.jsonl or summaries")
    sub.add_argument("--out", help="directory for the rendered images")
    sub.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (TrainingFault, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
