"""Command line entry point: ``moclust run|baselines|stats|plot-data``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench
from .bench import ConfigError, DatasetSpec, load_config
from .dataset import DatasetFormatError


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value experiment file")
    p.add_argument("--dataset", action="append", default=[],
                   help="dataset name from the config, or a CSV path (repeatable)")
    p.add_argument("--labels", help="separate label file for a --dataset path")
    p.add_argument("--no-labels", action="store_true", help="--dataset path has no label column")
    p.add_argument("--header", action="store_true", help="--dataset path has a header row")
    p.add_argument("--algo", action="append", default=[], choices=bench.ALGORITHMS)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--full", action="store_true", help="include the large datasets")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key, e.g. mock.generations=50")
    p.add_argument("--timings", action="store_true", help="add wall_time to records.csv")
    p.add_argument("--trace", action="store_true", help="write per-generation traces")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moclust", description="Multi-objective clustering experiments.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_ in (("run", "run the clustering experiment"),
                        ("baselines", "best-in-range ARI of each base clustering method"),
                        ("stats", "re-aggregate an existing records.csv"),
                        ("plot-data", "export median-best partitions as point files")):
        _common(sub.add_parser(verb, help=help_))
    return parser


def config_from_args(args) -> bench.ExperimentConfig:
    path = args.config or bench.default_config_path()
    cfg = load_config(path, args.set)
    if args.runs is not None:
        cfg.runs = args.runs
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out = args.out
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.algo:
        cfg.algorithms = list(dict.fromkeys(args.algo))
    cfg.full = cfg.full or args.full
    cfg.timings = cfg.timings or args.timings
    cfg.trace = cfg.trace or args.trace
    if args.dataset:
        known = {d.name: d for d in cfg.datasets}
        chosen = []
        for item in args.dataset:
            if item in known:
                spec = known[item]
            elif Path(item).exists():
                mode = "none" if args.no_labels else ("separate" if args.labels else "embedded")
                spec = DatasetSpec(Path(item).stem, item, mode, args.labels, args.header)
            else:
                raise ConfigError(f"unknown dataset {item!r}")
            # explicitly requested datasets always run
            spec.tier = "default"
            chosen.append(spec)
        cfg.datasets = chosen
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        if args.verb == "run":
            records = bench.run_experiment(cfg)
            print(f"{len(records)} run records written to {cfg.out}")
        elif args.verb == "baselines":
            rows = bench.run_baselines(cfg)
            for r in rows:
                a = "*" if r["best_ari"] is None else f"{r['best_ari']:.3f}"
                print(f"{r['dataset']:<24} {r['method']:<8} ARI={a} k={r['k']}")
        elif args.verb == "stats":
            bench.restat(cfg.out, cfg.algorithms)
            print(f"summary.csv and significance.csv rewritten in {cfg.out}")
        else:
            for path in bench.plot_data(cfg):
                print(path)
    except (ConfigError, DatasetFormatError, FileNotFoundError, ValueError) as exc:
        print(f"moclust: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
