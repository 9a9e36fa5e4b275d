"""Config-driven experiment runner: runs, records, reports and plot data."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .algorithms import (
    DELTA_MOCK_DEFAULTS,
    MOCK_DEFAULTS,
    MOCLE_DEFAULTS,
    RECONSTRUCTED,
    Workspace,
    run_delta_mock,
    run_mocle_on,
    run_mock,
)
from .base import BasePartitionSet, export_partitions, ingest_partitions, sweep_base_partitions
from .dataset import Dataset, Partition, load_dataset, partition_from_labels
from .moea import write_trace
from .stats import (
    RunRecord,
    aggregate_runs,
    ari,
    best_of_set,
    compare,
    median_best_index,
    read_records,
    write_records,
    write_significance,
    write_summary,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("mocle", "mock", "delta-mock")
TIERS = ("default", "extended", "full")


class ConfigError(ValueError):
    pass


@dataclass
class DatasetSpec:
    name: str
    path: str
    label_mode: str = "embedded"
    labels: str | None = None
    header: bool = False
    external: list[str] = field(default_factory=list)
    tier: str = "default"
    k_star: int | None = None


@dataclass
class ExperimentConfig:
    datasets: list[DatasetSpec] = field(default_factory=list)
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    L: int = 10
    kmax_factor: int = 2
    runs: int = 30
    seed: int = 1
    normalize: bool = False
    full: bool = False
    jobs: int = 1
    timings: bool = False
    trace: bool = False
    out: str = "results"
    params: dict = field(default_factory=lambda: {"mock": {}, "delta-mock": {}, "mocle": {}})

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.L < 1:
            raise ConfigError("L must be >= 1")
        if not self.algorithms:
            raise ConfigError("no algorithms declared")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}")

    def selected(self, tiers=("default",)) -> list[DatasetSpec]:
        if self.full:
            tiers = TIERS
        return [d for d in self.datasets if d.tier in tiers]

    def seeds(self) -> list[int]:
        return [self.seed + r for r in range(self.runs)]


# ---------------------------------------------------------------- config parsing

_PARAM_TYPES = {
    **{k: type(v) for k, v in MOCK_DEFAULTS.items()},
    **{k: type(v) for k, v in DELTA_MOCK_DEFAULTS.items()},
    **{k: type(v) for k, v in MOCLE_DEFAULTS.items()},
    "mutation_rate": float,
    "gamma_size": int,
}


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_dataset_value(name: str, value: str, base_dir: Path) -> DatasetSpec:
    """``path[;labels=FILE][;label_mode=M][;header][;external=F1,F2][;tier=T][;kstar=K]``"""
    parts = [p.strip() for p in value.split(";") if p.strip()]
    if not parts:
        raise ConfigError(f"dataset {name}: empty value")
    spec = DatasetSpec(name, str(_resolve(parts[0], base_dir)))
    for opt in parts[1:]:
        key, _, val = opt.partition("=")
        key = key.strip()
        if key == "labels":
            spec.labels = str(_resolve(val, base_dir))
            spec.label_mode = "separate"
        elif key == "label_mode":
            spec.label_mode = val
        elif key == "header":
            spec.header = _bool(val) if val else True
        elif key == "external":
            spec.external = [str(_resolve(v, base_dir)) for v in val.split(",") if v.strip()]
        elif key == "tier":
            if val not in TIERS:
                raise ConfigError(f"dataset {name}: tier must be one of {TIERS}")
            spec.tier = val
        elif key == "kstar":
            spec.k_star = int(val)
        else:
            raise ConfigError(f"dataset {name}: unknown option {key!r}")
    return spec


def _resolve(path: str, base_dir: Path) -> Path:
    p = Path(path.strip())
    return p if p.is_absolute() else base_dir / p


def apply_setting(cfg: ExperimentConfig, key: str, value: str, base_dir: Path = Path(".")) -> None:
    key = key.strip()
    value = value.split("#", 1)[0].strip() if not key.startswith("dataset.") else value.strip()
    if key.startswith("dataset."):
        name = key[len("dataset."):]
        cfg.datasets = [d for d in cfg.datasets if d.name != name]
        cfg.datasets.append(parse_dataset_value(name, value.split(" #", 1)[0], base_dir))
    elif key == "algorithms":
        cfg.algorithms = [a.strip() for a in value.split(",") if a.strip()]
    elif key in ("L", "kmax_factor", "runs", "seed", "jobs"):
        setattr(cfg, key, int(value))
    elif key in ("normalize", "full", "timings", "trace"):
        setattr(cfg, key, _bool(value))
    elif key == "out":
        cfg.out = str(_resolve(value, base_dir))
    elif "." in key:
        algo, param = key.split(".", 1)
        if algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm in {key!r}")
        if param not in _PARAM_TYPES:
            raise ConfigError(f"unknown parameter {param!r}")
        cfg.params.setdefault(algo, {})[param] = _PARAM_TYPES[param](value)
    else:
        raise ConfigError(f"unknown setting {key!r}")


def load_config(path, overrides: list[str] | None = None) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is not None:
        path = Path(path)
        base_dir = path.parent
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, value = stripped.split("=", 1)
                apply_setting(cfg, key, value, base_dir)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, value = item.split("=", 1)
        apply_setting(cfg, key, value)
    cfg.validate()
    return cfg


def config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d.pop("jobs")
    d.pop("out")
    return d


# ---------------------------------------------------------------- running


def load_spec(spec: DatasetSpec, normalize: bool = False) -> Dataset:
    ds = load_dataset(spec.path, spec.label_mode, spec.labels, spec.header, spec.name)
    return ds.minmax_normalized() if normalize else ds


def run_seed(base_seed: int, dataset: str, algo: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([base_seed, zlib.crc32(dataset.encode()), ALGORITHMS.index(algo)])


def _tag(dataset: str, algo: str, run: int) -> str:
    return f"{dataset}__{algo}__r{run:03d}"


def _execute(task):
    ws, base, algo, seed_seq, params, k_max, want_trace = task
    rng = np.random.default_rng(seed_seq)
    trace = [] if want_trace else None
    t0 = time.perf_counter()
    if algo == "mock":
        result = run_mock(ws, k_max, rng, params, trace=trace)
    elif algo == "delta-mock":
        result = run_delta_mock(ws, rng, params, trace=trace)
    else:
        result = run_mocle_on(ws, base, rng, params, trace=trace)
    return result, time.perf_counter() - t0, trace


def resolve_k_star(ds: Dataset, spec: DatasetSpec) -> tuple[int, str]:
    if spec.k_star is not None:
        return spec.k_star, "config"
    if ds.k_star is not None:
        return ds.k_star, "labels"
    return max(2, math.ceil(math.sqrt(ds.n) / 2)), "default ceil(sqrt(n)/2)"


def build_base(ws: Workspace, spec: DatasetSpec, k_star: int, seed: int) -> BasePartitionSet:
    rng = np.random.default_rng([seed, zlib.crc32(spec.name.encode()), 99])
    base = sweep_base_partitions(ws.ds, k_star, rng=rng)
    for path in spec.external:
        base.extend(ingest_partitions(path, ws.ds.n))
    return base


def run_experiment(cfg: ExperimentConfig, tiers=("default",)) -> list[RunRecord]:
    """Execute every dataset x algorithm x run and write all report files."""
    out = Path(cfg.out)
    for sub in ("fronts", "best", "base") + (("traces",) if cfg.trace else ()):
        (out / sub).mkdir(parents=True, exist_ok=True)
    records: list[RunRecord] = []
    size_rows = []
    meta = {"config": config_dict(cfg), "backend": kernels.BACKEND, "datasets": {},
            "reconstructed_defaults": RECONSTRUCTED}
    specs = cfg.selected(tiers)
    if not specs:
        raise ConfigError("no datasets selected")
    pool = ProcessPoolExecutor(cfg.jobs) if cfg.jobs > 1 else None
    try:
        for spec in specs:
            ds = load_spec(spec, cfg.normalize)
            truth = ds.truth()
            k_star, k_src = resolve_k_star(ds, spec)
            k_max = cfg.kmax_factor * k_star
            ws = Workspace(ds, cfg.L)
            base = build_base(ws, spec, k_star, cfg.seed) if "mocle" in cfg.algorithms else None
            if base is not None:
                export_partitions(base, out / "base" / f"{spec.name}.partitions")
            meta["datasets"][spec.name] = {
                "n": ds.n, "d": ds.d, "k_star": k_star, "k_star_source": k_src, "k_max": k_max,
                "mode": "ari" if truth is not None else "objective-only",
                "base_size": None if base is None else len(base),
                "base_warnings": [] if base is None else base.warnings,
            }
            tasks, keys = [], []
            for algo in cfg.algorithms:
                ss = run_seed(cfg.seed, spec.name, algo).spawn(cfg.runs)
                for run, seed in enumerate(cfg.seeds()):
                    tasks.append((ws, base, algo, ss[run], cfg.params.get(algo, {}), k_max, cfg.trace))
                    keys.append((algo, run, seed))
            results = pool.map(_execute, tasks) if pool else map(_execute, tasks)
            for (algo, run, seed), (result, elapsed, trace) in zip(keys, results):
                tag = _tag(spec.name, algo, run)
                _write_front(out / "fronts" / f"{tag}.csv", result, truth)
                if trace is not None:
                    write_trace(trace, out / "traces" / f"{tag}.csv")
                if truth is None:
                    continue
                best_ari, k, part = best_of_set(result, truth)
                records.append(RunRecord(spec.name, algo, run, seed, best_ari, k, elapsed))
                (out / "best" / f"{tag}.labels").write_text(" ".join(map(str, part.assign.tolist())) + "\n")
                sizes = part.sizes()
                size_rows.append([spec.name, algo, run, k, int(sizes.min()), int((sizes <= 5).sum())])
    finally:
        if pool:
            pool.shutdown()
    write_records(records, out / "records.csv", with_time=cfg.timings)
    write_reports(records, out, cfg.algorithms)
    with open(out / "cluster_sizes.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "run", "k", "min_cluster_size", "clusters_le5"])
        w.writerows(size_rows)
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return records


def write_reports(records, out: Path, algo_order=ALGORITHMS) -> None:
    write_summary(aggregate_runs(records, algo_order), out / "summary.csv")
    write_significance(compare(records, algo_order), out / "significance.csv")


def _write_front(path, result, truth: Partition | None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        labels = result.members[0].objectives.labels if result.members else ("f1", "f2")
        w.writerow([*labels, "k"] + (["ari"] if truth is not None else []))
        for m in sorted(result.members, key=lambda m: m.f):
            row = [repr(m.f[0]), repr(m.f[1]), m.partition.k]
            if truth is not None:
                row.append(repr(ari(m.partition, truth)))
            w.writerow(row)


# ---------------------------------------------------------------- baselines, stats, plot data


def run_baselines(cfg: ExperimentConfig, tiers=("default", "extended")) -> list[dict]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for spec in cfg.selected(tiers):
        ds = load_spec(spec, cfg.normalize)
        truth = ds.truth()
        if truth is None:
            log.warning("%s has no labels; skipped", spec.name)
            continue
        k_star = ds.k_star if spec.k_star is None else spec.k_star
        rng = np.random.default_rng([cfg.seed, zlib.crc32(spec.name.encode()), 99])
        sets = {m: sweep_base_partitions(ds, k_star, rng=rng, methods=(m,)) for m in ("kmeans", "ward", "snn")}
        for path in spec.external:
            sets.setdefault("external", BasePartitionSet()).extend(ingest_partitions(path, ds.n))
        for method, bset in sets.items():
            if len(bset) == 0:
                rows.append({"dataset": spec.name, "method": method, "best_ari": None, "k": None, "partitions": 0})
                continue
            a, k, _ = best_of_set(bset.partitions, truth)
            rows.append({"dataset": spec.name, "method": method, "best_ari": a, "k": k, "partitions": len(bset)})
    with open(out / "baselines.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "method", "best_ari", "k", "partitions"])
        for r in rows:
            w.writerow([r["dataset"], r["method"], "*" if r["best_ari"] is None else f"{r['best_ari']:.6f}",
                        "*" if r["k"] is None else r["k"], r["partitions"]])
    return rows


def restat(out_dir, algo_order=ALGORITHMS) -> None:
    out = Path(out_dir)
    write_reports(read_records(out / "records.csv"), out, algo_order)


def emit_plot_data(partition: Partition, ds: Dataset, path, mode: str = "scatter") -> None:
    """CSV of point coordinates plus cluster id (``x,y,cluster`` or ``f1..fd,cluster``)."""
    if mode == "scatter":
        if ds.d != 2:
            raise ValueError(f"scatter mode needs d=2, dataset has d={ds.d}")
        header = ["x", "y"]
    elif mode == "parallel":
        header = [f"f{j + 1}" for j in range(ds.d)]
    else:
        raise ValueError(f"unknown plot mode {mode!r}")
    if partition.n != ds.n:
        raise ValueError("partition and dataset sizes differ")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*header, "cluster"])
        for i in range(ds.n):
            w.writerow([repr(float(v)) for v in ds.points[i]] + [int(partition.assign[i])])


def plot_data(cfg: ExperimentConfig, tiers=TIERS) -> list[Path]:
    """Median-best partition export for every (dataset, algorithm) in records.csv."""
    out = Path(cfg.out)
    records = read_records(out / "records.csv")
    specs = {s.name: s for s in cfg.datasets}
    groups: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.dataset, r.algorithm), []).append(r)
    (out / "plots").mkdir(exist_ok=True)
    written = []
    for (dsname, algo), recs in sorted(groups.items()):
        recs.sort(key=lambda r: r.run)
        pick = recs[median_best_index([r.best_ari for r in recs])]
        labels = (out / "best" / f"{_tag(dsname, algo, pick.run)}.labels").read_text().split()
        part = partition_from_labels([int(x) for x in labels])
        if dsname not in specs:
            log.warning("dataset %s not in config; plot data skipped", dsname)
            continue
        ds = load_spec(specs[dsname], cfg.normalize)
        mode = "scatter" if ds.d == 2 else "parallel"
        path = out / "plots" / f"{dsname}__{algo}__median.csv"
        emit_plot_data(part, ds, path, mode)
        written.append(path)
    return written


def default_config_path() -> Path | None:
    env = os.environ.get("MOCLUST_CONFIG")
    if env:
        return Path(env)
    here = Path(__file__).resolve().parents[2] / "configs" / "benchmark.conf"
    return here if here.exists() else None
