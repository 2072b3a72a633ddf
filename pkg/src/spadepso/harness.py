"""Seeded experiment runner, report files and report-vs-report comparison.

A report covers one optimizer on one objective. It is written as
``<optimizer>_<problem>_D<dim>.json`` plus a ``.csv`` of per-run results, and
optionally one trace CSV per run for plotting diversity curves.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .optimizers import OPTIMIZERS, RunResult, SpadeConfig, TraceRecord, run
from .problems import default_budget, fixed_dimension, make_problem, problem_ids
from .stats import ComparisonVerdict, error_stats, verdict_table_csv, verdict_table_text, wilcoxon_signed_rank
from .topology import VARIANTS

__all__ = [
    "UsageError",
    "ExperimentConfig",
    "Report",
    "ComparisonTable",
    "BENCHMARK_DIMS",
    "TRACE_HEADER",
    "load_config_file",
    "parse_assignments",
    "run_experiment",
    "write_report",
    "load_report",
    "load_reports",
    "compare",
    "emit_plot_data",
]

BENCHMARK_DIMS = (10, 30, 50, 100)
TRACE_HEADER = ("iteration", "evaluations", "best_error", "div_explore", "div_exploit", "div_all", "sbest_index")


class UsageError(ValueError):
    """Bad experiment configuration or command-line input."""


def _spade_fields() -> dict:
    return {f.name: getattr(SpadeConfig(), f.name) for f in fields(SpadeConfig)}


@dataclass(frozen=True)
class ExperimentConfig:
    optimizer: str = "spade"
    problem: str = "F1"
    dim: Optional[int] = None
    runs: int = 30
    seed: int = 0
    budget: Optional[int] = None
    topology: str = "distance"
    out: Optional[str] = None
    # seed of the benchmark shift/rotation; fixed across runs
    problem_seed: int = 0
    data_dir: Optional[str] = None
    workers: int = 1
    record_spa: bool = False
    # SpadeConfig overrides as sorted (name, value) pairs
    overrides: tuple = ()

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise UsageError(f"unknown optimizer {self.optimizer!r}; valid: {', '.join(OPTIMIZERS)}")
        valid = problem_ids()
        key = self.problem.lower()
        match = [p for p in valid if p.lower() == key]
        if not match:
            raise UsageError(f"unknown problem {self.problem!r}; valid: {', '.join(valid)}")
        object.__setattr__(self, "problem", match[0])
        fixed = fixed_dimension(self.problem)
        if fixed is not None:
            if self.dim not in (None, fixed):
                raise UsageError(f"{self.problem} has fixed dimension {fixed}")
            object.__setattr__(self, "dim", fixed)
        elif self.dim is None:
            raise UsageError(f"benchmark {self.problem} needs a dimension")
        elif self.problem != "sphere" and self.dim not in BENCHMARK_DIMS:
            raise UsageError(f"benchmark dimension must be one of {BENCHMARK_DIMS}")
        if self.runs < 1:
            raise UsageError("run count must be at least 1")
        if self.topology not in VARIANTS:
            raise UsageError(f"unknown topology {self.topology!r}; valid: {', '.join(VARIANTS)}")
        if self.workers < 1:
            raise UsageError("workers must be at least 1")
        known = _spade_fields()
        pairs = dict(self.overrides)
        bad = sorted(set(pairs) - set(known))
        if bad:
            raise UsageError(f"unknown parameter override(s): {', '.join(bad)}")
        object.__setattr__(self, "overrides", tuple(sorted(pairs.items())))
        try:
            self.spade_config()
        except (TypeError, ValueError) as exc:
            raise UsageError(str(exc)) from exc

    @property
    def seeds(self) -> list[int]:
        return [self.seed + r for r in range(self.runs)]

    @property
    def stem(self) -> str:
        return f"{self.optimizer}_{self.problem}_D{self.dim}"

    def effective_budget(self) -> int:
        if self.budget is not None:
            return self.budget
        budget = dict(self.overrides).get("budget")
        if budget is not None:
            return budget
        pop = dict(self.overrides).get("population", SpadeConfig().population)
        return default_budget(self.problem, self.dim, pop)

    def spade_config(self) -> SpadeConfig:
        kw = dict(self.overrides)
        kw["topology"] = self.topology
        kw["budget"] = self.effective_budget()
        return SpadeConfig(**kw)

    def objective(self):
        return make_problem(self.problem, self.dim, seed=self.problem_seed, data_dir=self.data_dir)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["overrides"] = {k: list(v) if isinstance(v, tuple) else v for k, v in self.overrides}
        return d

    def identity(self) -> dict:
        """Everything that affects results; output location and worker count do not."""
        d = self.to_dict()
        for k in ("out", "workers"):
            d.pop(k)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        ov = d.pop("overrides", {}) or {}
        if isinstance(ov, dict):
            ov = {k: tuple(v) if isinstance(v, list) else v for k, v in ov.items()}
            ov = tuple(ov.items())
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise UsageError(f"unknown experiment key(s): {', '.join(unknown)}")
        return cls(**d, overrides=ov)


def _coerce(name: str, text: str, default):
    text = text.strip()
    try:
        if isinstance(default, bool):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, tuple):
            parts = [float(p) for p in text.replace(",", " ").split()]
            if len(parts) != len(default):
                raise ValueError(text)
            return tuple(parts)
        if isinstance(default, int):
            return int(float(text)) if float(text).is_integer() else int(text)
        if isinstance(default, float):
            return float(text)
        if default is None:
            if text.lower() in ("", "none"):
                return None
            return int(float(text)) if name in ("budget", "dim") else text
        return text
    except ValueError:
        raise UsageError(f"bad value for {name}: {text!r}") from None


_EXPERIMENT_DEFAULTS = {f.name: f.default for f in fields(ExperimentConfig) if f.name != "overrides"}


def parse_assignments(items: Iterable[str]) -> dict:
    """Turn ``key=value`` strings into typed experiment and parameter settings.

    Keys naming an experiment field go to the top level; keys naming a
    SpadePSO parameter go under ``"overrides"``.
    """
    spade = _spade_fields()
    out: dict = {"overrides": {}}
    for raw in items:
        if "=" not in raw:
            raise UsageError(f"expected key=value, got {raw!r}")
        key, value = (s.strip() for s in raw.split("=", 1))
        key = key.replace("-", "_")
        if key in _EXPERIMENT_DEFAULTS:
            out[key] = _coerce(key, value, _EXPERIMENT_DEFAULTS[key])
        elif key in spade:
            out["overrides"][key] = _coerce(key, value, spade[key])
        else:
            raise UsageError(f"unknown config key {key!r}")
    return out


def load_config_file(path) -> dict:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    lines = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return parse_assignments(lines)


@dataclass
class Report:
    config: ExperimentConfig
    runs: list[RunResult]
    provenance: dict = field(default_factory=dict)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.runs])

    def aggregate(self) -> dict:
        best, mean, std = error_stats(self.errors)
        return {"best": best, "mean": mean, "std": std}

    def body(self) -> dict:
        return {
            "config": self.config.identity(),
            "provenance": self.provenance,
            "aggregate": self.aggregate(),
            "runs": [
                {
                    "seed": r.seed,
                    "error": r.error,
                    "best_fitness": r.best_fitness,
                    "evaluations": r.evaluations,
                    "best_position": [float(v) for v in r.best_position],
                }
                for r in self.runs
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.body(), sort_keys=True, indent=1) + "\n"

    def runs_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed", "error", "best_fitness", "evaluations"])
        for r in self.runs:
            w.writerow([r.seed, repr(r.error), repr(r.best_fitness), r.evaluations])
        agg = self.aggregate()
        for key in ("best", "mean", "std"):
            w.writerow([key, repr(agg[key]), "", ""])
        return buf.getvalue()

    @property
    def key(self) -> tuple[str, int]:
        return self.config.problem, self.config.dim


def _one_run(config: ExperimentConfig, seed: int) -> RunResult:
    return run(config.optimizer, config.objective(), config.spade_config(), seed=seed, record_spa=config.record_spa)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_experiment(config: ExperimentConfig, write: bool = True) -> Report:
    """Run ``config.runs`` independent runs with seeds ``seed, seed+1, ...``.

    With ``config.out`` set and ``write`` true, the report and per-run traces
    are written there.
    """
    # build once up front so a bad selector fails before any work starts
    config.objective()
    seeds = config.seeds
    if config.workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_one_run, [config] * len(seeds), seeds))
    else:
        results = [_one_run(config, s) for s in seeds]
    provenance = {
        "config_hash": config.config_hash(),
        "seeds": seeds,
        "version": __version__,
        "budget": config.effective_budget(),
    }
    report = Report(config, results, provenance)
    if write and config.out:
        write_report(report, config.out)
        emit_plot_data(report, config.out)
    return report


def write_report(report: Report, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    stem = report.config.stem
    js, cs = out / f"{stem}.json", out / f"{stem}.csv"
    _atomic_write(js, report.to_json())
    _atomic_write(cs, report.runs_csv())
    if report.config.record_spa:
        for r in report.runs:
            _atomic_write(out / f"{stem}_spa_seed{r.seed}.log", "\n".join(r.spa_log) + "\n")
    return js, cs


def load_report(path) -> Report:
    """Rebuild a report from its JSON file; traces are not stored there."""
    try:
        body = json.loads(Path(path).read_text())
        config = ExperimentConfig.from_dict(body["config"])
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read report {path}: {exc}") from exc
    runs = [
        RunResult(
            optimizer=config.optimizer,
            objective=config.problem,
            seed=r["seed"],
            best_position=np.array(r["best_position"]),
            best_fitness=r["best_fitness"],
            error=r["error"],
            evaluations=r["evaluations"],
        )
        for r in body["runs"]
    ]
    return Report(config, runs, body.get("provenance", {}))


def load_reports(paths: Sequence) -> list[Report]:
    """Load report files; a directory contributes every ``*.json`` in it."""
    out = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            files = sorted(p.glob("*.json"))
            if not files:
                raise UsageError(f"no report files in {p}")
            out.extend(load_report(f) for f in files)
        else:
            out.append(load_report(p))
    return out


@dataclass
class ComparisonTable:
    label_a: str
    label_b: str
    functions: list[str]
    means_a: np.ndarray
    means_b: np.ndarray
    verdict: ComparisonVerdict

    def text(self) -> str:
        w = max([len(f) for f in self.functions] + [8])
        lines = [f"{'function':<{w}}  {self.label_a:>12}  {self.label_b:>12}"]
        for f, a, b in zip(self.functions, self.means_a, self.means_b):
            lines.append(f"{f:<{w}}  {a:>12.4e}  {b:>12.4e}")
        lines.append("")
        title = f"{self.label_a} vs {self.label_b} ({self.verdict.method}, p = {self.verdict.p_value:.4g})"
        return "\n".join(lines) + "\n" + verdict_table_text([(self.label_b, self.verdict)], title)

    def csv(self) -> str:
        return verdict_table_csv([(self.label_b, self.verdict)])


def _by_key(reports: Sequence[Report]) -> dict:
    out = {}
    for r in reports:
        if r.key in out:
            raise UsageError(f"two reports for {r.key[0]} D={r.key[1]}")
        out[r.key] = r
    return out


def _label(reports: Sequence[Report]) -> str:
    names = sorted({r.config.optimizer for r in reports})
    return "+".join(names)


def compare(reports_a, reports_b) -> ComparisonTable:
    """Wilcoxon comparison of per-function mean errors; ``+`` means ``a`` wins."""
    if isinstance(reports_a, Report):
        reports_a = [reports_a]
    if isinstance(reports_b, Report):
        reports_b = [reports_b]
    a, b = _by_key(reports_a), _by_key(reports_b)
    if set(a) != set(b):
        only_a = sorted(set(a) - set(b))
        only_b = sorted(set(b) - set(a))
        fmt = lambda ks: ", ".join(f"{p} D={d}" for p, d in ks) or "none"
        raise UsageError(f"reports cover different objectives; only in a: {fmt(only_a)}; only in b: {fmt(only_b)}")
    keys = sorted(a)
    ma = np.array([a[k].errors.mean() for k in keys])
    mb = np.array([b[k].errors.mean() for k in keys])
    verdict = wilcoxon_signed_rank(ma, mb)
    return ComparisonTable(
        _label(reports_a), _label(reports_b), [f"{p}_D{d}" for p, d in keys], ma, mb, verdict
    )


def trace_csv(trace: Sequence[TraceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for rec in trace:
        w.writerow([rec.iteration, rec.evaluations, repr(rec.best_error), repr(rec.div_explore),
                    repr(rec.div_exploit), repr(rec.div_all), rec.sbest_index])
    return buf.getvalue()


def emit_plot_data(report: Report, out_dir) -> list[Path]:
    """One CSV per run: iteration, evaluations, best error and the diversities."""
    out = Path(out_dir)
    paths = []
    for r in report.runs:
        p = out / f"{report.config.stem}_trace_seed{r.seed}.csv"
        _atomic_write(p, trace_csv(r.trace))
        paths.append(p)
    return paths
