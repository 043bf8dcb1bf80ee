"""Experiment sweeps: build instances, run allocators, emit result tables."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from joblib import Parallel, delayed

from .allocators import ALLOCATORS, AllocatorConfig, get_allocator
from .gen import GenConfig, generate_advertisers, generate_instance, total_supply
from .ingest import (SlotExpansion, assign_zones, compute_influence_rows, expand_slots, load_billboards,
                     load_trajectories, load_zone_spec, zone_count)
from .model import Instance
from .regret import total_regret
from .serialization import load_instance

IDENTITY_TOL = 1e-6
MEAN = "mean"


@dataclass(frozen=True)
class IngestSource:
    """Files and geometry for an instance built from check-in data.

    Advertisers are still synthetic: they are drawn from the generator
    config against the supply of the ingested slots.
    """

    billboards: str
    trajectories: str
    expansion: SlotExpansion
    eta: float = 100.0
    base_probability: float = 0.1
    zones: str | None = None


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: an instance source, allocators and a repetition count.

    Exactly one of ``generator`` / ``ingest`` / ``instance_path`` selects the
    instance source; ``generator`` also carries the advertiser parameters for
    the ingest route. ``configs`` overrides the default
    ``AllocatorConfig(epsilon=epsilon)`` per allocator name.
    """

    experiment_id: str = "exp"
    generator: GenConfig | None = field(default_factory=GenConfig)
    ingest: IngestSource | None = None
    instance_path: str | None = None
    allocators: tuple[str, ...] = ("bg", "rg", "rsg", "rae", "random", "topk")
    epsilon: float = 0.01
    configs: dict[str, AllocatorConfig] = field(default_factory=dict)
    repetitions: int = 3
    seed: int = 0
    output: str | None = None
    record_timing: bool = False
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "allocators", tuple(a.lower() for a in self.allocators))
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be at least 1, got {self.repetitions}")
        if not self.allocators:
            raise ValueError("at least one allocator is required")
        for name in self.allocators:
            get_allocator(name)
        if self.ingest is None and self.instance_path is None and self.generator is None:
            raise ValueError("no instance source: give a generator config, an ingest source or an instance file")
        if self.ingest is not None and self.instance_path is not None:
            raise ValueError("ingest source and instance file are mutually exclusive")
        if self.ingest is not None and self.generator is None:
            raise ValueError("an ingest source needs a generator config for the advertisers")

    def allocator_config(self, name: str, seed: int) -> AllocatorConfig:
        base = self.configs.get(name, AllocatorConfig(epsilon=self.epsilon))
        return replace(base, rng_seed=seed)


RESULT_FIELDS = (
    "experiment_id", "allocator", "repetition", "seed", "delta", "lambda", "gamma", "epsilon", "eta",
    "total_regret", "unsatisfied_regret", "excessive_regret", "satisfied_advertisers", "advertiser_count",
    "wall_clock_ms",
)
_FLOAT_FIELDS = {"delta", "lambda", "gamma", "epsilon", "eta", "total_regret", "unsatisfied_regret",
                 "excessive_regret", "satisfied_advertisers", "wall_clock_ms"}


@dataclass(frozen=True)
class ResultRow:
    experiment_id: str
    allocator: str
    repetition: int | str
    seed: int
    delta: float
    lambda_: float
    gamma: float
    epsilon: float
    eta: float
    total_regret: float
    unsatisfied_regret: float
    excessive_regret: float
    satisfied_advertisers: float
    advertiser_count: int
    wall_clock_ms: float = 0.0

    @property
    def is_mean(self) -> bool:
        return self.repetition == MEAN

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lambda_")
        return {k: out[k] for k in RESULT_FIELDS}

    def violations(self) -> list[str]:
        problems = []
        parts = self.unsatisfied_regret + self.excessive_regret
        if abs(self.total_regret - parts) > IDENTITY_TOL * max(1.0, abs(self.total_regret)):
            problems.append(f"total_regret {self.total_regret} != unsatisfied {self.unsatisfied_regret} "
                            f"+ excessive {self.excessive_regret}")
        if min(self.total_regret, self.unsatisfied_regret, self.excessive_regret) < -IDENTITY_TOL:
            problems.append("negative regret component")
        if not 0 <= self.satisfied_advertisers <= self.advertiser_count:
            problems.append(f"satisfied_advertisers {self.satisfied_advertisers} outside "
                            f"[0, {self.advertiser_count}]")
        return problems


def derive_seed(seed: int, name: str, repetition: int) -> int:
    """Stable 63-bit seed for (spec seed, name, repetition)."""
    digest = hashlib.blake2b(f"{seed}|{name}|{repetition}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def build_ingested_instance(source: IngestSource, generator: GenConfig, seed: int | None = None) -> Instance:
    billboards = load_billboards(source.billboards)
    trajectories = load_trajectories(source.trajectories)
    zones, k = {}, 1
    if source.zones:
        spec = load_zone_spec(source.zones)
        zones, k = assign_zones(billboards, spec), zone_count(spec)
    grid = expand_slots(billboards, source.expansion)
    slots, users = compute_influence_rows(grid, trajectories, source.eta, source.base_probability, zones,
                                          drop_empty=True)
    if not slots:
        raise ValueError("no slot influences any trajectory; widen eta or the time horizon")
    config = generator.replace(zone_count=k, trajectory_count=max(1, len(users)), slot_count=len(slots),
                               eta=source.eta, seed=generator.seed if seed is None else seed)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(2)[1])
    advertisers = generate_advertisers(config, total_supply(slots), rng)
    return Instance(tuple(slots), k, len(users), tuple(advertisers), config.gamma)


def build_instance(spec: ExperimentSpec, repetition: int) -> Instance:
    """Instance for one repetition; all allocators of a repetition share it.

    Generated instances are redrawn per repetition from a derived seed;
    file-based instances are the same every repetition.
    """
    try:
        if spec.instance_path is not None:
            return load_instance(spec.instance_path)
        if spec.ingest is not None:
            return build_ingested_instance(spec.ingest, spec.generator)
        return generate_instance(spec.generator.replace(seed=derive_seed(spec.seed, "instance", repetition)))
    except (ValueError, OSError) as exc:
        raise ValueError(f"experiment {spec.experiment_id!r}, repetition {repetition}: {exc}") from exc


def _echo(spec: ExperimentSpec, instance: Instance) -> dict:
    g = spec.generator
    eta = spec.ingest.eta if spec.ingest is not None else (g.eta if g is not None else math.nan)
    return {
        "delta": g.delta if g is not None else math.nan,
        "lambda_": g.lambda_ if g is not None else math.nan,
        "gamma": instance.penalty_ratio,
        "eta": eta,
    }


def _run_one(spec: ExperimentSpec, instance: Instance, name: str, repetition: int) -> ResultRow:
    seed = derive_seed(spec.seed, name, repetition)
    config = spec.allocator_config(name, seed)
    start = time.perf_counter()
    allocation, _ = ALLOCATORS[name](instance, config)
    elapsed = (time.perf_counter() - start) * 1000.0
    report = total_regret(instance, allocation)
    return ResultRow(
        experiment_id=spec.experiment_id, allocator=name, repetition=repetition, seed=seed,
        epsilon=config.epsilon, total_regret=report.total, unsatisfied_regret=report.total_unsatisfied,
        excessive_regret=report.total_excessive, satisfied_advertisers=float(report.satisfied_advertisers),
        advertiser_count=report.advertiser_count, wall_clock_ms=elapsed if spec.record_timing else 0.0,
        **_echo(spec, instance),
    )


def _run_repetition(spec: ExperimentSpec, repetition: int) -> list[ResultRow]:
    instance = build_instance(spec, repetition)
    return [_run_one(spec, instance, name, repetition) for name in spec.allocators]


def _mean_row(rows: Sequence[ResultRow]) -> ResultRow:
    first = rows[0]

    def avg(attr):
        return float(np.mean([getattr(r, attr) for r in rows]))

    return replace(
        first, repetition=MEAN, seed=0, total_regret=avg("total_regret"),
        unsatisfied_regret=avg("unsatisfied_regret"), excessive_regret=avg("excessive_regret"),
        satisfied_advertisers=avg("satisfied_advertisers"), wall_clock_ms=avg("wall_clock_ms"),
        advertiser_count=int(round(avg("advertiser_count"))),
    )


def _sort_key(row: ResultRow):
    rep = math.inf if row.is_mean else row.repetition
    return (row.experiment_id, row.allocator, rep)


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """One row per (allocator, repetition) plus one mean row per allocator, sorted."""
    batches = Parallel(n_jobs=spec.n_jobs)(
        delayed(_run_repetition)(spec, rep) for rep in range(spec.repetitions))
    rows = [r for batch in batches for r in batch]
    for name in spec.allocators:
        rows.append(_mean_row([r for r in rows if r.allocator == name]))
    rows.sort(key=_sort_key)
    if spec.output:
        emit_results(rows, _format_of(spec.output), spec.output)
    return rows


def run_grid(specs: Iterable[ExperimentSpec], n_jobs: int = 1) -> list[ResultRow]:
    """Run several experiments; grid points run concurrently when ``n_jobs != 1``."""
    specs = [replace(s, n_jobs=1, output=None) for s in specs]
    results = Parallel(n_jobs=n_jobs)(delayed(run_experiment)(s) for s in specs)
    return sorted((r for rows in results for r in rows), key=_sort_key)


def trend_specs(
    deltas: Sequence[float] = (0.4, 0.8, 1.2),
    lambdas: Sequence[float] = (0.01, 0.05, 0.2),
    repetitions: int = 3,
    base: GenConfig | None = None,
    allocators: Sequence[str] = ("bg", "rg", "rsg", "rae", "random", "topk"),
    seed: int = 0,
    epsilon: float = 0.01,
) -> list[ExperimentSpec]:
    """The demand/supply grid with ``round(1 / lambda)`` advertisers at every
    ``delta``, so ``lambda`` labels the advertiser pool size."""
    base = base or GenConfig()
    specs = []
    for lam in lambdas:
        count = max(1, round(1.0 / lam))
        for delta in deltas:
            generator = base.replace(delta=delta, lambda_=delta / count, advertiser_count=count)
            specs.append(ExperimentSpec(
                experiment_id=f"delta={delta:g},lambda={lam:g}", generator=generator,
                allocators=tuple(allocators), repetitions=repetitions, seed=seed, epsilon=epsilon,
            ))
    return specs


def _format_of(path) -> str:
    return "json" if str(path).lower().endswith(".json") else "csv"


def _text(key: str, value) -> str:
    if key in _FLOAT_FIELDS:
        return f"{float(value):.6f}"
    return str(value)


def _check_rows(rows: Sequence[ResultRow]) -> None:
    for row in rows:
        problems = row.violations()
        if problems:
            raise ValueError(f"refusing to emit row {row.experiment_id}/{row.allocator}/{row.repetition}: "
                             + "; ".join(problems))


def format_results(rows: Sequence[ResultRow], fmt: str = "csv") -> str:
    """Serialize rows with a fixed field order and six-decimal floats."""
    _check_rows(rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RESULT_FIELDS)
        for row in rows:
            d = row.to_dict()
            writer.writerow([_text(k, d[k]) for k in RESULT_FIELDS])
        return buf.getvalue()
    if fmt == "json":
        items = []
        for row in rows:
            d = row.to_dict()
            # floats are written as fixed-point literals rather than repr()
            parts = [f"{json.dumps(k)}: {_text(k, d[k]) if k in _FLOAT_FIELDS and math.isfinite(d[k]) else json.dumps(d[k])}"
                     for k in RESULT_FIELDS]
            items.append("  {" + ", ".join(parts) + "}")
        return "[\n" + ",\n".join(items) + "\n]\n" if items else "[]\n"
    raise ValueError(f"unknown result format {fmt!r}; use csv or json")


def emit_results(rows: Sequence[ResultRow], fmt: str, path) -> None:
    text = format_results(rows, fmt)
    Path(path).write_text(text, encoding="utf-8")


def _coerce(key: str, value):
    if key in _FLOAT_FIELDS:
        return float(value)
    if key in ("seed", "advertiser_count"):
        return int(value)
    if key == "repetition":
        return value if value == MEAN else int(value)
    return str(value)


def load_results(path) -> list[ResultRow]:
    """Read rows written by :func:`emit_results` in either format."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if _format_of(path) == "json":
        records = json.loads(text)
    else:
        records = list(csv.DictReader(io.StringIO(text)))
    rows = []
    for rec in records:
        values = {k: _coerce(k, rec[k]) for k in RESULT_FIELDS}
        values["lambda_"] = values.pop("lambda")
        rows.append(ResultRow(**values))
    return rows


def parse_config(text: str) -> dict[str, object]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment.

    Values become int, float or bool where they parse as such, otherwise
    stay strings. Later keys override earlier ones.
    """
    out: dict[str, object] = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {number}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"config line {number}: empty key")
        out[key] = _scalar(value)
    return out


def _scalar(value: str):
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def load_config(path) -> dict[str, object]:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def generator_fields() -> set[str]:
    return {f.name for f in fields(GenConfig)}
