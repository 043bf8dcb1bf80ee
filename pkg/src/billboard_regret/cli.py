"""Command line entry point: generate, ingest, run, oracle, fixture."""

from __future__ import annotations

import argparse
import json
import sys

from .allocators import ALLOCATORS
from .fixture import fixture_walkthrough
from .gen import GenConfig, generate_instance
from .harness import (ExperimentSpec, IngestSource, build_ingested_instance, emit_results, format_results,
                      generator_fields, load_config, run_experiment)
from .ingest import SlotExpansion
from .oracle import exact_min_regret
from .serialization import load_instance, save_instance

# flag name -> GenConfig field
_GEN_FLAGS = {"delta": "delta", "lambda_": "lambda_", "advertisers": "advertiser_count", "gamma": "gamma",
              "eta": "eta", "slots": "slot_count", "zones": "zone_count", "trajectories": "trajectory_count"}
_SYNTHETIC_ONLY = {"slots", "zones", "trajectories"}
# config-file aliases
_CONFIG_ALIASES = {"lambda": "lambda_", "advertisers": "advertiser_count", "slots": "slot_count",
                   "zones": "zone_count", "trajectories": "trajectory_count"}


def _add_generator_flags(p: argparse.ArgumentParser, synthetic: bool = True) -> None:
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--delta", type=float, help="global demand over total supply")
    p.add_argument("--lambda", dest="lambda_", type=float, help="mean advertiser demand over total supply")
    p.add_argument("--advertisers", type=int, help="advertiser count")
    p.add_argument("--gamma", type=float, help="penalty ratio in [0, 1]")
    p.add_argument("--eta", type=float, help="distance threshold in meters")
    p.add_argument("--seed", type=int)
    if synthetic:
        p.add_argument("--slots", type=int)
        p.add_argument("--zones", type=int)
        p.add_argument("--trajectories", type=int)


def _settings(args) -> dict:
    values = {}
    if getattr(args, "config", None):
        for k, v in load_config(args.config).items():
            values[_CONFIG_ALIASES.get(k, k)] = v
    for flag, key in _GEN_FLAGS.items():
        if args.command == "ingest" and flag in _SYNTHETIC_ONLY:
            continue
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    for flag in ("seed", "epsilon", "reps", "allocators", "out", "format", "jobs", "timing", "instance"):
        v = getattr(args, flag, None)
        if v not in (None, False):
            values[flag] = v
    return values


def _gen_config(values: dict) -> GenConfig:
    known = generator_fields()
    kwargs = {k: v for k, v in values.items() if k in known and k != "seed"}
    if "seed" in values:
        kwargs["seed"] = int(values["seed"])
    delta, lam, count = kwargs.get("delta"), kwargs.get("lambda_"), kwargs.get("advertiser_count")
    # two of the three ratio parameters determine the third
    if delta is not None and lam is not None and count is None:
        kwargs["advertiser_count"] = max(1, round(delta / lam))
        kwargs["lambda_"] = delta / kwargs["advertiser_count"]
    elif delta is not None and count is not None and lam is None:
        kwargs["lambda_"] = delta / count
    elif lam is not None and count is not None and delta is None:
        kwargs["delta"] = lam * count
    elif delta is not None and lam is None and count is None:
        kwargs["lambda_"] = delta / GenConfig.advertiser_count
    elif count is not None and delta is None and lam is None:
        kwargs["lambda_"] = GenConfig.delta / count
    elif lam is not None and delta is None and count is None:
        kwargs["advertiser_count"] = max(1, round(GenConfig.delta / lam))
        kwargs["lambda_"] = GenConfig.delta / kwargs["advertiser_count"]
    return GenConfig(**kwargs)


def cmd_generate(args) -> int:
    values = _settings(args)
    instance = generate_instance(_gen_config(values))
    save_instance(instance, args.out)
    print(f"wrote {len(instance.slots)} slots, {len(instance.advertisers)} advertisers to {args.out}")
    return 0


def _expansion(args) -> SlotExpansion:
    return SlotExpansion(args.start, args.end, args.slot_minutes * 60.0)


def cmd_ingest(args) -> int:
    values = _settings(args)
    source = IngestSource(args.billboards, args.trajectories, _expansion(args), args.eta or 100.0,
                          args.base_probability, args.zone_file)
    instance = build_ingested_instance(source, _gen_config(values))
    save_instance(instance, args.out)
    print(f"wrote {len(instance.slots)} non-empty slots over {instance.trajectory_count} trajectories, "
          f"{len(instance.advertisers)} advertisers to {args.out}")
    return 0


def cmd_run(args) -> int:
    values = _settings(args)
    allocators = values.get("allocators", ",".join(ALLOCATORS))
    if isinstance(allocators, str):
        allocators = tuple(a.strip() for a in allocators.split(",") if a.strip())
    instance = values.get("instance")
    spec = ExperimentSpec(
        experiment_id=str(values.get("experiment_id", "run")),
        generator=None if instance else _gen_config(values),
        instance_path=instance,
        allocators=allocators,
        epsilon=float(values.get("epsilon", 0.01)),
        repetitions=int(values.get("reps", 3)),
        seed=int(values.get("seed", 0)),
        record_timing=bool(values.get("timing", False)),
        n_jobs=int(values.get("jobs", 1)),
    )
    rows = run_experiment(spec)
    fmt = values.get("format", "csv")
    out = values.get("out")
    if out:
        emit_results(rows, fmt, out)
    else:
        sys.stdout.write(format_results(rows, fmt))
    return 0


def cmd_oracle(args) -> int:
    instance = load_instance(args.instance)
    allocation, total = exact_min_regret(instance)
    print(json.dumps({"total_regret": round(total, 6),
                      "assignment": {str(a): s for a, s in allocation.as_dict().items()}}, sort_keys=True))
    return 0


def cmd_fixture(args) -> int:
    result = fixture_walkthrough()
    print(result.text)
    return 0 if result.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="billboard-regret", description="Regret-minimizing billboard slot allocation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic instance file")
    _add_generator_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="build an instance file from billboard and check-in CSVs")
    _add_generator_flags(p, synthetic=False)
    p.add_argument("--billboards", required=True)
    p.add_argument("--trajectories", required=True)
    p.add_argument("--zone-file", help="zones JSON (boxes or centroids)")
    p.add_argument("--start", type=float, required=True, help="horizon start, epoch seconds")
    p.add_argument("--end", type=float, required=True, help="horizon end, epoch seconds")
    p.add_argument("--slot-minutes", type=float, default=1.0)
    p.add_argument("--base-probability", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run", help="run allocators and emit a result table")
    _add_generator_flags(p)
    p.add_argument("--instance", help="instance file; otherwise one is generated per repetition")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--reps", type=int)
    p.add_argument("--allocators", help="comma list of " + ",".join(ALLOCATORS))
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--jobs", type=int, help="parallel repetitions")
    p.add_argument("--timing", action="store_true", help="record wall clock (output no longer byte-stable)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="exhaustive optimum of a tiny instance")
    p.add_argument("instance")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("fixture", help="worked-example walkthrough; nonzero exit on divergence")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
