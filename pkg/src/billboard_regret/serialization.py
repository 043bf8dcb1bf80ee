"""Self-contained JSON instance files."""

from __future__ import annotations

import json
from pathlib import Path

from .model import Advertiser, Instance, InstanceError, Slot, validate_instance

SCHEMA_VERSION = 1


def instance_to_dict(instance: Instance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "zones": instance.zones,
        "trajectory_count": instance.trajectory_count,
        "gamma": instance.penalty_ratio,
        "slots": [
            {
                "id": s.id,
                "zone": s.zone,
                "label": s.label,
                # sparse row as parallel lists keeps trajectory keys integral
                "trajectories": sorted(s.influence_row),
                "probabilities": [s.influence_row[t] for t in sorted(s.influence_row)],
            }
            for s in instance.slots
        ],
        "advertisers": [
            {"id": a.id, "payment": a.payment, "zonal_demand": list(a.zonal_demand)}
            for a in instance.advertisers
        ],
    }


def instance_from_dict(data: dict, validate: bool = True) -> Instance:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported instance schema_version {version!r} (expected {SCHEMA_VERSION})")
    try:
        slots = tuple(
            Slot(id=int(s["id"]), zone=int(s["zone"]), label=s.get("label", ""),
                 influence_row=dict(zip(s["trajectories"], s["probabilities"])))
            for s in data["slots"]
        )
        advertisers = tuple(
            Advertiser(id=int(a["id"]), payment=float(a["payment"]), zonal_demand=tuple(a["zonal_demand"]))
            for a in data["advertisers"]
        )
        instance = Instance(slots, int(data["zones"]), int(data["trajectory_count"]), advertisers,
                            float(data["gamma"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed instance file: {exc!r}") from exc
    if validate:
        problems = validate_instance(instance)
        if problems:
            raise InstanceError(problems)
    return instance


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), sort_keys=True) + "\n", encoding="utf-8")


def load_instance(path, validate: bool = True) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text(encoding="utf-8")), validate)
