"""Synthetic instances over the demand/supply parameter grid."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .model import Advertiser, Instance, Slot


@dataclass(frozen=True)
class GenConfig:
    """Parameters of a synthetic instance.

    ``delta`` is global demand over total supply and ``lambda_`` the mean
    per-advertiser demand over supply, so ``delta == lambda_ * advertiser_count``
    (checked to within 1%). ``eta`` is only echoed; rows here are drawn
    directly rather than from geometry.
    """

    delta: float = 1.0
    lambda_: float = 0.05
    advertiser_count: int = 20
    gamma: float = 0.5
    slot_count: int = 200
    zone_count: int = 5
    trajectory_count: int = 400
    eta: float = 100.0
    alpha_range: tuple[float, float] = (0.8, 1.2)
    beta_range: tuple[float, float] = (0.9, 1.1)
    seed: int = 0
    mean_row_nnz: float = 4.0
    probability_range: tuple[float, float] = (0.05, 0.5)

    def __post_init__(self):
        if self.advertiser_count < 1 or self.slot_count < 1 or self.zone_count < 1 or self.trajectory_count < 1:
            raise ValueError("advertiser, slot, zone and trajectory counts must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.delta <= 0 or self.lambda_ <= 0:
            raise ValueError("delta and lambda must be positive")
        if abs(self.delta - self.lambda_ * self.advertiser_count) > 0.01 * self.delta:
            raise ValueError(
                f"delta={self.delta} inconsistent with lambda*|A|={self.lambda_ * self.advertiser_count} (1% tolerance)")
        lo, hi = self.probability_range
        if not 0.0 < lo <= hi <= 1.0:
            raise ValueError(f"probability_range must satisfy 0 < lo <= hi <= 1, got {self.probability_range}")

    @classmethod
    def from_ratios(cls, delta: float, lambda_: float, **kwargs) -> "GenConfig":
        """Derive ``advertiser_count = round(delta / lambda_)``, then make
        ``lambda_`` exact for that count."""
        count = max(1, round(delta / lambda_))
        return cls(delta=delta, lambda_=delta / count, advertiser_count=count, **kwargs)

    @classmethod
    def with_advertisers(cls, delta: float, advertiser_count: int, **kwargs) -> "GenConfig":
        return cls(delta=delta, lambda_=delta / advertiser_count, advertiser_count=advertiser_count, **kwargs)

    def replace(self, **changes) -> "GenConfig":
        values = asdict(self)
        values.update(changes)
        return GenConfig(**values)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, values: dict) -> "GenConfig":
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for k, v in values.items():
            key = "lambda_" if k == "lambda" else k
            if key not in known:
                raise ValueError(f"unknown generator key {k!r}")
            kwargs[key] = tuple(v) if isinstance(v, list) else v
        return cls(**kwargs)


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    slot_seq, adv_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(slot_seq), np.random.default_rng(adv_seq)


def total_supply(instance_or_slots) -> float:
    """Sum of individual slot influences."""
    slots = instance_or_slots.slots if isinstance(instance_or_slots, Instance) else instance_or_slots
    return float(sum(s.individual_influence for s in slots))


def generate_slots(config: GenConfig, rng: np.random.Generator | None = None) -> list[Slot]:
    """Sparse random influence rows with uniformly assigned zones."""
    if rng is None:
        rng = _streams(config.seed)[0]
    lo, hi = config.probability_range
    zones = rng.integers(config.zone_count, size=config.slot_count)
    nnz = np.minimum(rng.poisson(config.mean_row_nnz, size=config.slot_count), config.trajectory_count)
    slots = []
    for i in range(config.slot_count):
        trajs = rng.choice(config.trajectory_count, size=int(nnz[i]), replace=False)
        probs = rng.uniform(lo, hi, size=int(nnz[i]))
        row = {int(t): float(p) for t, p in zip(trajs, probs)}
        slots.append(Slot(id=i, zone=int(zones[i]), influence_row=row))
    return slots


def split_demand(total: int, weights: Sequence[float]) -> list[int]:
    """Largest-remainder rounding of ``total * weights`` to integers summing to ``total``."""
    raw = np.asarray(weights, dtype=float) * total
    base = np.floor(raw).astype(int)
    short = total - int(base.sum())
    order = np.argsort(-(raw - base), kind="stable")
    base[order[:short]] += 1
    return base.tolist()


def generate_advertisers(config: GenConfig, supply: float, rng: np.random.Generator | None = None) -> list[Advertiser]:
    """Advertisers with demand ``floor(alpha * supply * lambda)`` and payment
    ``floor(beta * demand)`` (at least 1), demand split over zones with
    Dirichlet(1) weights."""
    if supply <= 0:
        raise ValueError("supply must be positive to generate advertiser demand")
    if rng is None:
        rng = _streams(config.seed)[1]
    a_lo, a_hi = config.alpha_range
    b_lo, b_hi = config.beta_range
    advertisers = []
    for i in range(config.advertiser_count):
        alpha = rng.uniform(a_lo, a_hi)
        demand = math.floor(alpha * supply * config.lambda_)
        if demand < 1:
            raise ValueError(
                f"advertiser {i}: demand floors to 0 (supply={supply:.3f}, lambda={config.lambda_}); "
                "increase supply or lambda")
        beta = rng.uniform(b_lo, b_hi)
        payment = max(1, math.floor(beta * demand))
        weights = rng.dirichlet(np.ones(config.zone_count))
        advertisers.append(Advertiser(id=i, payment=float(payment), zonal_demand=split_demand(demand, weights)))
    return advertisers


def generate_instance(config: GenConfig) -> Instance:
    slot_rng, adv_rng = _streams(config.seed)
    slots = generate_slots(config, slot_rng)
    advertisers = generate_advertisers(config, total_supply(slots), adv_rng)
    return Instance(tuple(slots), config.zone_count, config.trajectory_count, tuple(advertisers), config.gamma)
