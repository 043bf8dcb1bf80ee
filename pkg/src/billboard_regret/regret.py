"""Two-sided regret of an allocation and feasibility checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .model import Allocation, Instance

# Influence within this (relative) distance below the demand counts as meeting it.
SATISFACTION_TOL = 1e-9


def meets(provided: float, demand: float) -> bool:
    return provided >= demand - SATISFACTION_TOL * max(1.0, abs(demand))


def zonal_regret(payment: float, demand: float, provided_influence: float, gamma: float) -> tuple[float, float]:
    """Regret of one (advertiser, zone) cell as ``(unsatisfied, excessive)``.

    Short of demand the provider loses ``payment * (1 - gamma * provided / demand)``;
    at or above it, ``payment * (provided - demand) / demand``.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if demand < 0 or provided_influence < 0:
        raise ValueError("demand and provided influence must be non-negative")
    if demand == 0:
        if provided_influence > 0:
            raise ValueError("undefined ratio: positive influence provided against zero demand")
        return 0.0, 0.0
    if meets(provided_influence, demand):
        return 0.0, payment * max(0.0, provided_influence - demand) / demand
    return payment * (1.0 - gamma * provided_influence / demand), 0.0


def cell_regret(instance: Instance, advertiser_id: int, zone: int, provided: float) -> float:
    a = instance.advertiser(advertiser_id)
    unsat, excess = zonal_regret(a.payment, a.zonal_demand[zone], provided, instance.penalty_ratio)
    return unsat + excess


@dataclass
class RegretReport:
    per_cell: dict[tuple[int, int], tuple[float, float]] = field(default_factory=dict)
    total_unsatisfied: float = 0.0
    total_excessive: float = 0.0
    total: float = 0.0
    satisfied_advertisers: int = 0
    satisfied: dict[int, bool] = field(default_factory=dict)

    @property
    def advertiser_count(self) -> int:
        return len(self.satisfied)

    def unsatisfied_ids(self) -> list[int]:
        return sorted(a for a, ok in self.satisfied.items() if not ok)


def total_regret(instance: Instance, allocation: Allocation, advertisers: Iterable[int] | None = None) -> RegretReport:
    """Sum zonal regret over every demanded cell.

    Parameters
    ----------
    instance : Instance
    allocation : Allocation
    advertisers : iterable of int, optional
        Restrict the sum to these advertiser ids (e.g. the ones still active
        after a release). Defaults to all advertisers of the instance.
    """
    ids = [a.id for a in instance.advertisers] if advertisers is None else list(advertisers)
    report = RegretReport()
    gamma = instance.penalty_ratio
    for aid in ids:
        adv = instance.advertiser(aid)
        ok = True
        for z, demand in enumerate(adv.zonal_demand):
            provided = allocation.cell_influence(aid, z)
            unsat, excess = zonal_regret(adv.payment, demand, provided, gamma)
            if demand <= 0:
                continue
            report.per_cell[(aid, z)] = (unsat, excess)
            report.total_unsatisfied += unsat
            report.total_excessive += excess
            ok = ok and meets(provided, demand)
        report.satisfied[aid] = ok
    report.total = report.total_unsatisfied + report.total_excessive
    report.satisfied_advertisers = sum(report.satisfied.values())
    return report


def is_satisfied(instance: Instance, allocation: Allocation, advertiser_id: int) -> bool:
    adv = instance.advertiser(advertiser_id)
    return all(meets(allocation.cell_influence(advertiser_id, z), d)
               for z, d in enumerate(adv.zonal_demand) if d > 0)


def is_feasible(instance: Instance, allocation: Allocation) -> bool:
    """True iff the allocation is disjoint and meets every positive zonal demand."""
    owners: dict[int, int] = {}
    for a, slots in allocation.assigned.items():
        for s in slots:
            if s in owners:
                return False
            owners[s] = a
    return all(is_satisfied(instance, allocation, a.id) for a in instance.advertisers)
