"""Domain types: slots, advertisers, problem instances and allocations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .influence import InfluenceAccumulator, influence

CONSISTENCY_TOL = 1e-9


class InstanceError(ValueError):
    """Raised when an instance violates its invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid instance: " + "; ".join(self.violations))


@dataclass(frozen=True, eq=False)
class Slot:
    """One billboard x time-window unit.

    ``influence_row`` maps trajectory index to the probability that this
    slot alone influences that trajectory. ``individual_influence`` is the
    row sum and is derived when not given.
    """

    id: int
    zone: int
    influence_row: Mapping[int, float] = field(default_factory=dict)
    individual_influence: float | None = None
    label: str = ""

    def __post_init__(self):
        row = MappingProxyType({int(t): float(p) for t, p in dict(self.influence_row).items() if p != 0.0})
        object.__setattr__(self, "influence_row", row)
        if self.individual_influence is None:
            # fsum is order-independent, so rows rebuilt in any order agree bit for bit
            object.__setattr__(self, "individual_influence", math.fsum(row.values()))

    def __eq__(self, other):
        if not isinstance(other, Slot):
            return NotImplemented
        return (self.id, self.zone, dict(self.influence_row), self.individual_influence, self.label) == (
            other.id, other.zone, dict(other.influence_row), other.individual_influence, other.label)

    __hash__ = None


@dataclass(frozen=True)
class Advertiser:
    id: int
    payment: float
    zonal_demand: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "payment", float(self.payment))
        object.__setattr__(self, "zonal_demand", tuple(float(d) for d in self.zonal_demand))

    @property
    def total_demand(self) -> float:
        return float(sum(self.zonal_demand))

    def demanded_zones(self) -> list[int]:
        return [z for z, d in enumerate(self.zonal_demand) if d > 0]


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable problem world: slots, zones, trajectories, advertisers and the
    penalty ratio ``gamma``."""

    slots: tuple[Slot, ...]
    zones: int
    trajectory_count: int
    advertisers: tuple[Advertiser, ...]
    penalty_ratio: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        object.__setattr__(self, "advertisers", tuple(self.advertisers))
        by_zone: dict[int, list[int]] = {z: [] for z in range(self.zones)}
        for s in self.slots:
            by_zone.setdefault(s.zone, []).append(s.id)
        object.__setattr__(self, "_zone_slots", {z: tuple(sorted(v)) for z, v in by_zone.items()})
        object.__setattr__(self, "_adv_index", {a.id: i for i, a in enumerate(self.advertisers)})

    @property
    def gamma(self) -> float:
        return self.penalty_ratio

    def zone_slots(self, zone: int) -> tuple[int, ...]:
        return self._zone_slots.get(zone, ())

    def advertiser(self, advertiser_id: int) -> Advertiser:
        return self.advertisers[self._adv_index[advertiser_id]]

    def with_advertisers(self, advertisers: Iterable[Advertiser]) -> "Instance":
        return Instance(self.slots, self.zones, self.trajectory_count, tuple(advertisers), self.penalty_ratio)

    def with_gamma(self, gamma: float) -> "Instance":
        return Instance(self.slots, self.zones, self.trajectory_count, self.advertisers, gamma)

    def restrict_advertisers(self, ids: Iterable[int]) -> "Instance":
        keep = set(ids)
        return self.with_advertisers(a for a in self.advertisers if a.id in keep)


def validate_instance(instance: Instance) -> list[str]:
    """Return a description of every invariant violation; empty when valid."""
    problems = []
    if instance.zones < 1:
        problems.append(f"zones: need at least one zone, got {instance.zones}")
    if instance.trajectory_count < 1:
        problems.append(f"trajectory_count: must be positive, got {instance.trajectory_count}")
    if not 0.0 <= instance.penalty_ratio <= 1.0:
        problems.append(f"penalty_ratio: {instance.penalty_ratio} outside [0, 1]")
    for i, s in enumerate(instance.slots):
        if s.id != i:
            problems.append(f"slot {s.id}: ids must be dense 0..{len(instance.slots) - 1}, found {s.id} at position {i}")
        if not 0 <= s.zone < instance.zones:
            problems.append(f"slot {s.id}: zone {s.zone} outside [0, {instance.zones})")
        bad = {t: p for t, p in s.influence_row.items() if not 0.0 <= p <= 1.0}
        if bad:
            problems.append(f"slot {s.id}: probabilities outside [0, 1] at trajectories {sorted(bad)}")
        bad_t = [t for t in s.influence_row if not 0 <= t < instance.trajectory_count]
        if bad_t:
            problems.append(f"slot {s.id}: trajectory indices {bad_t} outside [0, {instance.trajectory_count})")
        if abs(s.individual_influence - sum(s.influence_row.values())) > CONSISTENCY_TOL:
            problems.append(f"slot {s.id}: individual_influence {s.individual_influence} != row sum")
    seen = set()
    for a in instance.advertisers:
        if a.id in seen:
            problems.append(f"advertiser {a.id}: duplicate id")
        seen.add(a.id)
        if not a.payment > 0:
            problems.append(f"advertiser {a.id}: payment must be positive, got {a.payment}")
        if len(a.zonal_demand) != instance.zones:
            problems.append(f"advertiser {a.id}: demand vector has {len(a.zonal_demand)} entries, expected {instance.zones}")
        if any(d < 0 for d in a.zonal_demand):
            problems.append(f"advertiser {a.id}: negative zonal demand")
        if not a.total_demand > 0:
            problems.append(f"advertiser {a.id}: total demand must be positive")
    return problems


class Allocation:
    """Mutable advertiser -> slot-set map over one instance.

    Keeps ``owner`` as the exact inverse of ``assigned`` and one influence
    accumulator per (advertiser, zone) cell.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        self.assigned: dict[int, set[int]] = {a.id: set() for a in instance.advertisers}
        self.owner: dict[int, int] = {}
        self._cells: dict[tuple[int, int], InfluenceAccumulator] = {}

    def copy(self) -> "Allocation":
        other = Allocation.__new__(Allocation)
        other.instance = self.instance
        other.assigned = {a: set(s) for a, s in self.assigned.items()}
        other.owner = dict(self.owner)
        other._cells = {k: acc.copy() for k, acc in self._cells.items()}
        return other

    def _cell(self, advertiser: int, zone: int) -> InfluenceAccumulator:
        key = (advertiser, zone)
        acc = self._cells.get(key)
        if acc is None:
            acc = self._cells[key] = InfluenceAccumulator(self.instance)
        return acc

    def add(self, advertiser: int, slot: int) -> None:
        if advertiser not in self.assigned:
            raise KeyError(f"unknown advertiser {advertiser}")
        if slot in self.owner:
            raise ValueError(f"slot {slot} already owned by advertiser {self.owner[slot]}")
        zone = self.instance.slots[slot].zone
        self._cell(advertiser, zone).add(slot)
        self.assigned[advertiser].add(slot)
        self.owner[slot] = advertiser

    def remove(self, slot: int) -> int:
        advertiser = self.owner.pop(slot)
        self.assigned[advertiser].discard(slot)
        self._cell(advertiser, self.instance.slots[slot].zone).remove(slot)
        return advertiser

    def release(self, advertiser: int) -> list[int]:
        freed = sorted(self.assigned[advertiser])
        for slot in freed:
            self.remove(slot)
        return freed

    def swap(self, slot_a: int, slot_b: int) -> None:
        """Exchange the owners of two owned slots."""
        owner_a, owner_b = self.owner[slot_a], self.owner[slot_b]
        self.remove(slot_a)
        self.remove(slot_b)
        self.add(owner_b, slot_a)
        self.add(owner_a, slot_b)

    def get_owner(self, slot: int) -> int | None:
        return self.owner.get(slot)

    def cell_slots(self, advertiser: int, zone: int) -> set[int]:
        acc = self._cells.get((advertiser, zone))
        return set(acc.slots) if acc else set()

    def cell_accumulator(self, advertiser: int, zone: int) -> InfluenceAccumulator:
        return self._cell(advertiser, zone)

    def cell_influence(self, advertiser: int, zone: int) -> float:
        acc = self._cells.get((advertiser, zone))
        return acc.current_value if acc else 0.0

    @property
    def cached_influence(self) -> dict[tuple[int, int], float]:
        return {k: acc.current_value for k, acc in self._cells.items() if acc.slots}

    def labels(self) -> list[int]:
        """Owner per slot id, ``-1`` for unallocated slots."""
        return [self.owner.get(s, -1) for s in range(len(self.instance.slots))]

    def as_dict(self) -> dict[int, list[int]]:
        return {a: sorted(s) for a, s in self.assigned.items()}

    @classmethod
    def from_assignment(cls, instance: Instance, assignment: Mapping[int, Iterable[int]]) -> "Allocation":
        alloc = cls(instance)
        for advertiser, slots in assignment.items():
            for slot in slots:
                alloc.add(advertiser, slot)
        return alloc

    def violations(self) -> list[str]:
        """Disjointness, zone and cache consistency problems (empty when sound)."""
        problems = []
        seen: dict[int, int] = {}
        for a, slots in self.assigned.items():
            for s in slots:
                if s in seen:
                    problems.append(f"slot {s} owned by advertisers {seen[s]} and {a}")
                seen[s] = a
                if self.owner.get(s) != a:
                    problems.append(f"owner map disagrees for slot {s}")
        if set(seen) != set(self.owner):
            problems.append("owner map has entries not in assigned")
        for (a, z), acc in self._cells.items():
            if acc.slots and a in self.assigned and self.instance.advertiser(a).zonal_demand[z] <= 0:
                problems.append(f"cell ({a}, {z}) has slots but zero demand")
            for s in acc.slots:
                if self.instance.slots[s].zone != z:
                    problems.append(f"slot {s} in cell ({a}, {z}) belongs to zone {self.instance.slots[s].zone}")
                if s not in self.assigned.get(a, ()):
                    problems.append(f"cell ({a}, {z}) holds slot {s} not assigned to {a}")
            exact = influence(self.instance, acc.slots)
            if abs(exact - acc.current_value) > CONSISTENCY_TOL:
                problems.append(f"cell ({a}, {z}) cached influence {acc.current_value} != {exact}")
        return problems

    def __eq__(self, other):
        if not isinstance(other, Allocation):
            return NotImplemented
        return self.instance is other.instance and self.owner == other.owner

    def __repr__(self):
        return f"Allocation({self.as_dict()})"
