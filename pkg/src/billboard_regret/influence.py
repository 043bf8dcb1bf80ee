"""Triggering-model influence of billboard slot sets.

A set of slots ``S`` influences trajectory ``t`` with probability
``1 - prod_{b in S} (1 - Pr(b, t))``; the influence of ``S`` is the sum of
that probability over all trajectories.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:
    from .model import Instance

# Below this survival factor, dividing a slot back out is numerically unsafe.
_DIVISION_FLOOR = 1e-12


def _check_slot(instance: "Instance", slot: int) -> None:
    if not (isinstance(slot, int) and 0 <= slot < len(instance.slots)):
        raise KeyError(f"invalid slot id {slot!r} (instance has {len(instance.slots)} slots)")


def influence(instance: "Instance", slot_set: Iterable[int]) -> float:
    """Influence of ``slot_set``, evaluated from scratch.

    Parameters
    ----------
    instance : Instance
    slot_set : iterable of int
        Slot ids. Duplicates are ignored.

    Returns
    -------
    float
        Expected number of trajectories triggered by at least one slot.
    """
    survival: dict[int, float] = {}
    for slot in set(slot_set):
        _check_slot(instance, slot)
        for t, p in instance.slots[slot].influence_row.items():
            survival[t] = survival.get(t, 1.0) * (1.0 - p)
    return sum(1.0 - s for s in survival.values())


class InfluenceAccumulator:
    """Incrementally maintained influence of a growing/shrinking slot set.

    Survival products are kept only for trajectories touched by some slot
    in the set. Removal divides the slot's factor back out unless one of
    its probabilities is (numerically) 1, in which case the affected
    trajectories are rebuilt from the remaining members.
    """

    def __init__(self, instance: "Instance"):
        self.instance = instance
        self.slots: set[int] = set()
        self.survival: dict[int, float] = {}
        self.current_value = 0.0

    def __contains__(self, slot: int) -> bool:
        return slot in self.slots

    def __len__(self) -> int:
        return len(self.slots)

    def copy(self) -> "InfluenceAccumulator":
        other = InfluenceAccumulator.__new__(InfluenceAccumulator)
        other.instance = self.instance
        other.slots = set(self.slots)
        other.survival = dict(self.survival)
        other.current_value = self.current_value
        return other

    def add(self, slot: int) -> float:
        _check_slot(self.instance, slot)
        if slot in self.slots:
            raise ValueError(f"slot {slot} already in accumulator")
        self.slots.add(slot)
        survival = self.survival
        gained = 0.0
        for t, p in self.instance.slots[slot].influence_row.items():
            old = survival.get(t, 1.0)
            new = old * (1.0 - p)
            survival[t] = new
            gained += old - new
        self.current_value += gained
        return self.current_value

    def remove(self, slot: int) -> float:
        _check_slot(self.instance, slot)
        if slot not in self.slots:
            raise KeyError(f"slot {slot} not in accumulator")
        self.slots.discard(slot)
        row = self.instance.slots[slot].influence_row
        if any(1.0 - p < _DIVISION_FLOOR for p in row.values()):
            self._rebuild(row.keys())
        else:
            survival = self.survival
            lost = 0.0
            for t, p in row.items():
                old = survival[t]
                new = min(1.0, old / (1.0 - p))
                survival[t] = new
                lost += new - old
            self.current_value -= lost
        if not self.slots:
            self.survival.clear()
            self.current_value = 0.0
        return self.current_value

    def _survival_without(self, t: int, excluded: int) -> float:
        s = 1.0
        slots = self.instance.slots
        for b in self.slots:
            if b != excluded:
                s *= 1.0 - slots[b].influence_row.get(t, 0.0)
        return s

    def _rebuild(self, trajectories: Iterable[int]) -> None:
        survival = self.survival
        delta = 0.0
        for t in trajectories:
            old = survival.get(t, 1.0)
            new = self._survival_without(t, -1)
            survival[t] = new
            delta += old - new
        self.current_value += delta

    def marginal_gain(self, slot: int) -> float:
        """``I(S + {slot}) - I(S)`` without mutating the accumulator."""
        _check_slot(self.instance, slot)
        if slot in self.slots:
            raise ValueError(f"slot {slot} already in accumulator")
        survival = self.survival
        return sum(survival.get(t, 1.0) * p for t, p in self.instance.slots[slot].influence_row.items())

    def value_after_swap(self, out_slot: int, in_slot: int) -> float:
        """Influence of ``S - {out_slot} + {in_slot}``, accumulator unchanged."""
        if out_slot not in self.slots:
            raise KeyError(f"slot {out_slot} not in accumulator")
        if in_slot in self.slots:
            raise ValueError(f"slot {in_slot} already in accumulator")
        slots = self.instance.slots
        out_row = slots[out_slot].influence_row
        in_row = slots[in_slot].influence_row
        survival = self.survival
        value = self.current_value
        for t in out_row.keys() | in_row.keys():
            old = survival.get(t, 1.0)
            p_out = out_row.get(t, 0.0)
            if p_out == 0.0:
                new = old
            elif 1.0 - p_out < _DIVISION_FLOOR:
                new = self._survival_without(t, out_slot)
            else:
                new = min(1.0, old / (1.0 - p_out))
            new *= 1.0 - in_row.get(t, 0.0)
            value += old - new
        return value

    def recompute(self) -> float:
        """From-scratch value of the current set (does not touch the cache)."""
        return influence(self.instance, self.slots)


def accumulator_new(instance: "Instance") -> InfluenceAccumulator:
    return InfluenceAccumulator(instance)


def accumulator_add(acc: InfluenceAccumulator, instance: "Instance", slot: int) -> float:
    if acc.instance is not instance:
        raise ValueError("accumulator belongs to a different instance")
    return acc.add(slot)


def accumulator_remove(acc: InfluenceAccumulator, instance: "Instance", slot: int) -> float:
    if acc.instance is not instance:
        raise ValueError("accumulator belongs to a different instance")
    return acc.remove(slot)


def marginal_gain(acc: InfluenceAccumulator, instance: "Instance", slot: int) -> float:
    if acc.instance is not instance:
        raise ValueError("accumulator belongs to a different instance")
    return acc.marginal_gain(slot)
