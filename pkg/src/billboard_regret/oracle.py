"""Exhaustive minimum-regret allocation for tiny instances."""

from __future__ import annotations

import math

import numpy as np

from .influence import influence
from .model import Allocation, Instance
from .regret import RegretReport, total_regret, zonal_regret

MAX_SLOTS = 12
MAX_ADVERTISERS = 4
_CHUNK = 1 << 18
_TIE_TOL = 1e-12


def _zone_optimum(instance: Instance, zone: int) -> tuple[float, list[int], list[int]]:
    """Best owner (advertiser id or -1) for each slot of ``zone``.

    Slots only affect the cells of their own zone, so zones are enumerated
    independently; within a zone every assignment of its slots to a demanding
    advertiser or to nobody is scored, in lexicographic order.
    """
    members = list(instance.zone_slots(zone))
    eligible = [a for a in instance.advertisers if a.zonal_demand[zone] > 0]
    m, n = len(members), len(eligible)
    base = n + 1
    # regret[a][mask]: regret of advertiser a's cell when it holds the slots in mask
    subset_influence = np.array([
        influence(instance, [members[b] for b in range(m) if mask >> b & 1]) for mask in range(1 << m)
    ])
    tables = np.array([
        [sum(zonal_regret(a.payment, a.zonal_demand[zone], v, instance.penalty_ratio)) for v in subset_influence]
        for a in eligible
    ]).reshape(n, 1 << m)
    if n == 0 or m == 0:
        return float(tables[:, 0].sum()) if n else 0.0, members, [-1] * m

    total = base ** m
    weights = base ** np.arange(m - 1, -1, -1, dtype=np.int64)
    best_value, best_code = None, 0
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        digits = (codes[:, None] // weights[None, :]) % base
        value = np.zeros(len(codes))
        for k in range(n):
            owned = (digits == k + 1).astype(np.int64)
            mask = owned @ (1 << np.arange(m, dtype=np.int64))
            value += tables[k][mask]
        i = int(np.argmin(value))
        lowest = value[i]
        first = int(np.flatnonzero(value <= lowest + _TIE_TOL * max(1.0, abs(lowest)))[0])
        # earlier chunks win ties, keeping the lexicographically first optimum
        if best_value is None or value[first] < best_value - _TIE_TOL * max(1.0, abs(best_value)):
            best_value, best_code = float(value[first]), int(codes[first])
    digits = [(best_code // int(w)) % base for w in weights]
    owners = [eligible[d - 1].id if d else -1 for d in digits]
    return best_value, members, owners


def exact_min_regret(instance: Instance) -> tuple[Allocation, float]:
    """Minimum total regret over every assignment of slots to advertisers or nobody.

    Raises
    ------
    ValueError
        If the instance has more than 12 slots or more than 4 advertisers.
    """
    if len(instance.slots) > MAX_SLOTS or len(instance.advertisers) > MAX_ADVERTISERS:
        raise ValueError(
            f"oracle limited to {MAX_SLOTS} slots and {MAX_ADVERTISERS} advertisers; "
            f"got {len(instance.slots)} slots and {len(instance.advertisers)} advertisers")
    allocation = Allocation(instance)
    for z in range(instance.zones):
        _, members, owners = _zone_optimum(instance, z)
        for s, a in zip(members, owners):
            if a >= 0:
                allocation.add(a, s)
    return allocation, total_regret(instance, allocation).total


def oracle_gap(instance: Instance, allocator_result) -> float:
    """Allocator regret over the exhaustive optimum.

    ``allocator_result`` may be an :class:`Allocation`, a :class:`RegretReport`,
    an ``(allocation, trace)`` pair, or a plain regret value. Returns 1.0 when
    both are zero and ``inf`` when only the optimum is zero.
    """
    if isinstance(allocator_result, tuple):
        allocator_result = allocator_result[0]
    if isinstance(allocator_result, Allocation):
        value = total_regret(instance, allocator_result).total
    elif isinstance(allocator_result, RegretReport):
        value = allocator_result.total
    else:
        value = float(allocator_result)
    _, best = exact_min_regret(instance)
    if best == 0.0:
        return 1.0 if abs(value) <= 1e-12 else math.inf
    return value / best
