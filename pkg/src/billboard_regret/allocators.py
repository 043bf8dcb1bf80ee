"""Slot allocation strategies.

Budget-effective greedy (``bg``), its sampled variant (``rg``), the
release-based synchronous greedy (``rsg``), pairwise slot exchange on top
of it (``rae``), and the ``random`` / ``topk`` baselines.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import Advertiser, Allocation, Instance
from .regret import meets, total_regret, zonal_regret

_TIE_TOL = 1e-12
SWAP_TOL = 1e-9
IMPROVEMENT_TOL = 1e-9

# ln(1 / FULL_SAMPLE_EPSILON) ~ 708, so the sample covers the whole pool
# whenever the greedy prefix has at most 708 slots.
FULL_SAMPLE_EPSILON = sys.float_info.min


@dataclass(frozen=True)
class AllocatorConfig:
    """Knobs shared by all allocators.

    ``max_rsg_rounds=None`` means ten rounds per advertiser.
    """

    epsilon: float = 0.01
    rng_seed: int = 0
    max_rsg_rounds: int | None = None
    max_rae_passes: int = 50

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_rsg_rounds is not None and self.max_rsg_rounds < 1:
            raise ValueError("max_rsg_rounds must be positive")
        if self.max_rae_passes < 1:
            raise ValueError("max_rae_passes must be positive")

    @classmethod
    def full_sample(cls, **kwargs) -> "AllocatorConfig":
        return cls(epsilon=FULL_SAMPLE_EPSILON, **kwargs)

    def rsg_round_cap(self, advertiser_count: int) -> int:
        return self.max_rsg_rounds if self.max_rsg_rounds is not None else max(1, 10 * advertiser_count)


@dataclass(frozen=True)
class PickRecord:
    advertiser: int
    zone: int
    slot: int
    reduction: float
    sample_size: int


@dataclass
class AllocatorTrace:
    picks: list[PickRecord] = field(default_factory=list)
    released: list[int] = field(default_factory=list)
    swaps: list[tuple[int, int]] = field(default_factory=list)
    stages: dict[str, dict[int, list[int]]] = field(default_factory=dict)
    active: list[int] = field(default_factory=list)
    rounds: int = 0
    accepted_rounds: int = 0
    stopped_on_no_improvement: bool = False
    passes: int = 0
    phase_seconds: dict[str, float] = field(default_factory=dict, compare=False)

    def time_phase(self, name: str, seconds: float) -> None:
        self.phase_seconds[name] = self.phase_seconds.get(name, 0.0) + seconds


def budget_effectiveness(advertiser: Advertiser) -> float:
    total = advertiser.total_demand
    if total <= 0:
        raise ValueError(f"advertiser {advertiser.id} has zero total demand")
    return advertiser.payment / total


def sort_by_budget_effectiveness(advertisers: Sequence[Advertiser]) -> list[Advertiser]:
    """Descending payment/demand ratio; equal ratios keep ascending id order."""
    return sorted(advertisers, key=lambda a: (-budget_effectiveness(a), a.id))


def greedy_prefix_size(pool_influences: Sequence[float], zonal_demand: float) -> tuple[int, set[int]]:
    """Length of the shortest prefix of an ascending pool whose summed
    individual influence reaches ``zonal_demand``.

    Returns the count and the set of prefix positions; the whole pool when
    the demand is never reached.
    """
    if zonal_demand <= 0:
        return 0, set()
    running = 0.0
    count = 0
    for value in pool_influences:
        if running >= zonal_demand:
            break
        running += value
        count += 1
    return count, set(range(count))


def sample_size(pool_size: int, prefix_size: int, epsilon: float) -> int:
    """``ceil(pool_size / prefix_size * ln(1/epsilon))`` clamped to ``[1, pool_size]``."""
    if pool_size <= 0:
        return 0
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if prefix_size <= 0:
        return pool_size
    raw = pool_size / prefix_size * -math.log(epsilon)
    size = math.ceil(raw - 1e-9)
    return min(max(size, 1), pool_size)


# -- shared machinery ------------------------------------------------------


def _zone_pools(instance: Instance, allocation: Allocation) -> dict[int, list[int]]:
    """Unowned slots with positive individual influence, per zone, ascending id."""
    return {
        z: [s for s in instance.zone_slots(z) if s not in allocation.owner and instance.slots[s].individual_influence > 0]
        for z in range(instance.zones)
    }


def _cell_satisfied(allocation: Allocation, adv: Advertiser, zone: int) -> bool:
    return meets(allocation.cell_influence(adv.id, zone), adv.zonal_demand[zone])


def _advertiser_satisfied(allocation: Allocation, adv: Advertiser) -> bool:
    return all(_cell_satisfied(allocation, adv, z) for z in adv.demanded_zones())


def _cell_value(payment: float, demand: float, provided: float, gamma: float) -> float:
    unsat, excess = zonal_regret(payment, demand, provided, gamma)
    return unsat + excess


def _greedy_fill(
    instance: Instance,
    allocation: Allocation,
    order: Sequence[Advertiser],
    pools: dict[int, list[int]],
    trace: AllocatorTrace,
    rng: np.random.Generator | None,
    epsilon: float,
) -> None:
    """Fill every demanded cell in ``order`` by regret-reduction-per-influence.

    With ``rng=None`` every remaining pool slot is scored; otherwise a
    uniform sample sized by :func:`sample_size` is scored.
    """
    gamma = instance.penalty_ratio
    slots = instance.slots
    for adv in order:
        for z in adv.demanded_zones():
            demand = adv.zonal_demand[z]
            pool = pools[z]
            if _cell_satisfied(allocation, adv, z) or not pool:
                continue
            acc = allocation.cell_accumulator(adv.id, z)
            prefix = None
            if rng is not None:
                ascending = sorted(pool, key=lambda s: (slots[s].individual_influence, s))
                residual = demand - acc.current_value
                prefix, _ = greedy_prefix_size([slots[s].individual_influence for s in ascending], residual)
            while pool and not meets(acc.current_value, demand):
                if rng is None:
                    candidates = pool
                else:
                    m = sample_size(len(pool), prefix, epsilon)
                    if m >= len(pool):
                        candidates = pool
                    else:
                        picked = rng.choice(len(pool), size=m, replace=False)
                        candidates = [pool[i] for i in sorted(picked)]
                before = _cell_value(adv.payment, demand, acc.current_value, gamma)
                best, best_score = -1, -math.inf
                for s in candidates:
                    after = _cell_value(adv.payment, demand, acc.current_value + acc.marginal_gain(s), gamma)
                    score = (before - after) / slots[s].individual_influence
                    if best < 0 or score > best_score + _TIE_TOL * max(1.0, abs(best_score)):
                        best, best_score = s, score
                allocation.add(adv.id, best)
                pool.remove(best)
                trace.picks.append(PickRecord(adv.id, z, best, best_score, len(candidates)))


def _stage(allocation: Allocation, ids: Sequence[int]) -> dict[int, list[int]]:
    return {a: sorted(allocation.assigned[a]) for a in ids}


def _rng(config: AllocatorConfig) -> np.random.Generator:
    return np.random.default_rng(config.rng_seed)


# -- allocators ------------------------------------------------------------


def allocate_bg(instance: Instance, config: AllocatorConfig | None = None) -> tuple[Allocation, AllocatorTrace]:
    """Budget-effective greedy: exhaustive scoring of each zone pool."""
    config = config or AllocatorConfig()
    t0 = time.perf_counter()
    allocation, trace = Allocation(instance), AllocatorTrace()
    order = sort_by_budget_effectiveness(instance.advertisers)
    _greedy_fill(instance, allocation, order, _zone_pools(instance, allocation), trace, None, config.epsilon)
    trace.active = [a.id for a in order]
    trace.time_phase("allocate", time.perf_counter() - t0)
    return allocation, trace


def allocate_rg(instance: Instance, config: AllocatorConfig | None = None) -> tuple[Allocation, AllocatorTrace]:
    """Randomized budget-effective greedy: score a sample of each zone pool."""
    config = config or AllocatorConfig()
    t0 = time.perf_counter()
    allocation, trace = Allocation(instance), AllocatorTrace()
    order = sort_by_budget_effectiveness(instance.advertisers)
    _greedy_fill(instance, allocation, order, _zone_pools(instance, allocation), trace, _rng(config), config.epsilon)
    trace.active = [a.id for a in order]
    trace.time_phase("allocate", time.perf_counter() - t0)
    return allocation, trace


def _rsg(instance: Instance, config: AllocatorConfig, rng: np.random.Generator) -> tuple[Allocation, AllocatorTrace]:
    t0 = time.perf_counter()
    allocation, trace = Allocation(instance), AllocatorTrace()
    active = sort_by_budget_effectiveness(instance.advertisers)
    _greedy_fill(instance, allocation, active, _zone_pools(instance, allocation), trace, rng, config.epsilon)
    trace.stages["initial"] = _stage(allocation, [a.id for a in instance.advertisers])
    trace.time_phase("initial", time.perf_counter() - t0)

    t1 = time.perf_counter()
    cap = config.rsg_round_cap(len(instance.advertisers))
    while trace.rounds < cap:
        unsatisfied = [a for a in active if not _advertiser_satisfied(allocation, a)]
        if len(unsatisfied) < 2:
            break
        trace.rounds += 1
        # ``active`` is in descending budget-effectiveness order, so the
        # least effective unsatisfied advertiser is the last one.
        victim = unsatisfied[-1]
        before = total_regret(instance, allocation, [a.id for a in active]).total
        trial = allocation.copy()
        trial.release(victim.id)
        remaining = [a for a in active if a.id != victim.id]
        picks_before = len(trace.picks)
        _greedy_fill(instance, trial, remaining, _zone_pools(instance, trial), trace, rng, config.epsilon)
        after = total_regret(instance, trial, [a.id for a in remaining]).total
        if after < before - IMPROVEMENT_TOL:
            allocation, active = trial, remaining
            trace.released.append(victim.id)
            trace.accepted_rounds += 1
        else:
            del trace.picks[picks_before:]
            trace.stopped_on_no_improvement = True
            break
    trace.active = [a.id for a in active]
    trace.stages["rsg"] = _stage(allocation, trace.active)
    trace.time_phase("release", time.perf_counter() - t1)
    return allocation, trace


def allocate_rsg(instance: Instance, config: AllocatorConfig | None = None) -> tuple[Allocation, AllocatorTrace]:
    """Randomized synchronous greedy.

    Runs the sampled greedy, then, while two or more advertisers remain
    unsatisfied, releases the least budget-effective unsatisfied one and
    re-fills the still-unsatisfied cells from the enlarged pools. A round is
    kept only if it lowers the regret of the remaining advertisers.
    """
    config = config or AllocatorConfig()
    return _rsg(instance, config, _rng(config))


def _best_swap(instance: Instance, allocation: Allocation, a_i: Advertiser, a_j: Advertiser) -> tuple[float, int, int]:
    gamma = instance.penalty_ratio
    best = (0.0, -1, -1)
    for z in a_i.demanded_zones():
        if a_j.zonal_demand[z] <= 0:
            continue
        acc_i = allocation.cell_accumulator(a_i.id, z)
        acc_j = allocation.cell_accumulator(a_j.id, z)
        if not acc_i.slots or not acc_j.slots:
            continue
        d_i, d_j = a_i.zonal_demand[z], a_j.zonal_demand[z]
        base = (_cell_value(a_i.payment, d_i, acc_i.current_value, gamma)
                + _cell_value(a_j.payment, d_j, acc_j.current_value, gamma))
        for s_i in sorted(acc_i.slots):
            for s_j in sorted(acc_j.slots):
                new_i = max(0.0, acc_i.value_after_swap(s_i, s_j))
                new_j = max(0.0, acc_j.value_after_swap(s_j, s_i))
                delta = (_cell_value(a_i.payment, d_i, new_i, gamma)
                         + _cell_value(a_j.payment, d_j, new_j, gamma)) - base
                if delta < best[0] - _TIE_TOL:
                    best = (delta, s_i, s_j)
    return best


def allocate_rae(instance: Instance, config: AllocatorConfig | None = None) -> tuple[Allocation, AllocatorTrace]:
    """Randomized advertiser exchange on top of :func:`allocate_rsg`.

    Each pass visits ordered pairs of active advertisers and commits the
    best same-zone single-slot swap when it lowers total regret by more
    than ``1e-9``. A pass is kept only if it lowers regret overall.
    """
    config = config or AllocatorConfig()
    allocation, trace = _rsg(instance, config, _rng(config))
    t0 = time.perf_counter()
    order = [instance.advertiser(a) for a in trace.active]
    ids = trace.active
    while trace.passes < config.max_rae_passes:
        trace.passes += 1
        start = total_regret(instance, allocation, ids).total
        candidate = allocation.copy()
        committed = []
        for a_i in order:
            for a_j in order:
                if a_i.id == a_j.id:
                    continue
                delta, s_i, s_j = _best_swap(instance, candidate, a_i, a_j)
                if delta < -SWAP_TOL:
                    candidate.swap(s_i, s_j)
                    committed.append((s_i, s_j))
        if not committed:
            break
        end = total_regret(instance, candidate, ids).total
        if not end < start:
            break
        allocation = candidate
        trace.swaps.extend(committed)
    trace.stages["rae"] = _stage(allocation, ids)
    trace.time_phase("exchange", time.perf_counter() - t0)
    return allocation, trace


def allocate_random(instance: Instance, config: AllocatorConfig | None = None) -> tuple[Allocation, AllocatorTrace]:
    """Baseline: uniform random slots from the zone pool until each cell is met."""
    config = config or AllocatorConfig()
    t0 = time.perf_counter()
    rng = _rng(config)
    allocation, trace = Allocation(instance), AllocatorTrace()
    pools = _zone_pools(instance, allocation)
    order = sort_by_budget_effectiveness(instance.advertisers)
    for adv in order:
        for z in adv.demanded_zones():
            pool = pools[z]
            while pool and not _cell_satisfied(allocation, adv, z):
                s = pool.pop(int(rng.integers(len(pool))))
                allocation.add(adv.id, s)
                trace.picks.append(PickRecord(adv.id, z, s, 0.0, 1))
    trace.active = [a.id for a in order]
    trace.time_phase("allocate", time.perf_counter() - t0)
    return allocation, trace


def allocate_topk(instance: Instance, config: AllocatorConfig | None = None) -> tuple[Allocation, AllocatorTrace]:
    """Baseline: most influential remaining zone slots first."""
    t0 = time.perf_counter()
    allocation, trace = Allocation(instance), AllocatorTrace()
    slots = instance.slots
    pools = {z: sorted(p, key=lambda s: (-slots[s].individual_influence, s))
             for z, p in _zone_pools(instance, allocation).items()}
    order = sort_by_budget_effectiveness(instance.advertisers)
    for adv in order:
        for z in adv.demanded_zones():
            pool = pools[z]
            while pool and not _cell_satisfied(allocation, adv, z):
                s = pool.pop(0)
                allocation.add(adv.id, s)
                trace.picks.append(PickRecord(adv.id, z, s, 0.0, 1))
    trace.active = [a.id for a in order]
    trace.time_phase("allocate", time.perf_counter() - t0)
    return allocation, trace


ALLOCATORS: dict[str, Callable[[Instance, AllocatorConfig], tuple[Allocation, AllocatorTrace]]] = {
    "bg": allocate_bg,
    "rg": allocate_rg,
    "rsg": allocate_rsg,
    "rae": allocate_rae,
    "random": allocate_random,
    "topk": allocate_topk,
}


def get_allocator(name: str):
    try:
        return ALLOCATORS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown allocator {name!r}; choose from {', '.join(ALLOCATORS)}") from None
