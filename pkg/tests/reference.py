"""Naive reference implementations used as independent oracles in tests.

Everything here recomputes from scratch with dense numpy arrays or plain
enumeration; nothing reuses the package's incremental machinery.
"""

from __future__ import annotations

import itertools

import numpy as np

from billboard_regret.model import Advertiser, Instance, Slot


def dense_matrix(instance: Instance) -> np.ndarray:
    P = np.zeros((len(instance.slots), instance.trajectory_count))
    for s in instance.slots:
        for t, p in s.influence_row.items():
            P[s.id, t] = p
    return P


def dense_influence(instance: Instance, slot_set) -> float:
    ids = sorted(set(slot_set))
    if not ids:
        return 0.0
    P = dense_matrix(instance)[ids]
    return float(np.sum(1.0 - np.prod(1.0 - P, axis=0)))


def naive_cell_regret(u: float, sigma: float, provided: float, gamma: float) -> float:
    if sigma == 0:
        assert provided == 0
        return 0.0
    if provided >= sigma - 1e-9 * max(1.0, sigma):
        return u * (provided - sigma) / sigma
    return u * (1 - gamma * provided / sigma)


def naive_total(instance: Instance, assignment: dict[int, set[int]]) -> float:
    total = 0.0
    for a in instance.advertisers:
        owned = assignment.get(a.id, set())
        for z, sigma in enumerate(a.zonal_demand):
            cell = [s for s in owned if instance.slots[s].zone == z]
            if sigma == 0:
                assert not cell
                continue
            total += naive_cell_regret(a.payment, sigma, dense_influence(instance, cell), instance.penalty_ratio)
    return total


def naive_bg(instance: Instance) -> dict[int, set[int]]:
    """Budget-effective greedy written directly from its description."""
    gamma = instance.penalty_ratio
    order = sorted(instance.advertisers, key=lambda a: (-a.payment / sum(a.zonal_demand), a.id))
    owned: set[int] = set()
    result = {a.id: set() for a in instance.advertisers}
    for a in order:
        for z, sigma in enumerate(a.zonal_demand):
            if sigma <= 0:
                continue
            cell: list[int] = []
            while True:
                current = dense_influence(instance, cell)
                if current >= sigma - 1e-9 * max(1.0, sigma):
                    break
                pool = [s.id for s in instance.slots
                        if s.zone == z and s.id not in owned and s.individual_influence > 0]
                if not pool:
                    break
                before = naive_cell_regret(a.payment, sigma, current, gamma)
                best, best_score = None, None
                for s in pool:
                    after = naive_cell_regret(a.payment, sigma, dense_influence(instance, cell + [s]), gamma)
                    score = (before - after) / instance.slots[s].individual_influence
                    if best is None or score > best_score + 1e-12 * max(1.0, abs(best_score)):
                        best, best_score = s, score
                cell.append(best)
                owned.add(best)
                result[a.id].add(best)
    return result


def brute_force_optimum(instance: Instance) -> float:
    """Minimum total regret by enumerating every slot owner jointly."""
    choices = []
    for s in instance.slots:
        choices.append([None] + [a.id for a in instance.advertisers if a.zonal_demand[s.zone] > 0])
    best = np.inf
    for combo in itertools.product(*choices):
        assignment: dict[int, set[int]] = {}
        for s, a in zip(instance.slots, combo):
            if a is not None:
                assignment.setdefault(a, set()).add(s.id)
        best = min(best, naive_total(instance, assignment))
    return float(best)


def random_instance(
    rng: np.random.Generator,
    n_slots: int = 20,
    n_traj: int = 30,
    n_adv: int = 3,
    zones: int = 2,
    density: float = 0.2,
    gamma: float | None = None,
    zero_demand_rate: float = 0.2,
    unit_probability_rate: float = 0.05,
) -> Instance:
    """Small random instance with sparse rows, some p == 1 entries, some
    zero-influence slots and some zero-demand cells."""
    slots = []
    for i in range(n_slots):
        mask = rng.random(n_traj) < density
        probs = rng.uniform(0.01, 0.99, size=n_traj)
        probs[rng.random(n_traj) < unit_probability_rate] = 1.0
        row = {int(t): float(probs[t]) for t in np.flatnonzero(mask)}
        slots.append(Slot(id=i, zone=int(rng.integers(zones)), influence_row=row))
    advertisers = []
    for j in range(n_adv):
        demand = [float(rng.integers(1, 6)) if rng.random() >= zero_demand_rate else 0.0 for _ in range(zones)]
        if sum(demand) == 0:
            demand[int(rng.integers(zones))] = float(rng.integers(1, 6))
        advertisers.append(Advertiser(id=j, payment=float(rng.integers(1, 20)), zonal_demand=tuple(demand)))
    g = float(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0])) if gamma is None else gamma
    return Instance(tuple(slots), zones, n_traj, tuple(advertisers), g)
