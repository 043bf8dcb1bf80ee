"""The thirteen-slot, five-advertiser worked example.

Each slot ``bs_i`` with individual influence ``v`` influences ``v`` private
trajectories with probability 1, so influence is additive and equals the
tabulated integers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .allocators import AllocatorConfig, allocate_rae
from .model import Advertiser, Allocation, Instance, Slot
from .regret import total_regret

SLOT_INFLUENCE = (4, 6, 5, 3, 3, 2, 3, 2, 3, 3, 2, 5, 3)
ZONE_MEMBERS = (
    (1, 6, 11, 10),
    (2, 5, 8, 7, 13),
    (3, 4, 9, 12),
)
# (payment, demand per zone) for a1..a5
ADVERTISERS = (
    (15, (3, 2, 2)),
    (16, (3, 3, 3)),
    (15, (1, 5, 4)),
    (8, (1, 1, 2)),
    (7, (3, 2, 3)),
)

# Slots per advertiser per zone, 1-based slot numbers, as tabulated.
TABLE_C = {
    1: ((10,), (5,), (9,)),
    2: ((1,), (7,), (3,)),
    3: ((11,), (2,), (4,)),
    4: ((6,), (8,), (12,)),
    5: ((), (13,), ()),
}
TABLE_E = {
    1: ((10,), (5,), (9,)),
    2: ((1,), (7,), (3,)),
    3: ((6,), (8,), (12,)),
    4: ((11,), (2,), (4,)),
}

# Seeded sampled run whose initial stage reproduces TABLE_C slot for slot.
WALKTHROUGH_CONFIG = AllocatorConfig(epsilon=0.8, rng_seed=11471)
EXPECTED_UNSATISFIED = {"initial": {3, 5}, "rsg": {3}, "rae": set()}
EXPECTED_COUNTS = {"initial": (3, 5), "rsg": (3, 4), "rae": (4, 4)}


def slot_id(number: int) -> int:
    """0-based slot id of ``bs<number>``."""
    return number - 1


def advertiser_id(number: int) -> int:
    return number - 1


def illustrative_instance(gamma: float = 0.5) -> Instance:
    zone_of = {n: z for z, members in enumerate(ZONE_MEMBERS) for n in members}
    slots = []
    next_traj = 0
    for i, v in enumerate(SLOT_INFLUENCE):
        row = {next_traj + k: 1.0 for k in range(v)}
        next_traj += v
        slots.append(Slot(id=i, zone=zone_of[i + 1], influence_row=row, label=f"bs{i + 1}"))
    advertisers = [Advertiser(id=i, payment=u, zonal_demand=d) for i, (u, d) in enumerate(ADVERTISERS)]
    return Instance(tuple(slots), 3, next_traj, tuple(advertisers), gamma)


def table_allocation(instance: Instance, table: dict) -> Allocation:
    assignment = {
        advertiser_id(a): [slot_id(n) for zone in zones for n in zone]
        for a, zones in table.items()
    }
    alloc = Allocation(instance)
    for a, slots in assignment.items():
        if a in alloc.assigned:
            for s in slots:
                alloc.add(a, s)
    return alloc


def _fmt(instance: Instance, alloc: Allocation, ids) -> list[str]:
    report = total_regret(instance, alloc, ids)
    lines = []
    for a in ids:
        cells = []
        for z in range(instance.zones):
            names = ",".join(instance.slots[s].label for s in sorted(alloc.cell_slots(a, z)))
            cells.append(f"Z{z + 1}={{{names}}}")
        unsat = sum(report.per_cell[(a, z)][0] for z in range(instance.zones) if (a, z) in report.per_cell)
        excess = sum(report.per_cell[(a, z)][1] for z in range(instance.zones) if (a, z) in report.per_cell)
        flag = "yes" if report.satisfied[a] else "no"
        lines.append(f"  a{a + 1}: {' '.join(cells)}  satisfied={flag}  UR={unsat:.3f} ER={excess:.3f}")
    lines.append(f"  total regret {report.total:.3f} (unsatisfied {report.total_unsatisfied:.3f}, "
                 f"excessive {report.total_excessive:.3f})")
    return lines


@dataclass
class WalkthroughResult:
    text: str
    ok: bool
    unsatisfied: dict[str, set[int]]
    diff: list[str]


def fixture_walkthrough(config: AllocatorConfig = WALKTHROUGH_CONFIG, gamma: float = 0.5) -> WalkthroughResult:
    """Run the worked example through the sampled greedy, release and exchange
    stages and compare the satisfaction flags with the expected ones."""
    instance = illustrative_instance(gamma)
    _, trace = allocate_rae(instance, config)
    titles = {
        "initial": "initial allotment (sampled greedy)",
        "rsg": "after release (synchronous greedy)",
        "rae": "after exchange",
    }
    lines = [f"illustrative example: epsilon={config.epsilon} seed={config.rng_seed} gamma={gamma}"]
    unsatisfied: dict[str, set[int]] = {}
    diff = []
    for stage, title in titles.items():
        assignment = trace.stages[stage]
        ids = sorted(assignment)
        alloc = Allocation.from_assignment(instance, assignment)
        report = total_regret(instance, alloc, ids)
        unsatisfied[stage] = {a + 1 for a in report.unsatisfied_ids()}
        sat, total = report.satisfied_advertisers, len(ids)
        lines.append(f"{title}: {sat} of {total} satisfied")
        if stage == "rsg" and trace.released:
            lines.append("  released: " + ", ".join(f"a{a + 1}" for a in trace.released))
        lines.extend(_fmt(instance, alloc, ids))
        want_unsat = EXPECTED_UNSATISFIED[stage]
        if unsatisfied[stage] != want_unsat or (sat, total) != EXPECTED_COUNTS[stage]:
            diff.append(f"{stage}: expected unsatisfied {sorted(want_unsat)} ({EXPECTED_COUNTS[stage][0]} of "
                        f"{EXPECTED_COUNTS[stage][1]}), got {sorted(unsatisfied[stage])} ({sat} of {total})")
    if trace.swaps:
        lines.append("exchanges: " + ", ".join(
            f"{instance.slots[a].label}<->{instance.slots[b].label}" for a, b in trace.swaps))
    ok = not diff
    lines.append("stage outcomes match" if ok else "stage outcomes DIVERGE:\n  " + "\n  ".join(diff))
    return WalkthroughResult("\n".join(lines), ok, unsatisfied, diff)
