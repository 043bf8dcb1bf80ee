"""Acceptance criteria 1-9.

Each test carries ``@pytest.mark.criterion(n)``; the conftest prints one
PASS/FAIL line per criterion at the end of the run.
"""

import math
import time
from collections import defaultdict

import numpy as np
import pytest

from billboard_regret.allocators import (ALLOCATORS, AllocatorConfig, allocate_bg, allocate_rae, allocate_rg,
                                         allocate_rsg, sample_size)
from billboard_regret.cli import main
from billboard_regret.fixture import WALKTHROUGH_CONFIG, fixture_walkthrough, illustrative_instance
from billboard_regret.gen import GenConfig, generate_instance
from billboard_regret.harness import run_grid, trend_specs
from billboard_regret.influence import InfluenceAccumulator, influence
from billboard_regret.ingest import (BillboardRecord, SlotExpansion, TrajectoryRecord, compute_influence_rows,
                                     expand_slots, load_billboards, nonzero_slot_count)
from billboard_regret.oracle import exact_min_regret
from billboard_regret.regret import total_regret, zonal_regret
from reference import dense_influence, random_instance


@pytest.mark.criterion(1)
def test_criterion_1_fixture_exactness(capsys, record_property):
    start = time.perf_counter()
    code = main(["fixture"])
    elapsed = time.perf_counter() - start
    out = capsys.readouterr().out
    assert code == 0, out
    assert "stage outcomes match" in out

    result = fixture_walkthrough()
    assert result.unsatisfied["initial"] == {3, 5}
    assert result.unsatisfied["rsg"] == {3}
    assert result.unsatisfied["rae"] == set()

    inst = illustrative_instance()
    _, trace = allocate_rae(inst, WALKTHROUGH_CONFIG)
    assert trace.released == [4]
    owners = {s: a for a, slots in trace.stages["rsg"].items() for s in slots}
    # the a3 <-> a4 exchange happens in Z3: bs4 (a3) for bs12 (a4)
    assert any({owners.get(x), owners.get(y)} == {2, 3} for x, y in trace.swaps[:2])
    assert elapsed < 1.0
    record_property("detail", f"stages (3 of 5, 3 of 4, 4 of 4) match in {elapsed * 1000:.0f} ms")


@pytest.mark.criterion(2)
def test_criterion_2_influence_correctness(record_property):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    checks = 0
    for _ in range(200):
        n_slots = int(rng.integers(5, 101))
        n_traj = int(rng.integers(5, 51))
        inst = random_instance(rng, n_slots=n_slots, n_traj=n_traj, n_adv=1, zones=1,
                               density=float(rng.uniform(0.02, 0.3)), unit_probability_rate=0.05)
        acc = InfluenceAccumulator(inst)
        for _ in range(60):
            s = int(rng.integers(n_slots))
            if s in acc and rng.random() < 0.5:
                acc.remove(s)
            elif s not in acc:
                acc.add(s)
            direct = influence(inst, acc.slots)
            worst = max(worst, abs(acc.current_value - direct), abs(direct - dense_influence(inst, acc.slots)))
            checks += 1
    elapsed = time.perf_counter() - start
    assert worst <= 1e-9
    assert elapsed < 10.0
    record_property("detail", f"{checks} checks, max deviation {worst:.2e}, {elapsed:.1f} s")


@pytest.mark.criterion(3)
def test_criterion_3_oracle_dominance(record_property):
    rng = np.random.default_rng(33)
    start = time.perf_counter()
    gaps = defaultdict(list)
    for i in range(100):
        inst = random_instance(rng, n_slots=int(rng.integers(2, 9)), n_traj=int(rng.integers(4, 13)),
                               n_adv=int(rng.integers(1, 4)), zones=2, density=0.3)
        _, best = exact_min_regret(inst)
        for name, fn in ALLOCATORS.items():
            alloc, _ = fn(inst, AllocatorConfig(epsilon=0.1, rng_seed=i))
            value = total_regret(inst, alloc).total
            assert value >= best - 1e-9, (i, name, value, best)
            gaps[name].append(value - best)
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    summary = ", ".join(f"{n}={np.mean(g):.3f}" for n, g in sorted(gaps.items()))
    print(f"mean additive gap to optimum per allocator: {summary}")
    record_property("detail", f"mean gap {summary}; {elapsed:.1f} s")


@pytest.mark.criterion(4)
def test_criterion_4_chain_improvement(record_property):
    rng = np.random.default_rng(44)
    start = time.perf_counter()
    margins = []
    for i in range(100):
        count = int(rng.integers(10, 51))
        delta = float(rng.choice([0.4, 0.8, 1.2]))
        config = GenConfig.with_advertisers(delta, count, slot_count=int(rng.integers(200, 301)),
                                            trajectory_count=1000, mean_row_nnz=6.0, zone_count=3, seed=i)
        inst = generate_instance(config)
        alloc_config = AllocatorConfig(epsilon=0.01, rng_seed=i)
        rsg = total_regret(inst, allocate_rsg(inst, alloc_config)[0]).total
        rae = total_regret(inst, allocate_rae(inst, alloc_config)[0]).total
        assert rae <= rsg + 1e-9, (i, rae, rsg)
        margins.append(rsg - rae)
        bg_alloc, bg_trace = allocate_bg(inst)
        rg_alloc, rg_trace = allocate_rg(inst, AllocatorConfig.full_sample(rng_seed=i))
        assert rg_alloc == bg_alloc and rg_trace == bg_trace
        assert [p.reduction for p in rg_trace.picks] == [p.reduction for p in bg_trace.picks]
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    record_property("detail", f"RAE <= RSG on 100/100 (mean improvement {np.mean(margins):.3f}), "
                              f"full-sample RG == BG on 100/100; {elapsed:.1f} s")


@pytest.mark.criterion(5)
def test_criterion_5_gamma_monotonicity(record_property):
    gammas = (0.0, 0.25, 0.5, 0.75, 1.0)
    unsat = [zonal_regret(12.0, 5.0, 3.0, g)[0] for g in gammas]
    assert all(a > b for a, b in zip(unsat, unsat[1:]))
    excess = [zonal_regret(12.0, 5.0, 7.0, g)[1] for g in gammas]
    assert all(e == excess[0] for e in excess)
    inst = illustrative_instance()
    from billboard_regret.fixture import TABLE_C, table_allocation
    reports = [total_regret(inst.with_gamma(g), table_allocation(inst.with_gamma(g), TABLE_C)) for g in gammas]
    assert all(a.total_unsatisfied > b.total_unsatisfied for a, b in zip(reports, reports[1:]))
    assert len({r.total_excessive for r in reports}) == 1
    record_property("detail", "unsatisfied " + " > ".join(f"{u:.2f}" for u in unsat) + "; excessive constant")


@pytest.mark.criterion(6)
def test_criterion_6_sample_size(record_property):
    assert sample_size(100, 10, 0.01) == 47
    eps = (0.01, 0.05, 0.1, 0.15, 0.2)
    for pool, prefix in ((100, 10), (500, 7), (40, 40), (1000, 3)):
        sizes = [sample_size(pool, prefix, e) for e in eps]
        assert all(a >= b for a, b in zip(sizes, sizes[1:])), (pool, prefix, sizes)
    record_property("detail", "sample_size(100,10,0.01)=47; sizes over eps grid "
                    + str([sample_size(100, 10, e) for e in eps]))


TREND_BASE = GenConfig(slot_count=600, trajectory_count=6000, mean_row_nnz=10.0, zone_count=3)


@pytest.mark.criterion(7)
def test_criterion_7_trend_replication(record_property):
    start = time.perf_counter()
    deltas, lambdas = (0.4, 0.8, 1.2), (0.01, 0.05, 0.2)
    rows = run_grid(trend_specs(deltas=deltas, lambdas=lambdas, repetitions=3, base=TREND_BASE))
    elapsed = time.perf_counter() - start
    means = {(r.experiment_id, r.allocator): r for r in rows if r.is_mean}
    allocators = sorted({r.allocator for r in rows})
    lines = []
    for lam in lambdas:
        for name in allocators:
            cells = [means[(f"delta={d:g},lambda={lam:g}", name)] for d in deltas]
            satisfied = [c.satisfied_advertisers for c in cells]
            share = [c.unsatisfied_regret / c.total_regret if c.total_regret > 0 else 0.0 for c in cells]
            lines.append(f"lambda={lam:g} {name}: satisfied {satisfied} share {[round(s, 3) for s in share]}")
            assert all(a >= b - 1e-9 for a, b in zip(satisfied, satisfied[1:])), lines[-1]
            assert all(a <= b + 1e-9 for a, b in zip(share, share[1:])), lines[-1]
    low = [means[("delta=0.4,lambda=0.01", name)] for name in allocators]
    for row in low:
        assert row.satisfied_advertisers >= 0.9 * row.advertiser_count, (row.allocator, row.satisfied_advertisers)
    print("\n".join(lines))
    assert elapsed < 600.0
    worst = min(r.satisfied_advertisers / r.advertiser_count for r in low)
    record_property("detail", f"directional trends hold; worst satisfied share at delta=40%, lambda=1%: "
                              f"{worst:.1%}; {elapsed:.0f} s")


@pytest.mark.criterion(8)
def test_criterion_8_constraint_fuzzing(record_property):
    rng = np.random.default_rng(88)
    names = sorted(ALLOCATORS)
    start = time.perf_counter()
    for i in range(1000):
        zones = int(rng.integers(1, 4))
        inst = random_instance(rng, n_slots=int(rng.integers(3, 41)), n_traj=int(rng.integers(5, 41)),
                               n_adv=int(rng.integers(1, 6)), zones=zones, density=float(rng.uniform(0.05, 0.4)),
                               zero_demand_rate=0.3)
        name = names[int(rng.integers(len(names)))]
        alloc, _ = ALLOCATORS[name](inst, AllocatorConfig(epsilon=float(rng.uniform(0.01, 0.9)),
                                                          rng_seed=int(rng.integers(2**31))))
        owners = {}
        for a, slots in alloc.assigned.items():
            demand = inst.advertiser(a).zonal_demand
            for s in slots:
                assert s not in owners, (i, name, "disjointness")
                owners[s] = a
                assert demand[inst.slots[s].zone] > 0, (i, name, "zero-demand cell")
        for (a, z), value in alloc.cached_influence.items():
            assert all(inst.slots[s].zone == z for s in alloc.cell_slots(a, z)), (i, name, "wrong zone")
        assert alloc.violations() == [], (i, name)
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    record_property("detail", f"1000 triples, zero violations; {elapsed:.1f} s")


@pytest.mark.criterion(9)
def test_criterion_9_ingestion_arithmetic(tmp_path, record_property):
    start = time.perf_counter()
    rng = np.random.default_rng(9)
    lines = "".join(f"bb{i},{40.5 + rng.random() * 0.4:.6f},{-74.2 + rng.random() * 0.5:.6f}\n" for i in range(716))
    (tmp_path / "billboards.csv").write_text("billboard_id,lat,lon\n" + lines)
    billboards = load_billboards(tmp_path / "billboards.csv")
    grid = expand_slots(billboards, SlotExpansion(0, 24 * 3600, 60))
    assert len(billboards) == 716 and grid.windows == 1440
    assert len(grid) == 716 * 1440 == 1_031_040

    # 100 check-ins scattered around 10 billboards, all in a 10-window horizon
    boards = [BillboardRecord(f"b{i}", 40.7 + 0.002 * i, -74.0) for i in range(10)]
    points = [TrajectoryRecord(f"u{k % 30}", 40.7 + rng.normal(0, 0.004), -74.0 + rng.normal(0, 0.004),
                               float(rng.integers(0, 600))) for k in range(100)]
    small = expand_slots(boards, SlotExpansion(0, 600, 60))
    counts = []
    for eta in (12.5, 25, 50, 100, 200, 400, 800, 1600):
        slots, _ = compute_influence_rows(small, points, eta)
        counts.append(nonzero_slot_count(slots))
    assert all(a <= b for a, b in zip(counts, counts[1:])), counts
    assert counts[-1] > counts[0]
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    record_property("detail", f"716 x 1440 = {len(grid):,} slots; non-zero counts over eta doubling {counts}; "
                              f"{elapsed:.1f} s")
