from billboard_regret.allocators import AllocatorConfig
from billboard_regret.fixture import (SLOT_INFLUENCE, ZONE_MEMBERS, fixture_walkthrough, illustrative_instance)
from billboard_regret.influence import influence


def test_instance_reproduces_tabulated_influence():
    inst = illustrative_instance()
    assert [s.individual_influence for s in inst.slots] == list(SLOT_INFLUENCE)
    assert [inst.slots[n - 1].zone for n in ZONE_MEMBERS[1]] == [1] * 5
    # disjoint private trajectories make influence additive
    assert influence(inst, range(13)) == sum(SLOT_INFLUENCE)
    assert inst.trajectory_count == 44


def test_walkthrough_matches():
    result = fixture_walkthrough()
    assert result.ok, result.diff
    assert result.unsatisfied == {"initial": {3, 5}, "rsg": {3}, "rae": set()}
    assert "stage outcomes match" in result.text
    assert "released: a5" in result.text


def test_walkthrough_reports_divergence():
    result = fixture_walkthrough(AllocatorConfig.full_sample())
    assert not result.ok
    assert result.diff[0].startswith("initial: expected unsatisfied [3, 5]")
    assert "DIVERGE" in result.text
