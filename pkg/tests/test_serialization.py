import json

import pytest

from billboard_regret.gen import GenConfig, generate_instance
from billboard_regret.model import InstanceError
from billboard_regret.serialization import (SCHEMA_VERSION, instance_from_dict, instance_to_dict, load_instance,
                                            save_instance)


def test_round_trip(tmp_path, fixture_instance):
    for inst in (fixture_instance, generate_instance(GenConfig(seed=2))):
        path = tmp_path / "inst.json"
        save_instance(inst, path)
        back = load_instance(path)
        assert back.slots == inst.slots
        assert back.advertisers == inst.advertisers
        assert (back.zones, back.trajectory_count, back.penalty_ratio) == (inst.zones, inst.trajectory_count,
                                                                           inst.penalty_ratio)


def test_file_is_stable(tmp_path, fixture_instance):
    save_instance(fixture_instance, tmp_path / "a.json")
    save_instance(load_instance(tmp_path / "a.json"), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert json.loads((tmp_path / "a.json").read_text())["schema_version"] == SCHEMA_VERSION


def test_version_and_shape_errors(fixture_instance):
    data = instance_to_dict(fixture_instance)
    with pytest.raises(ValueError, match="schema_version"):
        instance_from_dict({**data, "schema_version": 99})
    with pytest.raises(ValueError, match="malformed"):
        instance_from_dict({k: v for k, v in data.items() if k != "slots"})


def test_invalid_content_is_reported(fixture_instance):
    data = instance_to_dict(fixture_instance)
    data["gamma"] = 2.0
    with pytest.raises(InstanceError, match="penalty_ratio"):
        instance_from_dict(data)
    assert instance_from_dict(data, validate=False).penalty_ratio == 2.0
