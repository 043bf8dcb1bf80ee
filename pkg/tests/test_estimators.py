import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from billboard_regret.estimators import ESTIMATORS, BudgetGreedy, ExchangeAllocator, RandomizedGreedy
from billboard_regret.fixture import WALKTHROUGH_CONFIG
from billboard_regret.model import InstanceError
from billboard_regret.serialization import instance_to_dict, save_instance
from billboard_regret.validation import check_epsilon, check_instance


def test_params_round_trip():
    est = RandomizedGreedy(epsilon=0.2, random_state=4)
    assert est.get_params() == {"epsilon": 0.2, "random_state": 4, "max_rsg_rounds": None, "max_rae_passes": 50}
    est.set_params(epsilon=0.3)
    assert clone(est).epsilon == 0.3


def test_fit_sets_attributes(fixture_instance):
    est = ExchangeAllocator(epsilon=WALKTHROUGH_CONFIG.epsilon, random_state=WALKTHROUGH_CONFIG.rng_seed)
    assert est.fit(fixture_instance) is est
    assert est.trace_.released == [4]
    assert len(est.labels_) == 13 and est.labels_[12] == -1
    assert est.report_.total == pytest.approx(-est.score())
    assert est.score(fixture_instance) == est.score()


def test_fit_predict_gives_owner_labels(fixture_instance):
    labels = BudgetGreedy().fit_predict(fixture_instance)
    assert labels[12] == 4 and labels[0] == 1


def test_every_allocator_has_an_estimator(fixture_instance):
    for name, cls in ESTIMATORS.items():
        est = cls(random_state=1).fit(fixture_instance)
        assert est.allocation_.violations() == [], name


def test_not_fitted_and_bad_params(fixture_instance):
    with pytest.raises(NotFittedError):
        BudgetGreedy().score()
    with pytest.raises(ValueError, match="epsilon"):
        RandomizedGreedy(epsilon=2).fit(fixture_instance)
    est = BudgetGreedy().fit(fixture_instance)
    with pytest.raises(ValueError, match="fitted on"):
        est.score(fixture_instance.with_gamma(0.3))


def test_check_instance_inputs(tmp_path, fixture_instance):
    assert check_instance(fixture_instance) is fixture_instance
    assert check_instance(instance_to_dict(fixture_instance)).slots == fixture_instance.slots
    save_instance(fixture_instance, tmp_path / "i.json")
    assert check_instance(str(tmp_path / "i.json")).advertisers == fixture_instance.advertisers
    with pytest.raises(TypeError):
        check_instance([1, 2])
    with pytest.raises(InstanceError):
        check_instance(fixture_instance.with_gamma(3.0))
    assert check_epsilon("0.5") == 0.5
