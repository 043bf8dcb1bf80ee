"""Estimator-style wrappers around the allocators.

``fit`` takes an :class:`Instance` (or anything :func:`check_instance`
accepts) in place of a feature matrix; ``labels_`` gives the owning
advertiser per slot with -1 for unallocated slots.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from .allocators import AllocatorConfig, get_allocator
from .regret import total_regret
from .validation import check_epsilon, check_instance, check_is_fitted


class SlotAllocator(BaseEstimator):
    """Base estimator; subclasses set ``_allocator``.

    Parameters
    ----------
    epsilon : float, default=0.01
        Sampling error bound for the sampled allocators.
    random_state : int, default=0
        Seed for every random choice.
    max_rsg_rounds : int or None, default=None
        Release round cap; ``None`` means ten rounds per advertiser.
    max_rae_passes : int, default=50
        Exchange pass cap.

    Attributes
    ----------
    allocation_ : Allocation
    trace_ : AllocatorTrace
    report_ : RegretReport
    labels_ : list of int
    """

    _allocator = "bg"

    def __init__(self, epsilon=0.01, random_state=0, max_rsg_rounds=None, max_rae_passes=50):
        self.epsilon = epsilon
        self.random_state = random_state
        self.max_rsg_rounds = max_rsg_rounds
        self.max_rae_passes = max_rae_passes

    def _config(self) -> AllocatorConfig:
        return AllocatorConfig(
            epsilon=check_epsilon(self.epsilon),
            rng_seed=int(self.random_state),
            max_rsg_rounds=self.max_rsg_rounds,
            max_rae_passes=self.max_rae_passes,
        )

    def fit(self, X, y=None):
        instance = check_instance(X)
        allocation, trace = get_allocator(self._allocator)(instance, self._config())
        self.instance_ = instance
        self.allocation_ = allocation
        self.trace_ = trace
        self.report_ = total_regret(instance, allocation)
        self.labels_ = allocation.labels()
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def score(self, X=None, y=None) -> float:
        """Negative total regret, so higher is better."""
        check_is_fitted(self)
        if X is None:
            return -self.report_.total
        instance = check_instance(X)
        if instance is not self.instance_:
            raise ValueError("score() needs the instance the estimator was fitted on")
        return -self.report_.total


class BudgetGreedy(SlotAllocator):
    _allocator = "bg"


class RandomizedGreedy(SlotAllocator):
    _allocator = "rg"


class SynchronousGreedy(SlotAllocator):
    _allocator = "rsg"


class ExchangeAllocator(SlotAllocator):
    _allocator = "rae"


class RandomAllocator(SlotAllocator):
    _allocator = "random"


class TopKAllocator(SlotAllocator):
    _allocator = "topk"


ESTIMATORS = {cls._allocator: cls for cls in (BudgetGreedy, RandomizedGreedy, SynchronousGreedy,
                                               ExchangeAllocator, RandomAllocator, TopKAllocator)}
