"""Regret-minimizing allocation of billboard slots to advertisers."""

from .allocators import (ALLOCATORS, AllocatorConfig, AllocatorTrace, allocate_bg, allocate_rae, allocate_random,
                         allocate_rg, allocate_rsg, allocate_topk, budget_effectiveness, get_allocator,
                         greedy_prefix_size, sample_size, sort_by_budget_effectiveness)
from .estimators import (BudgetGreedy, ExchangeAllocator, RandomAllocator, RandomizedGreedy, SlotAllocator,
                         SynchronousGreedy, TopKAllocator)
from .gen import GenConfig, generate_instance
from .influence import InfluenceAccumulator, influence
from .model import Advertiser, Allocation, Instance, InstanceError, Slot, validate_instance
from .oracle import exact_min_regret, oracle_gap
from .regret import RegretReport, is_feasible, is_satisfied, total_regret, zonal_regret
from .serialization import load_instance, save_instance
from .validation import check_instance

__all__ = [
    "ALLOCATORS", "Advertiser", "Allocation", "AllocatorConfig", "AllocatorTrace", "BudgetGreedy",
    "ExchangeAllocator", "GenConfig", "InfluenceAccumulator", "Instance", "InstanceError", "RandomAllocator",
    "RandomizedGreedy", "RegretReport", "Slot", "SlotAllocator", "SynchronousGreedy", "TopKAllocator",
    "allocate_bg", "allocate_rae", "allocate_random", "allocate_rg", "allocate_rsg", "allocate_topk",
    "budget_effectiveness", "check_instance", "exact_min_regret", "generate_instance", "get_allocator",
    "greedy_prefix_size", "influence", "is_feasible", "is_satisfied", "load_instance", "oracle_gap",
    "sample_size", "save_instance", "sort_by_budget_effectiveness", "total_regret", "validate_instance",
    "zonal_regret",
]
