"""Uniform sampling, canonical-path audits and counting for 0-1 knapsack solutions."""

from .core import (
    KnapsackInstance,
    Solution,
    SolutionSet,
    enumerate_solutions,
    exact_count,
    is_feasible,
    parse_instance,
    random_instance,
    weight,
)
from .errors import CapacityError, InstanceError, InvariantError, KnapmixError, SamplerFailure

__all__ = [
    "KnapsackInstance",
    "Solution",
    "SolutionSet",
    "enumerate_solutions",
    "exact_count",
    "is_feasible",
    "parse_instance",
    "random_instance",
    "weight",
    "CapacityError",
    "InstanceError",
    "InvariantError",
    "KnapmixError",
    "SamplerFailure",
]
