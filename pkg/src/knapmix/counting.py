"""Approximate counting by self-reducibility.

Let ``Omega_i`` be the solutions of the prefix instance on items ``1..i``.
Then ``|Omega_n| = prod_i 1 / r_i`` with ``r_i = |Omega_{i-1}| / |Omega_i|``,
the probability that a uniform element of ``Omega_i`` leaves item ``i`` out.
Dropping item ``i`` maps the solutions that contain it injectively into
those that do not, so every ``r_i`` lies in ``[1/2, 1]`` and a modest number
of uniform samples per level pins it down.

Constants: ``m = ceil(74 n / eps**2)`` samples per level, each the end state
of a chain run for ``theorem_bound(i, eps / (8n))`` steps, and the median of
``ceil(8 ln(2 / delta))`` independent repeats.  These are conventional
Chebyshev/Chernoff choices, not tuned values.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import rng
from .analysis import theorem_bound
from .chain import ChainConfig, sample_bits
from .core import DEFAULT_ENUM_CAP, KnapsackInstance, code_bits, enumerate_solutions, exact_count
from .errors import CapacityError, InstanceError, SamplerFailure

# sampler(instance, steps, count, seed) -> (count, n) 0/1 matrix of draws
Sampler = Callable[[KnapsackInstance, int, int, int], np.ndarray]


def chain_sampler(instance: KnapsackInstance, steps: int, count: int, seed: int) -> np.ndarray:
    return sample_bits(ChainConfig(instance, seed), steps, count)


def exact_sampler(instance: KnapsackInstance, steps: int, count: int, seed: int) -> np.ndarray:
    """Uniform draws straight from the enumerated solution set; ignores ``steps``."""
    sols = enumerate_solutions(instance)
    gen = np.random.default_rng(seed)
    picks = sols.codes[gen.integers(0, sols.count, size=count)]
    return code_bits(picks, instance.n)


@dataclass
class CountEstimate:
    estimate: float
    epsilon: float
    delta: float
    per_level_ratios: list
    samples_per_level: int
    steps_per_sample: list
    repeats: int
    repeat_estimates: list

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "per_level_ratios": self.per_level_ratios,
            "samples_per_level": self.samples_per_level,
            "steps_per_sample": self.steps_per_sample,
            "repeats": self.repeats,
        }


def samples_per_level(n: int, epsilon: float) -> int:
    return math.ceil(74 * n / epsilon**2)


def repeat_count(delta: float) -> int:
    return math.ceil(8 * math.log(2 / delta))


def approx_count(
    instance: KnapsackInstance,
    epsilon: float,
    delta: float,
    seed: int,
    sampler: Sampler = chain_sampler,
) -> CountEstimate:
    """(1 +- epsilon)-estimate of the number of solutions, with probability 1 - delta.

    Level ``i`` draws ``m * repeats`` samples in one batch; repeat ``r`` uses
    samples ``r*m .. (r+1)*m - 1``.  Level seeds are ``derive_seed(seed, i)``.
    The reported ratios are those of the (lower) median repeat.
    """
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise InstanceError("epsilon and delta must lie in (0, 1)")
    n = instance.n
    m = samples_per_level(n, epsilon)
    R = repeat_count(delta)
    steps = [theorem_bound(i, epsilon / (8 * n)) for i in range(1, n + 1)]
    ratios = np.empty((R, n))
    for i in range(n, 0, -1):
        draws = sampler(instance.prefix(i), steps[i - 1], m * R, rng.derive_seed(seed, i))
        out = draws[:, i - 1].reshape(R, m)
        ratios[:, i - 1] = (m - out.sum(axis=1)) / m
    if np.any(ratios == 0):
        level = int(np.flatnonzero((ratios == 0).any(axis=0))[0]) + 1
        raise SamplerFailure(
            f"no sample of level {level} left item {level} out although the true "
            f"ratio is >= 1/2; raise the samples per level (m={m}) or the steps"
        )
    estimates = np.prod(1.0 / ratios, axis=1)
    med = statistics.median_low(estimates.tolist())
    pick = int(np.flatnonzero(estimates == med)[0])
    return CountEstimate(
        estimate=float(med),
        epsilon=epsilon,
        delta=delta,
        per_level_ratios=ratios[pick].tolist(),
        samples_per_level=m,
        steps_per_sample=steps,
        repeats=R,
        repeat_estimates=estimates.tolist(),
    )


def ratio_truth(
    instance: KnapsackInstance, i: int, enum_cap: int = DEFAULT_ENUM_CAP
) -> Fraction:
    """Exact ``|Omega_{i-1}| / |Omega_i|`` for the prefix instances."""
    if not 1 <= i <= instance.n:
        raise InstanceError(f"level {i} outside 1..{instance.n}")
    if i > enum_cap:
        raise CapacityError("prefix instance over n items", i, enum_cap)
    below = 1 if i == 1 else exact_count(instance.prefix(i - 1))
    return Fraction(below, exact_count(instance.prefix(i)))
