import itertools
from fractions import Fraction

import numpy as np
import pytest

from knapmix.core import KnapsackInstance, exact_count, random_instance
from knapmix.counting import (
    approx_count,
    exact_sampler,
    ratio_truth,
    repeat_count,
    samples_per_level,
)
from knapmix.errors import InstanceError, SamplerFailure

from conftest import brute_force


def test_ratio_truth_fig1(small_instance):
    # prefix (5,3,2) <= 9 keeps 7 of 8 vectors (5+3+2 = 10 is out)
    assert len(brute_force(KnapsackInstance((5, 3, 2), 9))) == 7
    assert ratio_truth(small_instance, 4) == Fraction(7, 14)
    assert ratio_truth(small_instance, 1) == Fraction(1, 2)


def test_ratio_truth_edge_cases():
    inst = KnapsackInstance((2, 50, 3), 10)
    assert ratio_truth(inst, 2) == 1
    free = KnapsackInstance((1, 2, 3), 6)
    assert all(ratio_truth(free, i) == Fraction(1, 2) for i in (1, 2, 3))
    with pytest.raises(InstanceError):
        ratio_truth(free, 0)


@pytest.mark.parametrize("seed", range(10))
def test_ratios_lie_between_half_and_one(seed):
    inst = random_instance(7, seed)
    rs = [ratio_truth(inst, i) for i in range(1, 8)]
    assert all(Fraction(1, 2) <= r <= 1 for r in rs)
    assert np.prod([1 / r for r in rs]) == exact_count(inst)


def test_telescoping_is_order_free():
    inst = KnapsackInstance((6, 1, 4, 9, 3), 11)
    N = exact_count(inst)
    for perm in itertools.permutations(range(5)):
        shuffled = KnapsackInstance(tuple(inst.weights[p] for p in perm), inst.budget)
        assert np.prod([1 / ratio_truth(shuffled, i) for i in range(1, 6)]) == N


def test_constants():
    assert samples_per_level(4, 0.2) == 7400
    assert repeat_count(0.1) == 24


def test_single_solution_instance_counts_exactly():
    est = approx_count(KnapsackInstance((1,), 0), 0.2, 0.1, seed=1)
    assert est.estimate == 1.0
    assert est.per_level_ratios == [1.0]


def test_exact_sampler_is_uniform(small_instance):
    bits = exact_sampler(small_instance, 0, 14000, seed=3)
    codes = bits @ (1 << np.arange(3, -1, -1))
    counts = np.bincount(codes, minlength=16)
    assert counts[14] == counts[15] == 0
    assert np.all(np.abs(counts[:14] - 1000) < 150)


def test_exact_sampler_estimator_meets_tolerance():
    for inst in [KnapsackInstance((1,) * 6, 6), KnapsackInstance((6, 1, 4, 9, 3), 11)]:
        N = exact_count(inst)
        est = approx_count(inst, 0.2, 0.1, seed=5, sampler=exact_sampler)
        assert abs(est.estimate - N) <= 0.2 * N
        assert len(est.repeat_estimates) == 24


def test_permuted_instances_with_exact_sampler():
    inst = KnapsackInstance((6, 1, 4, 9, 3), 11)
    N = exact_count(inst)
    for k, perm in enumerate([(0, 1, 2, 3, 4), (4, 3, 2, 1, 0), (2, 0, 4, 1, 3)]):
        shuffled = KnapsackInstance(tuple(inst.weights[p] for p in perm), inst.budget)
        est = approx_count(shuffled, 0.2, 0.1, seed=k, sampler=exact_sampler)
        assert abs(est.estimate - N) <= 0.2 * N


def test_chain_estimator_fig1(small_instance):
    est = approx_count(small_instance, 0.2, 0.1, seed=1)
    assert 11.2 <= est.estimate <= 16.8
    assert est.samples_per_level == 7400
    assert est.steps_per_sample == [8, 63, 212, 503]
    assert est.estimate == approx_count(small_instance, 0.2, 0.1, seed=1).estimate


def test_sampler_failure_is_reported(small_instance):
    def broken(instance, steps, count, seed):
        bits = np.zeros((count, instance.n), dtype=np.uint8)
        if instance.n == 4:
            bits[:, 3] = 1
        return bits

    with pytest.raises(SamplerFailure, match="level 4"):
        approx_count(small_instance, 0.5, 0.5, seed=0, sampler=broken)


def test_argument_checks(small_instance):
    with pytest.raises(InstanceError):
        approx_count(small_instance, 0, 0.1, seed=0)
    with pytest.raises(InstanceError):
        approx_count(small_instance, 0.1, 1.0, seed=0)
