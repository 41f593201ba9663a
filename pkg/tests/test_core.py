import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knapmix.core import (
    KnapsackInstance,
    Solution,
    as_solution,
    enumerate_solutions,
    exact_count,
    is_feasible,
    parse_instance,
    random_instance,
    weight,
)
from knapmix.errors import CapacityError, InstanceError

from conftest import brute_force

instances = st.builds(
    KnapsackInstance,
    st.lists(st.integers(0, 30), min_size=1, max_size=12).map(tuple),
    st.integers(0, 120),
)


@pytest.mark.parametrize(
    "x, expected", [((0, 0, 0, 0), 0), ((1, 1, 0, 1), 9), ((1, 1, 1, 1), 11)]
)
def test_weight(small_instance, x, expected):
    assert weight(small_instance, x) == expected


def test_feasibility(small_instance):
    assert is_feasible(small_instance, (1, 1, 0, 1))
    assert not is_feasible(small_instance, (1, 1, 1, 0))
    assert is_feasible(small_instance, Solution.zeros(4))


def test_dimension_mismatch(small_instance):
    with pytest.raises(InstanceError):
        weight(small_instance, (1, 0))
    with pytest.raises(InstanceError):
        is_feasible(small_instance, (1, 0, 0, 0, 0))


def test_enumerate_fig1(small_instance):
    sols = enumerate_solutions(small_instance)
    assert sols.count == 14
    assert [str(s) for s in sols] == [f"{c:04b}" for c in range(14)]
    assert (1, 1, 1, 0) not in [s.bits for s in sols]
    assert Solution.parse("1111") not in sols


def test_enumerate_small_cases():
    sols = enumerate_solutions(KnapsackInstance((1,), 0))
    assert [s.bits for s in sols] == [(0,)]
    assert enumerate_solutions(KnapsackInstance((3, 4, 5), 12)).count == 8


def test_enumerate_cap():
    with pytest.raises(CapacityError, match="cap of 5"):
        enumerate_solutions(KnapsackInstance((1,) * 6, 3), cap=5)


@pytest.mark.parametrize(
    "weights, budget, expected", [((5, 3, 2, 1), 9, 14), ((1,), 1, 2), ((7, 7), 6, 1)]
)
def test_exact_count_examples(weights, budget, expected):
    inst = KnapsackInstance(weights, budget)
    assert exact_count(inst) == expected == len(brute_force(inst))


def test_exact_count_deep_instance():
    # 2000 unit items: no recursion-limit trouble, answer is a binomial prefix sum
    from math import comb

    inst = KnapsackInstance((1,) * 2000, 3)
    assert exact_count(inst) == sum(comb(2000, k) for k in range(4))


@settings(max_examples=200, deadline=None)
@given(instances)
def test_exact_count_matches_brute_force(inst):
    truth = brute_force(inst)
    assert exact_count(inst) == len(truth)
    assert enumerate_solutions(inst).count == len(truth)
    assert [s.bits for s in enumerate_solutions(inst)] == truth


@settings(max_examples=200, deadline=None)
@given(instances)
def test_first_item_split(inst):
    if inst.n == 1:
        rest_free, rest_taken = 1, int(inst.budget >= inst.weights[0])
    else:
        tail = inst.weights[1:]
        rest_free = exact_count(KnapsackInstance(tail, inst.budget))
        rem = inst.budget - inst.weights[0]
        rest_taken = exact_count(KnapsackInstance(tail, rem)) if rem >= 0 else 0
    assert exact_count(inst) == rest_free + rest_taken


@settings(max_examples=100, deadline=None)
@given(instances, st.data())
def test_feasibility_is_downward_closed(inst, data):
    x = data.draw(st.tuples(*[st.integers(0, 1)] * inst.n))
    y = tuple(v & data.draw(st.integers(0, 1)) for v in x)
    if is_feasible(inst, x):
        assert is_feasible(inst, y)


def test_instance_validation():
    with pytest.raises(InstanceError, match="n >= 1"):
        KnapsackInstance((), 0)
    with pytest.raises(InstanceError, match="weight 2"):
        KnapsackInstance((1, -2), 3)
    with pytest.raises(InstanceError, match="budget"):
        KnapsackInstance((1,), -1)
    with pytest.raises(InstanceError, match="63 bits"):
        KnapsackInstance((2**62, 2**62), 0)
    with pytest.raises(InstanceError):
        KnapsackInstance((1.5,), 2)
    with pytest.raises(InstanceError):
        KnapsackInstance((True,), 2)
    assert KnapsackInstance((0, 0), 0).n == 2


def test_parse_instance():
    inst = parse_instance('{"weights":[5,3,2,1],"budget":9}')
    assert inst == KnapsackInstance((5, 3, 2, 1), 9)
    with pytest.raises(InstanceError, match="n >= 1"):
        parse_instance({"weights": [], "budget": 0})
    with pytest.raises(InstanceError, match="weight 2"):
        parse_instance({"weights": [1, -2], "budget": 3})
    with pytest.raises(InstanceError, match="budget"):
        parse_instance({"weights": [1]})
    with pytest.raises(InstanceError, match="JSON"):
        parse_instance("{not json")


def test_solution_codes():
    s = Solution.parse("1011")
    assert s.code == 11
    assert Solution.from_code(11, 4) == s
    assert str(s) == "1011"
    assert Solution.parse("0111") < Solution.parse("1000")
    with pytest.raises(InstanceError):
        Solution.parse("10a1")


def test_as_solution_rejects_infeasible(small_instance):
    with pytest.raises(InstanceError, match="not feasible"):
        as_solution(small_instance, "1110")
    assert as_solution(small_instance, None) == Solution.zeros(4)


def test_random_instance_is_seeded():
    a = random_instance(8, 3)
    assert a == random_instance(8, 3)
    assert all(1 <= w <= 50 for w in a.weights)
    assert 0 <= a.budget <= sum(a.weights)
