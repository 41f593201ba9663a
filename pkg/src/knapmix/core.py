"""Knapsack instances, feasibility, brute-force enumeration and exact counting.

Bit conventions used throughout the package: item indices are 1-based, and a
solution on ``n`` items is also addressed by its *code*, the n-bit integer
whose most significant bit is item 1.  Sorting codes numerically therefore
sorts solutions lexicographically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import CapacityError, InstanceError

DEFAULT_ENUM_CAP = 20
_INT63 = 2**63


def _check_int(value, what):
    # bool is an int subclass; a stray true/false in JSON must not pass
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, np.integer)):
        raise InstanceError(f"{what} must be an integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class KnapsackInstance:
    """Weights ``a_1..a_n`` and budget ``b`` of the constraint ``<a, x> <= b``."""

    weights: tuple[int, ...]
    budget: int

    def __post_init__(self):
        weights = tuple(
            _check_int(w, f"weight {i}") for i, w in enumerate(self.weights, start=1)
        )
        if not weights:
            raise InstanceError("an instance needs n >= 1 weights")
        for i, w in enumerate(weights, start=1):
            if w < 0:
                raise InstanceError(f"weight {i} is negative ({w})")
        budget = _check_int(self.budget, "budget")
        if budget < 0:
            raise InstanceError(f"budget is negative ({budget})")
        if sum(weights) + budget >= _INT63:
            raise InstanceError("sum of weights plus budget overflows 63 bits")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "budget", budget)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    def prefix(self, i: int) -> "KnapsackInstance":
        """Instance restricted to items ``1..i`` with the same budget."""
        if not 1 <= i <= self.n:
            raise InstanceError(f"prefix length {i} outside 1..{self.n}")
        return KnapsackInstance(self.weights[:i], self.budget)

    def to_json(self) -> dict:
        return {"weights": list(self.weights), "budget": self.budget}


@dataclass(frozen=True, order=True)
class Solution:
    """A 0/1 vector; ordering matches the numeric order of its code."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise InstanceError(f"solution entries must be 0 or 1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def zeros(cls, n: int) -> "Solution":
        return cls((0,) * n)

    @classmethod
    def from_code(cls, code: int, n: int) -> "Solution":
        return cls(tuple((int(code) >> (n - i)) & 1 for i in range(1, n + 1)))

    @classmethod
    def parse(cls, text: str) -> "Solution":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise InstanceError(f"not a bitstring: {text!r}")
        return cls(tuple(int(c) for c in text))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def code(self) -> int:
        code = 0
        for b in self.bits:
            code = (code << 1) | b
        return code

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]


VectorLike = Union[Solution, Sequence[int]]


def _bits_of(instance: KnapsackInstance, x: VectorLike) -> tuple[int, ...]:
    bits = x.bits if isinstance(x, Solution) else tuple(int(v) for v in x)
    if len(bits) != instance.n:
        raise InstanceError(f"vector has length {len(bits)}, instance has n={instance.n}")
    if any(v not in (0, 1) for v in bits):
        raise InstanceError(f"vector entries must be 0 or 1, got {bits!r}")
    return bits


def weight(instance: KnapsackInstance, x: VectorLike) -> int:
    """Return ``<a, x>`` exactly."""
    bits = _bits_of(instance, x)
    return sum(a for a, v in zip(instance.weights, bits) if v)


def is_feasible(instance: KnapsackInstance, x: VectorLike) -> bool:
    return weight(instance, x) <= instance.budget


def code_weight(instance: KnapsackInstance, code: int) -> int:
    n = instance.n
    return sum(a for i, a in enumerate(instance.weights, start=1) if (code >> (n - i)) & 1)


@dataclass(frozen=True, eq=False)
class SolutionSet:
    """All feasible solutions of an instance, sorted by code."""

    n: int
    codes: np.ndarray

    @property
    def count(self) -> int:
        return int(self.codes.size)

    @property
    def solutions(self) -> list[Solution]:
        return [Solution.from_code(int(c), self.n) for c in self.codes]

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        return iter(self.solutions)

    def __contains__(self, x) -> bool:
        code = x.code if isinstance(x, Solution) else int(x)
        i = int(np.searchsorted(self.codes, code))
        return i < self.count and int(self.codes[i]) == code

    def index_of(self, x) -> int:
        """Position of a solution (or code) in canonical order."""
        code = x.code if isinstance(x, Solution) else int(x)
        i = int(np.searchsorted(self.codes, code))
        if i >= self.count or int(self.codes[i]) != code:
            raise InstanceError(f"{x} is not a feasible solution")
        return i

    def indices_of(self, codes: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.codes, codes)


def code_bits(codes: np.ndarray, n: int) -> np.ndarray:
    """Unpack codes into an (len(codes), n) uint8 matrix, column j = item j+1."""
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((np.asarray(codes, dtype=np.int64)[:, None] >> shifts) & 1).astype(np.uint8)


def enumerate_solutions(
    instance: KnapsackInstance, cap: int = DEFAULT_ENUM_CAP
) -> SolutionSet:
    """Check all ``2**n`` vectors and keep the feasible ones."""
    n = instance.n
    if n > cap:
        raise CapacityError("enumeration over n items", n, cap)
    codes = np.arange(2**n, dtype=np.int64)
    totals = code_bits(codes, n).astype(np.int64) @ np.asarray(instance.weights, dtype=np.int64)
    return SolutionSet(n, codes[totals <= instance.budget])


def exact_count(instance: KnapsackInstance) -> int:
    """Count feasible solutions with the item-by-item split ``N = N' + N''``.

    ``N(i, r) = N(i+1, r) + N(i+1, r - a_i)`` memoized on ``(i, r)``, with
    ``N(n+1, r) = 1`` for ``r >= 0``.  Residual budgets covering every remaining
    item short-circuit to ``2**(n-i+1)``.  The recursion is evaluated level by
    level so deep instances do not hit the interpreter's recursion limit.
    """
    a = instance.weights
    n = instance.n
    tail = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        tail[i] = tail[i + 1] + a[i]

    # forward pass: residual budgets reachable at each level that still need work
    levels: list[set[int]] = [{instance.budget}]
    for i in range(n):
        nxt = set()
        for r in levels[i]:
            if r >= tail[i]:
                continue
            nxt.add(r)
            if r - a[i] >= 0:
                nxt.add(r - a[i])
        levels.append(nxt)

    def lookup(memo, i, r):
        if r < 0:
            return 0
        if r >= tail[i]:
            return 2 ** (n - i)
        return memo[r]

    memo: dict[int, int] = {}
    for i in range(n - 1, -1, -1):
        memo = {
            r: lookup(memo, i + 1, r) + lookup(memo, i + 1, r - a[i])
            for r in levels[i]
            if r < tail[i]
        }
    return lookup(memo, 0, instance.budget)


def random_instance(n: int, seed: int, max_weight: int = 50) -> KnapsackInstance:
    """Weights uniform on ``[1, max_weight]``, budget uniform on ``[0, sum]``."""
    if n < 1 or max_weight < 1:
        raise InstanceError("random instances need n >= 1 and max_weight >= 1")
    rng = np.random.default_rng(seed)
    weights = rng.integers(1, max_weight, size=n, endpoint=True)
    budget = rng.integers(0, int(weights.sum()), endpoint=True)
    return KnapsackInstance(tuple(int(w) for w in weights), int(budget))


def parse_instance(data: Union[dict, str]) -> KnapsackInstance:
    """Validate a ``{"weights": [...], "budget": b}`` mapping or JSON text."""
    import json

    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"instance is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    for key in ("weights", "budget"):
        if key not in data:
            raise InstanceError(f"instance is missing the {key!r} field")
    weights = data["weights"]
    if not isinstance(weights, list):
        raise InstanceError("'weights' must be an array")
    return KnapsackInstance(tuple(weights), data["budget"])


def as_solution(instance: KnapsackInstance, x: Union[VectorLike, str, None]) -> Solution:
    """Coerce a bitstring / sequence / Solution and check it is feasible."""
    if x is None:
        return Solution.zeros(instance.n)
    sol = Solution.parse(x) if isinstance(x, str) else Solution(_bits_of(instance, x))
    _bits_of(instance, sol)
    if not is_feasible(instance, sol):
        raise InstanceError(f"{sol} is not feasible (weight {weight(instance, sol)} > {instance.budget})")
    return sol


def iter_instances(seed: int, count: int, n_values: Iterable[int], max_weight: int = 50):
    """Reproducible stream of random instances with ``n`` drawn from ``n_values``."""
    rng = np.random.default_rng(seed)
    n_values = list(n_values)
    for _ in range(count):
        n = int(rng.choice(n_values))
        yield random_instance(n, int(rng.integers(0, 2**63)), max_weight)
