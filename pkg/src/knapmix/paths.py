"""Canonical paths between knapsack solutions and the audits built on them.

The canonical path from ``v`` to ``w`` scans items left to right and fixes
every mismatch once.  When switching an item on would break the budget, it
first switches off the nearest later items that ``v`` carries and ``w`` does
not, in increasing index order, stopping as soon as the pending item fits.
Those pre-flipped items are then already matched and the scan skips them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import (
    DEFAULT_ENUM_CAP,
    KnapsackInstance,
    Solution,
    SolutionSet,
    as_solution,
    code_weight,
    enumerate_solutions,
)
from .errors import CapacityError, InstanceError, InvariantError

POSITIVE = 1
NEGATIVE = -1
DEFAULT_PAIR_CAP = 2048


@dataclass(frozen=True)
class Flip:
    index: int
    direction: int

    def __str__(self) -> str:
        return f"{'+' if self.direction == POSITIVE else '-'}{self.index}"


@dataclass(frozen=True)
class ZoneDecomposition:
    """Matched zone ``1..matched_end``, heap zone up to ``heap_end``, rest untouched."""

    matched_end: int
    heap_end: int
    n: int

    @property
    def matched(self) -> range:
        return range(1, self.matched_end + 1)

    @property
    def heap(self) -> range:
        return range(self.matched_end + 1, self.heap_end + 1)

    @property
    def untouched(self) -> range:
        return range(self.heap_end + 1, self.n + 1)


@dataclass(frozen=True)
class CanonicalPath:
    source: Solution
    target: Solution
    flips: tuple[Flip, ...]
    states: tuple[Solution, ...]

    @property
    def length(self) -> int:
        return len(self.flips)

    def to_json(self) -> dict:
        return {
            "from": str(self.source),
            "to": str(self.target),
            "flips": [str(f) for f in self.flips],
            "states": [str(s) for s in self.states],
        }


def _route(weights, budget: int, v: int, w: int) -> list[int]:
    """Flip indices (1-based) of the canonical path between codes ``v`` and ``w``."""
    n = len(weights)
    x = v
    load = sum(a for i, a in enumerate(weights, 1) if (v >> (n - i)) & 1)
    if load > budget:
        raise InstanceError("source solution is infeasible")
    out = []
    for i in range(1, n + 1):
        mi = 1 << (n - i)
        if not (x ^ w) & mi:
            continue
        if x & mi:
            x ^= mi
            load -= weights[i - 1]
            out.append(i)
            continue
        j = i
        while load + weights[i - 1] > budget:
            j += 1
            while j <= n and not (x & (1 << (n - j)) and not w & (1 << (n - j))):
                j += 1
            if j > n:
                raise InvariantError(
                    f"canonical path stalled at item {i} between {v:b} and {w:b}"
                )
            x ^= 1 << (n - j)
            load -= weights[j - 1]
            out.append(j)
        x ^= mi
        load += weights[i - 1]
        out.append(i)
    if x != w:
        raise InvariantError("canonical path did not reach its target")
    return out


def canonical_path(instance: KnapsackInstance, v, w) -> CanonicalPath:
    """Canonical path from ``v`` to ``w``; both must be feasible."""
    v = as_solution(instance, v)
    w = as_solution(instance, w)
    n = instance.n
    x = v.code
    flips, states = [], [v]
    for i in _route(instance.weights, instance.budget, v.code, w.code):
        mi = 1 << (n - i)
        flips.append(Flip(i, NEGATIVE if x & mi else POSITIVE))
        x ^= mi
        states.append(Solution.from_code(x, n))
    return CanonicalPath(v, w, tuple(flips), tuple(states))


def _prefix_agreement(x: int, w: int, n: int) -> int:
    return n - (x ^ w).bit_length()


def zones_at(path: CanonicalPath, j: int) -> ZoneDecomposition:
    """Zones after the first ``j`` flips, read off the flip log.

    ``matched_end`` is the longest prefix on which the current state agrees
    with the target; ``heap_end`` is the highest index flipped so far, raised
    to ``matched_end`` when the matched prefix already reaches past it.
    """
    if not 0 <= j <= path.length:
        raise InstanceError(f"step {j} outside 0..{path.length}")
    n = path.target.n
    k = _prefix_agreement(path.states[j].code, path.target.code, n)
    l_flipped = max((f.index for f in path.flips[:j]), default=0)
    return ZoneDecomposition(k, max(k, l_flipped), n)


# ---------------------------------------------------------------------------
# all-pairs routing


@dataclass
class PathAudit:
    """Structural properties checked over every routed ordered pair."""

    pairs: int = 0
    max_length: int = 0
    infeasible_steps: int = 0
    wrong_endpoints: int = 0
    repeated_indices: int = 0
    matched_regressions: int = 0
    over_length: int = 0

    @property
    def passed(self) -> bool:
        return not (
            self.infeasible_steps
            or self.wrong_endpoints
            or self.repeated_indices
            or self.matched_regressions
            or self.over_length
        )

    def merge(self, other: "PathAudit") -> "PathAudit":
        return PathAudit(
            self.pairs + other.pairs,
            max(self.max_length, other.max_length),
            self.infeasible_steps + other.infeasible_steps,
            self.wrong_endpoints + other.wrong_endpoints,
            self.repeated_indices + other.repeated_indices,
            self.matched_regressions + other.matched_regressions,
            self.over_length + other.over_length,
        )


def _bit_length(x: np.ndarray) -> np.ndarray:
    # exact for non-negative integers below 2**53
    return np.frexp(x.astype(np.float64))[1].astype(np.int64)


def _route_batch(instance: KnapsackInstance, sols: SolutionSet, V: np.ndarray, W: np.ndarray):
    """Route every pair ``(V[p], W[p])`` at once.

    Returns per-edge loads indexed ``state_index * n + (item - 1)`` and the
    audit of the routed paths.
    """
    n = instance.n
    a = instance.weights
    b = instance.budget
    N = sols.count
    loads = np.zeros(N * n, dtype=np.int64)
    audit = PathAudit(pairs=int(V.size))
    if V.size == 0:
        return loads, audit
    wvec = np.asarray(a, dtype=np.int64)
    x = V.copy()
    load = np.zeros(V.size, dtype=np.int64)
    for i in range(1, n + 1):
        load += ((x >> (n - i)) & 1) * wvec[i - 1]
    touched = np.zeros_like(x)
    length = np.zeros(V.size, dtype=np.int64)
    matched = n - _bit_length(x ^ W)

    def flip(mask: np.ndarray, i: int):
        mi = 1 << (n - i)
        pre = x[mask]
        idx = sols.indices_of(pre)
        np.add.at(loads, idx * n + (i - 1), 1)
        audit.repeated_indices += int(np.count_nonzero(touched[mask] & mi))
        touched[mask] |= mi
        on = (pre & mi) == 0
        load[mask] += np.where(on, wvec[i - 1], -wvec[i - 1])
        x[mask] = pre ^ mi
        length[mask] += 1
        audit.infeasible_steps += int(np.count_nonzero(load[mask] > b))
        k = n - _bit_length(x[mask] ^ W[mask])
        audit.matched_regressions += int(np.count_nonzero(k < matched[mask]))
        matched[mask] = k

    for i in range(1, n + 1):
        mi = 1 << (n - i)
        need = ((x ^ W) & mi) != 0
        down = need & ((x & mi) != 0)
        if down.any():
            flip(down, i)
        up = need & ~down
        if not up.any():
            continue
        blocked = up & (load + a[i - 1] > b)
        j = i
        while blocked.any():
            j += 1
            if j > n:
                raise InvariantError(f"canonical path stalled at item {i}")
            mj = 1 << (n - j)
            cand = blocked & ((x & mj) != 0) & ((W & mj) == 0)
            if cand.any():
                flip(cand, j)
                blocked = up & (load + a[i - 1] > b)
        flip(up, i)

    audit.wrong_endpoints = int(np.count_nonzero(x != W))
    audit.over_length = int(np.count_nonzero(length > n))
    audit.max_length = int(length.max())
    return loads, audit


@dataclass
class CongestionReport:
    """Directed-edge loads of the canonical-path routing of all ordered pairs.

    With uniform stationary mass ``1/N`` each pair injects ``1/N**2`` units and
    every edge has capacity ``1/(2nN)``, so the flow cost is ``2n*max_load/N``.
    """

    n: int
    count: int
    loads: dict = field(repr=False)
    max_load: int
    flow_cost: Fraction
    paths: PathAudit

    @property
    def load_bound(self) -> int:
        return 2 * self.count

    @property
    def within_load_bound(self) -> bool:
        return self.max_load <= self.load_bound

    @property
    def within_cost_bound(self) -> bool:
        return self.flow_cost <= 4 * self.n

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "N": self.count,
            "max_load": self.max_load,
            "load_bound": self.load_bound,
            "flow_cost": float(self.flow_cost),
            "flow_cost_exact": str(self.flow_cost),
            "max_path_length": self.paths.max_length,
            "loads": {
                f"{Solution.from_code(z, self.n)}>{Solution.from_code(y, self.n)}": c
                for (z, y), c in sorted(self.loads.items())
            },
        }


def congestion(
    instance: KnapsackInstance,
    solutions: SolutionSet | None = None,
    cap: int = DEFAULT_PAIR_CAP,
    enum_cap: int = DEFAULT_ENUM_CAP,
    threads: int = 1,
) -> CongestionReport:
    """Route all ordered pairs ``v != w`` and count traversals per directed edge."""
    sols = solutions if solutions is not None else enumerate_solutions(instance, enum_cap)
    N = sols.count
    if N > cap:
        raise CapacityError("congestion audit over N solutions", N, cap)
    n = instance.n
    codes = sols.codes

    def chunk(block: np.ndarray):
        V = np.repeat(codes[block], N)
        W = np.tile(codes, block.size)
        keep = V != W
        return _route_batch(instance, sols, V[keep], W[keep])

    rows_per_chunk = max(1, min(N, 2**20 // max(N, 1)))
    blocks = [np.arange(s, min(N, s + rows_per_chunk)) for s in range(0, N, rows_per_chunk)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(chunk, blocks))
    else:
        parts = [chunk(blk) for blk in blocks]

    loads = np.zeros(N * n, dtype=np.int64)
    audit = PathAudit()
    for part_loads, part_audit in parts:
        loads += part_loads
        audit = audit.merge(part_audit)
    edge_loads = {}
    for e in np.flatnonzero(loads):
        z = int(codes[e // n])
        i = int(e % n) + 1
        edge_loads[(z, z ^ (1 << (n - i)))] = int(loads[e])
    max_load = int(loads.max()) if loads.size else 0
    return CongestionReport(
        n=n,
        count=N,
        loads=edge_loads,
        max_load=max_load,
        flow_cost=Fraction(2 * n * max_load, N),
        paths=audit,
    )


# ---------------------------------------------------------------------------
# edge-level audit of where routed pairs can come from


def _edge_key(instance: KnapsackInstance, edge) -> tuple[int, int]:
    z, y = (as_solution(instance, s) for s in edge)
    diff = z.code ^ y.code
    if diff == 0 or diff & (diff - 1):
        raise InstanceError(f"{z}>{y} is not a single-flip edge")
    return z.code, y.code


def _traversal_ok(n: int, v: int, w: int, route: list[int], s: int, z: int, y: int) -> bool:
    """Zone properties at the moment flip ``s`` of ``route`` moves ``z`` to ``y``."""

    def bit(c, i):
        return (c >> (n - i)) & 1

    flipped = set(route[: s + 1])
    k = _prefix_agreement(y, w, n)
    heap_end = max(k, max(flipped))
    if k > heap_end:
        return False
    for i in range(heap_end + 1, n + 1):
        if bit(v, i) != bit(z, i):
            return False
    for i in range(1, k + 1):
        if bit(w, i) != bit(y, i):
            return False
    for i in range(k + 1, heap_end + 1):
        if i in flipped:
            if bit(y, i) != 0 or bit(v, i) != 1:
                return False
        elif bit(v, i) != bit(z, i):
            return False
    return True


@dataclass
class EdgeAudit:
    routed_pairs: int = 0
    violations: int = 0

    @property
    def passed(self) -> bool:
        return self.violations == 0


@lru_cache(maxsize=16)
def _edge_audits(instance: KnapsackInstance, enum_cap: int) -> dict:
    sols = enumerate_solutions(instance, enum_cap)
    n = instance.n
    codes = [int(c) for c in sols.codes]
    audits = {}
    for z in codes:
        for i in range(1, n + 1):
            y = z ^ (1 << (n - i))
            if code_weight(instance, y) <= instance.budget:
                audits[(z, y)] = EdgeAudit()
    for v in codes:
        for w in codes:
            if v == w:
                continue
            route = _route(instance.weights, instance.budget, v, w)
            z = v
            for s, i in enumerate(route):
                y = z ^ (1 << (n - i))
                rec = audits[(z, y)]
                rec.routed_pairs += 1
                if not _traversal_ok(n, v, w, route, s, z, y):
                    rec.violations += 1
                z = y
    return audits


def audit_zone_structure_all(instance: KnapsackInstance, enum_cap: int = DEFAULT_ENUM_CAP) -> dict:
    """Per-edge zone audit for every directed edge, keyed by ``(z_code, y_code)``."""
    return dict(_edge_audits(instance, enum_cap))


def audit_zone_structure(instance: KnapsackInstance, edge, enum_cap: int = DEFAULT_ENUM_CAP) -> bool:
    """Check the zone structure of every canonical path routed through ``edge``.

    At the traversal of ``edge = (z, y)`` by the path from ``v`` to ``w``:
    untouched entries of ``v`` equal those of ``z``, matched entries of ``w``
    equal those of ``y``, heap entries flipped so far are 1 in ``v`` and 0 in
    ``y``, jumped heap entries agree between ``v`` and ``z``, and the matched
    zone ends no later than the heap zone.
    """
    key = _edge_key(instance, edge)
    return _edge_audits(instance, enum_cap)[key].passed


# ---------------------------------------------------------------------------
# prefix-count bound


@dataclass
class PrefixAudit:
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _prefix_counts(sols: SolutionSet, beta: int) -> np.ndarray:
    return np.bincount(sols.codes >> (sols.n - beta), minlength=2**beta)


def _prefix_ok(count: int, N: int, n: int, beta: int) -> bool:
    # count <= (2N)**((n - beta)/n), compared exactly in integers
    return count**n <= (2 * N) ** (n - beta)


def audit_prefix_counts(
    instance: KnapsackInstance, z, beta: int, enum_cap: int = DEFAULT_ENUM_CAP
) -> bool:
    """Bound the solutions whose first ``beta`` entries are fixed by ``z``.

    Both readings of "fixed by z" are checked: the prefix copied from ``z``
    and the complemented prefix.  Each count must be at most
    ``(2N) ** ((n - beta) / n)``.
    """
    n = instance.n
    if not 0 <= beta <= n:
        raise InstanceError(f"beta must lie in 0..{n}")
    z = as_solution(instance, z)
    sols = enumerate_solutions(instance, enum_cap)
    counts = _prefix_counts(sols, beta)
    p = z.code >> (n - beta)
    comp = p ^ ((1 << beta) - 1)
    return all(_prefix_ok(int(counts[q]), sols.count, n, beta) for q in (p, comp))


def audit_prefix_counts_all(
    instance: KnapsackInstance, enum_cap: int = DEFAULT_ENUM_CAP
) -> PrefixAudit:
    """Run the prefix-count check for every feasible ``z`` and every ``beta``."""
    n = instance.n
    sols = enumerate_solutions(instance, enum_cap)
    N = sols.count
    report = PrefixAudit()
    for beta in range(n + 1):
        counts = _prefix_counts(sols, beta)
        full = (1 << beta) - 1
        for z in sols.codes:
            p = int(z) >> (n - beta)
            for rule, q in (("equal", p), ("complement", p ^ full)):
                report.checked += 1
                c = int(counts[q])
                if not _prefix_ok(c, N, n, beta):
                    report.failures.append(
                        {
                            "z": str(Solution.from_code(int(z), n)),
                            "beta": beta,
                            "rule": rule,
                            "count": c,
                            "bound": (2 * N) ** ((n - beta) / n),
                        }
                    )
    return report
