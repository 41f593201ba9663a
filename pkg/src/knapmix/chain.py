"""The lazy single-flip chain on knapsack solutions.

Each step consumes one draw ``u`` uniform on ``{0, ..., 2n-1}``.  ``u >= n``
holds in place; otherwise item ``u + 1`` is flipped if the result still fits
the budget.  Off-diagonal moves therefore have probability exactly
``1 / (2n)`` and every state holds with probability at least 1/2.

Replicate ``r`` of a seed uses substream ``r`` of :mod:`knapmix.rng`; step
``t`` (0-based) of that replicate reads counter ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng
from .core import KnapsackInstance, Solution, as_solution, weight
from .errors import InstanceError


@dataclass(frozen=True)
class ChainConfig:
    instance: KnapsackInstance
    seed: int = 0
    start: Optional[Solution] = None

    def __post_init__(self):
        rng.check_seed(self.seed)
        object.__setattr__(self, "start", as_solution(self.instance, self.start))
        if 2 * self.instance.n >= rng.MAX_BOUND:
            raise InstanceError(f"the sampler supports n < {rng.MAX_BOUND // 2}")


@dataclass
class Trajectory:
    states: list[Solution]
    holds: int = 0
    rejections: int = 0
    moves: int = 0

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    @property
    def last(self) -> Solution:
        return self.states[-1]


def step(instance: KnapsackInstance, state: Solution, u: int) -> Solution:
    """Apply one transition driven by the draw ``u`` in ``[0, 2n)``."""
    n = instance.n
    if not 0 <= u < 2 * n:
        raise InstanceError(f"draw {u} outside [0, {2 * n})")
    if u >= n:
        return state
    bits = list(state.bits)
    bits[u] ^= 1
    proposal = Solution(tuple(bits))
    return proposal if weight(instance, proposal) <= instance.budget else state


def draws(seed: int, stream: int, steps: int, n: int) -> np.ndarray:
    keys = rng.stream_keys(seed, [stream])
    return np.array([int(rng.below(keys, t, 2 * n)[0]) for t in range(steps)], dtype=np.int64)


def run(config: ChainConfig, steps: int) -> Trajectory:
    """Walk ``steps`` transitions from ``config.start`` on substream 0."""
    if steps < 0:
        raise InstanceError("steps must be >= 0")
    inst = config.instance
    n = inst.n
    state = config.start
    traj = Trajectory([state])
    for u in draws(config.seed, 0, steps, n):
        nxt = step(inst, state, int(u))
        if u >= n:
            traj.holds += 1
        elif nxt is state:
            traj.rejections += 1
        else:
            traj.moves += 1
        state = nxt
        traj.states.append(state)
    return traj


def sample_bits(
    config: ChainConfig, steps: int, count: int, first_stream: int = 0
) -> np.ndarray:
    """End states of ``count`` replicates as a ``(count, n)`` uint8 matrix.

    Replicate ``j`` runs on substream ``first_stream + j``; all replicates are
    advanced together, one vectorized draw per step.
    """
    if steps < 0 or count < 1:
        raise InstanceError("need steps >= 0 and count >= 1")
    inst = config.instance
    n = inst.n
    a = np.asarray(inst.weights, dtype=np.int64)
    keys = rng.stream_keys(config.seed, np.arange(first_stream, first_stream + count, dtype=np.uint64))
    bits = np.tile(np.asarray(config.start.bits, dtype=np.uint8), (count, 1))
    flat = bits.reshape(-1)
    load = np.full(count, weight(inst, config.start), dtype=np.int64)
    base = np.arange(count, dtype=np.int64) * n
    # a[n] = 0 pads the holding draws so they never move
    a_pad = np.append(a, 0)
    for t in range(steps):
        u = rng.below(keys, t, 2 * n).astype(np.int64)
        np.minimum(u, n, out=u)
        cell = base + np.minimum(u, n - 1)
        sign = 1 - 2 * flat[cell].astype(np.int64)
        proposed = load + sign * a_pad[u]
        accept = (u < n) & (proposed <= inst.budget)
        flat[cell[accept]] ^= 1
        load[accept] = proposed[accept]
    return bits


def sample(config: ChainConfig, steps: int, count: int) -> list[Solution]:
    """End states of ``count`` independent ``steps``-step walks."""
    return [Solution(tuple(row)) for row in sample_bits(config, steps, count)]
