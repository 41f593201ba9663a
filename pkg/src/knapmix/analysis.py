"""Exact analysis of the lazy chain on small instances.

The transition matrix is stored exactly: every entry is an integer multiple
of ``1/(2n)``, so ``numerators / denominator`` is the rational matrix and all
structural checks (symmetry, row sums, stationarity of the uniform vector)
are integer comparisons.  Spectral and total-variation work uses floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse

from .core import DEFAULT_ENUM_CAP, KnapsackInstance, Solution, SolutionSet, as_solution, enumerate_solutions
from .errors import CapacityError, InstanceError, InvariantError

DEFAULT_MATRIX_CAP = 4096
EIGEN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    numerators: np.ndarray
    denominator: int
    solutions: SolutionSet

    @property
    def order(self) -> int:
        return self.numerators.shape[0]

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.numerators[i, j]), self.denominator)

    def as_float(self) -> np.ndarray:
        return self.numerators / self.denominator

    def as_sparse(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.csr_matrix(self.as_float())

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.numerators, self.numerators.T))

    def has_unit_rows(self) -> bool:
        return bool(np.all(self.numerators.sum(axis=1) == self.denominator))

    def is_lazy(self) -> bool:
        return bool(np.all(2 * np.diag(self.numerators) >= self.denominator))

    def uniform_is_stationary(self) -> bool:
        # u P = u  <=>  every column sums to one
        return bool(np.all(self.numerators.sum(axis=0) == self.denominator))

    def validate(self):
        if not (self.is_symmetric() and self.has_unit_rows()):
            raise InvariantError("transition matrix must be symmetric and stochastic")


def transition_matrix(
    instance: KnapsackInstance,
    solutions: SolutionSet | None = None,
    cap: int = DEFAULT_MATRIX_CAP,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> TransitionMatrix:
    sols = solutions if solutions is not None else enumerate_solutions(instance, enum_cap)
    N, n = sols.count, instance.n
    if N > cap:
        raise CapacityError("transition matrix over N states", N, cap)
    num = np.zeros((N, N), dtype=np.int32)
    codes = sols.codes
    for i in range(1, n + 1):
        nbr = codes ^ (1 << (n - i))
        pos = sols.indices_of(nbr)
        ok = pos < N
        ok[ok] = sols.codes[pos[ok]] == nbr[ok]
        rows = np.flatnonzero(ok)
        num[rows, pos[ok]] = 1
    moves = num.sum(axis=1)
    num[np.arange(N), np.arange(N)] = 2 * n - moves
    return TransitionMatrix(num, 2 * n, sols)


def eigenvalues(P: TransitionMatrix) -> np.ndarray:
    """All eigenvalues of ``P`` in decreasing order."""
    P.validate()
    return np.linalg.eigvalsh(P.as_float())[::-1]


def spectral_gap(P: TransitionMatrix) -> float:
    """``1 - lambda_2``; a single-state chain has gap 1 by convention."""
    ev = eigenvalues(P)
    if ev[-1] < -EIGEN_TOL:
        raise InvariantError(f"lazy chain has a negative eigenvalue {ev[-1]}")
    if ev.size == 1:
        return 1.0
    return float(min(1.0, max(0.0, 1.0 - ev[1])))


def power_iteration_top2(
    P: TransitionMatrix, tol: float = 1e-13, max_iter: int = 200_000, seed: int = 0
) -> tuple[float, float]:
    """Top two eigenvalues by power iteration, independent of the dense solver.

    The top eigenvector of a symmetric stochastic matrix is the constant
    vector; projecting it out and iterating finds ``lambda_2`` because lazy
    chains have no negative spectrum.
    """
    A = P.as_sparse()
    N = P.order
    rng = np.random.default_rng(seed)
    x = rng.normal(size=N)
    x /= np.linalg.norm(x)
    lam1 = 0.0
    for _ in range(max_iter):
        y = A @ x
        new = float(x @ y)
        x = y / np.linalg.norm(y)
        if abs(new - lam1) < tol:
            lam1 = new
            break
        lam1 = new
    if N == 1:
        return lam1, 0.0
    x = rng.normal(size=N)
    x -= x.mean()
    x /= np.linalg.norm(x)
    lam2 = 0.0
    for _ in range(max_iter):
        y = A @ x
        y -= y.mean()
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return lam1, 0.0
        new = float(x @ y)
        x = y / norm
        if abs(new - lam2) < tol:
            lam2 = new
            break
        lam2 = new
    return lam1, lam2


def theorem_bound(n: int, epsilon: float) -> int:
    """``ceil(n**3 * ln(16 / epsilon))``."""
    if n < 1:
        raise InstanceError("n must be >= 1")
    if not 0 < epsilon < 1:
        raise InstanceError(f"epsilon must lie in (0, 1), got {epsilon}")
    return math.ceil(n**3 * math.log(16 / epsilon))


def flow_bound(flow_cost: float, path_length: int, count: int, epsilon: float) -> float:
    """``rho * |p| * (ln N + ln(1/epsilon))`` for a flow of the given cost."""
    return float(flow_cost) * path_length * (math.log(count) + math.log(1 / epsilon))


def _tv_rows(dist: np.ndarray) -> np.ndarray:
    N = dist.shape[-1]
    return 0.5 * np.abs(dist - 1.0 / N).sum(axis=-1)


def _start_index(P: TransitionMatrix, start) -> int:
    n = P.solutions.n
    return P.solutions.index_of(start if start is not None else Solution.zeros(n))


def tv_curve(P: TransitionMatrix, start=None, steps: int = 0) -> np.ndarray:
    """Total variation to uniform after ``0..steps`` transitions from ``start``."""
    A = P.as_sparse().T.tocsr()
    p = np.zeros(P.order)
    p[_start_index(P, start)] = 1.0
    out = np.empty(steps + 1)
    out[0] = _tv_rows(p)
    for t in range(1, steps + 1):
        p = A @ p
        out[t] = _tv_rows(p)
    return out


def tv_distance_at(P: TransitionMatrix, start, t: int) -> float:
    if t < 0:
        raise InstanceError("t must be >= 0")
    return float(tv_curve(P, start, t)[-1])


def _mixing_times(P: TransitionMatrix, dist: np.ndarray, epsilon: float) -> np.ndarray:
    """Smallest ``t`` with TV <= epsilon for every row of ``dist``.

    Doubling builds ``P**(2**k)`` until every row has mixed, then a descending
    pass over the powers adds ``2**k`` while the row is still above epsilon;
    monotonicity of TV makes the result the first mixed time.
    """
    if not 0 < epsilon < 1:
        raise InstanceError(f"epsilon must lie in (0, 1), got {epsilon}")
    rows = np.atleast_2d(dist)
    taus = np.zeros(rows.shape[0], dtype=np.int64)
    pending = _tv_rows(rows) > epsilon
    if not pending.any():
        return taus
    powers = [P.as_float()]
    while np.any(_tv_rows(rows[pending] @ powers[-1]) > epsilon):
        if len(powers) > 62:
            raise InvariantError("chain does not mix; is the state graph connected?")
        powers.append(powers[-1] @ powers[-1])
    cur = rows[pending].copy()
    t = np.zeros(cur.shape[0], dtype=np.int64)
    for k in range(len(powers) - 1, -1, -1):
        nxt = cur @ powers[k]
        move = _tv_rows(nxt) > epsilon
        cur[move] = nxt[move]
        t[move] += 1 << k
    taus[pending] = t + 1
    return taus


def empirical_mixing_time(P: TransitionMatrix, start, epsilon: float) -> int:
    """Smallest ``t`` with TV(start, t) <= epsilon; ties count as mixed."""
    p = np.zeros(P.order)
    p[_start_index(P, start)] = 1.0
    return int(_mixing_times(P, p, epsilon)[0])


def mixing_times_all_starts(P: TransitionMatrix, epsilon: float) -> np.ndarray:
    """Mixing time from every state, in solution order."""
    return _mixing_times(P, np.eye(P.order), epsilon)


def worst_tv_at(P: TransitionMatrix, t: int) -> float:
    """Largest TV to uniform over all starts after ``t`` steps."""
    return float(_tv_rows(np.linalg.matrix_power(P.as_float(), t)).max())


@dataclass
class MixingProfile:
    start: Solution
    tv_curve: np.ndarray = field(repr=False)
    tau: dict
    theorem_bound: dict
    spectral_gap: float

    def to_json(self) -> dict:
        return {
            "start": str(self.start),
            "gap": self.spectral_gap,
            "tau": {str(e): t for e, t in self.tau.items()},
            "theorem_bound": {str(e): t for e, t in self.theorem_bound.items()},
        }


def mixing_profile(
    instance: KnapsackInstance,
    start=None,
    epsilons=(0.1, 0.01),
    P: TransitionMatrix | None = None,
    curve_steps: int | None = None,
) -> MixingProfile:
    start = as_solution(instance, start)
    P = P if P is not None else transition_matrix(instance)
    tau = {e: empirical_mixing_time(P, start, e) for e in epsilons}
    bound = {e: theorem_bound(instance.n, e) for e in epsilons}
    steps = curve_steps if curve_steps is not None else max(tau.values(), default=0)
    return MixingProfile(start, tv_curve(P, start, steps), tau, bound, spectral_gap(P))
