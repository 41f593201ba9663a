"""Full audit of one instance: paths, congestion, spectrum and mixing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    DEFAULT_MATRIX_CAP,
    EIGEN_TOL,
    eigenvalues,
    flow_bound,
    mixing_times_all_starts,
    power_iteration_top2,
    theorem_bound,
    transition_matrix,
)
from .core import DEFAULT_ENUM_CAP, KnapsackInstance, enumerate_solutions, exact_count
from .paths import DEFAULT_PAIR_CAP, audit_prefix_counts_all, audit_zone_structure_all, congestion


@dataclass
class Check:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "measured": self.measured}


def run_checks(
    instance: KnapsackInstance,
    epsilons=(0.1, 0.01),
    enum_cap: int = DEFAULT_ENUM_CAP,
    matrix_cap: int = DEFAULT_MATRIX_CAP,
    pair_cap: int = DEFAULT_PAIR_CAP,
    threads: int = 1,
) -> list[Check]:
    n = instance.n
    sols = enumerate_solutions(instance, enum_cap)
    N = sols.count
    checks = [Check("count_agreement", exact_count(instance) == N, {"N": N})]

    report = congestion(instance, sols, cap=pair_cap, threads=threads)
    pa = report.paths
    checks.append(
        Check(
            "canonical_paths",
            pa.passed,
            {
                "pairs": pa.pairs,
                "max_length": pa.max_length,
                "infeasible_steps": pa.infeasible_steps,
                "wrong_endpoints": pa.wrong_endpoints,
                "repeated_indices": pa.repeated_indices,
                "matched_regressions": pa.matched_regressions,
            },
        )
    )

    edges = audit_zone_structure_all(instance, enum_cap)
    bad_edges = sum(not e.passed for e in edges.values())
    checks.append(
        Check(
            "zone_structure",
            bad_edges == 0,
            {"edges": len(edges), "failing_edges": bad_edges},
        )
    )

    prefix = audit_prefix_counts_all(instance, enum_cap)
    checks.append(
        Check(
            "prefix_counts",
            prefix.passed,
            {"checked": prefix.checked, "failures": len(prefix.failures), "first_failures": prefix.failures[:3]},
        )
    )
    checks.append(
        Check(
            "edge_load",
            report.within_load_bound,
            {"max_load": report.max_load, "bound": report.load_bound},
        )
    )
    checks.append(
        Check(
            "flow_cost",
            report.within_cost_bound,
            {"flow_cost": float(report.flow_cost), "bound": 4 * n},
        )
    )

    P = transition_matrix(instance, sols, cap=matrix_cap)
    checks.append(
        Check(
            "transition_matrix",
            P.is_symmetric() and P.has_unit_rows() and P.is_lazy() and P.uniform_is_stationary(),
            {
                "symmetric": P.is_symmetric(),
                "unit_rows": P.has_unit_rows(),
                "lazy": P.is_lazy(),
                "uniform_stationary": P.uniform_is_stationary(),
            },
        )
    )

    ev = eigenvalues(P)
    lam2 = float(ev[1]) if N > 1 else 0.0
    pi1, pi2 = power_iteration_top2(P)
    gap = 1.0 if N == 1 else 1.0 - lam2
    checks.append(
        Check(
            "spectrum",
            bool(ev[-1] >= -EIGEN_TOL)
            and gap > EIGEN_TOL
            and abs(pi1 - float(ev[0])) <= 1e-8
            and abs(pi2 - lam2) <= 1e-8,
            {
                "gap": gap,
                "lambda_min": float(ev[-1]),
                "power_iteration_lambda1": pi1,
                "power_iteration_lambda2": pi2,
            },
        )
    )

    for eps in epsilons:
        taus = mixing_times_all_starts(P, eps)
        bound = theorem_bound(n, eps)
        worst = int(taus.max())
        checks.append(
            Check(
                f"mixing_bound_eps_{eps}",
                worst <= bound,
                {
                    "worst_tau": worst,
                    "worst_start": str(sols.solutions[int(np.argmax(taus))]),
                    "tau_from_zero": int(taus[0]),
                    "bound": bound,
                },
            )
        )
        fb = flow_bound(report.flow_cost, pa.max_length, N, eps)
        checks.append(
            Check(
                f"flow_bound_consistency_eps_{eps}",
                fb <= bound,
                {"flow_bound": fb, "bound": bound},
            )
        )
    return checks
