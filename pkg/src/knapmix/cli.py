"""``knapmix`` command line.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.  Stdout
carries only the command payload, which is a pure function of the instance,
flags and seed; ``--report FILE`` additionally writes a run record with the
instance digest and wall time.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from . import analysis, chain, core, counting, paths, verify
from .errors import CapacityError, InstanceError, KnapmixError, SamplerFailure

log = logging.getLogger("knapmix")


@dataclass
class RunReport:
    command: str
    instance_digest: str
    seed: int
    outputs: object
    wall_time: float


class CheckFailed(Exception):
    pass


def _load_instance(args) -> tuple[core.KnapsackInstance, str]:
    if getattr(args, "random", None) is not None:
        inst = core.random_instance(args.random, args.seed, args.max_weight)
        raw = json.dumps(inst.to_json(), sort_keys=True).encode()
    elif args.instance is None:
        raise InstanceError("--instance is required")
    elif args.instance.lstrip().startswith("{"):
        raw = args.instance.encode()
        inst = core.parse_instance(args.instance)
    else:
        try:
            raw = Path(args.instance).read_bytes()
        except OSError as exc:
            raise InstanceError(f"cannot read instance file: {exc}") from None
        inst = core.parse_instance(raw.decode("utf-8"))
    return inst, hashlib.sha256(raw).hexdigest()


def _checks_payload(checks) -> tuple[list, bool]:
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}", file=sys.stderr)
    return [c.to_json() for c in checks], all(c.passed for c in checks)


def cmd_enumerate(args, inst):
    sols = core.enumerate_solutions(inst, args.enum_cap)
    if args.format == "json":
        return {"N": sols.count, "solutions": [str(s) for s in sols]}
    return [str(s) for s in sols]


def cmd_sample(args, inst):
    cfg = chain.ChainConfig(inst, args.seed, args.start)
    out = [str(s) for s in chain.sample(cfg, args.steps, args.count)]
    if args.format == "json":
        return {"steps": args.steps, "count": args.count, "seed": args.seed, "samples": out}
    return out


def cmd_path(args, inst):
    p = paths.canonical_path(inst, args.source, args.target)
    payload = p.to_json()
    payload["zones"] = [
        {"step": j, "matched_end": z.matched_end, "heap_end": z.heap_end}
        for j, z in ((j, paths.zones_at(p, j)) for j in range(p.length + 1))
    ]
    return payload


def cmd_audit(args, inst):
    sols = core.enumerate_solutions(inst, args.enum_cap)
    report = paths.congestion(inst, sols, threads=args.threads)
    edges = paths.audit_zone_structure_all(inst, args.enum_cap)
    prefix = paths.audit_prefix_counts_all(inst, args.enum_cap)
    checks = [
        verify.Check("canonical_paths", report.paths.passed, {"max_length": report.paths.max_length}),
        verify.Check(
            "zone_structure",
            all(e.passed for e in edges.values()),
            {"failing_edges": sum(not e.passed for e in edges.values())},
        ),
        verify.Check("prefix_counts", prefix.passed, {"failures": len(prefix.failures)}),
        verify.Check(
            "edge_load",
            report.within_load_bound,
            {"max_load": report.max_load, "bound": report.load_bound},
        ),
        verify.Check("flow_cost", report.within_cost_bound, {"flow_cost": float(report.flow_cost), "bound": 4 * inst.n}),
    ]
    listed, ok = _checks_payload(checks)
    return {"congestion": report.to_json(), "checks": listed}, ok


def cmd_analyze(args, inst):
    sols = core.enumerate_solutions(inst, args.enum_cap)
    P = analysis.transition_matrix(inst, sols, cap=args.matrix_cap)
    start = core.as_solution(inst, args.start)
    eps = args.epsilon
    tau = analysis.empirical_mixing_time(P, start, eps)
    bound = analysis.theorem_bound(inst.n, eps)
    try:
        flow = float(paths.congestion(inst, sols, threads=args.threads).flow_cost)
    except CapacityError as exc:
        log.warning("flow cost skipped: %s", exc)
        flow = None
    if args.tv_curve:
        curve = analysis.tv_curve(P, start, max(bound, tau))
        with open(args.tv_curve, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "tv"])
            writer.writerows((t, repr(float(v))) for t, v in enumerate(curve))
    return {
        "start": str(start),
        "epsilon": eps,
        "gap": analysis.spectral_gap(P),
        "tau": tau,
        "theorem_bound": bound,
        "flow_cost": flow,
    }


def cmd_count(args, inst):
    if args.approx:
        est = counting.approx_count(inst, args.epsilon, args.delta, args.seed)
        return est.to_json()
    return {"count": core.exact_count(inst)}


def cmd_verify(args, inst):
    checks = verify.run_checks(
        inst,
        enum_cap=args.enum_cap,
        matrix_cap=args.matrix_cap,
        threads=args.threads,
    )
    listed, ok = _checks_payload(checks)
    return {"instance": inst.to_json(), "checks": listed, "passed": ok}, ok


COMMANDS = {
    "enumerate": cmd_enumerate,
    "sample": cmd_sample,
    "path": cmd_path,
    "audit": cmd_audit,
    "analyze": cmd_analyze,
    "count": cmd_count,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="instance JSON file, or inline JSON object")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["text", "json", "csv"], default="text")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--enum-cap", type=int, default=core.DEFAULT_ENUM_CAP)
    common.add_argument("--matrix-cap", type=int, default=analysis.DEFAULT_MATRIX_CAP)
    common.add_argument("--report", help="also write a run record (with wall time) to this file")

    parser = argparse.ArgumentParser(prog="knapmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("enumerate", parents=[common], help="list every feasible solution")

    p = sub.add_parser("sample", parents=[common], help="draw solutions with the lazy chain")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--start", help="feasible start bitstring (default all zeros)")

    p = sub.add_parser("path", parents=[common], help="print a canonical path")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)

    sub.add_parser("audit", parents=[common], help="congestion report and path audits")

    p = sub.add_parser("analyze", parents=[common], help="spectral gap and mixing time")
    p.add_argument("--start")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--tv-curve", help="write t,tv rows to this CSV file")

    p = sub.add_parser("count", parents=[common], help="exact or approximate solution count")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--approx", action="store_true")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=0.1)

    p = sub.add_parser("verify", parents=[common], help="run every audit on one instance")
    p.add_argument("--random", type=int, metavar="N", help="audit a random instance on N items instead")
    p.add_argument("--max-weight", type=int, default=50)
    return parser


def _emit(payload, fmt: str):
    if isinstance(payload, list) and fmt != "json":
        for line in payload:
            print(line)
    else:
        print(json.dumps(payload, indent=2))


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        inst, digest = _load_instance(args)
        result = COMMANDS[args.command](args, inst)
    except (InstanceError, CapacityError, ValueError) as exc:
        print(f"knapmix: error: {exc}", file=sys.stderr)
        return 2
    except SamplerFailure as exc:
        print(f"knapmix: sampler failure: {exc}", file=sys.stderr)
        return 1
    except KnapmixError as exc:
        print(f"knapmix: internal error: {exc}", file=sys.stderr)
        return 1
    payload, ok = result if isinstance(result, tuple) else (result, True)
    _emit(payload, args.format)
    if args.report:
        record = RunReport(args.command, digest, args.seed, payload, time.perf_counter() - started)
        Path(args.report).write_text(json.dumps(asdict(record), indent=2))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
