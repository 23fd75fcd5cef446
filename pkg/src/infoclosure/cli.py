"""``closure`` command line: analyze | sweep | sample | fd | verify.

Exit status: 0 closed/pass, 3 open/fail, 1 usage or input error.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from . import __version__
from .closure import (EMPIRICAL_TOLERANCE, EXACT_TOLERANCE, analyze_joint, classify,
                      theorem_from_measures, check_delta_budget, measure)
from .errors import ClosureError
from .estimation import (ESTIMATORS, PLUG_IN, empirical_closure_joint, estimate_measures,
                         load_trajectories, sample)
from .functional import FunctionTable, is_functionally_closed, minimal_input_sets
from .measures import clamp
from .model import closure_joint
from .report import (MEASURE_KEYS, derivation_summary, file_fingerprint, header,
                     measure_summary, render, step_warnings)
from .scenarios import fingerprint, load_scenario
from .suite import DEFAULT_SEED, IDENTITY_CASES, run_verify

FORMAT_ENV = "INFOCLOSURE_FORMAT"
EXIT_OK, EXIT_ERROR, EXIT_OPEN = 0, 1, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return v


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return v


def _step(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def parse_steps(text: str) -> range:
    """``A..B`` inclusive. An empty range (B < A) is an argument error."""
    a, sep, b = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}")
    lo, hi = _step(a.strip()), _step(b.strip())
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty step range {text!r}")
    return range(lo, hi + 1)


def _names(text: str) -> tuple:
    return tuple(n.strip() for n in text.split(",") if n.strip())


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=None,
                        help=f"report format (default: ${FORMAT_ENV} or text)")
    common.add_argument("--output", type=Path, default=None, help="write the report here instead of stdout")

    tol = _Parser(add_help=False)
    tol.add_argument("--tolerance", type=_positive, default=None,
                     help=f"bits; default {EXACT_TOLERANCE:g} exact, {EMPIRICAL_TOLERANCE:g} empirical")

    p = _Parser(prog="closure", description="Information-closure analysis of partitioned Markov systems.")
    p.add_argument("--version", action="version", version=f"closure {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def source_args(sp):
        sp.add_argument("--scenario", help="scenario JSON file or bundled name (copy, decoupled, driven)")
        sp.add_argument("--trajectories", type=Path, help="trajectory CSV")
        sp.add_argument("--outer-env", type=_names, default=(),
                        help="comma-separated outer-environment columns of the trajectory CSV")
        sp.add_argument("--estimator", choices=ESTIMATORS, default=PLUG_IN)
        sp.add_argument("--delta", type=_nonneg_float, default=None, help="coupling budget in bits")

    a = sub.add_parser("analyze", parents=[common, tol], help="closure report at one step")
    source_args(a)
    a.add_argument("--step", type=_step, default=0)

    s = sub.add_parser("sweep", parents=[common, tol], help="closure reports over a step range")
    source_args(s)
    s.add_argument("--steps", type=parse_steps, required=True, metavar="A..B")

    m = sub.add_parser("sample", parents=[common], help="Monte Carlo trajectories and estimates")
    m.add_argument("--scenario", required=True)
    m.add_argument("--count", type=_count, required=True)
    m.add_argument("--horizon", type=_count, required=True)
    m.add_argument("--seed", type=_seed, required=True)
    g = m.add_mutually_exclusive_group()
    g.add_argument("--step", type=_step, default=None)
    g.add_argument("--steps", type=parse_steps, default=None, metavar="A..B")
    m.add_argument("--estimator", choices=ESTIMATORS, default=PLUG_IN)
    m.add_argument("--write-trajectories", type=Path, default=None, help="also write the paths as CSV")

    f = sub.add_parser("fd", parents=[common], help="minimal determining input sets of a function table")
    f.add_argument("--table", type=Path, required=True)
    f.add_argument("--env", type=_names, default=None,
                   help="comma-separated environment inputs; adds the functional-closure verdict")

    v = sub.add_parser("verify", parents=[common, tol], help="seeded identity and derivation checks")
    v.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    v.add_argument("--cases", type=_count, default=IDENTITY_CASES)
    return p


# -- commands ----------------------------------------------------------------

def _source(args):
    if bool(args.scenario) == bool(args.trajectories):
        raise UsageError(f"closure {args.command}: give exactly one of --scenario or --trajectories")
    if args.scenario:
        if args.outer_env:
            raise UsageError("--outer-env only applies to --trajectories")
        sc = load_scenario(args.scenario)
        tol = args.tolerance or EXACT_TOLERANCE
        src = {"kind": "scenario", "name": sc.name or Path(args.scenario).stem,
               "fingerprint": fingerprint(sc)}
        return src, tol, lambda n: analyze_joint(closure_joint(sc, n), sc.partition, n, tol, args.delta)
    traj = load_trajectories(args.trajectories, outer_names=args.outer_env)
    tol = args.tolerance or EMPIRICAL_TOLERANCE
    src = {"kind": "trajectories", "name": args.trajectories.name,
           "fingerprint": file_fingerprint(args.trajectories), "count": traj.count,
           "horizon": traj.horizon, "estimator": args.estimator}

    def run(n):
        emp = empirical_closure_joint(traj, n, args.estimator)
        res = analyze_joint(emp.distribution(), traj.boundary, n, tol, args.delta)
        est = estimate_measures(emp)
        if args.estimator != PLUG_IN:
            m = est.measures
            res = dataclasses.replace(
                res, measures=m, verdict=classify(m, tol), theorem=theorem_from_measures(m, tol),
                delta=None if args.delta is None else check_delta_budget(m, args.delta, tol))
        return res
    return src, tol, run


def _closure_report(args, steps) -> tuple[dict, int]:
    src, tol, run = _source(args)
    analyses = [run(n) for n in steps]
    warnings = [w for a in analyses for w in step_warnings(a)]
    closed = all(a.verdict.informationally_closed for a in analyses)
    rep = header(args.command, source=src, tolerance=tol,
                 steps=[a.to_dict() for a in analyses],
                 identities=derivation_summary(analyses),
                 warnings=warnings, result="closed" if closed else "open")
    if args.delta is not None:
        rep["delta"] = args.delta
    if args.command == "sweep":
        rep["summary"] = measure_summary(analyses)
    return rep, EXIT_OK if closed else EXIT_OPEN


def cmd_analyze(args):
    return _closure_report(args, [args.step])


def cmd_sweep(args):
    return _closure_report(args, args.steps)


def cmd_sample(args):
    sc = load_scenario(args.scenario)
    traj = sample(sc, args.count, args.horizon, args.seed)
    if args.step is not None:
        steps = [args.step]
    elif args.steps is not None:
        steps = list(args.steps)
    else:
        steps = list(range(args.horizon))
    records = []
    for n in steps:
        est = estimate_measures(empirical_closure_joint(traj, n, args.estimator))
        e, x = est.measures.to_dict(), measure(sc, n).to_dict()
        records.append({"step": n, "estimator": est.estimator, "sample_size": est.sample_size,
                        "estimate": e, "exact": x,
                        "error": {k: clamp(e[k] - x[k]) for k in MEASURE_KEYS}})
    meta = {"seed": args.seed, "count": traj.count, "horizon": traj.horizon,
            "algorithm": traj.algorithm, "trajectories_file": None}
    if args.write_trajectories is not None:
        traj.to_csv(args.write_trajectories)
        meta["trajectories_file"] = args.write_trajectories.name
    src = {"kind": "scenario", "name": sc.name or Path(args.scenario).stem,
           "fingerprint": traj.fingerprint}
    return header("sample", source=src, sample=meta, steps=records, warnings=[], result="ok"), EXIT_OK


def cmd_fd(args):
    table = FunctionTable.load_csv(args.table)
    sets = minimal_input_sets(table)
    rep = header("fd", source={"kind": "table", "name": args.table.name,
                               "fingerprint": file_fingerprint(args.table)},
                 inputs=list(table.input_names), output=table.output_var.name,
                 minimal_sets=[m.to_dict() for m in sets], closure=None, warnings=[], result="ok")
    code = EXIT_OK
    if args.env is not None:
        fc = is_functionally_closed(table, args.env)
        rep["closure"] = fc.to_dict()
        del rep["closure"]["minimal_sets"]  # already listed above
        rep["result"] = "closed" if fc.closed else "open"
        code = EXIT_OK if fc.closed else EXIT_OPEN
    return rep, code


def cmd_verify(args):
    tol = args.tolerance or EXACT_TOLERANCE
    res = run_verify(args.seed, tol, args.cases)
    passed = res.pop("passed")
    rep = header("verify", **res, warnings=[], result="pass" if passed else "fail")
    return rep, EXIT_OK if passed else EXIT_OPEN


COMMANDS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "sample": cmd_sample,
            "fd": cmd_fd, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        fmt = args.format or os.environ.get(FORMAT_ENV, "text")
        if fmt not in ("text", "json"):
            raise UsageError(f"{FORMAT_ENV} must be text or json, got {fmt!r}")
        report, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ClosureError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for w in report.get("warnings", []):
        print(f"warning [{w['code']}] step {w.get('step', '-')}: {w['message']}", file=sys.stderr)
    text = render(report, fmt)
    if args.output is None:
        sys.stdout.write(text)
    else:
        try:
            args.output.write_text(text)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
