"""Report assembly and rendering (JSON and plain text).

Reports are plain dicts. JSON output is ``json.dumps(indent=2,
sort_keys=True)`` plus a trailing newline, so parsing and re-serializing a
report reproduces it byte for byte. Text output shows bits to 6 decimals.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__
from .closure import StepAnalysis
from .measures import clamp

TOOL_NAME = "closure"
MEASURE_KEYS = ("info_closure", "func_closure", "env_coupling", "self_information",
                "next_entropy", "coupling_lower_bound", "env_entropy")

W_DELTA_INFEASIBLE = "delta-infeasible"
W_DELTA_OVER_BUDGET = "delta-over-budget"
W_FLAGS_DISAGREE = "closure-flags-disagree"


def file_fingerprint(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def header(command: str, **fields) -> dict:
    return {"tool": {"name": TOOL_NAME, "version": __version__}, "command": command, **fields}


def step_warnings(analysis: StepAnalysis) -> list[dict]:
    out = []
    n = analysis.step
    d = analysis.delta
    if d is not None and d.infeasible:
        out.append({"code": W_DELTA_INFEASIBLE, "step": n,
                    "message": f"delta {d.delta:.6f} is below the coupling lower bound "
                               f"{clamp(d.lower_bound):.6f}; no coupling meets both ends"})
    if d is not None and d.over_budget:
        out.append({"code": W_DELTA_OVER_BUDGET, "step": n,
                    "message": f"env_coupling {clamp(d.coupling):.6f} exceeds delta {d.delta:.6f}"})
    if analysis.verdict.flags_disagree:
        out.append({"code": W_FLAGS_DISAGREE, "step": n,
                    "message": "func_closure vanishes but info_closure does not"})
    return out


def derivation_summary(analyses) -> dict:
    checks = failed = 0
    worst = 0.0
    for a in analyses:
        for r in a.derivation:
            if not r.applicable:
                continue
            checks += 1
            failed += not r.passed
            worst = max(worst, max(0.0, -r.value) if r.inequality else abs(r.value))
    return {"checks": checks, "failed": failed, "worst_residual": worst}


def measure_summary(analyses) -> dict:
    series = [a.measures.to_dict() for a in analyses]
    return {k: {"min": min(s[k] for s in series), "max": max(s[k] for s in series)}
            for k in MEASURE_KEYS}


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


# -- text --------------------------------------------------------------------

def _bits(v) -> str:
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def _step_text(rec: dict) -> list[str]:
    lines = [f"step {rec['step']}"]
    for k in MEASURE_KEYS:
        lines.append(f"  {k:<22}{_bits(rec['measures'][k]):>12}")
    v = rec["verdict"]
    lines.append(f"  informationally closed: {_yes(v['informationally_closed'])}, "
                 f"functionally closed (information reading): "
                 f"{_yes(v['functionally_closed_informational'])}, "
                 f"systems-theoretic: {_yes(v['systems_theoretic_closed'])}")
    t = rec["theorem"]
    cond = "closed context" if t["conditioned"] else "not conditioned"
    lines.append(f"  coupling bound: lhs {_bits(t['lhs'])} rhs {_bits(t['rhs'])} "
                 f"slack {_bits(t['slack'])} ({cond}, {'holds' if t['satisfied'] else 'violated'})")
    p = rec["propositions"]
    lines.append(f"  proposition residuals: p1 {_bits(p['p1'])}, p2 {_bits(p['p2'])}")
    statuses = list(rec["derivation"].values())
    lines.append(f"  derivation: {statuses.count('pass')} pass, {statuses.count('fail')} fail, "
                 f"{statuses.count('n/a')} n/a")
    if "delta" in rec:
        d = rec["delta"]
        flags = [k for k in ("within_budget", "over_budget", "below_bound", "infeasible") if d[k]]
        lines.append(f"  delta {_bits(d['delta'])}: {', '.join(flags)}")
    if "estimate" in rec:
        e = rec["estimate"]
        lines.append(f"  estimator {e['estimator']}, N = {e['sample_size']}")
    return lines


def _battery_text(name: str, b: dict) -> list[str]:
    lines = [f"{name}: {b['cases']} cases, {b['checks']} checks, "
             f"{b['failure_count']} failures ({'pass' if b['passed'] else 'FAIL'})"]
    for k, v in b["worst"].items():
        lines.append(f"  {k:<36}{v:.3e}")
    for f in b["failures"]:
        lines.append(f"  failed {f['case']} {f['name']} residual {f['value']:.3e}")
    return lines


def to_text(report: dict) -> str:
    lines = [f"{report['tool']['name']} {report['command']} (version {report['tool']['version']})"]
    src = report.get("source")
    if src:
        lines.append(f"source: {src.get('kind')} {src.get('name', '')} {src.get('fingerprint', '')}".rstrip())
    if "tolerance" in report:
        lines.append(f"tolerance: {report['tolerance']:g}")
    cmd = report["command"]
    if cmd in ("analyze", "sweep"):
        for rec in report["steps"]:
            lines.extend(_step_text(rec))
        if "summary" in report:
            lines.append("summary (min .. max)")
            for k, mm in report["summary"].items():
                lines.append(f"  {k:<22}{_bits(mm['min']):>12} .. {_bits(mm['max'])}")
        d = report["identities"]
        lines.append(f"identity checks: {d['checks']} run, {d['failed']} failed, "
                     f"worst residual {d['worst_residual']:.3e}")
    elif cmd == "sample":
        s = report["sample"]
        lines.append(f"sampler {s['algorithm']}, seed {s['seed']}, "
                     f"{s['count']} trajectories, horizon {s['horizon']}")
        for rec in report["steps"]:
            lines.append(f"step {rec['step']} ({rec['estimator']}, N = {rec['sample_size']})")
            lines.append(f"  {'measure':<22}{'estimate':>12}{'exact':>12}{'error':>12}")
            for k in MEASURE_KEYS:
                lines.append(f"  {k:<22}{_bits(rec['estimate'][k]):>12}"
                             f"{_bits(rec['exact'][k]):>12}{_bits(rec['error'][k]):>12}")
        if s.get("trajectories_file"):
            lines.append(f"trajectories written to {s['trajectories_file']}")
    elif cmd == "fd":
        lines.append(f"inputs: {', '.join(report['inputs'])}; output: {report['output']}")
        lines.append("minimal determining sets:")
        for m in report["minimal_sets"]:
            lines.append("  {" + ", ".join(m["members"]) + "}")
        c = report.get("closure")
        if c is not None:
            lines.append(f"environment inputs: {', '.join(c['environment_inputs']) or '(none)'}")
            ev = c["evidence"]
            lines.append(f"functionally closed: {_yes(c['closed'])}"
                         + (" via {" + ", ".join(ev["members"]) + "}" if ev else ""))
    elif cmd == "verify":
        lines.append(f"seed: {report['seed']}")
        lines.extend(_battery_text("identities", report["identities"]))
        lines.extend(_battery_text("derivation", report["derivation"]))
    for w in report.get("warnings", []):
        lines.append(f"warning [{w['code']}] step {w.get('step', '-')}: {w['message']}")
    lines.append(f"result: {report['result']}")
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    return to_json(report) if fmt == "json" else to_text(report)
