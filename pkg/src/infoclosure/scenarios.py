"""Scenario files and the bundled reference scenarios.

A scenario file is a JSON object::

    {
      "name": "copy",
      "variables": [{"name": "s", "alphabet": ["0", "1"]}, ...],
      "partition": {"soi": ["s"], "inner_env": ["i"], "outer_env": ["e"]},
      "initial": [{"outcome": [...context labels, ...env labels], "p": 0.5}, ...],
      "context_kernel": [{"given": [...context, ...env], "next": [{"outcome": [...], "p": 1.0}]}],
      "env_kernel": [ same keying, "next" outcomes over the outer environment ],
      "factored_context": {"soi_kernel": [...], "inner_kernel": [...]},   # optional
      "horizon_limit": 10000                                             # optional
    }

Every (context, env) pair needs exactly one row in each kernel. With
``factored_context`` present, ``context_kernel`` may be omitted.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ArgumentError, SchemaError, UnknownNameError
from .model import (
    DEFAULT_HORIZON_LIMIT,
    FactoredContext,
    MarkovScenario,
    SystemPartition,
    scenario_from_functions,
)
from .probability import FILE_ATOL, JointDistribution, Variable

BUNDLED = ("copy", "decoupled", "driven")


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def fingerprint(scenario: MarkovScenario) -> str:
    """sha256 over the canonical JSON of the scenario's normalized content."""
    return "sha256:" + hashlib.sha256(canonical_json(scenario.to_dict()).encode()).hexdigest()


def _rows_to_kernel(rows, partition, targets, where):
    sc, eo = partition.context_states(), partition.outer_states()
    given_index = {s + e: (i, j) for i, s in enumerate(sc) for j, e in enumerate(eo)}
    target_states = list(itertools.product(*(v.alphabet for v in targets)))
    target_index = {t: k for k, t in enumerate(target_states)}
    kernel = np.zeros((len(sc), len(eo), len(target_states)))
    seen = set()
    if not isinstance(rows, list):
        raise SchemaError("kernel must be a list of rows", where)
    for r, row in enumerate(rows):
        loc = f"{where}[{r}]"
        try:
            given = tuple(str(x) for x in row["given"])
            nxt = row["next"]
        except (KeyError, TypeError):
            raise SchemaError("row needs 'given' and 'next'", loc) from None
        if given not in given_index:
            raise SchemaError(f"unknown conditioning outcome {list(given)}", loc)
        if given in seen:
            raise SchemaError(f"duplicate row for {list(given)}", loc)
        seen.add(given)
        i, j = given_index[given]
        for m, entry in enumerate(nxt):
            try:
                t = tuple(str(x) for x in entry["outcome"])
                p = float(entry["p"])
            except (KeyError, TypeError, ValueError):
                raise SchemaError("entry needs 'outcome' and numeric 'p'", f"{loc}.next[{m}]") from None
            if t not in target_index:
                raise SchemaError(f"unknown next outcome {list(t)}", f"{loc}.next[{m}]")
            kernel[i, j, target_index[t]] += p
    missing = [list(g) for g in given_index if g not in seen]
    if missing:
        raise SchemaError(f"{len(missing)} conditioning outcomes have no row, e.g. {missing[0]}", where)
    return kernel


def scenario_from_dict(data, where: str = "$") -> MarkovScenario:
    if not isinstance(data, dict):
        raise SchemaError("scenario must be a JSON object", where)
    try:
        variables = {}
        for k, v in enumerate(data["variables"]):
            var = Variable(v["name"], tuple(v["alphabet"]))
            if var.name in variables:
                raise SchemaError(f"duplicate variable {var.name!r}", f"{where}.variables[{k}]")
            variables[var.name] = var
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed variables list ({exc})", f"{where}.variables") from None
    except ArgumentError as exc:
        raise SchemaError(str(exc), f"{where}.variables") from None

    part = data.get("partition")
    if not isinstance(part, dict):
        raise SchemaError("missing partition object", f"{where}.partition")
    groups = {}
    for key in ("soi", "inner_env", "outer_env"):
        names = part.get(key, [] if key == "outer_env" else None)
        if names is None:
            raise SchemaError(f"missing {key!r}", f"{where}.partition")
        try:
            groups[key] = tuple(variables[n] for n in names)
        except KeyError as exc:
            raise SchemaError(f"undeclared variable {exc}", f"{where}.partition.{key}") from None
    try:
        partition = SystemPartition(groups["soi"], groups["inner_env"], groups["outer_env"])
    except ArgumentError as exc:
        raise SchemaError(str(exc), f"{where}.partition") from None
    unused = set(variables) - {v.name for v in partition.universe}
    if unused:
        raise SchemaError(f"variables not assigned to the partition: {sorted(unused)}", f"{where}.partition")

    try:
        mass = [(tuple(m["outcome"]), float(m["p"])) for m in data["initial"]]
        initial = JointDistribution.from_mass(partition.context + partition.outer_env, mass,
                                              atol=FILE_ATOL)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed initial mass table ({exc})", f"{where}.initial") from None
    except (ArgumentError, UnknownNameError) as exc:
        raise SchemaError(str(exc), f"{where}.initial") from None

    env_kernel = _rows_to_kernel(data.get("env_kernel"), partition, partition.outer_env,
                                 f"{where}.env_kernel")
    context_kernel = None
    if "context_kernel" in data:
        context_kernel = _rows_to_kernel(data["context_kernel"], partition, partition.context,
                                         f"{where}.context_kernel")
    factored = None
    if data.get("factored_context") is not None:
        fc = data["factored_context"]
        n0 = int(np.prod([v.size for v in partition.soi]))
        ni = int(np.prod([v.size for v in partition.inner_env]))
        ne = partition.outer_size
        a = _rows_to_kernel(fc.get("soi_kernel"), partition, partition.soi,
                            f"{where}.factored_context.soi_kernel")
        b = _rows_to_kernel(fc.get("inner_kernel"), partition, partition.inner_env,
                            f"{where}.factored_context.inner_kernel")
        factored = FactoredContext(a.reshape(n0, ni, ne, n0), b.reshape(n0, ni, ne, ni))
    elif context_kernel is None:
        raise SchemaError("missing context_kernel", where)
    return MarkovScenario(partition, initial, context_kernel, env_kernel, factored=factored,
                          name=str(data.get("name", "")),
                          horizon_limit=int(data.get("horizon_limit", DEFAULT_HORIZON_LIMIT)))


def load_scenario(path) -> MarkovScenario:
    """Load a scenario file, or a bundled scenario by name (``copy`` etc.)."""
    if str(path) in BUNDLED and not Path(path).exists():
        text = resources.files("infoclosure.data").joinpath(f"{path}.json").read_text()
        return scenario_from_dict(json.loads(text), where=str(path))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read scenario: {exc.strerror}", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    return scenario_from_dict(data, where=str(path))


def save_scenario(scenario: MarkovScenario, path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2) + "\n")


# -- reference scenarios -----------------------------------------------------

def _bit(x) -> str:
    return str(int(x) % 2)


def copy_scenario() -> MarkovScenario:
    """Binary context whose outer environment copies it.

    The context is a single bit ``s`` (the inner environment is a one-symbol
    placeholder). Dynamics: ``e' = s`` and ``s' = s xor e``. Starting from a
    uniform ``s`` and ``e = 0`` the chain cycles with period 3; at step 1 the
    environment is an exact copy of a uniform state.
    """
    s, i, e = Variable("s", 2), Variable("i", ("0",)), Variable("e", 2)
    part = SystemPartition((s,), (i,), (e,))
    return scenario_from_functions(
        part, {("0", "0", "0"): 0.5, ("1", "0", "0"): 0.5},
        context_fn=lambda sc, eo: {(_bit(int(sc[0]) ^ int(eo[0])), "0"): 1.0},
        env_fn=lambda sc, eo: {(sc[0],): 1.0},
        name="copy")


def decoupled_scenario() -> MarkovScenario:
    """Context dynamics that ignore the environment; environment is i.i.d. noise.

    ``s' = s xor i``; ``i`` persists with probability 0.75; ``e'`` is a
    Bernoulli(0.3) draw independent of everything. The initial state is a
    product distribution, so context and environment stay independent.
    """
    s, i, e = Variable("s", 2), Variable("i", 2), Variable("e", 2)
    part = SystemPartition((s,), (i,), (e,))
    init = {}
    for a, b, c in itertools.product("01", repeat=3):
        init[(a, b, c)] = 0.5 * (0.25 if b == "1" else 0.75) * 0.5

    def ctx(sc, eo):
        nxt = _bit(int(sc[0]) ^ int(sc[1]))
        return {(nxt, sc[1]): 0.75, (nxt, _bit(int(sc[1]) + 1)): 0.25}

    return scenario_from_functions(part, init, ctx, lambda sc, eo: {("0",): 0.7, ("1",): 0.3},
                                   name="decoupled")


def driven_scenario() -> MarkovScenario:
    """Context state is flipped by fresh environment noise every step.

    ``s' = s xor e`` with ``e`` a fresh fair bit; the inner environment records
    the previous ``s`` (``i' = s``). Informationally open.
    """
    s, i, e = Variable("s", 2), Variable("i", 2), Variable("e", 2)
    part = SystemPartition((s,), (i,), (e,))
    init = {o: 0.125 for o in itertools.product("01", repeat=3)}
    return scenario_from_functions(
        part, init,
        context_fn=lambda sc, eo: {(_bit(int(sc[0]) ^ int(eo[0])), sc[0]): 1.0},
        env_fn=lambda sc, eo: {("0",): 0.5, ("1",): 0.5},
        name="driven")


BUILDERS = {"copy": copy_scenario, "decoupled": decoupled_scenario, "driven": driven_scenario}


def bundled(name: str) -> MarkovScenario:
    try:
        return BUILDERS[name]()
    except KeyError:
        raise UnknownNameError(f"no bundled scenario {name!r}; have {list(BUNDLED)}") from None
