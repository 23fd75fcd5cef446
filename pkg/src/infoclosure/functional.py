"""Functional dependency and minimal determining input sets on total tables.

A :class:`FunctionTable` maps every tuple of the input Cartesian product to
one output label. An input set *determines* the output when fixing its values
fixes the output. Minimal sets are found breadth-first over the subset
lattice: sets are visited by increasing size and any candidate containing an
already-found minimal set is skipped.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ArgumentError, LimitError, SchemaError, UnknownNameError
from .probability import Variable

DEFAULT_ARITY_LIMIT = 20


class FunctionTable:
    """Total single-output function over finite inputs.

    ``outputs`` is an integer array indexed by input label indices, holding
    the index of the output label.
    """

    def __init__(self, input_vars: Sequence[Variable], output_var: Variable, outputs):
        self.input_vars = tuple(input_vars)
        self.output_var = output_var
        names = [v.name for v in self.input_vars] + [output_var.name]
        if len(set(names)) != len(names):
            raise ArgumentError(f"duplicate column names in {names}")
        shape = tuple(v.size for v in self.input_vars)
        arr = np.asarray(outputs, dtype=np.int64)
        if arr.shape != shape:
            raise ArgumentError(f"outputs have shape {arr.shape}, expected {shape}")
        if arr.size and (arr.min() < 0 or arr.max() >= output_var.size):
            raise ArgumentError("output index outside the output alphabet")
        arr.setflags(write=False)
        self.outputs = arr

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.input_vars)

    @property
    def arity(self) -> int:
        return len(self.input_vars)

    def axes(self, names: Iterable[str]) -> list[int]:
        index = {n: i for i, n in enumerate(self.input_names)}
        try:
            return sorted(index[n] for n in names)
        except KeyError as exc:
            raise UnknownNameError(f"unknown input {exc.args[0]!r}; have {list(self.input_names)}") from None

    def rows(self):
        """Yield ``(input_labels, output_label)`` in row-major input order."""
        alphabets = [v.alphabet for v in self.input_vars]
        for labels, out in zip(itertools.product(*alphabets), self.outputs.ravel()):
            yield labels, self.output_var.alphabet[out]

    def relabeled(self, mapping) -> "FunctionTable":
        """Bijectively rename labels; ``mapping[var][old] = new``."""
        def rename(v):
            m = mapping.get(v.name, {})
            return Variable(v.name, tuple(m.get(a, a) for a in v.alphabet))
        return FunctionTable([rename(v) for v in self.input_vars], rename(self.output_var), self.outputs)

    @classmethod
    def from_function(cls, input_vars: Sequence[Variable], output_var: Variable,
                      fn: Callable) -> "FunctionTable":
        """Tabulate ``fn(*input_labels) -> output_label``."""
        input_vars = tuple(input_vars)
        out = np.empty(tuple(v.size for v in input_vars), dtype=np.int64)
        for idx in itertools.product(*(range(v.size) for v in input_vars)):
            labels = [v.alphabet[i] for v, i in zip(input_vars, idx)]
            out[idx] = output_var.index(fn(*labels))
        return cls(input_vars, output_var, out)

    @classmethod
    def from_rows(cls, input_vars: Sequence[Variable], output_var: Variable, rows,
                  where: str = "$", first_line: int = 0) -> "FunctionTable":
        """Strict totality: every input tuple exactly once."""
        input_vars = tuple(input_vars)
        shape = tuple(v.size for v in input_vars)
        out = np.full(shape, -1, dtype=np.int64)
        for k, (labels, y) in enumerate(rows):
            loc = f"{where}:{k + first_line}"
            try:
                idx = tuple(v.index(l) for v, l in zip(input_vars, labels))
                yi = output_var.index(y)
            except UnknownNameError as exc:
                raise SchemaError(str(exc), loc) from None
            if out[idx] >= 0:
                raise SchemaError(f"input tuple {list(labels)} appears more than once", loc)
            out[idx] = yi
        if (out < 0).any():
            missing = np.argwhere(out < 0)[0]
            labels = [v.alphabet[i] for v, i in zip(input_vars, missing)]
            raise SchemaError(f"table is not total: no row for input {labels}", where)
        return cls(input_vars, output_var, out)

    @classmethod
    def load_csv(cls, path) -> "FunctionTable":
        """Header: input names then the output name. Alphabets are the sorted observed labels."""
        path = Path(path)
        try:
            with path.open(newline="") as fh:
                data = list(csv.reader(fh))
        except OSError as exc:
            raise SchemaError(f"cannot read table: {exc.strerror}", str(path)) from None
        if not data or len(data[0]) < 1:
            raise SchemaError("missing header", f"{path}:1")
        header = [h.strip() for h in data[0]]
        body = [r for r in data[1:] if r]
        for k, r in enumerate(body):
            if len(r) != len(header):
                raise SchemaError(f"expected {len(header)} fields, got {len(r)}", f"{path}:{k + 2}")
        cols = list(zip(*body)) if body else [()] * len(header)
        try:
            variables = [Variable(name, tuple(sorted({x.strip() for x in col})) or ("",))
                         for name, col in zip(header, cols)]
        except ArgumentError as exc:
            raise SchemaError(str(exc), f"{path}:1") from None
        rows = [([x.strip() for x in r[:-1]], r[-1].strip()) for r in body]
        return cls.from_rows(variables[:-1], variables[-1], rows, where=str(path), first_line=2)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(list(self.input_names) + [self.output_var.name])
            for labels, y in self.rows():
                w.writerow(list(labels) + [y])


def _determined(outputs: np.ndarray, axes: Sequence[int]) -> bool:
    rest = [i for i in range(outputs.ndim) if i not in axes]
    arr = np.transpose(outputs, list(axes) + rest)
    n_keep = math.prod(outputs.shape[i] for i in axes)
    arr = arr.reshape(n_keep, -1)
    return bool((arr == arr[:, :1]).all())


def is_functionally_dependent(table: FunctionTable, candidate: Iterable[str]) -> bool:
    """True when the output is a well-defined function of ``candidate`` alone."""
    return _determined(table.outputs, table.axes(candidate))


@dataclass(frozen=True)
class MinimalInputSet:
    """An inclusion-minimal determining input set.

    ``witnesses`` maps each member to two input rows that agree on every
    other member yet produce different outputs, so dropping that member
    breaks the dependency. Inputs outside the set are covered by the
    exhaustive dependency check over the whole table.
    """

    members: tuple
    witnesses: dict = field(default_factory=dict, compare=False)
    certificate: str = field(default="exhaustive", compare=False)

    def __contains__(self, name) -> bool:
        return name in self.members

    def to_dict(self) -> dict:
        return {"members": list(self.members),
                "witnesses": {m: [list(a), list(b)] for m, (a, b) in self.witnesses.items()},
                "certificate": self.certificate}


def _witness(table: FunctionTable, axes: list[int], drop: int):
    keep = [a for a in axes if a != drop]
    rest = [i for i in range(table.arity) if i not in keep]
    arr = np.transpose(table.outputs, keep + rest)
    shape_keep = [table.outputs.shape[i] for i in keep]
    shape_rest = [table.outputs.shape[i] for i in rest]
    flat = arr.reshape(math.prod(shape_keep), -1)
    bad = np.nonzero((flat != flat[:, :1]).any(axis=1))[0]
    if bad.size == 0:
        return None
    r = int(bad[0])
    c = int(np.nonzero(flat[r] != flat[r, 0])[0][0])

    def labels(col):
        idx = [0] * table.arity
        for ax, i in zip(keep, np.unravel_index(r, shape_keep) if keep else ()):
            idx[ax] = int(i)
        for ax, i in zip(rest, np.unravel_index(col, shape_rest)):
            idx[ax] = int(i)
        return tuple(v.alphabet[i] for v, i in zip(table.input_vars, idx))

    return labels(0), labels(c)


def _make_set(table: FunctionTable, axes: list[int]) -> MinimalInputSet:
    names = table.input_names
    witnesses = {names[a]: _witness(table, axes, a) for a in axes}
    return MinimalInputSet(tuple(sorted(names[a] for a in axes)), witnesses)


def minimal_input_sets(table: FunctionTable, arity_limit: int = DEFAULT_ARITY_LIMIT) -> list[MinimalInputSet]:
    """All inclusion-minimal determining sets, sorted lexicographically by member names."""
    if table.arity > arity_limit:
        raise LimitError(f"table has {table.arity} inputs, limit is {arity_limit}")
    found: list[frozenset] = []
    for size in range(table.arity + 1):
        for combo in itertools.combinations(range(table.arity), size):
            cs = frozenset(combo)
            if any(f <= cs for f in found):
                continue
            if _determined(table.outputs, list(combo)):
                found.append(cs)
    result = [_make_set(table, sorted(f)) for f in found]
    return sorted(result, key=lambda m: m.members)


@dataclass(frozen=True)
class FunctionalClosure:
    """Outcome of the minimal-set closure test.

    Whether the system's outputs leave the environment's state unaffected
    cannot be read off a function table; ``output_effect_checked`` is always
    False here and the scenario-level checks cover that condition.
    """

    closed: bool
    evidence: MinimalInputSet | None
    minimal_sets: list
    environment_inputs: tuple
    output_effect_checked: bool = False

    def __bool__(self):
        return self.closed

    def to_dict(self) -> dict:
        return {
            "closed": self.closed,
            "environment_inputs": list(self.environment_inputs),
            "evidence": None if self.evidence is None else self.evidence.to_dict(),
            "minimal_sets": [m.to_dict() for m in self.minimal_sets],
            "output_effect_checked": self.output_effect_checked,
        }


def is_functionally_closed(table: FunctionTable, environment_inputs: Iterable[str],
                           arity_limit: int = DEFAULT_ARITY_LIMIT) -> FunctionalClosure:
    """Closed when some minimal set avoids every environment input.

    The evidence is the first qualifying set in lexicographic order, shorter
    sets first among equal prefixes.
    """
    env = tuple(sorted(set(environment_inputs)))
    table.axes(env)
    sets = minimal_input_sets(table, arity_limit)
    clean = [m for m in sets if not set(m.members) & set(env)]
    evidence = min(clean, key=lambda m: (m.members, len(m.members))) if clean else None
    return FunctionalClosure(evidence is not None, evidence, sets, env)


def random_table(rng: np.random.Generator, arity: int, sizes: Sequence[int] | None = None,
                 n_relevant: int | None = None, output_size: int | None = None) -> FunctionTable:
    """Random table whose output depends on a random subset of the inputs.

    The output is a uniformly random function of the chosen subset, so a few
    chosen inputs may still turn out irrelevant.
    """
    if sizes is None:
        sizes = [int(rng.integers(2, 4)) for _ in range(arity)]
    inputs = [Variable(f"x{i + 1}", int(k)) for i, k in enumerate(sizes)]
    if n_relevant is None:
        n_relevant = int(rng.integers(0, min(arity, 5) + 1))
    relevant = sorted(rng.choice(arity, size=n_relevant, replace=False).tolist())
    if output_size is None:
        output_size = int(rng.integers(2, 5))
    sub_shape = [sizes[i] for i in relevant]
    sub = rng.integers(0, output_size, size=sub_shape) if relevant else rng.integers(0, output_size)
    grids = np.indices(sizes)
    outputs = sub[tuple(grids[i] for i in relevant)] if relevant else np.full(sizes, sub)
    return FunctionTable(inputs, Variable("y", output_size), outputs)
