"""Dense finite joint distributions.

A :class:`JointDistribution` holds a probability table over the full Cartesian
product of its variables' alphabets. Axes follow the declared variable order and
each axis index maps to an alphabet label through :class:`Variable`. Zero-mass
outcomes stay in the table.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    ArgumentError,
    LimitError,
    NameCollisionError,
    NullEventError,
    SchemaError,
    UnknownNameError,
)

NORMALIZATION_ATOL = 1e-12
FILE_ATOL = 1e-9
MAX_OUTCOMES = 10**6


@dataclass(frozen=True)
class Variable:
    """A named finite random variable.

    ``alphabet`` may be given as an int ``k`` as shorthand for labels
    ``"0" .. "k-1"``. Labels are stored as strings.
    """

    name: str
    alphabet: tuple

    def __post_init__(self):
        alphabet = self.alphabet
        if isinstance(alphabet, int):
            alphabet = tuple(str(i) for i in range(alphabet))
        alphabet = tuple(str(a) for a in alphabet)
        if not self.name or not isinstance(self.name, str):
            raise ArgumentError(f"variable name must be a non-empty string, got {self.name!r}")
        if len(alphabet) < 1:
            raise ArgumentError(f"variable {self.name!r} has an empty alphabet")
        if len(set(alphabet)) != len(alphabet):
            raise ArgumentError(f"variable {self.name!r} has duplicate alphabet labels")
        object.__setattr__(self, "alphabet", alphabet)

    @property
    def size(self) -> int:
        return len(self.alphabet)

    def index(self, label) -> int:
        try:
            return self.alphabet.index(str(label))
        except ValueError:
            raise UnknownNameError(f"label {label!r} not in alphabet of {self.name!r}") from None

    def renamed(self, name: str) -> "Variable":
        return Variable(name, self.alphabet)

    def to_dict(self) -> dict:
        return {"name": self.name, "alphabet": list(self.alphabet)}


def _as_names(names) -> tuple[str, ...]:
    if isinstance(names, str):
        return (names,)
    return tuple(names)


class JointDistribution:
    """Probability table over an ordered tuple of variables.

    Instances are immutable; the backing array is marked read-only.
    """

    __slots__ = ("variables", "table", "_index")

    def __init__(self, variables: Sequence[Variable], table, atol: float = NORMALIZATION_ATOL):
        variables = tuple(variables)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise NameCollisionError(f"duplicate variable names in {names}")
        shape = tuple(v.size for v in variables)
        if math.prod(shape) > MAX_OUTCOMES:
            raise LimitError(f"outcome space {math.prod(shape)} exceeds limit {MAX_OUTCOMES}")
        arr = np.array(table, dtype=float)
        if arr.size != math.prod(shape):
            raise ArgumentError(f"table has {arr.size} entries, expected {math.prod(shape)}")
        arr = arr.reshape(shape)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ArgumentError("probabilities must be finite and non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > atol:
            raise ArgumentError(f"probabilities sum to {total!r}, not 1 within {atol}")
        arr.setflags(write=False)
        self.variables = variables
        self.table = arr
        self._index = {n: i for i, n in enumerate(names)}

    # -- construction -----------------------------------------------------
    @classmethod
    def from_mass(cls, variables: Sequence[Variable], mass: Mapping[tuple, float] | Iterable,
                  atol: float = NORMALIZATION_ATOL) -> "JointDistribution":
        """Build from ``{outcome_labels: p}``; unlisted outcomes get 0."""
        variables = tuple(variables)
        arr = np.zeros(tuple(v.size for v in variables))
        items = mass.items() if isinstance(mass, Mapping) else mass
        for outcome, p in items:
            outcome = _as_outcome(outcome)
            if len(outcome) != len(variables):
                raise ArgumentError(f"outcome {outcome!r} has wrong length")
            idx = tuple(v.index(lab) for v, lab in zip(variables, outcome))
            arr[idx] += p
        return cls(variables, arr, atol=atol)

    @classmethod
    def uniform(cls, variables: Sequence[Variable]) -> "JointDistribution":
        variables = tuple(variables)
        shape = tuple(v.size for v in variables)
        return cls(variables, np.full(shape, 1.0 / math.prod(shape)))

    @classmethod
    def point_mass(cls, variables: Sequence[Variable], outcome) -> "JointDistribution":
        return cls.from_mass(variables, {_as_outcome(outcome): 1.0})

    # -- access -----------------------------------------------------------
    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.table.shape

    def variable(self, name: str) -> Variable:
        return self.variables[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownNameError(f"unknown variable {name!r}; have {list(self.names)}") from None

    def prob(self, outcome) -> float:
        outcome = _as_outcome(outcome)
        if len(outcome) != len(self.variables):
            raise ArgumentError(f"outcome {outcome!r} has wrong length")
        return float(self.table[tuple(v.index(l) for v, l in zip(self.variables, outcome))])

    def items(self) -> Iterator[tuple[tuple[str, ...], float]]:
        """All outcomes in declared (row-major) order, including zeros."""
        alphabets = [v.alphabet for v in self.variables]
        for outcome, p in zip(itertools.product(*alphabets), self.table.ravel()):
            yield outcome, float(p)

    def marginal_table(self, names: Sequence[str]) -> np.ndarray:
        """Marginal probability array with axes in the order of ``names``."""
        names = _as_names(names)
        axes = [self.axis(n) for n in names]
        if len(set(axes)) != len(axes):
            raise ArgumentError(f"repeated variable in {names}")
        drop = tuple(i for i in range(len(self.variables)) if i not in axes)
        arr = self.table.sum(axis=drop) if drop else self.table
        kept = sorted(axes)
        return np.transpose(arr, [kept.index(a) for a in axes])

    def allclose(self, other: "JointDistribution", atol: float = 1e-12) -> bool:
        if self.variables != other.variables:
            return False
        return bool(np.allclose(self.table, other.table, rtol=0.0, atol=atol))

    def relabeled(self, mapping: Mapping[str, Mapping[str, str]]) -> "JointDistribution":
        """Rename alphabet labels bijectively; ``mapping[var][old] = new``."""
        variables = []
        for v in self.variables:
            m = mapping.get(v.name, {})
            variables.append(Variable(v.name, tuple(m.get(a, a) for a in v.alphabet)))
        return JointDistribution(variables, self.table)

    def __repr__(self):
        return f"JointDistribution({list(self.names)}, shape={self.shape})"

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "variables": [v.to_dict() for v in self.variables],
            "mass": [{"outcome": list(o), "p": p} for o, p in self.items() if p > 0],
        }

    @classmethod
    def from_dict(cls, data: Mapping, where: str = "$") -> "JointDistribution":
        try:
            variables = [Variable(v["name"], tuple(v["alphabet"])) for v in data["variables"]]
            mass = [(tuple(m["outcome"]), float(m["p"])) for m in data["mass"]]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed distribution: missing or invalid {exc}", where) from None
        try:
            return cls.from_mass(variables, mass, atol=FILE_ATOL)
        except (ArgumentError, UnknownNameError) as exc:
            raise SchemaError(str(exc), where) from None

    @classmethod
    def load(cls, path) -> "JointDistribution":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(exc.msg, f"{path}:{exc.lineno}") from None
        return cls.from_dict(data, where=str(path))


def _as_outcome(outcome) -> tuple[str, ...]:
    if isinstance(outcome, (str, int)):
        outcome = (outcome,)
    return tuple(str(x) for x in outcome)


def marginalize(dist: JointDistribution, keep: Iterable[str]) -> JointDistribution:
    """Sum out every variable not in ``keep``. Declared order is preserved."""
    keep = set(_as_names(keep))
    if not keep:
        raise ArgumentError("keep must name at least one variable")
    for name in keep:
        dist.axis(name)
    names = [n for n in dist.names if n in keep]
    return JointDistribution([dist.variable(n) for n in names], dist.marginal_table(names))


def condition(dist: JointDistribution, evidence: Mapping[str, object]) -> JointDistribution:
    """Restrict to ``evidence`` and renormalize over the unassigned variables."""
    if not evidence:
        raise ArgumentError("evidence must assign at least one variable")
    index: list = [slice(None)] * len(dist.variables)
    for name, label in evidence.items():
        ax = dist.axis(name)
        index[ax] = dist.variables[ax].index(label)
    rest = [v for v, ix in zip(dist.variables, index) if isinstance(ix, slice)]
    if not rest:
        raise ArgumentError("evidence must leave at least one variable unassigned")
    sub = dist.table[tuple(index)]
    total = float(sub.sum())
    if total <= 0.0:
        raise NullEventError(f"evidence {dict(evidence)} has probability zero")
    return JointDistribution(rest, sub / total)


def product(dist_a: JointDistribution, dist_b: JointDistribution) -> JointDistribution:
    """Independent joint of two distributions over disjoint variables."""
    clash = set(dist_a.names) & set(dist_b.names)
    if clash:
        raise NameCollisionError(f"variables appear in both factors: {sorted(clash)}")
    return JointDistribution(dist_a.variables + dist_b.variables,
                             np.multiply.outer(dist_a.table, dist_b.table))


def random_distribution(variables: Sequence[Variable], rng: np.random.Generator,
                        sparsity: float = 0.0) -> JointDistribution:
    """Dirichlet(1) table, optionally zeroing a fraction of outcomes."""
    variables = tuple(variables)
    shape = tuple(v.size for v in variables)
    w = rng.exponential(size=shape)
    if sparsity > 0:
        w = np.where(rng.random(shape) < sparsity, 0.0, w)
        if w.sum() == 0:
            w.flat[rng.integers(w.size)] = 1.0
    return JointDistribution(variables, w / w.sum())
