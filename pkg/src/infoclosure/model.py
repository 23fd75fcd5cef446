"""Partitioned system model and its coupled Markov dynamics.

The universe is split into the system of interest, the inner environment and
the outer environment. The context system is the system of interest together
with the inner environment. A :class:`MarkovScenario` evolves the pair
(context state, outer-environment state) with a time-homogeneous kernel that
factorizes as ``P(s'|s,e) * P(e'|s,e)``.

Composite states are addressed by a flat row-major index over the member
variables in declared order (system of interest first, then inner
environment).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ArgumentError, LimitError, SchemaError, UnsupportedViewError
from .probability import MAX_OUTCOMES, JointDistribution, Variable

KERNEL_ATOL = 1e-12
PROPAGATION_ATOL = 1e-9
DEFAULT_HORIZON_LIMIT = 10_000
NEXT_SUFFIX = "'"


@dataclass(frozen=True)
class Boundary:
    """Context variables versus outer-environment variables.

    All closure measures only need this split; :class:`SystemPartition`
    refines the context side into system of interest and inner environment.
    """

    context: tuple
    outer_env: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "context", tuple(self.context))
        object.__setattr__(self, "outer_env", tuple(self.outer_env))
        if not self.context:
            raise ArgumentError("context must contain at least one variable")
        names = [v.name for v in self.context + self.outer_env]
        if len(set(names)) != len(names):
            raise ArgumentError(f"duplicate variable names in {names}")

    @property
    def context_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.context)

    @property
    def outer_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.outer_env)

    @property
    def next_names(self) -> tuple[str, ...]:
        return tuple(n + NEXT_SUFFIX for n in self.context_names)

    @property
    def context_size(self) -> int:
        return math.prod(v.size for v in self.context)

    @property
    def outer_size(self) -> int:
        return math.prod(v.size for v in self.outer_env)

    def context_states(self) -> list[tuple[str, ...]]:
        return list(itertools.product(*(v.alphabet for v in self.context)))

    def outer_states(self) -> list[tuple[str, ...]]:
        return list(itertools.product(*(v.alphabet for v in self.outer_env)))

    def closure_variables(self) -> tuple:
        """Variables of the (context, env, next context) joint, in that order."""
        nxt = tuple(v.renamed(v.name + NEXT_SUFFIX) for v in self.context)
        return self.context + self.outer_env + nxt


@dataclass(frozen=True)
class SystemPartition:
    """Assignment of variables to the system of interest and both environments."""

    soi: tuple
    inner_env: tuple
    outer_env: tuple = ()

    def __post_init__(self):
        for attr in ("soi", "inner_env", "outer_env"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if not self.inner_env:
            raise ArgumentError("inner environment must be non-empty")
        names = [v.name for v in self.universe]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ArgumentError(f"partition groups overlap on {dup}")
        if any(n.endswith(NEXT_SUFFIX) for n in names):
            raise ArgumentError(f"variable names may not end with {NEXT_SUFFIX!r}")

    @property
    def context(self) -> tuple:
        return self.soi + self.inner_env

    @property
    def environment(self) -> tuple:
        return self.inner_env + self.outer_env

    @property
    def universe(self) -> tuple:
        return self.soi + self.inner_env + self.outer_env

    @property
    def boundary(self) -> Boundary:
        return Boundary(self.context, self.outer_env)

    context_names = Boundary.context_names
    outer_names = Boundary.outer_names
    next_names = Boundary.next_names
    context_size = Boundary.context_size
    outer_size = Boundary.outer_size
    context_states = Boundary.context_states
    outer_states = Boundary.outer_states
    closure_variables = Boundary.closure_variables

    def to_dict(self) -> dict:
        return {"soi": [v.name for v in self.soi],
                "inner_env": [v.name for v in self.inner_env],
                "outer_env": [v.name for v in self.outer_env]}


@dataclass(frozen=True)
class FactoredContext:
    """Context dynamics authored per component.

    ``soi_kernel[s0, ei, e, s0']`` and ``inner_kernel[s0, ei, e, ei']`` are
    conditionally independent given the current pair; :meth:`compose` gives
    the flat context kernel.
    """

    soi_kernel: np.ndarray
    inner_kernel: np.ndarray

    def compose(self) -> np.ndarray:
        a, b = self.soi_kernel, self.inner_kernel
        n_soi, n_inner, n_env = a.shape[0], a.shape[1], a.shape[2]
        k = np.einsum("ijka,ijkb->ijkab", a, b)
        # (s0, ei, e, s0', ei') -> (s^C, e, s^C')
        return k.reshape(n_soi * n_inner, n_env, n_soi * n_inner)


def _check_kernel(kernel: np.ndarray, shape: tuple, label: str) -> np.ndarray:
    kernel = np.array(kernel, dtype=float)
    if kernel.shape != shape:
        raise SchemaError(f"{label} has shape {kernel.shape}, expected {shape}")
    if not np.all(np.isfinite(kernel)) or np.any(kernel < 0):
        raise SchemaError(f"{label} has negative or non-finite entries")
    sums = kernel.sum(axis=-1)
    bad = np.argwhere(np.abs(sums - 1.0) > KERNEL_ATOL)
    if bad.size:
        raise SchemaError(f"{label} row {tuple(int(i) for i in bad[0])} sums to "
                          f"{sums[tuple(bad[0])]!r}, not 1")
    kernel.setflags(write=False)
    return kernel


class MarkovScenario:
    """Initial joint of (context, outer env) plus the two transition kernels.

    ``context_kernel[s, e, s']`` is P(s'|s,e) and ``env_kernel[s, e, e']`` is
    P(e'|s,e), with flat indices as described in the module docstring.
    """

    def __init__(self, partition: SystemPartition, initial: JointDistribution,
                 context_kernel=None, env_kernel=None, factored: FactoredContext | None = None,
                 name: str = "", horizon_limit: int = DEFAULT_HORIZON_LIMIT):
        self.partition = partition
        self.name = name
        self.horizon_limit = int(horizon_limit)
        n_s, n_e = partition.context_size, partition.outer_size
        if n_s * n_e > MAX_OUTCOMES:
            raise LimitError(f"state space {n_s * n_e} exceeds limit {MAX_OUTCOMES}")
        expected = tuple(v.name for v in partition.context + partition.outer_env)
        if initial.names != expected:
            raise SchemaError(f"initial distribution is over {list(initial.names)}, "
                              f"expected {list(expected)}")
        if tuple(initial.variables) != partition.context + partition.outer_env:
            raise SchemaError("initial distribution alphabets do not match the partition")
        self.initial = initial
        if factored is not None:
            n0 = math.prod(v.size for v in partition.soi)
            ni = math.prod(v.size for v in partition.inner_env)
            factored = FactoredContext(
                _check_kernel(factored.soi_kernel, (n0, ni, n_e, n0), "soi_kernel"),
                _check_kernel(factored.inner_kernel, (n0, ni, n_e, ni), "inner_kernel"))
            composed = factored.compose()
            if context_kernel is None:
                context_kernel = composed
            elif not np.allclose(context_kernel, composed, rtol=0, atol=KERNEL_ATOL):
                raise SchemaError("context_kernel disagrees with factored_context")
        if context_kernel is None or env_kernel is None:
            raise SchemaError("scenario needs both a context kernel and an environment kernel")
        self.factored = factored
        self.context_kernel = _check_kernel(context_kernel, (n_s, n_e, n_s), "context_kernel")
        self.env_kernel = _check_kernel(env_kernel, (n_s, n_e, n_e), "env_kernel")

    def __repr__(self):
        return f"MarkovScenario({self.name!r}, |S^C|={self.partition.context_size}, " \
               f"|E^O|={self.partition.outer_size})"

    @property
    def initial_matrix(self) -> np.ndarray:
        p = self.partition
        return self.initial.table.reshape(p.context_size, p.outer_size)

    def step_matrix(self, pi: np.ndarray) -> np.ndarray:
        """One application of the joint kernel to a (context, env) matrix."""
        return np.einsum("se,sea,seb->ab", pi, self.context_kernel, self.env_kernel,
                         optimize=True)

    def check_step(self, n: int) -> int:
        n = int(n)
        if n < 0:
            raise ArgumentError(f"step must be non-negative, got {n}")
        if n > self.horizon_limit:
            raise LimitError(f"step {n} exceeds horizon limit {self.horizon_limit}")
        return n

    def with_initial(self, initial: JointDistribution) -> "MarkovScenario":
        return MarkovScenario(self.partition, initial, self.context_kernel, self.env_kernel,
                              self.factored, self.name, self.horizon_limit)

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        p = self.partition
        sc, eo = p.context_states(), p.outer_states()
        so = list(itertools.product(*(v.alphabet for v in p.soi)))
        ie = list(itertools.product(*(v.alphabet for v in p.inner_env)))

        def rows(kernel, targets):
            out = []
            for i, s in enumerate(sc):
                for j, e in enumerate(eo):
                    nxt = [{"outcome": list(t), "p": float(kernel[i, j, k])}
                           for k, t in enumerate(targets) if kernel[i, j, k] > 0]
                    out.append({"given": list(s + e), "next": nxt})
            return out

        data = {
            "name": self.name,
            "variables": [v.to_dict() for v in p.universe],
            "partition": p.to_dict(),
            "initial": self.initial.to_dict()["mass"],
            "env_kernel": rows(self.env_kernel, eo),
        }
        if self.factored is None:
            data["context_kernel"] = rows(self.context_kernel, sc)
        else:
            n_i = len(ie)
            a = self.factored.soi_kernel.reshape(len(sc), len(eo), len(so))
            b = self.factored.inner_kernel.reshape(len(sc), len(eo), n_i)
            data["factored_context"] = {"soi_kernel": rows(a, so), "inner_kernel": rows(b, ie)}
        if self.horizon_limit != DEFAULT_HORIZON_LIMIT:
            data["horizon_limit"] = self.horizon_limit
        return data


def propagate_matrix(scenario: MarkovScenario, n: int) -> np.ndarray:
    n = scenario.check_step(n)
    pi = scenario.initial_matrix
    for _ in range(n):
        pi = scenario.step_matrix(pi)
    return pi


def propagate(scenario: MarkovScenario, n: int) -> JointDistribution:
    """Distribution of (context, outer env) at step ``n``."""
    pi = propagate_matrix(scenario, n)
    p = scenario.partition
    return JointDistribution(p.context + p.outer_env, pi, atol=PROPAGATION_ATOL)


def iter_marginals(scenario: MarkovScenario, start: int, stop: int):
    """Yield ``(n, pi_n)`` matrices for ``start <= n <= stop`` in one pass."""
    scenario.check_step(stop)
    pi = propagate_matrix(scenario, start)
    for n in range(start, stop + 1):
        yield n, pi
        if n < stop:
            pi = scenario.step_matrix(pi)


def closure_joint_from_matrix(scenario: MarkovScenario, pi: np.ndarray) -> JointDistribution:
    table = pi[:, :, None] * scenario.context_kernel
    return JointDistribution(scenario.partition.closure_variables(), table, atol=PROPAGATION_ATOL)


def closure_joint(scenario: MarkovScenario, n: int) -> JointDistribution:
    """Joint of (context at n, outer env at n, context at n+1).

    Next-step context variables carry a trailing ``'`` in their names.
    """
    return closure_joint_from_matrix(scenario, propagate_matrix(scenario, n))


def factor_context(scenario: MarkovScenario) -> FactoredContext:
    if scenario.factored is None:
        raise UnsupportedViewError(f"scenario {scenario.name!r} was authored with a flat "
                                   "context kernel; no factored view available")
    return scenario.factored


# -- builders ----------------------------------------------------------------

Dist = Mapping[tuple, float]


def _kernel_from_fn(partition: SystemPartition, fn: Callable, targets: Sequence[Variable]) -> np.ndarray:
    """Tabulate ``fn(context_labels, env_labels) -> {target_labels: p}``."""
    target_states = list(itertools.product(*(v.alphabet for v in targets)))
    index = {t: k for k, t in enumerate(target_states)}
    sc, eo = partition.context_states(), partition.outer_states()
    out = np.zeros((len(sc), len(eo), len(target_states)))
    for i, s in enumerate(sc):
        for j, e in enumerate(eo):
            for t, prob in fn(s, e).items():
                t = (t,) if isinstance(t, (str, int)) else t
                out[i, j, index[tuple(str(x) for x in t)]] += prob
    return out


def scenario_from_functions(partition: SystemPartition, initial: Dist | JointDistribution,
                            context_fn: Callable, env_fn: Callable, name: str = "",
                            **kwargs) -> MarkovScenario:
    """Build a scenario from Python callables over alphabet labels.

    ``context_fn(s, e)`` returns ``{next_context_labels: p}`` and
    ``env_fn(s, e)`` returns ``{next_env_labels: p}``; ``s`` and ``e`` are
    label tuples. ``initial`` maps (context + env) label tuples to mass.
    """
    if not isinstance(initial, JointDistribution):
        initial = JointDistribution.from_mass(partition.context + partition.outer_env, initial)
    ck = _kernel_from_fn(partition, context_fn, partition.context)
    ek = _kernel_from_fn(partition, env_fn, partition.outer_env)
    return MarkovScenario(partition, initial, ck, ek, name=name, **kwargs)


def factored_scenario(partition: SystemPartition, initial: Dist | JointDistribution,
                      soi_fn: Callable, inner_fn: Callable, env_fn: Callable,
                      name: str = "", **kwargs) -> MarkovScenario:
    """Like :func:`scenario_from_functions` with the context split per component."""
    if not isinstance(initial, JointDistribution):
        initial = JointDistribution.from_mass(partition.context + partition.outer_env, initial)
    n0 = math.prod(v.size for v in partition.soi)
    ni = math.prod(v.size for v in partition.inner_env)
    ne = partition.outer_size
    a = _kernel_from_fn(partition, soi_fn, partition.soi).reshape(n0, ni, ne, n0)
    b = _kernel_from_fn(partition, inner_fn, partition.inner_env).reshape(n0, ni, ne, ni)
    ek = _kernel_from_fn(partition, env_fn, partition.outer_env)
    return MarkovScenario(partition, initial, None, ek, factored=FactoredContext(a, b),
                          name=name, **kwargs)
