"""Monte Carlo trajectories and plug-in estimates of the closure measures.

Sampling uses numpy's Philox counter-based generator keyed by the seed.
Uniform draws are consumed in trajectory-major order, two per step (context
draw, environment draw; at step 0 the first draw picks the initial joint
state). Chunking does not change the stream, so results depend only on
(scenario, count, horizon, seed).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .closure import ClosureMeasures, measure_joint
from .errors import ArgumentError, LimitError, SchemaError
from .model import Boundary, MarkovScenario
from .probability import JointDistribution, Variable
from .scenarios import fingerprint

SAMPLER_ALGORITHM = "numpy.Philox4x64/trajectory-major/inverse-cdf/v1"
PLUG_IN = "plug_in"
MILLER_MADOW = "miller_madow"
ESTIMATORS = (PLUG_IN, MILLER_MADOW)
_CHUNK = 1 << 14


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    """Sampled or ingested paths over steps ``0..horizon``.

    ``context`` and ``outer`` hold flat state indices with shape
    ``(count, horizon + 1)``.
    """

    boundary: Boundary
    context: np.ndarray
    outer: np.ndarray
    seed: int | None = None
    fingerprint: str | None = None
    algorithm: str | None = None

    @property
    def count(self) -> int:
        return self.context.shape[0]

    @property
    def horizon(self) -> int:
        return self.context.shape[1] - 1

    def __eq__(self, other):
        return (isinstance(other, TrajectorySet) and self.boundary == other.boundary
                and self.seed == other.seed and np.array_equal(self.context, other.context)
                and np.array_equal(self.outer, other.outer))

    def to_csv(self, path) -> None:
        b = self.boundary
        sc, eo = b.context_states(), b.outer_states()
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trajectory_id", "step", *b.context_names, *b.outer_names])
            for t in range(self.count):
                for n in range(self.horizon + 1):
                    w.writerow([t, n, *sc[self.context[t, n]], *eo[self.outer[t, n]]])


def _inverse_cdf(cdf: np.ndarray, last: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise inverse CDF; ``cdf`` has one row per draw."""
    idx = (cdf <= u[:, None]).sum(axis=1)
    return np.minimum(idx, last)


def sample(scenario: MarkovScenario, count: int, horizon: int, seed: int) -> TrajectorySet:
    """Draw ``count`` i.i.d. trajectories of ``horizon`` transitions."""
    if count < 1 or horizon < 1:
        raise ArgumentError("count and horizon must both be at least 1")
    scenario.check_step(horizon)
    n_s, n_e = scenario.partition.context_size, scenario.partition.outer_size
    init = scenario.initial_matrix.ravel()
    init_cdf = np.cumsum(init)
    init_last = np.nonzero(init > 0)[0][-1]
    ck = scenario.context_kernel.reshape(n_s * n_e, n_s)
    ek = scenario.env_kernel.reshape(n_s * n_e, n_e)
    ck_cdf, ek_cdf = np.cumsum(ck, axis=1), np.cumsum(ek, axis=1)
    ck_last = np.array([np.nonzero(r > 0)[0][-1] for r in ck])
    ek_last = np.array([np.nonzero(r > 0)[0][-1] for r in ek])

    gen = np.random.Generator(np.random.Philox(seed))
    ctx = np.empty((count, horizon + 1), dtype=np.int64)
    env = np.empty((count, horizon + 1), dtype=np.int64)
    for start in range(0, count, _CHUNK):
        stop = min(count, start + _CHUNK)
        u = gen.random((stop - start, horizon + 1, 2))
        j = np.searchsorted(init_cdf, u[:, 0, 0], side="right")
        j = np.minimum(j, init_last)
        s, e = j // n_e, j % n_e
        ctx[start:stop, 0], env[start:stop, 0] = s, e
        for n in range(1, horizon + 1):
            row = s * n_e + e
            s = _inverse_cdf(ck_cdf[row], ck_last[row], u[:, n, 0])
            e = _inverse_cdf(ek_cdf[row], ek_last[row], u[:, n, 1])
            ctx[start:stop, n], env[start:stop, n] = s, e
    ctx.setflags(write=False)
    env.setflags(write=False)
    return TrajectorySet(scenario.partition.boundary, ctx, env, seed=int(seed),
                         fingerprint=fingerprint(scenario), algorithm=SAMPLER_ALGORITHM)


def load_trajectories(path, outer_names=(), boundary: Boundary | None = None) -> TrajectorySet:
    """Read a trajectory CSV (``trajectory_id, step, <context vars>, <outer vars>``).

    With ``boundary`` the columns must match its variables and labels are
    validated against its alphabets. Otherwise ``outer_names`` selects the
    outer-environment columns and alphabets are the sorted observed labels.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            data = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read trajectories: {exc.strerror}", str(path)) from None
    if not data:
        raise SchemaError("empty file", f"{path}:1")
    header = [h.strip() for h in data[0]]
    if header[:2] != ["trajectory_id", "step"]:
        raise SchemaError("header must start with trajectory_id,step", f"{path}:1")
    columns = header[2:]
    rows = []
    for k, r in enumerate(data[1:], start=2):
        if not r:
            continue
        if len(r) != len(header):
            raise SchemaError(f"expected {len(header)} fields, got {len(r)}", f"{path}:{k}")
        try:
            rows.append((k, r[0].strip(), int(r[1]), [x.strip() for x in r[2:]]))
        except ValueError:
            raise SchemaError(f"step {r[1]!r} is not an integer", f"{path}:{k}") from None
    if not rows:
        raise SchemaError("no trajectory rows", str(path))

    if boundary is None:
        outer_names = tuple(outer_names)
        unknown = set(outer_names) - set(columns)
        if unknown:
            raise SchemaError(f"outer-environment columns not in header: {sorted(unknown)}", f"{path}:1")
        observed = {c: sorted({r[3][i] for r in rows}) for i, c in enumerate(columns)}
        ctx_vars = [Variable(c, tuple(observed[c])) for c in columns if c not in outer_names]
        out_vars = [Variable(c, tuple(observed[c])) for c in columns if c in outer_names]
        try:
            boundary = Boundary(ctx_vars, out_vars)
        except ArgumentError as exc:
            raise SchemaError(str(exc), f"{path}:1") from None
    expected = list(boundary.context_names + boundary.outer_names)
    if columns != expected:
        raise SchemaError(f"columns {columns} do not match {expected}", f"{path}:1")

    variables = boundary.context + boundary.outer_env
    n_ctx = len(boundary.context)
    ctx_shape = [v.size for v in boundary.context]
    out_shape = [v.size for v in boundary.outer_env]
    paths: dict[str, dict[int, tuple[int, int]]] = {}
    for line, tid, step, labels in rows:
        try:
            idx = [v.index(l) for v, l in zip(variables, labels)]
        except KeyError as exc:
            raise SchemaError(str(exc), f"{path}:{line}") from None
        s = int(np.ravel_multi_index(idx[:n_ctx], ctx_shape))
        e = int(np.ravel_multi_index(idx[n_ctx:], out_shape)) if out_shape else 0
        steps = paths.setdefault(tid, {})
        if step in steps:
            raise SchemaError(f"duplicate step {step} for trajectory {tid!r}", f"{path}:{line}")
        steps[step] = (s, e)
    horizons = {max(st) for st in paths.values()}
    if len(horizons) != 1:
        raise SchemaError("trajectories have different horizons", str(path))
    horizon = horizons.pop()
    ctx = np.empty((len(paths), horizon + 1), dtype=np.int64)
    env = np.empty_like(ctx)
    for t, (tid, steps) in enumerate(paths.items()):
        if sorted(steps) != list(range(horizon + 1)):
            raise SchemaError(f"trajectory {tid!r} does not cover steps 0..{horizon}", str(path))
        for n, (s, e) in steps.items():
            ctx[t, n], env[t, n] = s, e
    return TrajectorySet(boundary, ctx, env)


@dataclass(frozen=True, eq=False)
class EmpiricalJoint:
    """Counts over (context at n, env at n, context at n+1)."""

    boundary: Boundary
    counts: np.ndarray
    step: int
    estimator: str = PLUG_IN

    @property
    def sample_size(self) -> int:
        return int(self.counts.sum())

    def distribution(self) -> JointDistribution:
        return JointDistribution(self.boundary.closure_variables(), self.counts / self.sample_size)


def empirical_closure_joint(traj: TrajectorySet, n: int, estimator: str = PLUG_IN) -> EmpiricalJoint:
    if estimator not in ESTIMATORS:
        raise ArgumentError(f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")
    if n < 0 or n + 1 > traj.horizon:
        raise LimitError(f"step {n} needs step {n + 1}, horizon is {traj.horizon}")
    b = traj.boundary
    n_s, n_e = b.context_size, b.outer_size
    flat = (traj.context[:, n] * n_e + traj.outer[:, n]) * n_s + traj.context[:, n + 1]
    counts = np.bincount(flat, minlength=n_s * n_e * n_s).reshape(n_s, n_e, n_s)
    return EmpiricalJoint(b, counts, int(n), estimator)


@dataclass(frozen=True)
class EstimatedMeasures:
    measures: ClosureMeasures
    estimator: str
    sample_size: int

    def to_dict(self) -> dict:
        return {"estimator": self.estimator, "sample_size": self.sample_size,
                "measures": self.measures.to_dict()}


def _mm_entropy(counts: np.ndarray, keep_axes: tuple, n: int) -> float:
    """Plug-in entropy of a marginal plus (m - 1) / (2 N ln 2), m = occupied cells."""
    drop = tuple(i for i in range(counts.ndim) if i not in keep_axes)
    c = counts.sum(axis=drop) if drop else counts
    c = c[c > 0]
    p = c / n
    h = 0.0 - float(np.sum(p * np.log2(p)))
    return h + (c.size - 1) / (2 * n * math.log(2)) if c.size else h


def estimate_measures(emp: EmpiricalJoint) -> EstimatedMeasures:
    """Closure measures on the empirical frequencies.

    ``plug_in`` runs the exact pipeline on the frequency table.
    ``miller_madow`` writes each measure as a sum of marginal entropies and
    bias-corrects every entropy term.
    """
    n = emp.sample_size
    if n < 1:
        raise ArgumentError("empirical joint has no samples")
    if emp.estimator == PLUG_IN:
        m = measure_joint(emp.distribution(), emp.boundary, emp.step)
        return EstimatedMeasures(m, PLUG_IN, n)

    S, E, N = 0, 1, 2  # axes of the count table: context, env, next context
    H = lambda *axes: _mm_entropy(emp.counts, axes, n)  # noqa: E731
    h_s, h_e, h_n = H(S), H(E), H(N)
    h_se, h_sn, h_en, h_sen = H(S, E), H(S, N), H(E, N), H(S, E, N)
    m = ClosureMeasures(
        step=emp.step,
        info_closure=h_sn + h_se - h_sen - h_s,
        func_closure=h_n + h_e - h_en,
        env_coupling=h_s + h_e - h_se,
        self_information=h_n + h_s - h_sn,
        next_entropy=h_n,
        coupling_lower_bound=h_sn - (h_sen - h_e),
        env_entropy=h_e,
    )
    return EstimatedMeasures(m, MILLER_MADOW, n)
