"""Seeded random fixtures and the identity battery run by ``closure verify``."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .closure import check_derivation_chain
from .measures import IdentityReport, Residual, verify_identities
from .model import MarkovScenario, SystemPartition
from .probability import JointDistribution, Variable, random_distribution
from .scenarios import bundled

DEFAULT_SEED = 20240601
IDENTITY_CASES = 1000


def random_identity_case(rng: np.random.Generator):
    """Random joint over 2-4 variables (alphabets 2-5) split into groups x, y, z.

    With two variables ``z`` is empty; otherwise each group gets at least one
    variable.
    """
    k = int(rng.integers(2, 5))
    variables = [Variable(f"v{i}", int(rng.integers(2, 6))) for i in range(k)]
    dist = random_distribution(variables, rng, sparsity=float(rng.choice([0.0, 0.0, 0.3])))
    names = [v.name for v in variables]
    rng.shuffle(names)
    if k == 2:
        return dist, [names[0]], [names[1]], []
    cuts = sorted(rng.choice(np.arange(1, k), size=2, replace=False).tolist())
    return dist, names[:cuts[0]], names[cuts[0]:cuts[1]], names[cuts[1]:]


def _random_kernel(rng, rows: int, cols: int, deterministic: bool = False) -> np.ndarray:
    if deterministic:
        k = np.zeros((rows, cols))
        k[np.arange(rows), rng.integers(0, cols, size=rows)] = 1.0
        return k
    w = rng.exponential(size=(rows, cols))
    w = np.where(rng.random((rows, cols)) < 0.2, 0.0, w)
    w[np.arange(rows), rng.integers(0, cols, size=rows)] += 1e-3
    return w / w.sum(axis=1, keepdims=True)


def random_partition(rng: np.random.Generator) -> SystemPartition:
    soi = (Variable("s0", int(rng.integers(2, 4))),)
    inner = (Variable("ei", int(rng.integers(1, 4))),)
    outer = tuple(Variable(f"eo{i}", int(rng.integers(2, 4))) for i in range(int(rng.integers(1, 3))))
    return SystemPartition(soi, inner, outer)


def random_closed_scenario(rng: np.random.Generator, kind: str | None = None) -> MarkovScenario:
    """Scenario that is informationally closed at every step by construction.

    ``kind="decoupled"``: the context kernel ignores the outer environment.
    ``kind="deterministic"``: the next context state is a function of the
    current context state. The initial joint is random (context and
    environment correlated) and the environment kernel depends on both.
    """
    if kind is None:
        kind = str(rng.choice(["decoupled", "deterministic"]))
    part = random_partition(rng)
    n_s, n_e = part.context_size, part.outer_size
    inner = _random_kernel(rng, n_s, n_s, deterministic=(kind == "deterministic"))
    ck = np.repeat(inner[:, None, :], n_e, axis=1)
    ek = _random_kernel(rng, n_s * n_e, n_e).reshape(n_s, n_e, n_e)
    init = random_distribution(part.context + part.outer_env, rng, sparsity=0.2)
    return MarkovScenario(part, init, ck, ek, name=f"random-{kind}")


def independent_scenario(rng: np.random.Generator) -> MarkovScenario:
    """Decoupled kernels in both directions and a product initial state."""
    part = random_partition(rng)
    n_s, n_e = part.context_size, part.outer_size
    ck = np.repeat(_random_kernel(rng, n_s, n_s)[:, None, :], n_e, axis=1)
    ek = np.repeat(_random_kernel(rng, n_e, n_e)[None, :, :], n_s, axis=0)
    a = random_distribution(part.context, rng)
    b = random_distribution(part.outer_env, rng)
    init = JointDistribution(part.context + part.outer_env, np.multiply.outer(a.table, b.table))
    return MarkovScenario(part, init, ck, ek, name="random-independent")


@dataclass
class BatterySummary:
    cases: int = 0
    checks: int = 0
    worst: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def add(self, label: str, residuals) -> None:
        self.cases += 1
        for r in residuals:
            if not r.applicable:
                continue
            self.checks += 1
            mag = abs(r.value) if not r.inequality else max(0.0, -r.value)
            self.worst[r.name] = max(self.worst.get(r.name, 0.0), mag)
            if not r.passed:
                self.failures.append((label, r))

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self, max_failures: int = 20) -> dict:
        return {
            "cases": self.cases,
            "checks": self.checks,
            "passed": self.passed,
            "worst": dict(sorted(self.worst.items())),
            "failure_count": len(self.failures),
            "failures": [{"case": c, **r.to_dict()} for c, r in self.failures[:max_failures]],
        }


def identity_battery(seed: int = DEFAULT_SEED, cases: int = IDENTITY_CASES,
                     tolerance: float = 1e-9) -> BatterySummary:
    """Entropy/MI identities plus non-negativity and range bounds on random joints."""
    rng = np.random.default_rng(seed)
    summary = BatterySummary()
    for k in range(cases):
        dist, x, y, z = random_identity_case(rng)
        rep = verify_identities(dist, x, y, z, tolerance)
        summary.add(f"dist[{k}]", rep.residuals + bound_checks(dist, x, y, z, tolerance))
    return summary


def bound_checks(dist, x, y, z, tolerance) -> list[Residual]:
    """Slack-style residuals for non-negativity and the log-cardinality ceiling."""
    from .measures import conditional_mutual_information, entropy, mutual_information

    out = []
    for label, g in (("x", x), ("y", y), ("z", z)):
        if not g:
            continue
        h = entropy(dist, g)
        cap = float(np.log2(np.prod([dist.variable(n).size for n in g])))
        out.append(Residual(f"entropy_nonneg_{label}", h, tolerance, inequality=True))
        out.append(Residual(f"entropy_ceiling_{label}", cap - h, tolerance, inequality=True))
    out.append(Residual("mi_nonneg", mutual_information(dist, x, y), tolerance, inequality=True))
    if z:
        out.append(Residual("cmi_nonneg", conditional_mutual_information(dist, x, y, z),
                            tolerance, inequality=True))
    return out


def derivation_battery(steps=(0, 1, 2, 3), tolerance: float = 1e-9,
                       names=("copy", "decoupled", "driven")) -> BatterySummary:
    summary = BatterySummary()
    for name, n in itertools.product(names, steps):
        summary.add(f"{name}@{n}", check_derivation_chain(bundled(name), n, tolerance))
    return summary


def run_verify(seed: int = DEFAULT_SEED, tolerance: float = 1e-9,
               cases: int = IDENTITY_CASES) -> dict:
    ident = identity_battery(seed, cases, tolerance)
    deriv = derivation_battery(tolerance=tolerance)
    return {"seed": seed, "tolerance": tolerance,
            "identities": ident.to_dict(), "derivation": deriv.to_dict(),
            "passed": ident.passed and deriv.passed}


__all__ = [
    "IdentityReport", "random_identity_case", "random_closed_scenario", "independent_scenario",
    "identity_battery", "derivation_battery", "run_verify", "DEFAULT_SEED",
]
