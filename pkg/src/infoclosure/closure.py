"""Per-step closure measures, verdicts and the checks built on them.

Notation used in comments: ``S`` is the context state at step n, ``S'`` the
context state at n+1 and ``E`` the outer environment at n. Every quantity is
evaluated on the exact joint of (S, E, S') for one step.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ArgumentError
from .measures import (
    Residual,
    clamp,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    mutual_information,
)
from .model import MarkovScenario, SystemPartition, closure_joint
from .probability import JointDistribution

EXACT_TOLERANCE = 1e-9
EMPIRICAL_TOLERANCE = 0.01


@dataclass(frozen=True)
class ClosureMeasures:
    """Raw (unclamped) information quantities for one step, in bits.

    ``coupling_lower_bound`` is H(S',S) - H(S',S|E), the quantity that bounds
    ``env_coupling`` from below for an informationally closed context.
    ``env_entropy`` is H(E), used to recognise a degenerate environment.
    """

    step: int
    info_closure: float
    func_closure: float
    env_coupling: float
    self_information: float
    next_entropy: float
    coupling_lower_bound: float
    env_entropy: float

    def to_dict(self, clamped: bool = True) -> dict:
        d = asdict(self)
        if clamped:
            for k, v in d.items():
                if k != "step":
                    d[k] = clamp(v)
        return d


def _groups(partition: SystemPartition):
    return partition.context_names, partition.outer_names, partition.next_names


def measure_joint(joint: JointDistribution, partition: SystemPartition, step: int = 0) -> ClosureMeasures:
    s, e, s1 = _groups(partition)
    return ClosureMeasures(
        step=int(step),
        info_closure=conditional_mutual_information(joint, s1, e, s),
        func_closure=mutual_information(joint, s1, e),
        env_coupling=mutual_information(joint, s, e),
        self_information=mutual_information(joint, s1, s),
        next_entropy=entropy(joint, s1),
        coupling_lower_bound=entropy(joint, s1 + s) - conditional_entropy(joint, s1 + s, e),
        env_entropy=entropy(joint, e),
    )


def measure(scenario: MarkovScenario, n: int) -> ClosureMeasures:
    return measure_joint(closure_joint(scenario, n), scenario.partition, n)


@dataclass(frozen=True)
class ClosureVerdict:
    """Independent closure flags at one tolerance.

    ``flags_disagree`` marks the case where the functional (information
    reading) flag is set but the informational one is not; the two
    conditions do not imply each other and both are reported as computed.
    """

    informationally_closed: bool
    functionally_closed_informational: bool
    systems_theoretic_closed: bool
    tolerance: float

    @property
    def flags_disagree(self) -> bool:
        return self.functionally_closed_informational and not self.informationally_closed

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags_disagree"] = self.flags_disagree
        return d


def classify(measures: ClosureMeasures, tolerance: float = EXACT_TOLERANCE) -> ClosureVerdict:
    if tolerance <= 0:
        raise ArgumentError("tolerance must be positive")
    info = measures.info_closure < tolerance
    func = measures.func_closure < tolerance
    # no inputs or outputs at all: a single-outcome environment with nothing shared
    degenerate_env = measures.env_entropy < tolerance
    st = degenerate_env and info and func and measures.env_coupling < tolerance
    return ClosureVerdict(info, func, st, tolerance)


@dataclass(frozen=True)
class PropositionCheck:
    name: str
    applicable: bool
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.applicable and self.residual < self.tolerance

    @property
    def status(self) -> str:
        if not self.applicable:
            return "n/a"
        return "pass" if self.passed else "fail"

    def report_value(self):
        return self.residual if self.applicable else "n/a"


def _proposition1(joint, partition, tolerance) -> PropositionCheck:
    s, e, s1 = _groups(partition)
    closed = conditional_mutual_information(joint, s1, e, s) < tolerance
    residual = abs(mutual_information(joint, s1, e + s) - mutual_information(joint, s1, s))
    return PropositionCheck("joint_info_equals_self_info", closed, residual, tolerance)


def _proposition2(joint, partition, tolerance) -> PropositionCheck:
    s, _, s1 = _groups(partition)
    determined = conditional_entropy(joint, s1, s) < tolerance
    residual = abs(mutual_information(joint, s1, s) - entropy(joint, s1))
    return PropositionCheck("self_info_equals_next_entropy", determined, residual, tolerance)


def check_proposition1(scenario: MarkovScenario, n: int,
                       tolerance: float = EXACT_TOLERANCE) -> PropositionCheck:
    """I(S'; E,S) = I(S'; S), applicable when the context is informationally closed."""
    return _proposition1(closure_joint(scenario, n), scenario.partition, tolerance)


def check_proposition2(scenario: MarkovScenario, n: int,
                       tolerance: float = EXACT_TOLERANCE) -> PropositionCheck:
    """I(S'; S) = H(S'), applicable when H(S'|S) vanishes."""
    return _proposition2(closure_joint(scenario, n), scenario.partition, tolerance)


@dataclass(frozen=True)
class TheoremCheck:
    """Lower bound on system/environment coupling for a closed context.

    ``conditioned`` is true when informational closure held at this step;
    only then is ``satisfied`` a claim that must hold. Otherwise the slack is
    informational.
    """

    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    conditioned: bool

    def to_dict(self) -> dict:
        return asdict(self)


def theorem_from_measures(m: ClosureMeasures, tolerance: float = EXACT_TOLERANCE) -> TheoremCheck:
    slack = m.env_coupling - m.coupling_lower_bound
    return TheoremCheck(m.env_coupling, m.coupling_lower_bound, slack, slack >= -tolerance,
                        m.info_closure < tolerance)


def check_theorem1(scenario: MarkovScenario, n: int, tolerance: float = EXACT_TOLERANCE) -> TheoremCheck:
    return theorem_from_measures(measure(scenario, n), tolerance)


def _derivation(joint, partition, tolerance) -> list[Residual]:
    s, e, s1 = _groups(partition)
    H = lambda *g: entropy(joint, tuple(n for x in g for n in x))  # noqa: E731
    Hc = lambda y, x: conditional_entropy(joint, y, x)  # noqa: E731
    I = lambda x, y: mutual_information(joint, x, y)  # noqa: E731
    Ic = lambda x, y, z: conditional_mutual_information(joint, x, y, z)  # noqa: E731

    joint_info = I(s1, e + s)
    closed = Ic(s1, e, s) < tolerance

    # entropy expansion of I(S'; S) >= I(S'; S|E) with H(S') standing in for
    # H(S'|E) on the right; both sides then differ by exactly -I(S'; E|S)
    expanded_lhs = H(s1) + H(s) - H(s1, s)
    expanded_rhs = H(s1) + Hc(s, e) - Hc(s1 + s, e)
    reduced_lhs = H(e) - Hc(e, s)
    reduced_rhs = H(s1, s) - Hc(s1 + s, e)

    def ineq(name, value):
        return Residual(name, value, tolerance, inequality=True, applicable=closed)

    return [
        Residual("joint_info_entropy_form", joint_info - (H(s1) - Hc(s1, s + e)), tolerance),
        Residual("joint_info_cmi_substitution",
                 joint_info - (I(s1, s) + Hc(s1, s) + Ic(s1, e, s) - Hc(s1, s)), tolerance),
        Residual("chain_rule_via_context", joint_info - (I(s1, s) + Ic(s1, e, s)), tolerance),
        Residual("chain_rule_via_env", joint_info - (I(s1, e) + Ic(s1, s, e)), tolerance),
        ineq("closure_inequality", I(s1, s) - Ic(s1, s, e)),
        Residual("self_info_entropy_form", I(s1, s) - expanded_lhs, tolerance),
        Residual("conditional_self_info_entropy_form",
                 Ic(s1, s, e) - (Hc(s1, e) + Hc(s, e) - Hc(s1 + s, e)), tolerance),
        ineq("entropy_inequality", expanded_lhs - expanded_rhs),
        Residual("context_env_chain_rule", (H(e) + Hc(s, e)) - (H(s) + Hc(e, s)), tolerance),
        Residual("context_env_joint", (H(e) + Hc(s, e)) - H(s, e), tolerance),
        ineq("reduced_inequality", reduced_lhs - reduced_rhs),
        Residual("rearrangement_agreement", (expanded_lhs - expanded_rhs) - (reduced_lhs - reduced_rhs), tolerance),
        Residual("coupling_entropy_form", reduced_lhs - I(s, e), tolerance),
    ]


def check_derivation_chain(scenario: MarkovScenario, n: int,
                           tolerance: float = EXACT_TOLERANCE) -> list[Residual]:
    """Each algebraic step from the chain rule down to the coupling bound.

    Equalities are identities and always apply. The three inequality steps
    are evaluated as slacks and only apply when informational closure holds.
    """
    return _derivation(closure_joint(scenario, n), scenario.partition, tolerance)


@dataclass(frozen=True)
class DeltaBudget:
    """Position of ``env_coupling`` relative to the interval [lower bound, delta].

    The flags are independent: a coupling can exceed delta while delta also
    sits below the lower bound, in which case no coupling satisfies both ends.
    """

    delta: float
    lower_bound: float
    coupling: float
    tolerance: float

    @property
    def over_budget(self) -> bool:
        return self.coupling > self.delta + self.tolerance

    @property
    def below_bound(self) -> bool:
        return self.coupling < self.lower_bound - self.tolerance

    @property
    def infeasible(self) -> bool:
        return self.delta + self.tolerance < self.lower_bound

    @property
    def within_budget(self) -> bool:
        return not (self.over_budget or self.below_bound)

    def to_dict(self) -> dict:
        return {"delta": self.delta, "lower_bound": clamp(self.lower_bound),
                "coupling": clamp(self.coupling), "within_budget": self.within_budget,
                "over_budget": self.over_budget, "below_bound": self.below_bound,
                "infeasible": self.infeasible}


def check_delta_budget(measures: ClosureMeasures, delta: float,
                       tolerance: float = EXACT_TOLERANCE) -> DeltaBudget:
    if delta < 0:
        raise ArgumentError(f"delta must be non-negative, got {delta}")
    return DeltaBudget(float(delta), measures.coupling_lower_bound, measures.env_coupling,
                       tolerance)


@dataclass(frozen=True)
class StepAnalysis:
    measures: ClosureMeasures
    verdict: ClosureVerdict
    theorem: TheoremCheck
    proposition1: PropositionCheck
    proposition2: PropositionCheck
    derivation: list
    delta: DeltaBudget | None = None

    @property
    def step(self) -> int:
        return self.measures.step

    def to_dict(self) -> dict:
        d = {
            "step": self.step,
            "measures": self.measures.to_dict(),
            "verdict": self.verdict.to_dict(),
            "theorem": self.theorem.to_dict(),
            "propositions": {"p1": self.proposition1.report_value(),
                             "p2": self.proposition2.report_value()},
            "derivation": {r.name: r.status for r in self.derivation},
        }
        if self.delta is not None:
            d["delta"] = self.delta.to_dict()
        return d


def analyze_joint(joint: JointDistribution, partition: SystemPartition, step: int,
                  tolerance: float = EXACT_TOLERANCE, delta: float | None = None) -> StepAnalysis:
    m = measure_joint(joint, partition, step)
    return StepAnalysis(
        measures=m,
        verdict=classify(m, tolerance),
        theorem=theorem_from_measures(m, tolerance),
        proposition1=_proposition1(joint, partition, tolerance),
        proposition2=_proposition2(joint, partition, tolerance),
        derivation=_derivation(joint, partition, tolerance),
        delta=None if delta is None else check_delta_budget(m, delta, tolerance),
    )


def analyze_step(scenario: MarkovScenario, n: int, tolerance: float = EXACT_TOLERANCE,
                 delta: float | None = None) -> StepAnalysis:
    return analyze_joint(closure_joint(scenario, n), scenario.partition, n, tolerance, delta)
