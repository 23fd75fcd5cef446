"""Exact and estimated information-closure analysis for partitioned Markov systems."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ArgumentError, ClosureError, LimitError, NameCollisionError, NullEventError,
    SchemaError, UnknownNameError, UnsupportedViewError,
)
from .probability import (  # noqa: E402
    JointDistribution, Variable, condition, marginalize, product, random_distribution,
)
from .measures import (  # noqa: E402
    clamp, conditional_entropy, conditional_mutual_information, entropy, joint_entropy,
    mutual_information, verify_identities,
)
from .model import (  # noqa: E402
    Boundary, FactoredContext, MarkovScenario, SystemPartition, closure_joint,
    factored_scenario, propagate, scenario_from_functions,
)
from .scenarios import bundled, fingerprint, load_scenario, save_scenario  # noqa: E402
from .closure import (  # noqa: E402
    ClosureMeasures, analyze_step, check_delta_budget, check_derivation_chain,
    check_proposition1, check_proposition2, check_theorem1, classify, measure,
)
from .functional import (  # noqa: E402
    FunctionTable, is_functionally_closed, is_functionally_dependent, minimal_input_sets,
)
from .estimation import (  # noqa: E402
    empirical_closure_joint, estimate_measures, load_trajectories, sample,
)

__all__ = [
    "__version__",
    "ArgumentError", "ClosureError", "LimitError", "NameCollisionError", "NullEventError",
    "SchemaError", "UnknownNameError", "UnsupportedViewError",
    "JointDistribution", "Variable", "condition", "marginalize", "product", "random_distribution",
    "clamp", "conditional_entropy", "conditional_mutual_information", "entropy", "joint_entropy",
    "mutual_information", "verify_identities",
    "Boundary", "FactoredContext", "MarkovScenario", "SystemPartition", "closure_joint",
    "factored_scenario", "propagate", "scenario_from_functions",
    "bundled", "fingerprint", "load_scenario", "save_scenario",
    "ClosureMeasures", "analyze_step", "check_delta_budget", "check_derivation_chain",
    "check_proposition1", "check_proposition2", "check_theorem1", "classify", "measure",
    "FunctionTable", "is_functionally_closed", "is_functionally_dependent", "minimal_input_sets",
    "empirical_closure_joint", "estimate_measures", "load_trajectories", "sample",
]
