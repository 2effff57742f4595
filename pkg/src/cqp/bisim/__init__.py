from cqp.bisim.partition import (
    Partition,
    all_weak_closures,
    merge_lts,
    mu,
    mu_mass,
    weak_closure,
)
from cqp.bisim.pbb import Failure, PbbAnalysis, check_pbb, coarsest_pbb
from cqp.bisim.process import (
    ContextResult,
    ContextSpec,
    check_config_equiv,
    check_full_equiv,
    check_process_equiv,
    context_regression,
    default_contexts,
    FINITE_POLICY_CAVEAT,
)
from cqp.bisim.strong import check_strong_bisim, coarsest_strong
from cqp.bisim.verdict import SigmaResult, Verdict, Witness, VERDICT_SCHEMA

__all__ = [
    "ContextResult",
    "ContextSpec",
    "FINITE_POLICY_CAVEAT",
    "Failure",
    "Partition",
    "PbbAnalysis",
    "SigmaResult",
    "VERDICT_SCHEMA",
    "Verdict",
    "Witness",
    "all_weak_closures",
    "check_config_equiv",
    "check_full_equiv",
    "check_pbb",
    "check_process_equiv",
    "check_strong_bisim",
    "coarsest_pbb",
    "coarsest_strong",
    "context_regression",
    "default_contexts",
    "merge_lts",
    "mu",
    "mu_mass",
    "weak_closure",
]
