"""Exact desk-scale toolkit for delegated stochastic probing mechanisms."""

from .errors import CapacityError, UnsupportedError
from .set_systems import (
    ExplicitSystem,
    FreeSystem,
    IntersectionSystem,
    PartitionSystem,
    SetSystem,
    UniformSystem,
    explicit_system,
    feasibility_equal,
    iter_feasible_sets,
    max_weight_feasible,
)
from .instances import (
    Instance,
    Outcome,
    Realization,
    UtilityAtom,
    builtin_instance,
    coins2,
    enumerate_scenarios,
    instance_to_json,
    is_inner_feasible_outcome_set,
    load_instance,
    make_instance,
    outcomes_of,
    realizable_inner_sets,
    realizable_outcomes,
    table1,
    table2,
)
from .probing import (
    AdaptiveValueReport,
    NonAdaptiveReport,
    best_nonadaptive_set,
    nonadaptive_value,
    optimal_adaptive_value,
    utility_u,
)
from .prophet import (
    GreedyFamily,
    ProphetReport,
    best_greedy_family,
    evaluate_vs_almighty,
    greedy_family,
    samuel_cahn_threshold,
    threshold_family,
)
from .delegation import (
    ExplicitPolicy,
    GreedyFamilyPolicy,
    Policy,
    PolicyEvaluation,
    ThresholdPolicy,
    TieBreak,
    agent_best_response,
    build_threshold_policy,
    compose_outer,
    evaluate_policy,
    is_symmetric_policy,
    materialize_policy,
    policy_from_greedy,
    policy_from_json,
    policy_to_json,
    restrict_instance,
    symmetric_groups,
    validate_policy,
)
from .lottery import (
    Lottery,
    LotteryMenu,
    agent_lottery_choice,
    evaluate_lottery_menu,
    lottery,
    lottery_menu,
    menu_from_json,
    menu_from_policy,
    menu_to_json,
    search_two_lottery_menus,
    validate_menu,
)
from .oracle import GapReport, enumerate_policies, exact_delegation_gap

__all__ = [name for name in dir() if not name.startswith("_")]
