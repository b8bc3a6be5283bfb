"""Validity checking for fixpoint logic over linear integer arithmetic."""
from .approx import (
    FixEvaluation,
    FixStrategy,
    ReductionCapExceeded,
    Skolem,
    SkolemizedDefinition,
    build_qf_approx,
    check_strategy,
    evaluate_fix,
    l_fix,
    skolemize_choices,
    strategy,
)
from .oracle import DomainEscape, bounded_semantics_oracle
from .problem import MU, NU, Call, Definition, FixProblem, parse_problem
from .search import (
    alternating_problem,
    FixConfig,
    FixPools,
    build_pools,
    certify_fix,
    countdown_problem,
    find_counter_x,
    find_counter_y,
    fix_instance,
    random_fix_problem,
    run_fix,
    term_pool,
)

__all__ = [name for name in dir() if not name.startswith("_")]
