"""Exact linear arithmetic over the rationals (and ground integer evaluation)."""
from .formulas import (
    EXISTS,
    FALSE,
    FORALL,
    TRUE,
    And,
    Atom,
    Formula,
    Or,
    PrenexFormula,
    atoms,
    eq,
    eval_ground,
    fresh_name,
    ge,
    gt,
    implies,
    le,
    lt,
    mk_and,
    mk_atom,
    mk_not,
    mk_or,
    substitute,
)
from .mbp import ModelMismatch, implicant, mbp_term, project_vars
from .solver import CounterModel, Sat, Unsat, Valid, cubes, fm_solve, forall_validity, is_valid, qf_sat
from .syntax import Quant, assignment, formula, parse_formula, parse_prenex, parse_term, term, to_prenex
from .terms import LinTerm, Mod, SortMismatch, UnboundVariable, const, var

__all__ = [name for name in dir() if not name.startswith("_")]
