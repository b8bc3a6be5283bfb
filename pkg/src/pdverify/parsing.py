"""Readers for the problem file formats.

Symbolic system::

    (system :vars (x) :init (= x 0) :trans (= x' (+ x 1)) :bad (= x -3))

Explicit system (states are integers, integer tuples or symbols)::

    (system :states (0 1 2) :init (0) :trans ((0 1) (1 2)) :bad (2))

Predicate pool, grouped by stratum.  ``(for c lo hi f ...)`` instantiates
the formulas for every integer ``c`` in ``[lo, hi]``; ``(set name s ...)``
is an explicit state set::

    (pool (stratum 0 (for c -4 4 (>= x c) (<= x c)))
          (stratum 1 (= (mod x 2) 0)))

Induction-dual pair (dual states are sets of base predicate names)::

    (pair :T (system :states (a b) :init (a) :trans ((a b)) :bad ())
          :sat ((a (p q)) (b (p)))
          :TI (system :states ((p) (p q)) :init ((p)) :trans () :bad ((p q))))
"""
from __future__ import annotations

from itertools import combinations, product
from typing import Optional

from .cegar import PredicatePool
from .fixpoint import FixProblem, parse_problem
from .houdini import InductionDualPair, Ok, validate_pair
from .lra import LinTerm, PrenexFormula, ge, le, parse_formula, parse_prenex
from .sexpr import ParseError, SExpr, Sym, as_number, fail, is_sym, keyword_sections, parse_one, render
from .systems import ExplicitTS, SymbolicTS, TransitionSystem, explicit_pred, symbolic_pred


def _head(e: SExpr, name: str) -> list:
    if not isinstance(e, list) or not e or not is_sym(e[0], name):
        raise fail(e, f"expected ({name} ...)")
    return e


def _list(e: SExpr, what: str) -> list:
    if not isinstance(e, list):
        raise fail(e, f"{what} must be a list")
    return e


# states --------------------------------------------------------------------------

def parse_state(e: SExpr):
    """``3`` -> 3, ``(1 2)`` -> (1, 2), ``idle`` -> "idle"; non-integers stay rational."""
    if isinstance(e, list):
        return tuple(parse_state(x) for x in e)
    n = as_number(e)
    if n is None:
        return e.name
    return int(n) if n.denominator == 1 else n


def state_sexpr(s):
    if isinstance(s, tuple):
        return [state_sexpr(x) for x in s]
    if isinstance(s, frozenset):
        return sorted(map(str, s))
    return s


# systems -------------------------------------------------------------------------

def system_from_sexpr(e: SExpr, dual: bool = False) -> TransitionSystem:
    """``dual`` reads states as sets of predicate names (the ``:TI`` of a pair)."""
    e = _head(e, "system")
    kw = keyword_sections(e[1:], e)
    if ":states" in kw:
        unknown = set(kw) - {":states", ":init", ":trans", ":bad", ":vars"}
        if unknown:
            raise fail(e, f"unknown keywords {sorted(unknown)}")
        read = _dual_state if dual else parse_state
        states = [read(s) for s in _list(kw[":states"], ":states")]
        init = [read(s) for s in _list(kw.get(":init", []), ":init")]
        bad = [read(s) for s in _list(kw.get(":bad", []), ":bad")]
        trans = []
        for t in _list(kw.get(":trans", []), ":trans"):
            if not isinstance(t, list) or len(t) != 2:
                raise fail(t if isinstance(t, list) else e, "a transition is (state state)")
            trans.append((read(t[0]), read(t[1])))
        names = tuple(v.name for v in _list(kw.get(":vars", []), ":vars"))
        try:
            return ExplicitTS(tuple(states), tuple(init), tuple(trans), tuple(bad), names)
        except ValueError as err:
            raise fail(e, str(err)) from err
    if dual:
        raise fail(e, "the dual system of a pair must be explicit")
    unknown = set(kw) - {":vars", ":init", ":trans", ":bad"}
    if unknown:
        raise fail(e, f"unknown keywords {sorted(unknown)}")
    for k in (":vars", ":init", ":trans"):
        if k not in kw:
            raise fail(e, f"missing {k}")
    names = []
    for v in _list(kw[":vars"], ":vars"):
        if not isinstance(v, Sym) or as_number(v) is not None:
            raise fail(v if isinstance(v, Sym) else e, "variables are symbols")
        names.append(v.name)
    init = parse_formula(kw[":init"])
    trans = parse_formula(kw[":trans"])
    bad = parse_formula(kw[":bad"]) if ":bad" in kw else parse_formula(Sym("false"))
    try:
        return SymbolicTS(tuple(names), init, trans, bad)
    except ValueError as err:
        raise fail(e, str(err)) from err


def _dual_state(e: SExpr) -> frozenset:
    if not isinstance(e, list) or not all(isinstance(x, Sym) for x in e):
        raise fail(e if isinstance(e, list) else Sym(str(e)), "a dual state is a list of predicate names")
    return frozenset(x.name for x in e)


def system_to_sexpr(ts: TransitionSystem) -> list:
    if isinstance(ts, SymbolicTS):
        return [Sym("system"), ":vars", list(ts.vars), ":init", ts.init.to_sexpr(), ":trans", ts.trans.to_sexpr(),
                ":bad", ts.bad.to_sexpr()]
    out = [Sym("system"), ":states", [state_sexpr(s) for s in ts.states], ":init", [state_sexpr(s) for s in ts.init],
           ":trans", [[state_sexpr(s), state_sexpr(t)] for s, t in ts.trans], ":bad", [state_sexpr(s) for s in ts.bad]]
    if ts.vars:
        out += [":vars", list(ts.vars)]
    return out


def parse_system(text: str) -> TransitionSystem:
    return system_from_sexpr(parse_one(text))


# pools ---------------------------------------------------------------------------

def _instantiate(e: SExpr, name: str, value: int) -> SExpr:
    if isinstance(e, list):
        return [_instantiate(x, name, value) for x in e]
    return Sym(str(value), e.line, e.col) if e.name == name else e


def _pool_items(items: list, stratum: int, out: list) -> None:
    for it in items:
        if isinstance(it, list) and it and is_sym(it[0], "for"):
            if len(it) < 5 or not isinstance(it[1], Sym):
                raise fail(it, "expected (for c lo hi formula ...)")
            lo, hi = as_number(it[2]), as_number(it[3])
            if lo is None or hi is None or lo.denominator != 1 or hi.denominator != 1:
                raise fail(it, "range bounds must be integers")
            for c in range(int(lo), int(hi) + 1):
                _pool_items([_instantiate(f, it[1].name, c) for f in it[4:]], stratum, out)
        elif isinstance(it, list) and it and is_sym(it[0], "set"):
            if len(it) < 2 or not isinstance(it[1], Sym):
                raise fail(it, "expected (set name state ...)")
            out.append(explicit_pred(it[1].name, [parse_state(s) for s in it[2:]], stratum))
        else:
            out.append(symbolic_pred(parse_formula(it), render(it), stratum))


def pool_from_sexpr(e: SExpr) -> PredicatePool:
    e = _head(e, "pool")
    preds: list = []
    for layer in e[1:]:
        layer = _head(layer, "stratum")
        n = as_number(layer[1]) if len(layer) > 1 else None
        if n is None or n.denominator != 1 or n < 0:
            raise fail(layer, "expected (stratum n item ...) with n >= 0")
        _pool_items(layer[2:], int(n), preds)
    seen = {}
    for p in preds:
        if p.ident in seen:
            raise fail(e, f"predicate {p.ident} listed twice")
        seen[p.ident] = p
    return PredicatePool.of(preds)


def parse_pool(text: str) -> PredicatePool:
    return pool_from_sexpr(parse_one(text))


def default_pool(ts: TransitionSystem, max_coef: int = 1, max_offset: int = 4) -> PredicatePool:
    """Pool used when no pool file is given.

    Symbolic: ``a.x >= c`` and ``a.x <= c`` with ``|a_i| <= max_coef`` and
    ``|c| <= max_offset``, stratum ``max |a_i| - 1``.  Explicit: every
    subset of the states, stratum = size (small systems only).
    """
    preds = []
    if isinstance(ts, SymbolicTS):
        for a in product(range(max_coef, -max_coef - 1, -1), repeat=len(ts.vars)):
            if not any(a):
                continue
            t = LinTerm.build(dict(zip(ts.vars, a)), 0)
            for c in range(-max_offset, max_offset + 1):
                for rel, f in ((">=", ge(t, c)), ("<=", le(t, c))):
                    preds.append(symbolic_pred(f, render([rel, t.to_sexpr(), c]), max(map(abs, a)) - 1))
        uniq: dict = {}
        for p in preds:  # -x >= c and x <= -c normalize to the same atom
            uniq.setdefault(p.formula, p)
        return PredicatePool.of(uniq.values())
    if len(ts.states) > 10:
        raise ValueError("explicit systems with more than 10 states need a pool file")
    for k in range(len(ts.states) + 1):
        for c in combinations(ts.states, k):
            preds.append(explicit_pred("{" + ",".join(map(_fmt, c)) + "}", c, k))
    return PredicatePool.of(preds)


def _fmt(s) -> str:
    return render(state_sexpr(s))


# pairs ---------------------------------------------------------------------------

def pair_from_sexpr(e: SExpr) -> InductionDualPair:
    e = _head(e, "pair")
    kw = keyword_sections(e[1:], e)
    for k in (":T", ":TI", ":sat"):
        if k not in kw:
            raise fail(e, f"missing {k}")
    T = system_from_sexpr(kw[":T"])
    if not isinstance(T, ExplicitTS):
        raise fail(kw[":T"], "the base system of a pair must be explicit")
    TI = system_from_sexpr(kw[":TI"], dual=True)
    sat = {}
    for row in _list(kw[":sat"], ":sat"):
        if not isinstance(row, list) or len(row) != 2 or not isinstance(row[1], list):
            raise fail(row if isinstance(row, list) else e, "a :sat row is (state (pred ...))")
        sat[parse_state(row[0])] = _dual_state(row[1])
    for s in T.states:
        sat.setdefault(s, frozenset())
    pair = InductionDualPair(T, TI, sat)
    v = validate_pair(pair)
    if not isinstance(v, Ok):
        raise fail(e, f"not an induction-dual pair: {v}")
    return pair


def parse_pair(text: str) -> InductionDualPair:
    return pair_from_sexpr(parse_one(text))


def pair_to_sexpr(pair: InductionDualPair) -> list:
    return [Sym("pair"), ":T", system_to_sexpr(pair.T),
            ":sat", [[state_sexpr(s), sorted(pair.sat[s])] for s in pair.T.states],
            ":TI", system_to_sexpr(pair.TI)]


# everything else -------------------------------------------------------------------

def parse_sentence(text: str) -> PrenexFormula:
    phi = parse_prenex(parse_one(text))
    if phi.free_vars():
        raise ParseError(f"expected a sentence; free variables {sorted(phi.free_vars())}")
    return phi


def parse_fixpoint(text: str) -> FixProblem:
    return parse_problem(text)


PARSERS = {
    "system": parse_system,
    "pool": parse_pool,
    "pair": parse_pair,
    "sentence": parse_sentence,
    "fixpoint": parse_fixpoint,
}


def read_file(path: str, kind: str, text: Optional[str] = None):
    if text is None:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return PARSERS[kind](text)
