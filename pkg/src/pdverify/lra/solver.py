"""Decision procedures over the rationals: DPLL search + Fourier-Motzkin.

Every model returned here is re-checked against the input formula before
it leaves the module, so callers can rely on it without re-evaluating.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from .formulas import FORALL, And, Atom, Formula, Or, PrenexFormula, _Const
from .terms import LinTerm, SortMismatch

Constraint = tuple[LinTerm, str]  # expr REL 0


@dataclass(frozen=True)
class Sat:
    model: dict[str, Fraction]


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Valid:
    pass


@dataclass(frozen=True)
class CounterModel:
    model: dict[str, Fraction]


SatResult = Union[Sat, Unsat]


# DNF enumeration --------------------------------------------------------

def cubes(f: Formula) -> Iterator[list[Atom]]:
    """Lazily enumerate the conjunctions of a DNF expansion of ``f``."""
    if isinstance(f, _Const):
        if f.value:
            yield []
        return
    if isinstance(f, Atom):
        yield [f]
        return
    if isinstance(f, Or):
        for g in f.args:
            yield from cubes(g)
        return
    if isinstance(f, And):
        yield from _and_cubes(list(f.args), [])
        return
    raise TypeError(f"not a rational QF formula: {type(f).__name__}")


def _and_cubes(parts: list[Formula], acc: list[Atom]) -> Iterator[list[Atom]]:
    if not parts:
        yield acc
        return
    for c in cubes(parts[0]):
        merged = acc + c
        # cheap pruning: a partial conjunction that is already infeasible
        if len(parts) > 1 and fm_solve([(a.expr, a.rel) for a in merged]) is None:
            continue
        yield from _and_cubes(parts[1:], merged)


# Fourier-Motzkin --------------------------------------------------------

@dataclass
class _Step:
    var: str
    kind: str  # "eq" or "fm"
    term: LinTerm | None = None
    lowers: list[tuple[LinTerm, bool]] = field(default_factory=list)
    uppers: list[tuple[LinTerm, bool]] = field(default_factory=list)


def _const_ok(c: Fraction, rel: str) -> bool:
    return c < 0 if rel == "<" else (c <= 0 if rel == "<=" else c == 0)


def _normalize(expr: LinTerm, rel: str) -> Constraint:
    if expr.is_constant():
        return expr, rel
    lead = expr.coeffs[0][1]
    return expr.scale(1 / lead if rel == "=" else 1 / abs(lead)), rel


def fm_solve(constraints: list[Constraint]) -> dict[str, Fraction] | None:
    """Return a model of the conjunction, or ``None`` when infeasible."""
    for e, _ in constraints:
        if e.has_mod():
            raise SortMismatch("mod terms are not supported by the rational solver")
    all_vars = sorted(frozenset().union(*(e.variables() for e, _ in constraints)) if constraints else [])
    work = list(dict.fromkeys(_normalize(e, r) for e, r in constraints))
    steps: list[_Step] = []

    # equalities first: solve and substitute
    while True:
        pick = next(((e, r) for e, r in work if r == "=" and not e.is_constant()), None)
        if pick is None:
            break
        e, _ = pick
        x, a = e.coeffs[0]
        sol = e.without(x).scale(-1 / a)
        steps.append(_Step(x, "eq", term=sol))
        work = list(dict.fromkeys(_normalize(c.substitute({x: sol}), r) for c, r in work if (c, r) != pick))

    if not all(_const_ok(e.const, r) for e, r in work if e.is_constant()):
        return None
    work = [(e, r) for e, r in work if not e.is_constant()]

    while work:
        vars_left = sorted(frozenset().union(*(e.variables() for e, _ in work)))
        best, best_cost = None, None
        for v in vars_left:
            lo = sum(1 for e, _ in work if e.coeff(v) < 0)
            hi = sum(1 for e, _ in work if e.coeff(v) > 0)
            cost = lo * hi - lo - hi
            if best_cost is None or cost < best_cost:
                best, best_cost = v, cost
        x = best
        step = _Step(x, "fm")
        rest: list[Constraint] = []
        for e, r in work:
            a = e.coeff(x)
            if a == 0:
                rest.append((e, r))
                continue
            bound = e.without(x).scale(-1 / a)
            strict = r == "<"
            (step.uppers if a > 0 else step.lowers).append((bound, strict))
        steps.append(step)
        new: list[Constraint] = []
        for lb, ls in step.lowers:
            for ub, us in step.uppers:
                new.append(_normalize(lb - ub, "<" if (ls or us) else "<="))
        nxt: list[Constraint] = []
        for e, r in dict.fromkeys(rest + new):
            if e.is_constant():
                if not _const_ok(e.const, r):
                    return None
            else:
                nxt.append((e, r))
        work = nxt

    model: dict[str, Fraction] = {}
    for step in reversed(steps):
        if step.kind == "eq":
            model[step.var] = step.term.evaluate(_Defaulting(model))
        else:
            model[step.var] = _pick(step, _Defaulting(model))
    for v in all_vars:
        model.setdefault(v, Fraction(0))
    return model


class _Defaulting(dict):
    """Assignment view where unconstrained variables read as 0."""

    def __init__(self, base):
        super().__init__(base)

    def __missing__(self, key):
        return Fraction(0)

    def __contains__(self, key):
        return True


def _pick(step: _Step, m) -> Fraction:
    lo = hi = None
    lo_strict = hi_strict = False
    for t, s in step.lowers:
        v = t.evaluate(m)
        if lo is None or v > lo or (v == lo and s):
            lo, lo_strict = v, s
    for t, s in step.uppers:
        v = t.evaluate(m)
        if hi is None or v < hi or (v == hi and s):
            hi, hi_strict = v, s

    def inside(v: Fraction) -> bool:
        if lo is not None and (v < lo or (v == lo and lo_strict)):
            return False
        if hi is not None and (v > hi or (v == hi and hi_strict)):
            return False
        return True

    # prefer the integer closest to zero, for readable models
    if inside(Fraction(0)):
        return Fraction(0)
    if lo is not None and lo > 0:
        n = Fraction(math.ceil(lo))
        if n == lo and lo_strict:
            n += 1
        if inside(n):
            return n
    if hi is not None and hi < 0:
        n = Fraction(math.floor(hi))
        if n == hi and hi_strict:
            n -= 1
        if inside(n):
            return n
    if lo is not None and hi is not None:
        return (lo + hi) / 2
    if lo is not None:
        return lo + 1
    if hi is not None:
        return hi - 1
    raise AssertionError("Fourier-Motzkin produced an empty interval")


# public entry points ----------------------------------------------------

# DPLL search -------------------------------------------------------------

def _unsat_core(cube: list) -> frozenset:
    """Decision levels behind a minimal infeasible subset of ``cube``.

    Atoms from the most recent decisions are dropped first so that the
    core points as far back as possible.
    """
    keep = sorted(cube, key=lambda ad: max(ad[1], default=-1), reverse=True)
    i = 0
    while i < len(keep):
        trial = keep[:i] + keep[i + 1:]
        if fm_solve([(a.expr, a.rel) for a, _ in trial]) is None:
            keep = trial
        else:
            i += 1
    return frozenset().union(*(d for _, d in keep))


def _search(cube: list, pending: list, level: int):
    """Returns ``(model, None)`` or ``(None, conflict levels)``."""
    cube = list(cube)
    ors = []
    stack = list(pending)
    while stack:
        f, d = stack.pop()
        if isinstance(f, _Const):
            if not f.value:
                return None, d
        elif isinstance(f, Atom):
            cube.append((f, d))
        elif isinstance(f, And):
            stack.extend((g, d) for g in f.args)
        elif isinstance(f, Or):
            ors.append((f, d))
        else:
            raise TypeError(f"not a rational QF formula: {type(f).__name__}")
    model = fm_solve([(a.expr, a.rel) for a, _ in cube])
    if model is None:
        return None, _unsat_core(cube)
    m = _Defaulting(model)
    open_ = [i for i, (f, _) in enumerate(ors) if not f.evaluate(m)]
    if not open_:
        return model, None
    pick = min(open_, key=lambda i: len(ors[i][0].args))
    f, d = ors[pick]
    rest = ors[:pick] + ors[pick + 1:]
    conflict: frozenset = frozenset()
    for g in f.args:
        res, c = _search(cube, rest + [(g, d | {level})], level + 1)
        if res is not None:
            return res, None
        if level not in c:
            return None, c
        conflict |= c - {level}
    return None, conflict | d


@lru_cache(maxsize=200_000)
def qf_sat(f: Formula) -> SatResult:
    """Decide a quantifier-free rational formula; models are total on ``f``.

    Results are memoized on the (hashable, canonical) formula; treat the
    returned model as read-only.
    """
    for e in (a.expr for a in _atoms(f)):
        if e.has_mod():
            raise SortMismatch("mod terms are not supported by the rational solver")
    model, _ = _search([], [(f, frozenset())], 0)
    if model is None:
        return Unsat()
    full = {v: Fraction(0) for v in f.free_vars()}
    full.update(model)
    assert f.evaluate(full), "internal error: model does not satisfy formula"
    return Sat(full)


def _atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Or)):
        for g in f.args:
            yield from _atoms(g)


def forall_validity(pf: PrenexFormula) -> Valid | CounterModel:
    """Validity of a universal sentence (free variables read universally)."""
    if not all(q == FORALL for q, _ in pf.prefix):
        raise ValueError("forall_validity expects a purely universal prefix")
    res = qf_sat(pf.matrix.negate())
    if isinstance(res, Unsat):
        return Valid()
    model = dict(res.model)
    for v in pf.bound:
        model.setdefault(v, Fraction(0))
    return CounterModel(model)


def is_valid(f: Formula) -> bool:
    return isinstance(qf_sat(f.negate()), Unsat)
