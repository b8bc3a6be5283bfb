"""Transition systems, predicates, traces and samples.

Two presentations are supported:

* :class:`ExplicitTS` - a finite state graph; states are integers, integer
  tuples or opaque hashable labels;
* :class:`SymbolicTS` - rational variables with quantifier-free init,
  transition (over primed copies ``x'``) and bad formulas.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Iterator, Optional, Sequence, Union

from .lra import FALSE, TRUE, Formula, LinTerm, Sat, mk_and, qf_sat

State = Hashable


class UndecidableCombination(TypeError):
    pass


def prime(v: str) -> str:
    return v + "'"


# systems -------------------------------------------------------------------

@dataclass(frozen=True)
class ExplicitTS:
    states: tuple
    init: tuple
    trans: tuple  # pairs (s, s')
    bad: tuple = ()
    vars: tuple[str, ...] = ()  # names used when symbolic predicates read a state

    def __post_init__(self):
        for name in ("states", "init", "trans", "bad"):
            object.__setattr__(self, name, tuple(dict.fromkeys(getattr(self, name))))
        known = set(self.states)
        for s in self.init + self.bad:
            if s not in known:
                raise ValueError(f"state {s!r} is not declared")
        for s, t in self.trans:
            if s not in known or t not in known:
                raise ValueError(f"transition {(s, t)!r} leaves the state set")

    @cached_property
    def succ(self) -> dict:
        out: dict = {s: [] for s in self.states}
        for s, t in self.trans:
            out[s].append(t)
        return out

    @cached_property
    def init_set(self) -> frozenset:
        return frozenset(self.init)

    @cached_property
    def bad_set(self) -> frozenset:
        return frozenset(self.bad)

    @cached_property
    def trans_set(self) -> frozenset:
        return frozenset(self.trans)

    # uniform search interface
    def initial(self) -> Iterable:
        return self.init

    def successors(self, s) -> Iterable:
        return self.succ.get(s, ())

    def is_bad(self, s) -> bool:
        return s in self.bad_set

    def assignment(self, s) -> dict[str, Fraction]:
        names = self.vars or _default_names(s)
        vals = s if isinstance(s, tuple) else (s,)
        if len(vals) != len(names):
            raise UndecidableCombination(f"state {s!r} does not match variables {names}")
        return {n: Fraction(v) for n, v in zip(names, vals)}

    def reachable(self) -> list:
        seen = dict.fromkeys(self.init)
        queue = deque(self.init)
        while queue:
            s = queue.popleft()
            for t in self.successors(s):
                if t not in seen:
                    seen[t] = None
                    queue.append(t)
        return list(seen)


def _default_names(s) -> tuple[str, ...]:
    if isinstance(s, tuple):
        return tuple(f"x{i}" for i in range(len(s)))
    return ("x",)


@dataclass(frozen=True)
class SymbolicTS:
    vars: tuple[str, ...]
    init: Formula
    trans: Formula
    bad: Formula = FALSE

    def __post_init__(self):
        allowed = set(self.vars)
        primed = allowed | {prime(v) for v in self.vars}
        if not self.init.free_vars() <= allowed or not self.bad.free_vars() <= allowed:
            raise ValueError("init/bad mention undeclared variables")
        if not self.trans.free_vars() <= primed:
            raise ValueError("trans mentions undeclared variables")

    def assignment(self, s) -> dict[str, Fraction]:
        return {v: Fraction(x) for v, x in zip(self.vars, s)}

    def state_of(self, model, primed: bool = False, suffix: str = "") -> tuple:
        return tuple(model.get((prime(v) if primed else v) + suffix, Fraction(0)) for v in self.vars)

    def shifted(self, f: Formula, k: int) -> Formula:
        """Rename ``x`` to ``x@k`` and ``x'`` to ``x@k+1``."""
        ren = {}
        for v in self.vars:
            ren[v] = LinTerm.var(f"{v}@{k}")
            ren[prime(v)] = LinTerm.var(f"{v}@{k + 1}")
        return f.substitute(ren)


TransitionSystem = Union[ExplicitTS, SymbolicTS]


# predicates ------------------------------------------------------------------

@dataclass(frozen=True)
class Predicate:
    """An explicit state set or a symbolic formula, with a pool stratum."""

    ident: str
    states: Optional[frozenset] = None
    formula: Optional[Formula] = None
    stratum: int = 0

    def __post_init__(self):
        if (self.states is None) == (self.formula is None):
            raise ValueError("a predicate is either explicit or symbolic")

    @property
    def symbolic(self) -> bool:
        return self.formula is not None

    def holds(self, ts: TransitionSystem, s) -> bool:
        if self.states is not None:
            return s in self.states
        return self.formula.evaluate(ts.assignment(s))

    def __str__(self) -> str:
        return self.ident


def explicit_pred(ident: str, states: Iterable, stratum: int = 0) -> Predicate:
    return Predicate(ident, states=frozenset(states), stratum=stratum)


def symbolic_pred(formula: Formula, ident: str | None = None, stratum: int = 0) -> Predicate:
    return Predicate(ident or str(formula), formula=formula, stratum=stratum)


TOP = symbolic_pred(TRUE, "true")
BOTTOM = symbolic_pred(FALSE, "false")


def conj_holds(ts: TransitionSystem, preds: Iterable[Predicate], s) -> bool:
    return all(p.holds(ts, s) for p in preds)


def conj_formula(preds: Iterable[Predicate]) -> Formula:
    preds = list(preds)
    if any(not p.symbolic for p in preds):
        raise UndecidableCombination("symbolic systems need symbolic predicates")
    return mk_and(p.formula for p in preds)


def primed_formula(ts: SymbolicTS, f: Formula) -> Formula:
    return f.substitute({v: LinTerm.var(prime(v)) for v in ts.vars})


# traces and samples ------------------------------------------------------------

@dataclass(frozen=True)
class Trace:
    states: tuple

    def __post_init__(self):
        if not self.states:
            raise ValueError("a trace has at least one state")
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator:
        return iter(self.states)


@dataclass(frozen=True)
class Safe:
    pass


@dataclass(frozen=True)
class Sample:
    init: frozenset = frozenset()
    trans: frozenset = frozenset()
    bad: frozenset = frozenset()

    def join(self, other: "Sample") -> "Sample":
        return Sample(self.init | other.init, self.trans | other.trans, self.bad | other.bad)

    def __le__(self, other: "Sample") -> bool:
        return self.init <= other.init and self.trans <= other.trans and self.bad <= other.bad

    def states(self) -> set:
        out = set(self.init) | set(self.bad)
        for s, t in self.trans:
            out |= {s, t}
        return out

    def contained_in(self, ts: ExplicitTS) -> bool:
        return self.init <= ts.init_set and self.trans <= ts.trans_set and self.bad <= ts.bad_set

    def describe(self):
        return {
            "init": sorted(map(fmt_state, self.init)),
            "trans": sorted(map(fmt_state, self.trans)),
            "bad": sorted(map(fmt_state, self.bad)),
        }


def fmt_state(s) -> str:
    """Readable rendering of states, tuples and exact rationals."""
    if isinstance(s, tuple):
        return "(" + " ".join(fmt_state(x) for x in s) + ")"
    if isinstance(s, frozenset):
        return "{" + ",".join(sorted(fmt_state(x) for x in s)) + "}"
    if isinstance(s, Fraction):
        return str(s.numerator) if s.denominator == 1 else f"{s.numerator}/{s.denominator}"
    return str(s)


def sample(init=(), trans=(), bad=()) -> Sample:
    return Sample(frozenset(init), frozenset(trans), frozenset(bad))


def is_error_trace(ts: TransitionSystem, tr: Sequence) -> bool:
    """``tr`` starts in init, follows transitions and ends in a bad state."""
    tr = list(tr)
    if not tr:
        return False
    if isinstance(ts, ExplicitTS):
        return (
            tr[0] in ts.init_set
            and all((a, b) in ts.trans_set for a, b in zip(tr, tr[1:]))
            and tr[-1] in ts.bad_set
        )
    first, last = ts.assignment(tr[0]), ts.assignment(tr[-1])
    if not ts.init.evaluate(first) or not ts.bad.evaluate(last):
        return False
    for a, b in zip(tr, tr[1:]):
        m = ts.assignment(a)
        m.update({prime(v): Fraction(x) for v, x in zip(ts.vars, b)})
        if not ts.trans.evaluate(m):
            return False
    return True


# searches --------------------------------------------------------------------

def explicit_error_search(ts) -> Union[Safe, Trace]:
    """Shortest error trace by BFS (insertion order), or :class:`Safe`.

    Works on anything offering ``initial()``, ``successors(s)`` and
    ``is_bad(s)``, including the lazily built ranking products.
    """
    parent: dict = {}
    queue: deque = deque()
    for s in ts.initial():
        if s not in parent:
            parent[s] = None
            queue.append(s)
    while queue:
        s = queue.popleft()
        if ts.is_bad(s):
            path = [s]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return Trace(tuple(reversed(path)))
        for t in ts.successors(s):
            if t not in parent:
                parent[t] = s
                queue.append(t)
    return Safe()


@dataclass(frozen=True)
class Inductive:
    pass


@dataclass(frozen=True)
class Violation:
    kind: str  # initiation | consecution | safety
    witness: object


def invariant_check(ts: TransitionSystem, conj: Iterable[Predicate], require_safe: bool = True):
    """Initiation, consecution and (optionally) safety of a conjunction."""
    conj = list(conj)
    if isinstance(ts, SymbolicTS):
        return _symbolic_invariant_check(ts, conj, require_safe)
    for s in ts.init:
        if not conj_holds(ts, conj, s):
            return Violation("initiation", s)
    # reachable transitions first, so witnesses read like executions
    order = ts.reachable()
    order += [s for s in ts.states if s not in set(order)]
    for s in order:
        if not conj_holds(ts, conj, s):
            continue
        for t in ts.successors(s):
            if not conj_holds(ts, conj, t):
                return Violation("consecution", (s, t))
    if require_safe:
        for s in ts.bad:
            if conj_holds(ts, conj, s):
                return Violation("safety", s)
    return Inductive()


def _symbolic_invariant_check(ts: SymbolicTS, conj: list[Predicate], require_safe: bool):
    p = conj_formula(conj)
    res = qf_sat(mk_and([ts.init, p.negate()]))
    if isinstance(res, Sat):
        return Violation("initiation", ts.state_of(res.model))
    res = qf_sat(mk_and([p, ts.trans, primed_formula(ts, p).negate()]))
    if isinstance(res, Sat):
        return Violation("consecution", (ts.state_of(res.model), ts.state_of(res.model, primed=True)))
    if require_safe:
        res = qf_sat(mk_and([p, ts.bad]))
        if isinstance(res, Sat):
            return Violation("safety", ts.state_of(res.model))
    return Inductive()


def restrict(ts: ExplicitTS, x: Iterable) -> ExplicitTS:
    keep = [s for s in ts.states if s in set(x)]
    ks = set(keep)
    return ExplicitTS(
        states=tuple(keep),
        init=tuple(s for s in ts.init if s in ks),
        trans=tuple((s, t) for s, t in ts.trans if s in ks and t in ks),
        bad=tuple(s for s in ts.bad if s in ks),
        vars=ts.vars,
    )


# ranking products --------------------------------------------------------------

Rank = Callable[[State], int]


@dataclass(frozen=True)
class Single:
    rank: Rank


@dataclass(frozen=True)
class Dwf:
    ranks: tuple

    def decreases(self, s, t) -> bool:
        """``s >_R t``: some ranking in the set strictly decreases."""
        return any(r(s) > r(t) for r in self.ranks)


@dataclass
class LazyProduct:
    """A product system whose successors are generated on demand."""

    init_states: list
    succ_fn: Callable[[object], Iterable]
    bad_fn: Callable[[object], bool]
    cache: dict = field(default_factory=dict)

    def initial(self):
        return self.init_states

    def successors(self, s):
        if s not in self.cache:
            self.cache[s] = list(self.succ_fn(s))
        return self.cache[s]

    def is_bad(self, s) -> bool:
        return self.bad_fn(s)


def ranking_product(ts: ExplicitTS, witness: Union[Single, Dwf]):
    """The product whose safety encodes the ranking (or DWF) condition."""
    if not isinstance(ts, ExplicitTS):
        raise UndecidableCombination("ranking products are built for explicit systems")
    init = [(s, t) for s in ts.init for t in ts.successors(s)]
    if isinstance(witness, Single):
        r = witness.rank
        states = [(s, t) for s in ts.states for t in ts.successors(s)]
        trans = [((s, t), (t, u)) for s, t in states for u in ts.successors(t)]
        bad = [(s, t) for s, t in states if r(s) <= r(t)]
        return ExplicitTS(tuple(states), tuple(init), tuple(trans), tuple(bad))

    def succ(pair):
        s1, s1p = pair
        out = []
        for s2p in ts.successors(s1p):
            # remember either the previous state or the older one
            for s2 in dict.fromkeys((s1p, s1)):
                out.append((s2, s2p))
        return out

    return LazyProduct(init, succ, lambda pair: not witness.decreases(pair[0], pair[1]))


def product_trace_to_states(tr: Trace) -> tuple:
    """Underlying run ``s0 s0' s1' ... sn'`` of a product error trace."""
    pairs = list(tr.states)
    return (pairs[0][0],) + tuple(p[1] for p in pairs)
