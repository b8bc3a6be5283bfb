"""Quantifier-free approximations and the ``L_Fix`` reduction evaluator.

A strategy for one side bundles ranking templates for the predicates
whose recursion that side must cut off (``mu`` predicates for the
proponent, ``nu`` predicates for the opponent) with finitely many
candidate terms for each quantifier slot the side controls.  Every slot
implicitly holds the constant ``0``, so a strategy is never empty and the
join is plain union.

Slots are ``(owner, var)`` pairs with ``owner`` either ``"query"`` or a
predicate name.  Inside a definition, terms may mention only the
predicate's parameters (the skolemized reading); in the query they may
mention variables bound further out.

Playing two strategies against a problem gives a quantifier-free
"program" whose calls are evaluated by the reduction relation: a call
unfolds while the visited arguments on its path decrease under the
owning ranking set, and is cut off otherwise (``false`` for ``mu``,
``true`` for ``nu``).  The approximation is neither an over- nor an
under-approximation of the input.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from ..lra import EXISTS, FORALL, And, Atom, Formula, LinTerm, Or, mk_and, mk_or
from ..lra.formulas import _Const
from .problem import MU, NU, Call, Definition, FixProblem

ZERO = LinTerm.const_term(0)
QUERY = "query"


class ReductionCapExceeded(RuntimeError):
    """The evaluator's step counter ran past its cap."""


@dataclass(frozen=True)
class FixStrategy:
    rankings: frozenset = frozenset()  # (pred, RankingTemplate)
    terms: frozenset = frozenset()  # ((owner, var), LinTerm)

    def join(self, other: "FixStrategy") -> "FixStrategy":
        return FixStrategy(self.rankings | other.rankings, self.terms | other.terms)

    def leq(self, other: "FixStrategy") -> bool:
        return self.rankings <= other.rankings and self.terms <= other.terms

    def ranking_set(self, pred: str) -> tuple:
        return tuple(sorted(r for p, r in self.rankings if p == pred))

    def term_set(self, slot: tuple) -> tuple:
        ts = {t for s, t in self.terms if s == slot} | {ZERO}
        return tuple(sorted(ts, key=_term_order))

    def items(self) -> list:
        return [("rank", i) for i in sorted(self.rankings, key=repr)] + [
            ("term", i) for i in sorted(self.terms, key=lambda st: (st[0], _term_order(st[1])))
        ]

    def without(self, item) -> "FixStrategy":
        kind, value = item
        if kind == "rank":
            return FixStrategy(self.rankings - {value}, self.terms)
        return FixStrategy(self.rankings, self.terms - {value})

    def size(self) -> int:
        return len(self.rankings) + len(self.terms)

    def describe(self) -> dict:
        out: dict = {}
        for p, r in sorted(self.rankings, key=repr):
            out.setdefault("rank " + p, []).append(str(r))
        for (owner, v), t in sorted(self.terms, key=lambda st: (st[0], _term_order(st[1]))):
            out.setdefault(f"{owner}.{v}", []).append(str(t))
        return out


def _term_order(t: LinTerm):
    return (sum(abs(c) for _, c in t.coeffs), abs(t.const), tuple((str(k), c) for k, c in t.coeffs), t.const)


# skolemization ------------------------------------------------------------------

@dataclass(frozen=True)
class Skolem:
    """``var`` chosen as ``fname(params)`` inside definition ``owner``."""

    owner: str
    var: str
    fname: str
    params: tuple[str, ...]

    @property
    def slot(self) -> tuple:
        return (self.owner, self.var)


@dataclass(frozen=True)
class SkolemizedDefinition:
    definition: Definition
    prefix: tuple  # (quantifier, var) in prenex order
    matrix: Formula
    skolems: tuple  # Skolem per existential

    @property
    def name(self) -> str:
        return self.definition.name

    def to_sexpr(self):
        """The body with each existential replaced by its function application."""
        subst = {s.var: [s.fname, *s.params] for s in self.skolems}
        body = self.matrix.to_sexpr()
        for q, v in reversed(self.prefix):
            if q == FORALL:
                body = [FORALL, [v], body]
        return _replace_syms(body, subst)


def _replace_syms(e, subst):
    if isinstance(e, list):
        return [_replace_syms(x, subst) for x in e]
    if isinstance(e, str) and e in subst:
        return subst[e]
    return e


def skolemize_choices(defs: Iterable[Definition], grammar=None):
    """Replace each existential of a body by a fresh function of the parameters.

    Returns the skolemized definitions; with a ``grammar`` (a callable from
    a parameter tuple to candidate terms) also returns the candidate
    interpretations of every fresh symbol.
    """
    out = []
    taken = {d.name for d in defs}
    for d in defs:
        pf = d.prenex()
        skolems = []
        for q, v in pf.prefix:
            if q == EXISTS:
                fname = _fresh(f"f_{d.name}_{v}", taken)
                taken.add(fname)
                skolems.append(Skolem(d.name, v, fname, d.params))
        out.append(SkolemizedDefinition(d, pf.prefix, pf.matrix, tuple(skolems)))
    if grammar is None:
        return tuple(out)
    pools = {s.fname: tuple(grammar(s.params)) for sd in out for s in sd.skolems}
    return tuple(out), pools


def _fresh(name: str, taken) -> str:
    if name not in taken:
        return name
    i = 1
    while f"{name}_{i}" in taken:
        i += 1
    return f"{name}_{i}"


# the quantifier-free approximation ----------------------------------------------

def _expand(prefix, matrix: Formula, owner: str, x: FixStrategy, y: FixStrategy, sigma: Mapping) -> Formula:
    if not prefix:
        return matrix.substitute(dict(sigma))
    (q, v), rest = prefix[0], prefix[1:]
    side = x if q == FORALL else y
    parts = []
    for t in side.term_set((owner, v)):
        parts.append(_expand(rest, matrix, owner, x, y, {**sigma, v: t.substitute(dict(sigma))}))
    return mk_and(parts) if q == FORALL else mk_or(parts)


def check_strategy(problem: FixProblem, s: FixStrategy, side: str) -> bool:
    """Slots exist, belong to ``side`` and use only variables in scope."""
    own = FORALL if side == "x" else EXISTS
    cut = NU if side == "x" else MU
    scopes = {}
    qp = problem.query_prenex()
    for i, (q, v) in enumerate(qp.prefix):
        scopes[(QUERY, v)] = (q, {w for _, w in qp.prefix[:i]})
    for d in problem.defs:
        for q, v in d.prenex().prefix:
            scopes[(d.name, v)] = (q, set(d.params))
    for slot, t in s.terms:
        if slot not in scopes:
            return False
        q, scope = scopes[slot]
        if q != own or not t.variables() <= scope:
            return False
    modes = {d.name: d.mode for d in problem.defs}
    return all(p in modes and modes[p] == cut and len(r.a) == problem.definition(p).arity for p, r in s.rankings)


def build_qf_approx(problem: FixProblem, x: FixStrategy, y: FixStrategy):
    """``(phi', {P: P'})`` with ``P'`` a quantifier-free body over the parameters."""
    qp = problem.query_prenex()
    phi = _expand(qp.prefix, qp.matrix, QUERY, x, y, {})
    bodies = {}
    for d in problem.defs:
        pf = d.prenex()
        bodies[d.name] = _expand(pf.prefix, pf.matrix, d.name, x, y, {})
    return phi, bodies


# evaluation ---------------------------------------------------------------------

@dataclass
class _Reducer:
    problem: FixProblem
    bodies: dict
    rankings: dict
    cap: int
    steps: int = 0
    memo: dict = field(default_factory=dict)
    rank_cache: dict = field(default_factory=dict)

    def value(self, f: Formula, env: dict, V: frozenset) -> bool:
        if isinstance(f, _Const):
            return f.value
        if isinstance(f, Atom):
            return f.evaluate(env)
        if isinstance(f, Call):
            return self.call(f.pred, tuple(a.evaluate(env) for a in f.args), V)
        if isinstance(f, (And, Or)):
            want = isinstance(f, Or)
            rest = []
            for g in f.args:
                if isinstance(g, (Atom, _Const)):
                    if g.evaluate(env) == want:
                        return want
                else:
                    rest.append(g)
            seen = set()
            for g in rest:
                key = (g.pred, tuple(a.evaluate(env) for a in g.args)) if isinstance(g, Call) else None
                if key is not None:
                    if key in seen:
                        continue
                    seen.add(key)
                if self.value(g, env, V) == want:
                    return want
            return not want
        raise TypeError(f"unexpected node {type(f).__name__}")

    def ranks(self, pred: str, n: tuple) -> tuple:
        key = (pred, n)
        if key not in self.rank_cache:
            self.rank_cache[key] = tuple(r(n) for r in self.rankings.get(pred, ()))
        return self.rank_cache[key]

    def call(self, pred: str, n: tuple, V: frozenset) -> bool:
        d = self.problem.definition(pred)
        rn = self.ranks(pred, n)
        for q, m in V:
            if q == pred and not any(a > b for a, b in zip(self.ranks(pred, m), rn)):
                return d.mode == NU
        key = (pred, n, V)
        if key in self.memo:
            return self.memo[key]
        self.steps += 1
        if self.steps > self.cap:
            raise ReductionCapExceeded(f"more than {self.cap} unfoldings")
        res = self.value(self.bodies[pred], dict(zip(d.params, n)), V | {(pred, n)})
        self.memo[key] = res
        return res


@dataclass(frozen=True)
class FixEvaluation:
    value: int
    steps: int


@lru_cache(maxsize=20_000)
def evaluate_fix(problem: FixProblem, x: FixStrategy, y: FixStrategy, cap: int = 200_000) -> FixEvaluation:
    phi, bodies = build_qf_approx(problem, x, y)
    rankings = {p: x.ranking_set(p) for p in problem.greatest}
    rankings.update({p: y.ranking_set(p) for p in problem.least})
    red = _Reducer(problem, bodies, rankings, cap)
    ok = red.value(phi, {}, frozenset())
    return FixEvaluation(1 if ok else -1, red.steps)


def l_fix(problem: FixProblem, x: FixStrategy, y: FixStrategy, cap: int = 200_000) -> int:
    return evaluate_fix(problem, x, y, cap).value


def strategy(rankings: Mapping[str, Iterable] = {}, terms: Mapping[tuple, Iterable] = {}) -> FixStrategy:
    """Convenience constructor: ``strategy({"P": [r]}, {("P", "i"): [t]})``."""
    return FixStrategy(
        frozenset((p, r) for p, rs in rankings.items() for r in rs),
        frozenset((slot, t) for slot, ts in terms.items() for t in ts),
    )
