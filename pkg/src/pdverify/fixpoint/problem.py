"""Fixpoint-logic problems: predicate calls, ordered definitions and a query.

Text format::

    (define (P x) :mu (or (<= x 0) (P (- x 1))))
    (define (Q x y) :nu ...)
    (query (forall (x) (P x)))

Bodies use the lra formula syntax plus calls ``(P t1 ... tn)`` to defined
predicates.  Negation is pushed to atoms while parsing; a negated call is
rejected, which keeps every body monotone in the predicates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..lra import And, Atom, Formula, LinTerm, Or, PrenexFormula, parse_formula, parse_term, to_prenex
from ..lra.syntax import Quant
from ..sexpr import ParseError, Sym, fail, is_sym, parse_all

MU = "mu"
NU = "nu"


@dataclass(frozen=True)
class Call(Formula):
    pred: str
    args: tuple[LinTerm, ...]

    def free_vars(self):
        return frozenset().union(*(a.variables() for a in self.args)) if self.args else frozenset()

    def substitute(self, mapping):
        return Call(self.pred, tuple(a.substitute(mapping) for a in self.args))

    def evaluate(self, a):
        raise TypeError(f"call {self.pred} needs an interpretation")

    def negate(self):
        raise TypeError(f"cannot negate the call {self.pred}")

    def to_sexpr(self):
        return [self.pred] + [a.to_sexpr() for a in self.args]


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple[str, ...]
    mode: str  # MU or NU
    body: Formula  # NNF, quantifiers anywhere

    @property
    def arity(self) -> int:
        return len(self.params)

    def prenex(self) -> PrenexFormula:
        return to_prenex(self.body, frozenset(self.params))


@dataclass(frozen=True)
class FixProblem:
    defs: tuple[Definition, ...]
    query: Formula

    def __hash__(self):
        return id(self)

    def __post_init__(self):
        names = [d.name for d in self.defs]
        if len(set(names)) != len(names):
            raise ValueError("predicate defined twice")
        if self.query.free_vars():
            raise ValueError(f"the query has free variables {sorted(self.query.free_vars())}")
        arity = {d.name: d.arity for d in self.defs}
        for owner, f, scope in [("query", self.query, set())] + [(d.name, d.body, set(d.params)) for d in self.defs]:
            for c in calls(f):
                if c.pred not in arity:
                    raise ValueError(f"{owner}: call to undefined predicate {c.pred}")
                if len(c.args) != arity[c.pred]:
                    raise ValueError(f"{owner}: {c.pred} expects {arity[c.pred]} arguments")
        for d in self.defs:
            extra = d.body.free_vars() - set(d.params)
            if extra:
                raise ValueError(f"{d.name}: free variables {sorted(extra)} are not parameters")

    def definition(self, name: str) -> Definition:
        for d in self.defs:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def least(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.defs if d.mode == MU)

    @property
    def greatest(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.defs if d.mode == NU)

    def query_prenex(self) -> PrenexFormula:
        return to_prenex(self.query)

    def constants(self) -> frozenset[int]:
        """Integer constants in atoms and call arguments, as written."""
        out: set = set()

        def term_consts(t: LinTerm):
            if t.const.denominator == 1:
                out.add(int(t.const))

        for f in [self.query] + [d.body for d in self.defs]:
            for node in walk(f):
                if isinstance(node, Atom):
                    term_consts(-node.expr)
                elif isinstance(node, Call):
                    for a in node.args:
                        term_consts(a)
        return frozenset(out)

    def to_sexpr(self):
        out = [[Sym("define"), [d.name, *d.params], ":" + d.mode, d.body.to_sexpr()] for d in self.defs]
        out.append(["query", self.query.to_sexpr()])
        return out


def walk(f: Formula):
    yield f
    if isinstance(f, (And, Or)):
        for g in f.args:
            yield from walk(g)
    elif isinstance(f, Quant):
        yield from walk(f.body)


def calls(f: Formula):
    return (g for g in walk(f) if isinstance(g, Call))


# parsing ---------------------------------------------------------------------

def _call_hook(arity: Mapping[str, int]):
    def hook(e, head, args):
        if head not in arity:
            raise fail(e, f"unknown formula operator or predicate {head}")
        if len(args) != arity[head]:
            raise fail(e, f"{head} expects {arity[head]} arguments, got {len(args)}")
        return Call(head, tuple(parse_term(a, primes=False) for a in args))

    return hook


def parse_problem(text: str) -> FixProblem:
    items = parse_all(text)
    heads = []
    query = None
    for e in items:
        if not isinstance(e, list) or not e or not isinstance(e[0], Sym):
            raise fail(e, "expected (define ...) or (query ...)")
        if is_sym(e[0], "define"):
            if len(e) != 4 or not isinstance(e[1], list) or not e[1] or not all(isinstance(s, Sym) for s in e[1]):
                raise fail(e, "expected (define (P x ...) :mu|:nu body)")
            mode = e[2].name.lstrip(":") if isinstance(e[2], Sym) else None
            if mode not in (MU, NU):
                raise fail(e[2], "fixpoint mode must be :mu or :nu")
            heads.append((e, e[1][0].name, tuple(s.name for s in e[1][1:]), mode))
        elif is_sym(e[0], "query"):
            if query is not None:
                raise fail(e, "only one query is allowed")
            if len(e) != 2:
                raise fail(e, "expected (query formula)")
            query = e
        else:
            raise fail(e, f"unknown top-level form {e[0].name}")
    if query is None:
        raise ParseError("missing (query ...)")
    arity = {name: len(params) for _, name, params, _ in heads}
    hook = _call_hook(arity)
    defs = tuple(Definition(name, params, mode, parse_formula(e[3], hook)) for e, name, params, mode in heads)
    try:
        return FixProblem(defs, parse_formula(query[1], hook))
    except ValueError as err:
        if isinstance(err, ParseError):
            raise
        raise ParseError(str(err)) from err
