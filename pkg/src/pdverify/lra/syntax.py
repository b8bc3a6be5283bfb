"""Text syntax for terms and formulas (prefix s-expressions).

Examples::

    (+ x (* 2 y) -1)      (mod (+ x 1) 2)      1/2
    (forall (x) (or (< x y) (<= (+ x 1) z)))

Negation is pushed inward while parsing, so parsed formulas are already
in negation normal form.  Quantifiers may appear anywhere; use
:func:`to_prenex` to pull them to the front.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from ..sexpr import ParseError, SExpr, SList, Sym, as_number, fail, parse_one
from .formulas import (
    EXISTS,
    FALSE,
    FORALL,
    TRUE,
    And,
    Formula,
    Or,
    PrenexFormula,
    eq,
    fresh_name,
    le,
    lt,
    mk_and,
    mk_or,
)
from .terms import LinTerm


# terms -------------------------------------------------------------------

def parse_term(e: SExpr, primes: bool = True) -> LinTerm:
    n = as_number(e)
    if n is not None:
        return LinTerm.const_term(n)
    if isinstance(e, Sym):
        if e.name.startswith(":") or e.name in ("true", "false"):
            raise fail(e, f"expected a term, got {e.name}")
        return LinTerm.var(e.name)
    if not e or not isinstance(e[0], Sym):
        raise fail(e, "expected a term")
    head, args = e[0].name, [parse_term(a, primes) for a in e[1:]]
    if head == "+":
        out = LinTerm()
        for a in args:
            out = out + a
        return out
    if head == "-":
        if len(args) == 1:
            return -args[0]
        if not args:
            raise fail(e, "'-' needs arguments")
        out = args[0]
        for a in args[1:]:
            out = out - a
        return out
    if head == "*":
        out = LinTerm.const_term(1)
        for a in args:
            if out.is_constant():
                out = a.scale(out.const)
            elif a.is_constant():
                out = out.scale(a.const)
            else:
                raise fail(e, "nonlinear product")
        return out
    if head == "/":
        if len(args) != 2 or not args[1].is_constant() or args[1].const == 0:
            raise fail(e, "division only by a nonzero constant")
        return args[0].scale(1 / args[1].const)
    if head == "mod":
        if len(args) != 2 or not args[1].is_constant() or args[1].const.denominator != 1 or args[1].const <= 0:
            raise fail(e, "mod needs a positive integer modulus")
        return LinTerm.mod(args[0], int(args[1].const))
    raise fail(e, f"unknown term operator {head}")


# formulas ----------------------------------------------------------------

@dataclass(frozen=True)
class Quant(Formula):
    """A quantifier node; only present before conversion to prenex form."""

    q: str
    var: str
    body: Formula

    def free_vars(self):
        return self.body.free_vars() - {self.var}

    def substitute(self, mapping):
        inner = {k: v for k, v in mapping.items() if k != self.var}
        incoming = frozenset().union(*(t.variables() for t in inner.values())) if inner else frozenset()
        if self.var in incoming:
            new = fresh_name(self.var, incoming | self.body.free_vars())
            return Quant(self.q, new, self.body.substitute({self.var: LinTerm.var(new)}).substitute(inner))
        return Quant(self.q, self.var, self.body.substitute(inner))

    def evaluate(self, a):
        raise TypeError("cannot evaluate a quantified formula")

    def negate(self):
        return Quant(FORALL if self.q == EXISTS else EXISTS, self.var, self.body.negate())

    def to_sexpr(self):
        return [self.q, [self.var], self.body.to_sexpr()]


CallHook = Callable[[SList, str, list], Formula]

_CMP = {"<": lt, "<=": le, "=": eq, ">": lambda a, b: lt(b, a), ">=": lambda a, b: le(b, a)}


def parse_formula(e: SExpr, on_call: CallHook | None = None, negated: bool = False) -> Formula:
    """Parse a formula; unknown heads are handed to ``on_call`` (predicate calls)."""
    if isinstance(e, Sym):
        if e.name in ("true", "false"):
            val = (e.name == "true") != negated
            return TRUE if val else FALSE
        if on_call is not None:
            return on_call(SList([e]), e.name, [])
        raise fail(e, f"expected a formula, got {e.name}")
    if not e or not isinstance(e[0], Sym):
        raise fail(e, "expected a formula")
    head = e[0].name
    if head in _CMP:
        if len(e) < 3:
            raise fail(e, f"{head} needs two or more arguments")
        terms = [parse_term(a) for a in e[1:]]
        f = mk_and(_CMP[head](a, b) for a, b in zip(terms, terms[1:]))
        return f.negate() if negated else f
    if head in ("!=", "distinct"):
        if len(e) != 3:
            raise fail(e, f"{head} needs two arguments")
        f = eq(parse_term(e[1]), parse_term(e[2]))
        return f if negated else f.negate()
    if head == "not":
        if len(e) != 2:
            raise fail(e, "not takes one argument")
        return parse_formula(e[1], on_call, not negated)
    if head in ("and", "or"):
        parts = [parse_formula(a, on_call, negated) for a in e[1:]]
        conj = (head == "and") != negated
        return _mk_and(parts) if conj else _mk_or(parts)
    if head == "=>":
        if len(e) != 3:
            raise fail(e, "=> takes two arguments")
        lhs = parse_formula(e[1], on_call, not negated)
        rhs = parse_formula(e[2], on_call, negated)
        return _mk_and([lhs, rhs]) if negated else _mk_or([lhs, rhs])
    if head in (FORALL, EXISTS):
        if len(e) != 3 or not isinstance(e[1], list) or not e[1]:
            raise fail(e, f"{head} expects a variable list and a body")
        q = head if not negated else (EXISTS if head == FORALL else FORALL)
        body = parse_formula(e[2], on_call, negated)
        for v in reversed(e[1]):
            if not isinstance(v, Sym):
                raise fail(e, "bound variables must be symbols")
            body = Quant(q, v.name, body)
        return body
    if on_call is not None:
        f = on_call(e, head, list(e[1:]))
        if negated:
            raise fail(e, f"negated predicate call {head} is not allowed")
        return f
    raise fail(e, f"unknown formula operator {head}")


def _mk_and(parts):
    if any(isinstance(p, Quant) or _has_quant(p) for p in parts):
        return And(tuple(parts)) if len(parts) > 1 else parts[0]
    return mk_and(parts)


def _mk_or(parts):
    if any(isinstance(p, Quant) or _has_quant(p) for p in parts):
        return Or(tuple(parts)) if len(parts) > 1 else parts[0]
    return mk_or(parts)


def _has_quant(f: Formula) -> bool:
    if isinstance(f, Quant):
        return True
    if isinstance(f, (And, Or)):
        return any(_has_quant(g) for g in f.args)
    return False


def to_prenex(f: Formula, taken: frozenset[str] = frozenset()) -> PrenexFormula:
    """Pull quantifiers to the front, renaming bound variables apart.

    Sound for nonempty domains, which is the case for both sorts used here.
    """
    used = set(taken) | set(f.free_vars())

    def go(g: Formula) -> tuple[list[tuple[str, str]], Formula]:
        if isinstance(g, Quant):
            name = g.var
            if name in used:
                name = fresh_name(g.var, used | g.body.free_vars())
            used.add(name)
            body = g.body if name == g.var else g.body.substitute({g.var: LinTerm.var(name)})
            pre, mat = go(body)
            return [(g.q, name)] + pre, mat
        if isinstance(g, (And, Or)):
            pre: list[tuple[str, str]] = []
            mats = []
            for h in g.args:
                p, m = go(h)
                pre += p
                mats.append(m)
            return pre, (mk_and(mats) if isinstance(g, And) else mk_or(mats))
        return [], g

    prefix, matrix = go(f)
    return PrenexFormula(tuple(prefix), matrix)


def parse_prenex(text_or_expr, on_call: CallHook | None = None) -> PrenexFormula:
    e = parse_one(text_or_expr) if isinstance(text_or_expr, str) else text_or_expr
    return to_prenex(parse_formula(e, on_call))


def formula(text: str) -> Formula:
    """Parse a quantifier-free formula from text (convenience for tests)."""
    f = parse_formula(parse_one(text))
    if _has_quant(f):
        raise ParseError("expected a quantifier-free formula")
    return f


def term(text: str) -> LinTerm:
    return parse_term(parse_one(text))


def assignment(values: Mapping[str, object]) -> dict[str, Fraction]:
    return {k: Fraction(v) for k, v in values.items()}
