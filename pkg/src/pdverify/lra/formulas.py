"""Quantifier-free formulas in negation normal form, plus prenex sentences.

Atoms are stored as ``expr REL 0`` with ``REL`` one of ``<``, ``<=``, ``=``.
Negation is pushed into atoms on construction, so the only connectives
are conjunction and disjunction.  Constructors simplify constant atoms
and flatten nested connectives, which keeps equality syntactic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .terms import Assignment, LinTerm, Number, const

RELS = ("<", "<=", "=")
FORALL, EXISTS = "forall", "exists"


class Formula:
    """Common interface of QF nodes (also implemented by fixpoint calls)."""

    def free_vars(self) -> frozenset[str]:
        raise NotImplementedError

    def substitute(self, mapping: Mapping[str, LinTerm]) -> "Formula":
        raise NotImplementedError

    def evaluate(self, a: Assignment) -> bool:
        raise NotImplementedError

    def negate(self) -> "Formula":
        raise NotImplementedError

    def to_sexpr(self):
        raise NotImplementedError

    def __str__(self) -> str:
        from ..sexpr import render

        return render(self.to_sexpr())


@dataclass(frozen=True)
class _Const(Formula):
    value: bool

    def free_vars(self):
        return frozenset()

    def substitute(self, mapping):
        return self

    def evaluate(self, a):
        return self.value

    def negate(self):
        return FALSE if self.value else TRUE

    def to_sexpr(self):
        return "true" if self.value else "false"


TRUE = _Const(True)
FALSE = _Const(False)


@dataclass(frozen=True)
class Atom(Formula):
    expr: LinTerm
    rel: str

    def free_vars(self):
        return self.expr.variables()

    def substitute(self, mapping):
        return mk_atom(self.expr.substitute(mapping), self.rel)

    def evaluate(self, a):
        v = self.expr.evaluate(a)
        if self.rel == "<":
            return v < 0
        if self.rel == "<=":
            return v <= 0
        return v == 0

    def negate(self):
        if self.rel == "<":
            return mk_atom(-self.expr, "<=")
        if self.rel == "<=":
            return mk_atom(-self.expr, "<")
        return mk_or([mk_atom(self.expr, "<"), mk_atom(-self.expr, "<")])

    def sides(self) -> tuple[LinTerm, LinTerm]:
        """Split into ``lhs REL rhs`` with nonnegative coefficients on both sides."""
        pos = LinTerm.build({k: c for k, c in self.expr.coeffs if c > 0}, max(self.expr.const, Fraction(0)))
        neg = LinTerm.build({k: -c for k, c in self.expr.coeffs if c < 0}, max(-self.expr.const, Fraction(0)))
        return pos, neg

    def to_sexpr(self):
        lhs, rhs = self.sides()
        return [self.rel, lhs.to_sexpr(), rhs.to_sexpr()]


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def free_vars(self):
        return frozenset().union(*(f.free_vars() for f in self.args))

    def substitute(self, mapping):
        return mk_and(f.substitute(mapping) for f in self.args)

    def evaluate(self, a):
        return all(f.evaluate(a) for f in self.args)

    def negate(self):
        return mk_or(f.negate() for f in self.args)

    def to_sexpr(self):
        return ["and", *(f.to_sexpr() for f in self.args)]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def free_vars(self):
        return frozenset().union(*(f.free_vars() for f in self.args))

    def substitute(self, mapping):
        return mk_or(f.substitute(mapping) for f in self.args)

    def evaluate(self, a):
        return any(f.evaluate(a) for f in self.args)

    def negate(self):
        return mk_and(f.negate() for f in self.args)

    def to_sexpr(self):
        return ["or", *(f.to_sexpr() for f in self.args)]


# smart constructors -----------------------------------------------------

def mk_atom(expr: LinTerm, rel: str) -> Formula:
    if rel not in RELS:
        raise ValueError(f"unknown relation {rel!r}")
    if expr.is_constant():
        return TRUE if Atom(expr, rel).evaluate({}) else FALSE
    lead = expr.coeffs[0][1]
    factor = 1 / lead if rel == "=" else 1 / abs(lead)
    return Atom(expr.scale(factor), rel)


def lt(a: LinTerm | Number, b: LinTerm | Number) -> Formula:
    return mk_atom(_t(a) - _t(b), "<")


def le(a: LinTerm | Number, b: LinTerm | Number) -> Formula:
    return mk_atom(_t(a) - _t(b), "<=")


def eq(a: LinTerm | Number, b: LinTerm | Number) -> Formula:
    return mk_atom(_t(a) - _t(b), "=")


def gt(a, b) -> Formula:
    return lt(b, a)


def ge(a, b) -> Formula:
    return le(b, a)


def _t(x) -> LinTerm:
    return x if isinstance(x, LinTerm) else const(x)


def _dedupe(items: Iterable[Formula]) -> list[Formula]:
    seen: dict[Formula, None] = {}
    for f in items:
        seen.setdefault(f, None)
    return list(seen)


def mk_and(items: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for f in items:
        if f == FALSE:
            return FALSE
        if f == TRUE:
            continue
        flat.extend(f.args if isinstance(f, And) else (f,))
    flat = _dedupe(flat)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def mk_or(items: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for f in items:
        if f == TRUE:
            return TRUE
        if f == FALSE:
            continue
        flat.extend(f.args if isinstance(f, Or) else (f,))
    flat = _dedupe(flat)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def mk_not(f: Formula) -> Formula:
    return f.negate()


def implies(a: Formula, b: Formula) -> Formula:
    return mk_or([a.negate(), b])


def atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Or)):
        for g in f.args:
            yield from atoms(g)


def eval_ground(f: Formula, a: Assignment) -> bool:
    """Truth value of ``f`` under a total assignment (exact arithmetic)."""
    return f.evaluate(a)


def substitute(f, x: str, t: LinTerm):
    """``f[t/x]``; works on QF formulas and on :class:`PrenexFormula`."""
    return f.substitute({x: t})


# prenex sentences -------------------------------------------------------

@dataclass(frozen=True)
class PrenexFormula:
    prefix: tuple[tuple[str, str], ...]
    matrix: Formula

    def __post_init__(self):
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise ValueError("bound variables must be distinct")
        for q, _ in self.prefix:
            if q not in (FORALL, EXISTS):
                raise ValueError(f"unknown quantifier {q!r}")

    @property
    def bound(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)

    def free_vars(self) -> frozenset[str]:
        return self.matrix.free_vars() - set(self.bound)

    def is_universal(self) -> bool:
        return all(q == FORALL for q, _ in self.prefix)

    def head(self) -> tuple[str, str] | None:
        return self.prefix[0] if self.prefix else None

    def body(self) -> "PrenexFormula":
        return PrenexFormula(self.prefix[1:], self.matrix)

    def substitute(self, mapping: Mapping[str, LinTerm]) -> "PrenexFormula":
        mapping = {k: v for k, v in mapping.items() if k not in self.bound}
        if not mapping:
            return self
        incoming = frozenset().union(*(t.variables() for t in mapping.values()))
        clash = incoming & set(self.bound)
        pf = self
        if clash:
            pf = pf.rename_bound({v: fresh_name(v, incoming | pf.matrix.free_vars() | set(pf.bound)) for v in clash})
        return PrenexFormula(pf.prefix, pf.matrix.substitute(mapping))

    def rename_bound(self, ren: Mapping[str, str]) -> "PrenexFormula":
        prefix = tuple((q, ren.get(v, v)) for q, v in self.prefix)
        matrix = self.matrix.substitute({old: LinTerm.var(new) for old, new in ren.items()})
        return PrenexFormula(prefix, matrix)

    def negate(self) -> "PrenexFormula":
        flip = {FORALL: EXISTS, EXISTS: FORALL}
        return PrenexFormula(tuple((flip[q], v) for q, v in self.prefix), self.matrix.negate())

    def to_sexpr(self):
        out = self.matrix.to_sexpr()
        for q, v in reversed(self.prefix):
            out = [q, [v], out]
        return out

    def __str__(self) -> str:
        from ..sexpr import render

        return render(self.to_sexpr())


def fresh_name(base: str, taken) -> str:
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"
