"""Bounded-domain semantics, used as a test oracle.

Quantifiers range over ``[-D, D]`` and each predicate is a table over
``[-D, D]^arity``.  The definitions are solved right to left: the last
predicate is iterated to its fixpoint for every value of the ones before
it, by nested Knaster-Tarski iteration (``mu`` from all-false upwards,
``nu`` from all-true downwards).

Calls whose arguments leave the domain are bracketed: the whole problem
is solved once with such calls false and once with them true.  When the
two runs disagree on the query the answer depends on the outside of the
domain and :class:`DomainEscape` is raised.
"""
from __future__ import annotations

from itertools import product

from ..lra import And, Atom, Formula, Or
from ..lra.formulas import _Const
from ..lra.syntax import FORALL, Quant
from .problem import MU, Call, FixProblem


class DomainEscape(RuntimeError):
    pass


class _Solver:
    def __init__(self, problem: FixProblem, D: int, outside: bool):
        self.problem = problem
        self.D = D
        self.outside = outside
        self.domain = range(-D, D + 1)
        self.points = {d.name: list(product(self.domain, repeat=d.arity)) for d in problem.defs}

    def value(self, f: Formula, env: dict, tables: dict) -> bool:
        if isinstance(f, (_Const, Atom)):
            return f.evaluate(env)
        if isinstance(f, Call):
            n = tuple(int(a.evaluate(env)) for a in f.args)
            if any(abs(v) > self.D for v in n):
                return self.outside
            return tables[f.pred][n]
        if isinstance(f, And):
            return all(self.value(g, env, tables) for g in f.args)
        if isinstance(f, Or):
            return any(self.value(g, env, tables) for g in f.args)
        if isinstance(f, Quant):
            vals = (self.value(f.body, {**env, f.var: v}, tables) for v in self.domain)
            return all(vals) if f.q == FORALL else any(vals)
        raise TypeError(f"unexpected node {type(f).__name__}")

    def solve(self, k: int, fixed: dict) -> dict:
        """Tables for definitions ``k..n-1`` given tables for ``0..k-1``."""
        defs = self.problem.defs
        if k == len(defs):
            return {}
        d = defs[k]
        table = {n: d.mode != MU for n in self.points[d.name]}
        while True:
            inner = self.solve(k + 1, {**fixed, d.name: table})
            tables = {**fixed, d.name: table, **inner}
            new = {n: self.value(d.body, dict(zip(d.params, n)), tables) for n in self.points[d.name]}
            if new == table:
                return {d.name: table, **inner}
            table = new

    def query(self) -> bool:
        return self.value(self.problem.query, {}, self.solve(0, {}))


def bounded_semantics_oracle(problem: FixProblem, D: int) -> bool:
    low = _Solver(problem, D, outside=False).query()
    high = _Solver(problem, D, outside=True).query()
    if low != high:
        raise DomainEscape(f"the query depends on calls outside [-{D}, {D}]")
    return low
