"""Model-guided term selection (a small model-based projection).

Given a model ``m`` of a conjunction of atoms, :func:`mbp_term` picks a
term ``t`` not mentioning ``x`` such that the conjunction stays true
under ``m`` after replacing ``x`` by ``t``.  Non-strict extreme
bounds are used as they are; otherwise the term is the midpoint of the
two tightest strict bounds, a strict bound plus or minus one, or (when
``x`` is unconstrained) the model value itself.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .formulas import TRUE, And, Atom, Formula, Or, _Const
from .terms import LinTerm


class ModelMismatch(ValueError):
    pass


def _bounds(x: str, atoms: Iterable[Atom]):
    """Yield (kind, term, strict) with kind in {'eq', 'lo', 'hi'}."""
    for at in atoms:
        a = at.expr.coeff(x)
        if a == 0:
            continue
        bound = at.expr.without(x).scale(-1 / a)
        if at.rel == "=":
            yield "eq", bound, False
        else:
            yield ("hi" if a > 0 else "lo"), bound, at.rel == "<"


def mbp_term(x: str, m: Mapping[str, Fraction], atoms: Iterable[Atom]) -> LinTerm:
    atoms = list(atoms)
    for at in atoms:
        if not at.evaluate(m):
            raise ModelMismatch(f"model falsifies {at}")
    mx = Fraction(m[x])
    lower = upper = None  # (value, strict, term)
    for kind, t, strict in _bounds(x, atoms):
        v = t.evaluate(m)
        if kind == "eq" or (not strict and v == mx):
            return t
        # the greatest lower bound, strict ones winning ties (and symmetrically)
        if kind == "lo" and (lower is None or (v, strict) > lower[:2]):
            lower = (v, strict, t)
        if kind == "hi" and (upper is None or (v, not strict) < (upper[0], not upper[1])):
            upper = (v, strict, t)
    # a non-strict extreme bound can replace x outright
    if lower and not lower[1]:
        return lower[2]
    if upper and not upper[1]:
        return upper[2]
    if lower and upper:
        return (lower[2] + upper[2]).scale(Fraction(1, 2))
    if lower:
        return lower[2] + 1
    if upper:
        return upper[2] - 1
    return LinTerm.const_term(mx)


def implicant(f: Formula, m: Mapping[str, Fraction]) -> list[Atom]:
    """Atoms true under ``m`` whose conjunction implies ``f`` (``f`` must hold)."""
    if isinstance(f, _Const):
        if not f.value:
            raise ModelMismatch("model falsifies false")
        return []
    if isinstance(f, Atom):
        if not f.evaluate(m):
            raise ModelMismatch(f"model falsifies {f}")
        return [f]
    if isinstance(f, And):
        out: list[Atom] = []
        for g in f.args:
            out.extend(a for a in implicant(g, m) if a not in out)
        return out
    if isinstance(f, Or):
        for g in f.args:
            if g.evaluate(m):
                return implicant(g, m)
        raise ModelMismatch("model falsifies every disjunct")
    raise TypeError(f"unsupported node {type(f).__name__}")


def project_vars(xs: Iterable[str], m: Mapping[str, Fraction], atoms: list[Atom]):
    """Eliminate ``xs`` one by one (in the given order) by substitution.

    Returns the remaining atoms (over the other variables, still true under
    ``m``) and the chosen term for each eliminated variable.
    """
    chosen: dict[str, LinTerm] = {}
    cur = list(atoms)
    for x in xs:
        touching = [a for a in cur if a.expr.coeff(x) != 0]
        t = mbp_term(x, m, touching)
        chosen[x] = t
        nxt: list[Atom] = []
        for a in cur:
            g = a.substitute({x: t})
            if g == TRUE:
                continue
            assert isinstance(g, Atom), "projection produced a non-atom"
            if g not in nxt:
                nxt.append(g)
        cur = nxt
    return cur, chosen
