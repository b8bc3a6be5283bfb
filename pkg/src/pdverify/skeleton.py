"""Strategy skeletons for prenex formulas.

One tree shape serves both players.  Relative to a formula, a skeleton is
*SAT-shaped* when it chooses terms at existential quantifiers and passes
universal ones, and *UNSAT-shaped* when it does the opposite:

* :class:`Leaf` -- the quantifier-free matrix, nothing to choose;
* :class:`Pass` -- the opponent's quantifier, bound in the context;
* :class:`Choice` -- finitely many candidate terms for the player's quantifier.

An UNSAT skeleton of ``phi`` is therefore literally a SAT skeleton of
``not phi``.  Branches are kept sorted and merged by term, which turns the
preorder on skeletons into a partial order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .lra import EXISTS, FORALL, LinTerm, PrenexFormula, parse_term
from .sexpr import fail, is_sym


class ShapeMismatch(ValueError):
    pass


class IncompatibleShape(ValueError):
    pass


@dataclass(frozen=True)
class Leaf:
    def substitute(self, mapping):
        return self

    def terms(self):
        return iter(())

    def depth(self) -> int:
        return 0

    def __str__(self) -> str:
        return "*"


@dataclass(frozen=True)
class Pass:
    var: str
    child: "Skeleton"

    def substitute(self, mapping):
        mapping = {k: v for k, v in mapping.items() if k != self.var}
        return Pass(self.var, self.child.substitute(mapping))

    def terms(self):
        return self.child.terms()

    def depth(self) -> int:
        return 1 + self.child.depth()

    def __str__(self) -> str:
        return f"Q{self.var}.{self.child}"


@dataclass(frozen=True)
class Choice:
    var: str
    branches: tuple[tuple[LinTerm, "Skeleton"], ...]

    def __post_init__(self):
        if not self.branches:
            raise ValueError("a choice node needs at least one branch")
        object.__setattr__(self, "branches", _normalize(self.branches))

    def substitute(self, mapping):
        return Choice(self.var, tuple((t.substitute(mapping), c.substitute(mapping)) for t, c in self.branches))

    def terms(self):
        for t, c in self.branches:
            yield t
            yield from c.terms()

    def depth(self) -> int:
        return 1 + max(c.depth() for _, c in self.branches)

    def __str__(self) -> str:
        parts = [f"({t}).{c}" for t, c in self.branches]
        return parts[0] if len(parts) == 1 else "(" + " | ".join(parts) + ")"


Skeleton = Union[Leaf, Pass, Choice]


def _normalize(branches) -> tuple:
    merged: dict = {}
    for t, c in branches:
        merged[t] = join(merged[t], c) if t in merged else c
    return tuple(sorted(merged.items(), key=lambda tc: _term_key(tc[0])))


def _term_key(t: LinTerm):
    return (tuple((str(k), c) for k, c in t.coeffs), t.const)


# typing ---------------------------------------------------------------------------

def _choice_q(side: str) -> str:
    if side not in ("sat", "unsat"):
        raise ValueError(f"side must be 'sat' or 'unsat', got {side!r}")
    return EXISTS if side == "sat" else FORALL


def check_skeleton(phi: PrenexFormula, sk: Skeleton, side: str = "sat", context: Iterable[str] = ()) -> bool:
    """Derivability of the typing judgment, syntax directed.

    ``Pass`` adds its variable to the context; ``Choice`` does not, and its
    terms may only mention variables already in the context.
    """
    chooser = _choice_q(side)
    ctx = set(context) | set(phi.free_vars())
    prefix = list(phi.prefix)
    return _check(prefix, sk, chooser, ctx)


def _check(prefix, sk, chooser, ctx) -> bool:
    if not prefix:
        return isinstance(sk, Leaf)
    (q, v), rest = prefix[0], prefix[1:]
    if isinstance(sk, Pass):
        return q != chooser and sk.var == v and _check(rest, sk.child, chooser, ctx | {v})
    if isinstance(sk, Choice):
        return (
            q == chooser
            and sk.var == v
            and all(t.variables() <= ctx and not t.has_mod() for t, _ in sk.branches)
            and all(_check(rest, c, chooser, ctx) for _, c in sk.branches)
        )
    return False


# order and join -------------------------------------------------------------------

def leq(a: Skeleton, b: Skeleton) -> bool:
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        return True
    if isinstance(a, Pass) and isinstance(b, Pass):
        return a.var == b.var and leq(a.child, b.child)
    if isinstance(a, Choice) and isinstance(b, Choice):
        if a.var != b.var:
            return False
        other = dict(b.branches)
        return all(t in other and leq(c, other[t]) for t, c in a.branches)
    return False


def join(a: Skeleton, b: Skeleton) -> Skeleton:
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        return a
    if isinstance(a, Pass) and isinstance(b, Pass) and a.var == b.var:
        return Pass(a.var, join(a.child, b.child))
    if isinstance(a, Choice) and isinstance(b, Choice) and a.var == b.var:
        return Choice(a.var, a.branches + b.branches)
    raise IncompatibleShape(f"cannot join {a} with {b}")


def join_all(items: Iterable[Skeleton]) -> Skeleton:
    items = list(items)
    out = items[0]
    for s in items[1:]:
        out = join(out, s)
    return out


def skeleton_join(phi: PrenexFormula, a: Skeleton, b: Skeleton, side: str = "sat") -> Skeleton:
    if not (check_skeleton(phi, a, side) and check_skeleton(phi, b, side)):
        raise IncompatibleShape("both skeletons must type-check against the formula")
    return join(a, b)


def constant_skeleton(phi: PrenexFormula, side: str = "sat", value: int = 0) -> Skeleton:
    """The skeleton choosing the same constant at every choice point."""
    chooser = _choice_q(side)
    out: Skeleton = Leaf()
    for q, v in reversed(phi.prefix):
        out = Choice(v, ((LinTerm.const_term(value), out),)) if q == chooser else Pass(v, out)
    return out


# s-expressions --------------------------------------------------------------------

def to_sexpr(sk: Skeleton):
    if isinstance(sk, Leaf):
        return ["leaf"]
    if isinstance(sk, Pass):
        return ["pass", sk.var, to_sexpr(sk.child)]
    return ["choice", sk.var] + [[t.to_sexpr(), to_sexpr(c)] for t, c in sk.branches]


def from_sexpr(e) -> Skeleton:
    if not isinstance(e, list) or not e or not is_sym(e[0]):
        raise fail(e, "expected a skeleton (leaf), (pass x ...) or (choice x (term sk) ...)")
    head = e[0].name
    if head == "leaf" and len(e) == 1:
        return Leaf()
    if head == "pass" and len(e) == 3 and is_sym(e[1]):
        return Pass(e[1].name, from_sexpr(e[2]))
    if head == "choice" and len(e) >= 3 and is_sym(e[1]):
        branches = []
        for b in e[2:]:
            if not isinstance(b, list) or len(b) != 2:
                raise fail(b, "a choice branch is (term skeleton)")
            branches.append((parse_term(b[0], primes=False), from_sexpr(b[1])))
        return Choice(e[1].name, tuple(branches))
    raise fail(e, f"malformed skeleton node {head!r}")
