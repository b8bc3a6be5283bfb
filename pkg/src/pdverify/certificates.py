"""Solver-independent certificates and their checker.

A certificate is a kind tag plus a witness object.  Every kind has an
s-expression form, so certificates can be written to disk and checked
later against the problem file alone::

    (certificate :kind invariant :witness (>= x 0))
    (certificate :kind dwf :witness ((rank (1) 0)))
    (certificate :kind fix-valid :witness (strategy (rank P (1) 0))
                 :params ((term-depth 1) (max-coef 1) (max-offset 2)))

The checker never reuses solver state: abstractions, products, Houdini
fixpoints and projections are rebuilt from the problem.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union

from .cegar import AbstractSafe, abstract_error_search
from .fixpoint import FixConfig, FixProblem, FixStrategy, certify_fix, check_strategy
from .houdini import InductionDualPair, houdini_fixpoint
from .lra import PrenexFormula, SortMismatch, parse_formula, parse_term
from .parsing import _pool_items, parse_state, state_sexpr
from .qlra import certify_sat, certify_unsat
from .results import Result, Status
from .sexpr import ParseError, SExpr, Sym, as_number, fail, is_sym, keyword_sections, parse_one, render
from .skeleton import check_skeleton, from_sexpr as skeleton_from_sexpr, to_sexpr as skeleton_to_sexpr
from .systems import (
    Dwf,
    ExplicitTS,
    Inductive,
    Predicate,
    Single,
    SymbolicTS,
    Trace,
    UndecidableCombination,
    invariant_check,
    is_error_trace,
)
from .termination import RankingTemplate, certify_termination

KINDS = {
    # kind: (problem type, description)
    "predicates": ((ExplicitTS, SymbolicTS), "predicate set whose abstraction is safe"),
    "invariant": ((ExplicitTS, SymbolicTS), "safe inductive invariant"),
    "trace": ((ExplicitTS, SymbolicTS), "concrete error trace"),
    "houdini": ((InductionDualPair,), "dual predicate set whose Houdini fixpoint is safe"),
    "ranking": ((ExplicitTS,), "single ranking function"),
    "dwf": ((ExplicitTS,), "disjunctively well-founded ranking set"),
    "skeleton-sat": ((PrenexFormula,), "satisfying strategy skeleton"),
    "skeleton-unsat": ((PrenexFormula,), "refuting strategy skeleton"),
    "fix-valid": ((FixProblem,), "proponent strategy"),
    "fix-invalid": ((FixProblem,), "opponent strategy"),
}


class KindMismatch(TypeError):
    """The certificate kind does not apply to this kind of problem."""


@dataclass(frozen=True)
class Certificate:
    kind: str
    witness: Any
    params: tuple = ()  # sorted (name, int) pairs, used by pool-relative kinds

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")

    def to_sexpr(self) -> list:
        out = [Sym("certificate"), ":kind", self.kind, ":witness", _witness_sexpr(self.kind, self.witness)]
        if self.params:
            out += [":params", [[k, v] for k, v in self.params]]
        return out

    def to_text(self) -> str:
        return render(self.to_sexpr())


@dataclass(frozen=True)
class Accept:
    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Reject:
    reason: str
    detail: Any = field(default=None, compare=False)

    def __bool__(self) -> bool:
        return False


# checking ------------------------------------------------------------------------

def check_certificate(problem, cert: Certificate) -> Union[Accept, Reject]:
    """Accept, or Reject with the first failing condition.

    Certificates the exact procedures cannot decide (for instance ``mod``
    predicates over a rational-sorted symbolic system) are rejected as
    ``undecidable`` rather than guessed.
    """
    types, _ = KINDS[cert.kind]
    if not isinstance(problem, types):
        raise KindMismatch(f"a {cert.kind} certificate does not apply to {type(problem).__name__}")
    try:
        return _check(problem, cert)
    except (SortMismatch, UndecidableCombination) as err:
        return Reject("undecidable", str(err))


def _check(problem, cert: Certificate) -> Union[Accept, Reject]:
    w = cert.witness
    k = cert.kind
    if k == "predicates":
        if isinstance(abstract_error_search(problem, w), AbstractSafe):
            return Accept()
        return Reject("abstract error path")
    if k == "invariant":
        preds = list(w) if isinstance(w, (frozenset, set, list, tuple)) else [w]
        res = invariant_check(problem, preds)
        return Accept() if isinstance(res, Inductive) else Reject(res.kind, res.witness)
    if k == "trace":
        states = w.states if isinstance(w, Trace) else tuple(w)
        return Accept() if is_error_trace(problem, states) else Reject("not an error trace")
    if k == "houdini":
        if not set(w) <= problem.base:
            return Reject("unknown predicate")
        res = houdini_fixpoint(problem.T, w, problem.holds_base)
        if not res.safe:
            return Reject("houdini fixpoint is unsafe")
        inv = invariant_check(problem.T, problem.predicates(res.invariant))
        return Accept() if isinstance(inv, Inductive) else Reject(inv.kind, inv.witness)
    if k in ("ranking", "dwf"):
        if k == "ranking" and not isinstance(w, Single):
            return Reject("malformed ranking")
        if k == "dwf" and not isinstance(w, Dwf):
            return Reject("malformed ranking set")
        return Accept() if certify_termination(problem, w) else Reject("ranking product reaches a bad state")
    if k == "skeleton-sat":
        if not check_skeleton(problem, w, "sat"):
            return Reject("skeleton shape")
        return Accept() if certify_sat(problem, w) else Reject("projection is not valid")
    if k == "skeleton-unsat":
        if not check_skeleton(problem, w, "unsat"):
            return Reject("skeleton shape")
        return Accept() if certify_unsat(problem, w) else Reject("projection is not valid")
    side = "y" if k == "fix-valid" else "x"
    if not check_strategy(problem, w, side):
        return Reject("strategy shape")
    cfg = FixConfig(**{k2.replace("-", "_"): v for k2, v in cert.params})
    return Accept() if certify_fix(problem, side, w, cfg) else Reject("a pool strategy defeats the witness")


# construction from solver results --------------------------------------------------

METHOD_KINDS = {
    ("cegar", Status.SAFE): "predicates",
    ("cegar", Status.UNSAFE): "trace",
    ("ice", Status.SAFE): "invariant",
    ("pd-houdini", Status.SAFE): "houdini",
    ("term-ice", Status.TERMINATING): "ranking",
    ("term-cegar", Status.TERMINATING): "dwf",
    ("qlra", Status.VALID): "skeleton-sat",
    ("qlra", Status.INVALID): "skeleton-unsat",
    ("fixpoint", Status.VALID): "fix-valid",
    ("fixpoint", Status.INVALID): "fix-invalid",
}


def certificate_for(method: str, result: Result, fix_cfg: FixConfig | None = None) -> Certificate | None:
    """The certificate backing a witness or counter-witness verdict, if any."""
    kind = METHOD_KINDS.get((method, result.status))
    if kind is None:
        return None
    params = ()
    if kind.startswith("fix-"):
        cfg = fix_cfg or FixConfig()
        params = (("max-coef", cfg.max_coef), ("max-offset", cfg.max_offset), ("term-depth", cfg.term_depth))
    return Certificate(kind, result.witness, params)


# s-expressions ---------------------------------------------------------------------

def _pred_sexpr(p: Predicate):
    if p.symbolic:
        try:
            e = parse_one(p.ident)
            if parse_formula(e) == p.formula:
                return e
        except (ParseError, ValueError, TypeError):
            pass
        return p.formula.to_sexpr()
    return [Sym("set"), p.ident] + [state_sexpr(s) for s in sorted(p.states, key=repr)]


def _rank_sexpr(r: RankingTemplate):
    return [Sym("rank"), list(r.a), r.b]


def _witness_sexpr(kind: str, w):
    if kind == "predicates":
        return [_pred_sexpr(p) for p in sorted(w, key=lambda p: (p.stratum, p.ident))]
    if kind == "invariant":
        return _pred_sexpr(w)
    if kind == "trace":
        return [state_sexpr(s) for s in (w.states if isinstance(w, Trace) else w)]
    if kind == "houdini":
        return sorted(map(str, w))
    if kind == "ranking":
        return _rank_sexpr(w.rank)
    if kind == "dwf":
        return [_rank_sexpr(r) for r in w.ranks]
    if kind.startswith("skeleton"):
        return skeleton_to_sexpr(w)
    out: list = [Sym("strategy")]
    for p, r in sorted(w.rankings, key=repr):
        out.append([Sym("rank"), p, list(r.a), r.b])
    for (owner, v), t in sorted(w.terms, key=lambda st: (st[0], repr(st[1]))):
        out.append([Sym("term"), owner, v, t.to_sexpr()])
    return out


def _int(e: SExpr) -> int:
    n = as_number(e)
    if n is None or n.denominator != 1:
        raise fail(e if isinstance(e, Sym) else Sym("?"), "expected an integer")
    return int(n)


def _rank_from(e: SExpr) -> RankingTemplate:
    if not isinstance(e, list) or len(e) != 3 or not is_sym(e[0], "rank") or not isinstance(e[1], list):
        raise fail(e, "expected (rank (a ...) b)")
    return RankingTemplate(tuple(_int(c) for c in e[1]), _int(e[2]))


def _preds_from(items: list) -> list[Predicate]:
    out: list = []
    _pool_items(items, 0, out)
    return out


def _witness_from(kind: str, e: SExpr):
    if kind == "predicates":
        return frozenset(_preds_from(list(e)))
    if kind == "invariant":
        (p,) = _preds_from([e])
        return p
    if kind == "trace":
        return Trace(tuple(parse_state(s) for s in e))
    if kind == "houdini":
        return frozenset(s.name for s in e)
    if kind == "ranking":
        return Single(_rank_from(e))
    if kind == "dwf":
        return Dwf(tuple(_rank_from(r) for r in e))
    if kind.startswith("skeleton"):
        return skeleton_from_sexpr(e)
    if not isinstance(e, list) or not e or not is_sym(e[0], "strategy"):
        raise fail(e, "expected (strategy ...)")
    ranks, terms = set(), set()
    for it in e[1:]:
        if isinstance(it, list) and len(it) == 4 and is_sym(it[0], "rank"):
            ranks.add((it[1].name, _rank_from([it[0], it[2], it[3]])))
        elif isinstance(it, list) and len(it) == 4 and is_sym(it[0], "term"):
            terms.add(((it[1].name, it[2].name), parse_term(it[3], primes=False)))
        else:
            raise fail(it, "expected (rank P (a ...) b) or (term owner var t)")
    return FixStrategy(frozenset(ranks), frozenset(terms))


def certificate_from_sexpr(e: SExpr) -> Certificate:
    if not isinstance(e, list) or not e or not is_sym(e[0], "certificate"):
        raise fail(e, "expected (certificate :kind k :witness w)")
    kw = keyword_sections(e[1:], e)
    if ":kind" not in kw or ":witness" not in kw:
        raise fail(e, "a certificate needs :kind and :witness")
    kind = kw[":kind"].name if isinstance(kw[":kind"], Sym) else None
    if kind not in KINDS:
        raise fail(kw[":kind"], f"unknown certificate kind {render(kw[':kind'])}")
    params = []
    for p in kw.get(":params", []):
        if not isinstance(p, list) or len(p) != 2 or not isinstance(p[0], Sym):
            raise fail(e, "a parameter is (name value)")
        params.append((p[0].name, _int(p[1])))
    return Certificate(kind, _witness_from(kind, kw[":witness"]), tuple(sorted(params)))


def parse_certificate(text: str) -> Certificate:
    return certificate_from_sexpr(parse_one(text))


__all__ = [
    "Accept",
    "Certificate",
    "KINDS",
    "KindMismatch",
    "ParseError",
    "Reject",
    "certificate_for",
    "certificate_from_sexpr",
    "check_certificate",
    "parse_certificate",
]
