"""Strategy-skeleton solving for quantified linear rational arithmetic.

``L_FK(rho, pi) = 1`` iff the play of the UNSAT skeleton ``rho`` against the
SAT skeleton ``pi`` yields a true quantifier-free formula.  The dual check
decides validity of the projection ``phi|pi>`` and, when it fails, turns the
counter-model into an UNSAT skeleton whose terms come from model-based
projection.  The primal check is the same procedure on ``not phi``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .lagrangian import (
    Choice as Tiebreak,
    CounterDual,
    CounterPrimal,
    DualOk,
    DualWitness,
    EngineConfig,
    LagrangianInstance,
    PrimalOk,
    PrimalWitness,
    run_primal_dual,
)
from .lra import (
    EXISTS,
    FORALL,
    Formula,
    LinTerm,
    PrenexFormula,
    Sat,
    Valid,
    eq,
    forall_validity,
    fresh_name,
    implicant,
    mbp_term,
    mk_and,
    mk_or,
    project_vars,
    qf_sat,
)
from .results import Result, Status
from .skeleton import (
    Choice,
    Leaf,
    Pass,
    ShapeMismatch,
    Skeleton,
    check_skeleton,
    constant_skeleton,
    join,
    join_all,
)


class NotACounterModel(ValueError):
    pass


# play ---------------------------------------------------------------------------

def play(rho: Skeleton, phi: PrenexFormula, pi: Skeleton) -> Formula:
    """The quantifier-free formula ``<rho | phi | pi>``."""
    if not phi.prefix:
        if not (isinstance(rho, Leaf) and isinstance(pi, Leaf)):
            raise ShapeMismatch("quantifier-free formulas take leaf skeletons")
        return phi.matrix
    q, x = phi.head()
    body = phi.body()
    if q == FORALL:
        if not (isinstance(pi, Pass) and isinstance(rho, Choice) and pi.var == x == rho.var):
            raise ShapeMismatch(f"at forall {x}: expected a pass in pi and a choice in rho")
        return mk_and(
            play(r, body.substitute({x: t}), pi.child.substitute({x: t})) for t, r in rho.branches
        )
    if not (isinstance(rho, Pass) and isinstance(pi, Choice) and rho.var == x == pi.var):
        raise ShapeMismatch(f"at exists {x}: expected a pass in rho and a choice in pi")
    return mk_or(play(rho.child.substitute({x: t}), body.substitute({x: t}), p) for t, p in pi.branches)


def l_fk(phi: PrenexFormula, rho: Skeleton, pi: Skeleton) -> int:
    f = play(rho, phi, pi)
    if f.free_vars():
        raise ValueError("the play of a sentence must be ground")
    return 1 if f.evaluate({}) else -1


# projection -----------------------------------------------------------------------

def _branch_name(v: str, path: tuple, taken: frozenset) -> str:
    if not path:
        return v
    name = v + "".join(f"_{i}" for i in path)
    return fresh_name(name, taken) if name in taken else name


def _all_vars(phi: PrenexFormula) -> frozenset:
    return frozenset(phi.bound) | phi.matrix.free_vars()


def project(phi: PrenexFormula, sk: Skeleton, side: str = "sat", path: tuple = ()) -> PrenexFormula:
    """``phi|pi>`` (SAT side) or ``<rho|phi`` read as ``(not phi)|rho>`` (UNSAT side).

    Universal variables below a choice with several branches are renamed
    apart with the branch path (``z`` becomes ``z_1``, ``z_2``) so that the
    result is a flat universal prenex formula.
    """
    if side == "unsat":
        phi = phi.negate()
    elif side != "sat":
        raise ValueError(f"side must be 'sat' or 'unsat', got {side!r}")
    taken = _all_vars(phi)
    prefix, matrix = _project(phi, sk, path, taken, {})
    return PrenexFormula(tuple((FORALL, v) for v in prefix), matrix)


def _project(phi: PrenexFormula, sk: Skeleton, path: tuple, taken, sigma: Mapping = {}) -> tuple[list, Formula]:
    """``sigma`` is applied lazily to the skeleton's terms, keeping branch order stable."""
    if not phi.prefix:
        if not isinstance(sk, Leaf):
            raise ShapeMismatch("quantifier-free formulas take leaf skeletons")
        return [], phi.matrix
    q, x = phi.head()
    body = phi.body()
    if q == FORALL:
        if not (isinstance(sk, Pass) and sk.var == x):
            raise ShapeMismatch(f"at forall {x}: expected a pass node")
        name = _branch_name(x, path, taken)
        if name != x:
            body = body.substitute({x: LinTerm.var(name)})
            sigma = {**sigma, x: LinTerm.var(name)}
        pre, mat = _project(body, sk.child, path, taken, sigma)
        return [name] + pre, mat
    if not (isinstance(sk, Choice) and sk.var == x):
        raise ShapeMismatch(f"at exists {x}: expected a choice node")
    multi = len(sk.branches) > 1
    prefix: list = []
    mats = []
    for i, (t, child) in enumerate(sk.branches, start=1):
        sub = body.substitute({x: t.substitute(sigma)})
        pre, mat = _project(sub, child, path + (i,) if multi else path, taken, sigma)
        prefix += pre
        mats.append(mat)
    return prefix, mk_or(mats)


# counter-skeleton extraction -------------------------------------------------------

def extract_counter_skeleton(phi: PrenexFormula, pi: Skeleton, cm: Optional[Mapping] = None,
                             terms: bool = True) -> Skeleton:
    """An UNSAT skeleton ``rho`` with ``L_FK(rho, pi) = -1``.

    Follows the constructive induction: a universal node instantiates the
    counter-model value, converted into a term over the enclosing
    existential variables by model-based projection (or kept as a constant
    when ``terms`` is false); a choice node joins the extractions of its
    branches.  ``cm`` is used wherever it still falsifies the projection.
    """
    if phi.free_vars():
        raise ValueError("counter-skeletons are extracted for sentences")
    proj = project(phi, pi)
    if cm is None:
        res = forall_validity(proj)
        if isinstance(res, Valid):
            raise NotACounterModel("the projection is valid")
        cm = res.model
    cm = {k: Fraction(v) for k, v in cm.items()}
    full = {v: cm.get(v, Fraction(0)) for v in proj.bound}
    if proj.matrix.evaluate(full):
        raise NotACounterModel("the assignment satisfies the projection")
    taken = _all_vars(phi)
    rho = _extract(phi, pi, {}, (), cm, terms, taken, {})
    assert l_fk(phi, rho, pi) == -1, "extracted skeleton does not refute pi"
    return rho


def _extract(psi: PrenexFormula, pi: Skeleton, ctx: dict, path: tuple, cm: dict, terms: bool, taken,
             sigma: Mapping = {}) -> Skeleton:
    if not psi.prefix:
        return Leaf()
    q, x = psi.head()
    if q == EXISTS:
        assert isinstance(pi, Choice)
        multi = len(pi.branches) > 1
        subs = []
        for i, (t, child) in enumerate(pi.branches, start=1):
            val = t.substitute(sigma).evaluate(ctx)
            sub_path = path + (i,) if multi else path
            subs.append(_extract(psi.body(), child, {**ctx, x: val}, sub_path, cm, terms, taken, sigma))
        return Pass(x, join_all(subs))
    assert isinstance(pi, Pass)
    prefix, mat = _project(psi, pi, path, taken, sigma)
    neg = mat.negate()
    m = {**cm, **ctx}
    if not all(v in m for v in prefix) or not neg.evaluate(m):
        pins = [eq(LinTerm.var(c), val) for c, val in ctx.items()]
        res = qf_sat(mk_and([neg] + pins))
        if not isinstance(res, Sat):
            raise NotACounterModel(f"no refuting value for {x} at {ctx}")
        m = {**{v: Fraction(0) for v in prefix}, **res.model, **ctx}
    xn = prefix[0]
    if terms:
        atoms, _ = project_vars(list(reversed(prefix[1:])), m, implicant(neg, m))
        t = mbp_term(xn, m, [a for a in atoms if a.expr.coeff(xn) != 0])
    else:
        t = LinTerm.const_term(m[xn])
    child = _extract(psi.body().substitute({x: t}), pi.child, ctx, path, cm, terms, taken, {**sigma, x: t})
    return Choice(x, ((t, child),))


# the loop ------------------------------------------------------------------------

@dataclass(frozen=True)
class FkConfig:
    max_iterations: int = 100
    random_seed: int = 0
    mbp_terms: bool = True


def certify_sat(phi: PrenexFormula, pi: Skeleton) -> bool:
    return check_skeleton(phi, pi, "sat") and isinstance(forall_validity(project(phi, pi)), Valid)


def certify_unsat(phi: PrenexFormula, rho: Skeleton) -> bool:
    return check_skeleton(phi, rho, "unsat") and isinstance(forall_validity(project(phi, rho, "unsat")), Valid)


def fk_instance(phi: PrenexFormula, cfg: FkConfig = FkConfig()) -> LagrangianInstance:
    if phi.free_vars():
        raise ValueError(f"expected a sentence; free variables {sorted(phi.free_vars())}")
    neg = phi.negate()

    def dual_check(pi, choice: Tiebreak):
        res = forall_validity(project(phi, pi))
        if isinstance(res, Valid):
            return DualOk()
        return CounterPrimal(extract_counter_skeleton(phi, pi, res.model, cfg.mbp_terms))

    def primal_check(rho, choice: Tiebreak):
        res = forall_validity(project(neg, rho))
        if isinstance(res, Valid):
            return PrimalOk()
        return CounterDual(extract_counter_skeleton(neg, rho, res.model, cfg.mbp_terms))

    return LagrangianInstance(
        evaluate=lambda rho, pi: l_fk(phi, rho, pi),
        dual_witness_check=dual_check,
        primal_witness_check=primal_check,
        join_x=join,
        join_y=join,
        initial_x=constant_skeleton(phi, "unsat"),
        initial_y=constant_skeleton(phi, "sat"),
        describe_x=str,
        describe_y=str,
        name="qlra",
    )


def run_fk(phi: PrenexFormula, cfg: FkConfig = FkConfig()) -> Result:
    L = fk_instance(phi, cfg)
    ecfg = EngineConfig(accumulate_x=True, accumulate_y=True, max_iterations=cfg.max_iterations,
                        random_seed=cfg.random_seed)
    v = run_primal_dual(L, ecfg)
    common = dict(trace=v.trace, describe_x=L.describe_x, describe_y=L.describe_y)
    if isinstance(v, DualWitness):
        assert certify_sat(phi, v.beta)
        return Result(Status.VALID, v.beta, **common)
    if isinstance(v, PrimalWitness):
        assert certify_unsat(phi, v.alpha)
        return Result(Status.INVALID, v.alpha, **common)
    return Result(Status.BUDGET, v.beta, **common)
