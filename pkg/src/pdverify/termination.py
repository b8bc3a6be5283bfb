"""Termination via ranking functions (ICE style) and DWF relations (CEGAR style).

Both modes reduce the dual check to safety of a ranking product:

* ``Single(r)`` pairs every transition and flags pairs that ``r`` fails to
  decrease;
* ``Dwf(R)`` additionally lets the first component lag behind, so an error
  means some ordered pair of a trace is not decreased by any ``r`` in ``R``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Optional, Sequence, Union

from .lagrangian import (
    Choice,
    CounterDual,
    CounterPrimal,
    DualOk,
    DualWitness,
    EngineConfig,
    LagrangianInstance,
    PrimalOk,
    PrimalWitness,
    Side,
    run_primal_dual,
)
from .results import Result, Status
from .systems import (
    Dwf,
    ExplicitTS,
    Safe,
    Sample,
    Single,
    Trace,
    UndecidableCombination,
    explicit_error_search,
    fmt_state,
    product_trace_to_states,
    ranking_product,
    sample,
)


def _vec(s) -> tuple:
    return s if isinstance(s, tuple) else (s,)


@dataclass(frozen=True, order=True)
class RankingTemplate:
    """``r(s) = max(floor(a . s + b), 0)``."""

    a: tuple[int, ...]
    b: int = 0

    def __call__(self, s) -> int:
        v = sum((Fraction(c) * x for c, x in zip(self.a, _vec(s))), Fraction(self.b))
        return max(math.floor(v), 0)

    @property
    def stratum(self) -> int:
        return max((abs(c) for c in self.a), default=0)

    def __str__(self) -> str:
        names = ["x"] if len(self.a) == 1 else [f"x{i}" for i in range(len(self.a))]
        parts = []
        for c, n in zip(self.a, names):
            if c:
                parts.append(n if c == 1 else (f"-{n}" if c == -1 else f"{c}*{n}"))
        if self.b or not parts:
            parts.append(str(self.b))
        return "max(" + " + ".join(parts).replace("+ -", "- ") + ", 0)"


def template_pool(dim: int, max_coef: int = 1, max_offset: int = 0) -> list[list[RankingTemplate]]:
    """Templates by stratum; inside a stratum by ``|b|``, then coefficients descending."""
    strata: list[list[RankingTemplate]] = [[] for _ in range(max_coef + 1)]
    offsets = sorted(range(-max_offset, max_offset + 1), key=lambda b: (abs(b), -b))
    for a in product(range(max_coef, -max_coef - 1, -1), repeat=dim):
        for b in offsets:
            t = RankingTemplate(tuple(a), b)
            strata[t.stratum].append(t)
    for layer in strata:
        layer.sort(key=lambda t: (abs(t.b), tuple(-c for c in t.a), -t.b))
    return strata


def dimension(ts: ExplicitTS) -> int:
    if ts.vars:
        return len(ts.vars)
    return len(_vec(ts.states[0])) if ts.states else 1


# Lagrangians -------------------------------------------------------------------

def sample_reachable(s: Sample) -> set:
    seen = set(s.init)
    changed = True
    while changed:
        changed = False
        for a, b in s.trans:
            if a in seen and b not in seen:
                seen.add(b)
                changed = True
    return seen


def l_t_ice(s: Sample, r) -> int:
    """1 iff ``r`` decreases on every sampled transition reachable from the sampled init."""
    reach = sample_reachable(s)
    return 1 if all(r(a) > r(b) for a, b in s.trans if a in reach) else -1


def unranked_pairs(tau: Sequence, R: Iterable) -> list[tuple]:
    R = list(R)
    tau = list(tau)
    return [
        (tau[i], tau[j])
        for i in range(len(tau))
        for j in range(i + 1, len(tau))
        if not any(r(tau[i]) > r(tau[j]) for r in R)
    ]


def l_t_cegar(tau: Sequence, R: Iterable) -> int:
    """1 iff every ordered pair of ``tau`` (not just adjacent ones) decreases under ``R``."""
    return -1 if unranked_pairs(tau, R) else 1


# dual check -------------------------------------------------------------------

@dataclass(frozen=True)
class Pass:
    pass


@dataclass(frozen=True)
class Counter:
    evidence: Union[Sample, Trace]
    pair: Optional[tuple] = None


def dual_check(ts, witness: Union[Single, Dwf]) -> Union[Pass, Counter]:
    if not isinstance(ts, ExplicitTS):
        raise UndecidableCombination("termination products are built for explicit systems only")
    res = explicit_error_search(ranking_product(ts, witness))
    if isinstance(res, Safe):
        return Pass()
    run = product_trace_to_states(res)
    if isinstance(witness, Single):
        return Counter(sample(init=[run[0]], trans=zip(run, run[1:])), res.states[-1])
    return Counter(Trace(run), res.states[-1])


# synthesis ---------------------------------------------------------------------

@dataclass(frozen=True)
class Exhausted:
    pass


def synthesize_ranking(constraint: Union[Sample, Trace, Sequence], pool: list[list], R: Iterable = ()):
    """Smallest-stratum template meeting the constraint.

    For a sample the template must rank it on its own; for a trace it must
    decrease on every ordered pair that ``R`` leaves unranked.
    """
    if isinstance(constraint, Sample):
        ok = lambda r: l_t_ice(constraint, r) == 1
    else:
        todo = unranked_pairs(list(constraint), R)
        ok = lambda r: all(r(a) > r(b) for a, b in todo)
    for layer in pool:
        for r in layer:
            if ok(r):
                return r
    return Exhausted()


# the loops ---------------------------------------------------------------------

@dataclass(frozen=True)
class TerminationConfig:
    max_iterations: int = 100
    random_seed: int = 0
    max_coef: int = 1
    max_offset: int = 0


def describe_R(R) -> list[str]:
    return sorted(str(r) for r in R)


def _describe_trace(tau) -> list[str]:
    return [fmt_state(s) for s in tau]


def t_ice_instance(ts: ExplicitTS, pool) -> LagrangianInstance:
    def dual(r, choice: Choice):
        res = dual_check(ts, Single(r))
        return DualOk() if isinstance(res, Pass) else CounterPrimal(res.evidence)

    def primal(s, choice: Choice):
        r = synthesize_ranking(s, pool)
        return PrimalOk() if isinstance(r, Exhausted) else CounterDual(r)

    return LagrangianInstance(
        evaluate=l_t_ice,
        dual_witness_check=dual,
        primal_witness_check=primal,
        join_x=Sample.join,
        stratum_y=lambda r: r.stratum,
        initial_x=Sample(),
        describe_x=lambda s: s.describe(),
        describe_y=lambda r: None if r is None else str(r),
        name="term-ice",
    )


def t_cegar_instance(ts: ExplicitTS, pool) -> LagrangianInstance:
    current = {"R": frozenset()}

    def dual(R, choice: Choice):
        current["R"] = R
        res = dual_check(ts, Dwf(tuple(sorted(R))))
        return DualOk() if isinstance(res, Pass) else CounterPrimal(res.evidence)

    def primal(tau, choice: Choice):
        r = synthesize_ranking(tau, pool, current["R"])
        if isinstance(r, Exhausted):
            return PrimalOk()
        # the old relations plus r rank the whole trace
        return CounterDual(current["R"] | {r})

    return LagrangianInstance(
        evaluate=lambda tau, R: l_t_cegar(tau, R),
        dual_witness_check=dual,
        primal_witness_check=primal,
        join_y=frozenset.union,
        stratum_y=lambda R: max((r.stratum for r in R), default=0),
        initial_y=frozenset(),
        describe_x=_describe_trace,
        describe_y=describe_R,
        name="term-cegar",
    )


def run_termination(ts: ExplicitTS, method: str = "cegar", cfg: TerminationConfig = TerminationConfig(),
                    pool=None) -> Result:
    if not isinstance(ts, ExplicitTS):
        raise UndecidableCombination("termination products are built for explicit systems only")
    pool = template_pool(dimension(ts), cfg.max_coef, cfg.max_offset) if pool is None else pool
    if method == "ice":
        L = t_ice_instance(ts, pool)
        ecfg = EngineConfig(accumulate_x=True, max_iterations=cfg.max_iterations, start_side=Side.PRIMAL,
                            random_seed=cfg.random_seed)
        wrap = Single
    elif method == "cegar":
        L = t_cegar_instance(ts, pool)
        ecfg = EngineConfig(accumulate_y=True, max_iterations=cfg.max_iterations, random_seed=cfg.random_seed)
        wrap = lambda R: Dwf(tuple(sorted(R)))
    else:
        raise ValueError(f"unknown termination method {method!r}")
    v = run_primal_dual(L, ecfg)
    common = dict(trace=v.trace, describe_x=L.describe_x, describe_y=L.describe_y)
    if isinstance(v, DualWitness):
        return Result(Status.TERMINATING, wrap(v.beta), **common)
    if isinstance(v, PrimalWitness):
        return Result(Status.UNKNOWN, v.alpha, note="template pool exhausted", **common)
    return Result(Status.BUDGET, v.alpha, **common)


def certify_termination(ts: ExplicitTS, witness: Union[Single, Dwf]) -> bool:
    return isinstance(dual_check(ts, witness), Pass)


# oracles ------------------------------------------------------------------------

@dataclass(frozen=True)
class TableRank:
    table: tuple  # sorted (state, rank) pairs

    def __call__(self, s) -> int:
        return dict(self.table)[s]


def longest_path_rank(ts: ExplicitTS) -> Optional[TableRank]:
    """Remaining steps before termination, or ``None`` if a reachable cycle exists."""
    reach = set(ts.reachable())
    memo: dict = {}
    on_stack: set = set()

    def depth(s) -> Optional[int]:
        if s in memo:
            return memo[s]
        if s in on_stack:
            return None
        on_stack.add(s)
        best = 0
        for t in ts.successors(s):
            d = depth(t)
            if d is None:
                return None
            best = max(best, d + 1)
        on_stack.discard(s)
        memo[s] = best
        return best

    for s in reach:
        if depth(s) is None:
            return None
    return TableRank(tuple(sorted(((s, memo.get(s, 0)) for s in ts.states), key=lambda p: repr(p[0]))))


def single_oracle(ts: ExplicitTS, r) -> bool:
    """No reachable transition fails to decrease ``r``."""
    reach = set(ts.reachable())
    return all(r(s) > r(t) for s, t in ts.trans if s in reach)


def dwf_oracle(ts: ExplicitTS, R: Sequence) -> bool:
    """Every pair (s, t) with s reachable and t reachable from s in >= 1 step decreases."""
    reach = set(ts.reachable())
    for s in reach:
        seen: set = set()
        stack = list(ts.successors(s))
        while stack:
            t = stack.pop()
            if t in seen:
                continue
            seen.add(t)
            stack.extend(ts.successors(t))
        if any(not any(r(s) > r(t) for r in R) for t in seen):
            return False
    return True
