"""Primal-dual search for fixpoint problems over finite pools.

Both witness checks enumerate the opposing side's pool level by level.
A level ``(s, t)`` allows ranking templates of stratum ``<= s`` and slot
terms of depth ``<= t`` (depth = sum of absolute coefficients).  Because
``l_fix`` is anti-monotone in the opponent's strategy and monotone in the
proponent's, each level is decided by its largest element; a failing
largest element is then shrunk greedily into a small counter.

Verdicts are relative to the pools: ``Valid`` means no opponent strategy
in the pool defeats the returned proponent strategy, ``Invalid`` the
converse.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product
from typing import Optional

from ..lagrangian import (
    Choice,
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
from ..lra import FORALL, LinTerm
from ..results import Result, Status
from ..termination import template_pool
from .approx import QUERY, FixStrategy, l_fix, skolemize_choices
from .oracle import DomainEscape, bounded_semantics_oracle
from .problem import MU, NU, FixProblem, parse_problem


@dataclass(frozen=True)
class FixConfig:
    max_iterations: int = 50
    random_seed: int = 0
    term_depth: int = 1
    max_coef: int = 1
    max_offset: int = 2
    reduction_cap: int = 200_000
    domain_bound: Optional[int] = None  # oracle cross-check when set


def term_pool(ctx, depth: int, constants) -> list[list[LinTerm]]:
    """Terms ``sum a_j v_j + b`` by depth ``sum |a_j|``; ``b`` ranges over ``constants``."""
    ctx = sorted(ctx)
    layers: list[list[LinTerm]] = [[] for _ in range(depth + 1)]
    for a in product(range(-depth, depth + 1), repeat=len(ctx)):
        d = sum(abs(c) for c in a)
        if d > depth:
            continue
        for b in constants:
            layers[d].append(LinTerm.build(dict(zip(ctx, a)), b))
    return layers


def pool_constants(problem: FixProblem, max_offset: int) -> list[int]:
    cs = set(range(-max_offset, max_offset + 1))
    for c in problem.constants():
        cs |= {c - 1, c, c + 1}
    return sorted(cs, key=lambda c: (abs(c), -c))


@dataclass
class FixPools:
    """Largest strategy of each level, for both sides."""

    levels: list[tuple[int, int]]
    x_tops: list[FixStrategy]
    y_tops: list[FixStrategy]


def build_pools(problem: FixProblem, cfg: FixConfig) -> FixPools:
    consts = pool_constants(problem, cfg.max_offset)
    slots = []  # (side, slot, ctx)
    qp = problem.query_prenex()
    for i, (q, v) in enumerate(qp.prefix):
        slots.append(("x" if q == FORALL else "y", (QUERY, v), [w for _, w in qp.prefix[:i]]))
    for sd in skolemize_choices(problem.defs):
        d = sd.definition
        for q, v in sd.prefix:
            slots.append(("x" if q == FORALL else "y", (d.name, v), list(d.params)))
    term_layers = {slot: term_pool(ctx, cfg.term_depth, consts) for _, slot, ctx in slots}
    rank_layers = {d.name: template_pool(d.arity, cfg.max_coef, cfg.max_offset) for d in problem.defs}
    levels = sorted(product(range(cfg.max_coef + 1), range(cfg.term_depth + 1)), key=lambda st: (sum(st), st))

    def top(side: str, s: int, t: int) -> FixStrategy:
        cut = NU if side == "x" else MU
        ranks = frozenset(
            (d.name, r) for d in problem.defs if d.mode == cut for layer in rank_layers[d.name][: s + 1] for r in layer
        )
        terms = frozenset(
            (slot, term)
            for sd, slot, _ in slots
            if sd == side
            for layer in term_layers[slot][: t + 1]
            for term in layer
        )
        return FixStrategy(ranks, terms)

    return FixPools(levels, [top("x", *lv) for lv in levels], [top("y", *lv) for lv in levels])


def _shrink(s: FixStrategy, still_wins, rng: random.Random) -> FixStrategy:
    items = s.items()
    rng.shuffle(items)
    for item in items:
        trial = s.without(item)
        if still_wins(trial):
            s = trial
    return s


def find_counter_x(problem: FixProblem, pools: FixPools, y: FixStrategy, cfg: FixConfig,
                   rng: Optional[random.Random] = None) -> Optional[FixStrategy]:
    """An opponent strategy in the pool with ``l_fix(x, y) = -1``, or ``None``."""
    loses = lambda x: l_fix(problem, x, y, cfg.reduction_cap) == -1
    if not loses(pools.x_tops[-1]):
        return None
    first = next(x for x in pools.x_tops if loses(x))
    return _shrink(first, loses, rng or random.Random(cfg.random_seed))


def find_counter_y(problem: FixProblem, pools: FixPools, x: FixStrategy, cfg: FixConfig,
                   rng: Optional[random.Random] = None) -> Optional[FixStrategy]:
    wins = lambda y: l_fix(problem, x, y, cfg.reduction_cap) == 1
    if not wins(pools.y_tops[-1]):
        return None
    first = next(y for y in pools.y_tops if wins(y))
    return _shrink(first, wins, rng or random.Random(cfg.random_seed))


def fix_instance(problem: FixProblem, cfg: FixConfig = FixConfig(), pools: Optional[FixPools] = None):
    pools = pools or build_pools(problem, cfg)

    def dual_check(y, choice: Choice):
        x = find_counter_x(problem, pools, y, cfg, choice.rng)
        return DualOk() if x is None else CounterPrimal(x)

    def primal_check(x, choice: Choice):
        y = find_counter_y(problem, pools, x, cfg, choice.rng)
        return PrimalOk() if y is None else CounterDual(y)

    return LagrangianInstance(
        evaluate=lambda x, y: l_fix(problem, x, y, cfg.reduction_cap),
        dual_witness_check=dual_check,
        primal_witness_check=primal_check,
        join_x=FixStrategy.join,
        join_y=FixStrategy.join,
        initial_x=FixStrategy(),
        initial_y=FixStrategy(),
        describe_x=FixStrategy.describe,
        describe_y=FixStrategy.describe,
        name="fixpoint",
    )


def run_fix(problem: FixProblem, cfg: FixConfig = FixConfig(), pools: Optional[FixPools] = None) -> Result:
    L = fix_instance(problem, cfg, pools)
    ecfg = EngineConfig(accumulate_x=True, accumulate_y=True, max_iterations=cfg.max_iterations,
                        random_seed=cfg.random_seed)
    v = run_primal_dual(L, ecfg)
    common = dict(trace=v.trace, describe_x=L.describe_x, describe_y=L.describe_y)
    if isinstance(v, DualWitness):
        res = Result(Status.VALID, v.beta, **common)
    elif isinstance(v, PrimalWitness):
        res = Result(Status.INVALID, v.alpha, **common)
    else:
        return Result(Status.BUDGET, v.beta, **common)
    if cfg.domain_bound is not None:
        try:
            truth = bounded_semantics_oracle(problem, cfg.domain_bound)
        except DomainEscape:
            res.note = "oracle: domain escape"
        else:
            agrees = truth == (res.status == Status.VALID)
            res.note = "oracle agrees" if agrees else "oracle disagrees"
    return res


def certify_fix(problem: FixProblem, side: str, s: FixStrategy, cfg: FixConfig = FixConfig()) -> bool:
    """Re-run the pool sweep for a proponent (``"y"``) or opponent (``"x"``) strategy."""
    pools = build_pools(problem, cfg)
    if side == "y":
        return find_counter_x(problem, pools, s, cfg) is None
    return find_counter_y(problem, pools, s, cfg) is None


# fuzz corpus --------------------------------------------------------------------

def countdown_problem(mode: str, op: str, c: int, k: int, query: str, modulus: Optional[int] = None) -> FixProblem:
    """``P(x) = (x <= c) op P(x - k)``, or with ``modulus`` the cyclic
    ``P(x) = (x = c) op P((x + k) mod m)``."""
    if modulus is None:
        body = f"({op} (<= x {c}) (P (- x {k})))"
    else:
        body = f"({op} (= x {c}) (P (mod (+ x {k}) {modulus})))"
    return parse_problem(f"(define (P x) :{mode} {body}) (query {query})")


def alternating_problem(outer: str, inner: str, op: str, c: int, k: int, m: int, start: int) -> FixProblem:
    """``P(x) = Q(x); Q(x) = (x = c) op P((x + k) mod m)`` with independent modes."""
    return parse_problem(
        f"(define (P x) :{outer} (Q x)) "
        f"(define (Q x) :{inner} ({op} (= x {c}) (P (mod (+ x {k}) {m})))) "
        f"(query (P {start}))"
    )


def random_fix_problem(rng: random.Random) -> FixProblem:
    mode = rng.choice([MU, NU])
    op = rng.choice(["or", "and"])
    if rng.random() < 0.2:
        m = rng.randint(2, 4)
        return alternating_problem(mode, rng.choice([MU, NU]), op, rng.randrange(m), rng.randint(1, m - 1), m,
                                   rng.randrange(m))
    if rng.random() < 0.5:
        c, k = rng.randint(-3, 3), rng.randint(-2, 2)
        query = rng.choice([f"(P {rng.randint(-5, 5)})", "(forall (x) (P x))", "(exists (x) (P x))"])
        return countdown_problem(mode, op, c, k, query)
    m = rng.randint(2, 5)
    c, k = rng.randrange(m), rng.randint(1, m - 1)
    query = rng.choice([f"(P {rng.randrange(m)})", f"(forall (x) (P (mod x {m})))", f"(exists (x) (P (mod x {m})))"])
    return countdown_problem(mode, op, c, k, query, m)
