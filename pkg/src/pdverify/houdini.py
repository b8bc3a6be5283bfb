"""Cartesian-abstraction CEGAR and primal-dual Houdini.

A pair ``(T, TI)`` relates a finite system ``T`` to a system ``TI`` whose
states are finite sets of base predicate identifiers.  ``sat[s]`` lists
the base predicates a state of ``T`` satisfies; a set ``q`` holds in ``s``
when ``q <= sat[s]``.  Read the other way round, a state ``s`` of ``T`` is
a predicate over ``TI`` that holds in ``q`` under the same condition.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import chain, combinations
from typing import Callable, Hashable, Iterable, Union

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
    run_primal_dual,
)
from .results import Result, Status
from .systems import ExplicitTS, Predicate, explicit_pred, fmt_state, restrict

Holds = Callable[[Hashable, Hashable], bool]


class IllFormed(ValueError):
    """Both extreme outcomes of ``l_pdh`` apply; the pair breaks induction duality."""


@dataclass(frozen=True)
class InductionDualPair:
    T: ExplicitTS
    TI: ExplicitTS
    sat: dict  # T-state -> frozenset of base predicate ids

    def __hash__(self):
        return id(self)

    def holds(self, s, q) -> bool:
        """``s |= q`` for a T-state and a TI-state."""
        return q <= self.sat[s]

    def holds_base(self, s, p) -> bool:
        return p in self.sat[s]

    def holds_flipped(self, q, s) -> bool:
        """A T-state read as a predicate over TI-states."""
        return q <= self.sat[s]

    @property
    def base(self) -> frozenset:
        out = frozenset().union(*self.sat.values()) if self.sat else frozenset()
        return out.union(*self.TI.states) if self.TI.states else out

    def predicates(self, ids: Iterable) -> list[Predicate]:
        """Base predicates as explicit state sets of ``T``."""
        return [explicit_pred(str(p), [s for s in self.T.states if p in self.sat[s]]) for p in sorted(ids, key=str)]

    def restrict_TI(self, y: Iterable) -> ExplicitTS:
        y = frozenset(y)
        return restrict(self.TI, [q for q in self.TI.states if q <= y])


# validation ----------------------------------------------------------------------

@dataclass(frozen=True)
class Ok:
    pass


@dataclass(frozen=True)
class PairViolation:
    which: str
    witness: object


def validate_pair(pair: InductionDualPair) -> Union[Ok, PairViolation]:
    T, TI = pair.T, pair.TI
    for s in T.states:
        if s not in pair.sat:
            return PairViolation("sat", s)
    for s0 in T.init:
        for q in TI.states:
            if not pair.holds(s0, q):
                return PairViolation("ID1", (s0, q))
    for q0 in TI.init:
        for s in T.states:
            if not pair.holds(s, q0):
                return PairViolation("ID2", (s, q0))
    for s in T.bad:
        for q in TI.bad:
            if pair.holds(s, q):
                return PairViolation("ID3", (s, q))
    for s, s2 in T.trans:
        for q, q2 in TI.trans:
            h = pair.holds
            if h(s, q) and h(s, q2) and h(s2, q) and not h(s2, q2):
                return PairViolation("ID4", ((s, s2), (q, q2)))
    return Ok()


# Houdini ------------------------------------------------------------------------

@dataclass(frozen=True)
class HoudiniResult:
    invariant: frozenset
    safe: bool
    counter_states: frozenset


def houdini_fixpoint(ts: ExplicitTS, y: Iterable, holds: Holds) -> HoudiniResult:
    """Greatest conjunctive inductive subset of ``y`` and the states that shaped it.

    ``counter_states`` holds the initial states and transition endpoints that
    eliminated predicates, plus one bad state when the result is unsafe; the
    system restricted to them admits no larger inductive subset of ``y``.
    """
    theta = set(y)
    witness: set = set()
    for s in ts.init:
        dead = {p for p in theta if not holds(s, p)}
        if dead:
            theta -= dead
            witness.add(s)
    changed = True
    while changed:
        changed = False
        for s, t in ts.trans:
            if not all(holds(s, p) for p in theta):
                continue
            dead = {p for p in theta if not holds(t, p)}
            if dead:
                theta -= dead
                witness |= {s, t}
                changed = True
    bad = next((b for b in ts.bad if all(holds(b, p) for p in theta)), None)
    if bad is not None:
        witness.add(bad)
    return HoudiniResult(frozenset(theta), bad is None, frozenset(witness))


def subset_oracle(ts: ExplicitTS, y: Iterable, holds: Holds) -> tuple[frozenset, bool]:
    """Largest inductive subset and whether any inductive subset is safe, by enumeration."""
    y = list(y)
    best: frozenset = frozenset()
    any_safe = False
    for k in range(len(y) + 1):
        for c in combinations(y, k):
            if not all(holds(s, p) for s in ts.init for p in c):
                continue
            if any(all(holds(s, p) for p in c) and not all(holds(t, p) for p in c) for s, t in ts.trans):
                continue
            best = best | frozenset(c)
            if not any(all(holds(b, p) for p in c) for b in ts.bad):
                any_safe = True
    return best, any_safe


def l_ccegar(pair: InductionDualPair, x: Iterable, y: Iterable) -> int:
    """-1 iff no subset of ``y`` is a safe inductive invariant of ``T`` restricted to ``x``."""
    return -1 if not houdini_fixpoint(restrict(pair.T, x), y, pair.holds_base).safe else 1


def l_pdh(pair: InductionDualPair, x: Iterable, y: Iterable) -> int:
    x, y = frozenset(x), frozenset(y)
    neg = not houdini_fixpoint(restrict(pair.T, x), y, pair.holds_base).safe
    pos = not houdini_fixpoint(pair.restrict_TI(y), x, pair.holds_flipped).safe
    if neg and pos:
        raise IllFormed(f"both sides refuted at x={set(x)}, y={set(y)}")
    return -1 if neg else (1 if pos else 0)


# the primal-dual loop --------------------------------------------------------------

@dataclass(frozen=True)
class HoudiniConfig:
    max_iterations: int = 100
    random_seed: int = 0


def pdh_instance(pair: InductionDualPair) -> LagrangianInstance:
    if not pair.TI.bad:
        raise ValueError("primal-dual Houdini starts from a bad state of the dual system")

    def dual_check(P_G, choice: Choice):
        res = houdini_fixpoint(pair.T, P_G, pair.holds_base)
        return DualOk() if res.safe else CounterPrimal(res.counter_states)

    def primal_check(S_G, choice: Choice):
        res = houdini_fixpoint(pair.TI, S_G, pair.holds_flipped)
        if res.safe:
            return PrimalOk()
        P = frozenset().union(*res.counter_states)
        assert l_pdh(pair, S_G, P) == 1, "counter predicate sets must refute the dual side"
        return CounterDual(P)

    return LagrangianInstance(
        evaluate=lambda x, y: l_pdh(pair, x, y),
        dual_witness_check=dual_check,
        primal_witness_check=primal_check,
        codomain=(-1, 0, 1),
        join_x=frozenset.union,
        join_y=frozenset.union,
        initial_x=frozenset(),
        initial_y=frozenset(pair.TI.bad[0]),
        describe_x=lambda x: sorted(map(fmt_state, x)),
        describe_y=lambda y: sorted(map(str, y)),
        name="pd-houdini",
    )


def run_pd_houdini(pair: InductionDualPair, cfg: HoudiniConfig = HoudiniConfig()) -> Result:
    L = pdh_instance(pair)
    ecfg = EngineConfig(
        accumulate_x=True, accumulate_y=True, max_iterations=cfg.max_iterations, random_seed=cfg.random_seed
    )
    v = run_primal_dual(L, ecfg)
    common = dict(trace=v.trace, describe_x=L.describe_x, describe_y=L.describe_y)
    if isinstance(v, DualWitness):
        return Result(Status.SAFE, v.beta, **common)
    if isinstance(v, PrimalWitness):
        return Result(Status.UNKNOWN, v.alpha, **common)
    return Result(Status.BUDGET, v.alpha, **common)


def pdh_invariant(pair: InductionDualPair, P_G: Iterable) -> frozenset:
    """The conjunctive invariant inside ``P_G`` that certifies safety."""
    return houdini_fixpoint(pair.T, P_G, pair.holds_base).invariant


# generation ----------------------------------------------------------------------

def _subsets(items) -> list[frozenset]:
    items = list(items)
    return [frozenset(c) for c in chain.from_iterable(combinations(items, k) for k in range(len(items) + 1))]


def random_pair(rng: random.Random, n_states: int = 5, n_preds: int = 4, n_dual: int = 6) -> InductionDualPair:
    """A random pair built to satisfy ID1-ID4 by construction, then validated."""
    states = tuple(range(rng.randint(1, n_states)))
    base = [f"p{i}" for i in range(rng.randint(1, n_preds))]
    sat = {s: frozenset(p for p in base if rng.random() < 0.6) for s in states}
    trans = tuple((s, t) for s in states for t in states if rng.random() < 0.3)
    init = tuple(s for s in states if rng.random() < 0.3) or states[:1]
    bad = tuple(s for s in states if s not in init and rng.random() < 0.4)
    T = ExplicitTS(states, init, trans, bad)

    def holds(s, q):
        return q <= sat[s]

    # ID1: every dual state holds in all initial states
    cand = [q for q in _subsets(base) if all(holds(s0, q) for s0 in init)]
    qs = rng.sample(cand, min(len(cand), rng.randint(1, n_dual)))
    qs.sort(key=lambda q: (len(q), sorted(q)))
    # ID2 and ID3
    dual_init = [q for q in qs if all(holds(s, q) for s in states) and rng.random() < 0.7]
    dual_bad = [q for q in qs if all(not holds(s, q) for s in bad) and rng.random() < 0.6]
    # ID4
    dual_trans = []
    for q in qs:
        for q2 in qs:
            if rng.random() >= 0.4:
                continue
            ok = all(
                holds(s2, q2)
                for s, s2 in trans
                if holds(s, q) and holds(s, q2) and holds(s2, q)
            )
            if ok:
                dual_trans.append((q, q2))
    TI = ExplicitTS(tuple(qs), tuple(dual_init), tuple(dual_trans), tuple(dual_bad))
    pair = InductionDualPair(T, TI, sat)
    v = validate_pair(pair)
    assert isinstance(v, Ok), v
    return pair


def dual_paths(pair: InductionDualPair, max_len: int) -> list[tuple]:
    """Every path of ``TI`` from an initial set, up to ``max_len`` states."""
    out = []
    frontier = [(q,) for q in pair.TI.init]
    while frontier:
        out.extend(frontier)
        frontier = [p + (q,) for p in frontier if len(p) < max_len for q in pair.TI.successors(p[-1])]
    return out
