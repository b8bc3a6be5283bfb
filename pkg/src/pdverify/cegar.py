"""Predicate-abstraction CEGAR as a primal-dual instance.

``X`` is the set of finite state sequences, ``Y`` the finite sets of
predicates drawn from a stratified pool, and ``l_cegar(tau, A) = -1``
exactly when the classes of ``tau`` under ``A`` form an abstract error
path.  The dual check is abstract reachability, the primal check is
refinement; both are wrapped by :func:`run_cegar`.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
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
    run_primal_dual,
)
from .lra import LinTerm, Sat, eq, mk_and, qf_sat
from .results import Result, Status
from .systems import (
    ExplicitTS,
    Predicate,
    SymbolicTS,
    Trace,
    TransitionSystem,
    fmt_state,
    is_error_trace,
    primed_formula,
)


# pools -------------------------------------------------------------------------

@dataclass(frozen=True)
class PredicatePool:
    strata: tuple[tuple[Predicate, ...], ...] = ()

    def __post_init__(self):
        seen = set()
        for n, layer in enumerate(self.strata):
            for p in layer:
                if p.stratum != n:
                    raise ValueError(f"predicate {p} sits in stratum {n} but declares {p.stratum}")
                if p in seen:
                    raise ValueError(f"duplicate predicate {p}")
                seen.add(p)

    @staticmethod
    def of(preds: Iterable[Predicate]) -> "PredicatePool":
        preds = list(preds)
        height = max((p.stratum for p in preds), default=-1) + 1
        return PredicatePool(tuple(tuple(p for p in preds if p.stratum == n) for n in range(height)))

    def all(self) -> list[Predicate]:
        return [p for layer in self.strata for p in layer]

    def upto(self, n: int) -> list[Predicate]:
        return [p for layer in self.strata[: n + 1] for p in layer]

    def __len__(self) -> int:
        return sum(len(layer) for layer in self.strata)


def pred_key(p: Predicate):
    return (p.stratum, p.ident)


def ordered(A: Iterable[Predicate]) -> tuple[Predicate, ...]:
    return tuple(sorted(A, key=pred_key))


def stratum_of(A: Iterable[Predicate]) -> int:
    return max((p.stratum for p in A), default=0)


# classes -----------------------------------------------------------------------

def valuation(ts: TransitionSystem, A: Sequence[Predicate], s) -> tuple[bool, ...]:
    return tuple(p.holds(ts, s) for p in A)


def cube(A: Sequence[Predicate], v: Sequence[bool], primed_ts: Optional[SymbolicTS] = None):
    parts = []
    for p, bit in zip(A, v):
        f = p.formula if bit else p.formula.negate()
        parts.append(primed_formula(primed_ts, f) if primed_ts is not None else f)
    return mk_and(parts)


class _Abstraction:
    """Abstract initial/bad classes and abstract steps for one predicate set."""

    def __init__(self, ts: TransitionSystem, A: Iterable[Predicate]):
        self.ts = ts
        self.A = ordered(A)
        if isinstance(ts, ExplicitTS):
            self.cls = {s: valuation(ts, self.A, s) for s in ts.states}
            self.init_cls = {self.cls[s] for s in ts.init}
            self.bad_cls = {self.cls[s] for s in ts.bad}
            self.steps = {}
            for s, t in ts.trans:
                self.steps.setdefault(self.cls[s], set()).add(self.cls[t])

    def is_init(self, v) -> bool:
        if isinstance(self.ts, ExplicitTS):
            return v in self.init_cls
        return isinstance(qf_sat(mk_and([self.ts.init, cube(self.A, v)])), Sat)

    def is_bad(self, v) -> bool:
        if isinstance(self.ts, ExplicitTS):
            return v in self.bad_cls
        return isinstance(qf_sat(mk_and([self.ts.bad, cube(self.A, v)])), Sat)

    def has_step(self, v, w) -> bool:
        if isinstance(self.ts, ExplicitTS):
            return w in self.steps.get(v, ())
        f = mk_and([cube(self.A, v), self.ts.trans, cube(self.A, w, self.ts)])
        return isinstance(qf_sat(f), Sat)

    # symbolic enumeration of feasible valuations, pruned by partial cubes
    def _enumerate(self, base, primed: bool) -> list[tuple[bool, ...]]:
        out: list[tuple[bool, ...]] = []
        ts = self.ts if primed else None

        def go(i: int, bits: tuple[bool, ...], f):
            if not isinstance(qf_sat(f), Sat):
                return
            if i == len(self.A):
                out.append(bits)
                return
            p = self.A[i]
            for bit in (True, False):
                lit = p.formula if bit else p.formula.negate()
                if ts is not None:
                    lit = primed_formula(ts, lit)
                go(i + 1, bits + (bit,), mk_and([f, lit]))

        go(0, (), base)
        return out

    def initial_classes(self) -> list:
        if isinstance(self.ts, ExplicitTS):
            return list(dict.fromkeys(self.cls[s] for s in self.ts.init))
        return self._enumerate(self.ts.init, primed=False)

    def successors(self, v) -> list:
        if isinstance(self.ts, ExplicitTS):
            return sorted(self.steps.get(v, ()), reverse=True)
        return self._enumerate(mk_and([cube(self.A, v), self.ts.trans]), primed=True)


def l_cegar(ts: TransitionSystem, tau: Sequence, A: Iterable[Predicate]) -> int:
    """-1 iff the classes of ``tau`` under ``A`` form an abstract error path."""
    tau = list(tau)
    if not tau:
        return 1
    ab = _Abstraction(ts, A)
    vals = [valuation(ts, ab.A, s) for s in tau]
    if not ab.is_init(vals[0]) or not ab.is_bad(vals[-1]):
        return 1
    for v, w in zip(vals, vals[1:]):
        if not ab.has_step(v, w):
            return 1
    return -1


# abstract reachability ---------------------------------------------------------

@dataclass(frozen=True)
class AbstractSafe:
    pass


@dataclass(frozen=True)
class AbstractTrace:
    reps: tuple
    valuations: tuple
    preds: tuple[Predicate, ...]

    def __len__(self) -> int:
        return len(self.reps)


def abstract_error_search(ts: TransitionSystem, A: Iterable[Predicate]) -> Union[AbstractSafe, AbstractTrace]:
    """BFS over abstract states; shortest abstract error path with representatives."""
    ab = _Abstraction(ts, A)
    parent: dict = {}
    queue: deque = deque()
    for v in ab.initial_classes():
        if v not in parent:
            parent[v] = None
            queue.append(v)
    while queue:
        v = queue.popleft()
        if ab.is_bad(v):
            path = [v]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            path.reverse()
            return AbstractTrace(_representatives(ab, path), tuple(path), ab.A)
        for w in ab.successors(v):
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return AbstractSafe()


def _representatives(ab: _Abstraction, path: list) -> tuple:
    """Concrete class members, following a concrete run where possible."""
    ts, A = ab.ts, ab.A
    reps: list = []
    if isinstance(ts, ExplicitTS):
        members = {v: [s for s in ts.states if ab.cls[s] == v] for v in path}
        first = [s for s in ts.init if ab.cls[s] == path[0]]
        reps.append(first[0])
        for w in path[1:]:
            nxt = [t for t in ts.successors(reps[-1]) if ab.cls[t] == w]
            reps.append(nxt[0] if nxt else members[w][0])
        if not ts.is_bad(reps[-1]):
            bad = [s for s in ts.bad if ab.cls[s] == path[-1]]
            reps[-1] = bad[0]
        return tuple(reps)
    m = qf_sat(mk_and([ts.init, cube(A, path[0])]))
    reps.append(ts.state_of(m.model))
    for w in path[1:]:
        pin = mk_and([eq(LinTerm.var(x), val) for x, val in zip(ts.vars, reps[-1])])
        res = qf_sat(mk_and([pin, ts.trans, cube(A, w, ts)]))
        if not isinstance(res, Sat):
            res = qf_sat(cube(A, w))
            reps.append(ts.state_of(res.model))
        else:
            reps.append(ts.state_of(res.model, primed=True))
    last = ts.assignment(reps[-1])
    if not ts.bad.evaluate(last):
        res = qf_sat(mk_and([ts.bad, cube(A, path[-1])]))
        reps[-1] = ts.state_of(res.model)
    return tuple(reps)


# refinement --------------------------------------------------------------------

@dataclass(frozen=True)
class Exhausted:
    pass


def refine(ts: TransitionSystem, tau: Sequence, pool: PredicatePool, max_size: int = 2,
           max_stratum: Optional[int] = None) -> Union[frozenset, Exhausted]:
    """Smallest-stratum predicate set refuting ``tau``.

    Within the first stratum whose full prefix refutes ``tau``, subsets are
    scanned by size then pool order up to ``max_size``; when none is that
    small, the prefix is shrunk greedily instead.
    """
    top = len(pool.strata) - 1 if max_stratum is None else min(max_stratum, len(pool.strata) - 1)
    for n in range(top + 1):
        prefix = pool.upto(n)
        if l_cegar(ts, tau, prefix) == -1:
            continue  # by monotonicity no subset of this prefix refutes tau
        for k in range(1, max_size + 1):
            for combo in combinations(prefix, k):
                if l_cegar(ts, tau, combo) == 1:
                    return frozenset(combo)
        keep = list(prefix)
        for p in reversed(prefix):
            trial = [q for q in keep if q is not p]
            if l_cegar(ts, tau, trial) == 1:
                keep = trial
        return frozenset(keep)
    return Exhausted()


# concretization ----------------------------------------------------------------

@dataclass(frozen=True)
class Feasible:
    trace: Trace


@dataclass(frozen=True)
class Spurious:
    checked_length: int


def concretize(ts: TransitionSystem, tau: AbstractTrace) -> Union[Feasible, Spurious]:
    """Is there a concrete error run through exactly these abstract classes?"""
    A, path = tau.preds, list(tau.valuations)
    if isinstance(ts, ExplicitTS):
        cls = {s: valuation(ts, A, s) for s in ts.states}
        layer = {s: None for s in ts.init if cls[s] == path[0]}
        layers = [layer]
        for w in path[1:]:
            nxt: dict = {}
            for s in layers[-1]:
                for t in ts.successors(s):
                    if cls[t] == w and t not in nxt:
                        nxt[t] = s
            layers.append(nxt)
        ends = [s for s in layers[-1] if ts.is_bad(s)]
        if not ends:
            return Spurious(len(path))
        run = [ends[0]]
        for lay in reversed(layers[1:]):
            run.append(lay[run[-1]])
        return Feasible(Trace(tuple(reversed(run))))
    n = len(path)
    parts = [ts.shifted(ts.init, 0), ts.shifted(ts.bad, n - 1)]
    for i, v in enumerate(path):
        parts.append(ts.shifted(cube(A, v), i))
        if i + 1 < n:
            parts.append(ts.shifted(ts.trans, i))
    res = qf_sat(mk_and(parts))
    if not isinstance(res, Sat):
        return Spurious(n)
    run = tuple(tuple(res.model.get(f"{x}@{i}", Fraction(0)) for x in ts.vars) for i in range(n))
    return Feasible(Trace(run))


# the primal-dual loop ----------------------------------------------------------

@dataclass(frozen=True)
class CegarConfig:
    max_iterations: int = 50
    random_seed: int = 0
    max_refine_size: int = 2
    max_stratum: Optional[int] = None


def describe_preds(A) -> list[str]:
    return [p.ident for p in ordered(A)]


def describe_states(tau) -> list[str]:
    reps = tau.reps if isinstance(tau, AbstractTrace) else tau
    return [fmt_state(s) for s in reps]


def cegar_instance(ts: TransitionSystem, pool: PredicatePool, cfg: CegarConfig) -> LagrangianInstance:
    def evaluate(tau, A):
        reps = tau.reps if isinstance(tau, AbstractTrace) else tau
        return l_cegar(ts, reps, A)

    def dual_check(A, choice: Choice):
        res = abstract_error_search(ts, A)
        return DualOk() if isinstance(res, AbstractSafe) else CounterPrimal(res)

    def primal_check(tau, choice: Choice):
        feas = concretize(ts, tau)
        if isinstance(feas, Feasible):
            return PrimalOk(witness=feas.trace)
        gamma = refine(ts, tau.reps, pool, cfg.max_refine_size, cfg.max_stratum)
        if isinstance(gamma, Exhausted):
            return PrimalOk()
        return CounterDual(gamma)

    return LagrangianInstance(
        evaluate=evaluate,
        dual_witness_check=dual_check,
        primal_witness_check=primal_check,
        join_y=lambda a, b: a | b,
        stratum_y=stratum_of,
        initial_y=frozenset(),
        describe_x=describe_states,
        describe_y=describe_preds,
        name="cegar",
    )


def run_cegar(ts: TransitionSystem, pool: PredicatePool, cfg: CegarConfig = CegarConfig()) -> Result:
    L = cegar_instance(ts, pool, cfg)
    ecfg = EngineConfig(accumulate_y=True, max_iterations=cfg.max_iterations, random_seed=cfg.random_seed)
    v = run_primal_dual(L, ecfg)
    common = dict(trace=v.trace, describe_x=L.describe_x, describe_y=L.describe_y)
    if isinstance(v, DualWitness):
        return Result(Status.SAFE, frozenset(v.beta), **common)
    if isinstance(v, PrimalWitness):
        if isinstance(v.alpha, Trace) and is_error_trace(ts, v.alpha.states):
            return Result(Status.UNSAFE, v.alpha, **common)
        return Result(Status.UNKNOWN, v.alpha, **common)
    return Result(Status.BUDGET, v.beta, **common)
