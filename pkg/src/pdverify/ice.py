"""ICE invariant learning as a primal-dual instance.

``X`` is the lattice of finite samples ``(I', T', B')`` ordered by
componentwise inclusion, ``Y`` a stratified hypothesis pool.  The teacher
is the dual check and the learner the primal check; samples accumulate.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import chain, combinations
from typing import Optional, Sequence, Union

from .cegar import PredicatePool
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
    ExplicitTS,
    Inductive,
    Predicate,
    Sample,
    TransitionSystem,
    explicit_pred,
    invariant_check,
    sample,
)


def l_ice(ts: TransitionSystem, s: Sample, p: Predicate) -> int:
    """1 iff ``p`` is a safe inductive invariant of the sampled subsystem."""
    if not all(p.holds(ts, q) for q in s.init):
        return -1
    if any(p.holds(ts, a) and not p.holds(ts, b) for a, b in s.trans):
        return -1
    if any(p.holds(ts, q) for q in s.bad):
        return -1
    return 1


@dataclass(frozen=True)
class Pass:
    pass


def teacher(ts: TransitionSystem, p: Predicate, batch: int = 1) -> Union[Pass, Sample]:
    """Pass, or a sample of up to ``batch`` facts that ``p`` gets wrong.

    Initiation is checked before consecution and consecution before
    safety, so the first fact always matches :func:`invariant_check`.
    """
    v = invariant_check(ts, [p])
    if isinstance(v, Inductive):
        return Pass()
    out = _fact(v.kind, v.witness)
    if batch > 1 and isinstance(ts, ExplicitTS):
        more = chain(
            (sample(init=[s]) for s in ts.init if not p.holds(ts, s)),
            (sample(trans=[(s, t)]) for s, t in ts.trans if p.holds(ts, s) and not p.holds(ts, t)),
            (sample(bad=[s]) for s in ts.bad if p.holds(ts, s)),
        )
        for extra in more:
            if _size(out) >= batch:
                break
            out = out.join(extra)
    return out


def _fact(kind: str, witness) -> Sample:
    if kind == "initiation":
        return sample(init=[witness])
    if kind == "consecution":
        return sample(trans=[witness])
    return sample(bad=[witness])


def _size(s: Sample) -> int:
    return len(s.init) + len(s.trans) + len(s.bad)


@dataclass(frozen=True)
class Exhausted:
    pass


def learner(ts: TransitionSystem, s: Sample, pool: PredicatePool) -> Union[Predicate, Exhausted]:
    """First pool hypothesis consistent with the sample, smallest stratum first."""
    for layer in pool.strata:
        for p in layer:
            if l_ice(ts, s, p) == 1:
                return p
    return Exhausted()


@dataclass(frozen=True)
class IceConfig:
    max_iterations: int = 100
    random_seed: int = 0
    batch: int = 1


def ice_instance(ts: TransitionSystem, pool: PredicatePool, cfg: IceConfig = IceConfig()) -> LagrangianInstance:
    def dual_check(p, choice: Choice):
        res = teacher(ts, p, cfg.batch)
        return DualOk() if isinstance(res, Pass) else CounterPrimal(res)

    def primal_check(s, choice: Choice):
        p = learner(ts, s, pool)
        return PrimalOk() if isinstance(p, Exhausted) else CounterDual(p)

    return LagrangianInstance(
        evaluate=lambda s, p: l_ice(ts, s, p),
        dual_witness_check=dual_check,
        primal_witness_check=primal_check,
        join_x=Sample.join,
        stratum_y=lambda p: p.stratum,
        initial_x=Sample(),
        describe_x=lambda s: s.describe(),
        describe_y=lambda p: None if p is None else p.ident,
        name="ice",
    )


def run_ice(ts: TransitionSystem, pool: PredicatePool, cfg: IceConfig = IceConfig()) -> Result:
    L = ice_instance(ts, pool, cfg)
    ecfg = EngineConfig(
        accumulate_x=True, max_iterations=cfg.max_iterations, start_side=Side.PRIMAL, random_seed=cfg.random_seed
    )
    v = run_primal_dual(L, ecfg)
    common = dict(trace=v.trace, describe_x=L.describe_x, describe_y=L.describe_y)
    if isinstance(v, DualWitness):
        return Result(Status.SAFE, v.beta, **common)
    if isinstance(v, PrimalWitness):
        return Result(Status.UNKNOWN, v.alpha, note="learner exhausted the pool", **common)
    return Result(Status.BUDGET, v.alpha, **common)


# idealized oracle ----------------------------------------------------------------

def path_samples(ts: ExplicitTS, max_len: Optional[int] = None) -> list[Sample]:
    """The empty sample and every sample induced by an initialized path."""
    max_len = len(ts.states) if max_len is None else max_len
    out = [Sample()]
    frontier = [(s,) for s in ts.init]
    while frontier:
        nxt = []
        for path in frontier:
            trans = list(zip(path, path[1:]))
            out.append(sample(init=[path[0]], trans=trans))
            if ts.is_bad(path[-1]):
                out.append(sample(init=[path[0]], trans=trans, bad=[path[-1]]))
            if len(path) < max_len:
                nxt.extend(path + (t,) for t in ts.successors(path[-1]))
        frontier = nxt
    return list(dict.fromkeys(out))


def powerset_preds(states: Sequence) -> list[Predicate]:
    subsets = chain.from_iterable(combinations(states, k) for k in range(len(states) + 1))
    return [explicit_pred("{" + ",".join(map(str, c)) + "}", c) for c in subsets]


def ice_oracle_instance(ts: ExplicitTS) -> LagrangianInstance:
    """l_ice with ``X`` the path samples and ``Y`` every state subset."""
    xs, ys = path_samples(ts), powerset_preds(ts.states)
    L = ice_instance(ts, PredicatePool.of(ys))
    L.enum_x = lambda: iter(xs)
    L.enum_y = lambda: iter(ys)
    return L
