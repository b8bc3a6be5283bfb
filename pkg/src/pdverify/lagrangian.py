"""Lagrangians ``L: X x Y -> P`` and the generic primal-dual procedure.

An instance bundles the function itself with two witness checks:

* the *dual* check decides ``inf_x L(x, beta) >= 0`` and otherwise yields
  a primal counter ``delta`` with ``L(delta, beta) < 0``;
* the *primal* check decides ``sup_y L(alpha, y) <= 0`` and otherwise
  yields a dual counter ``gamma`` with ``L(alpha, gamma) > 0``.

The engine alternates the two checks, optionally joining each counter
into the current candidate ("accumulation"), until one check passes or
the iteration budget runs out.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Generic, Iterable, Optional, Sequence, TypeVar, Union

X = TypeVar("X")
Y = TypeVar("Y")

THRESHOLD = 0


class ConfigError(ValueError):
    pass


class OracleError(RuntimeError):
    pass


class NotEnumerable(TypeError):
    pass


@dataclass(frozen=True, order=True)
class Outcome:
    value: int
    range: tuple[int, ...] = (-1, 1)

    def __post_init__(self):
        if list(self.range) != sorted(set(self.range)):
            raise ValueError("outcome range must be strictly ascending")
        if self.value not in self.range:
            raise ValueError(f"outcome {self.value} outside {self.range}")


# witness-check results ---------------------------------------------------

@dataclass(frozen=True)
class DualOk:
    """The dual check passed; ``witness`` may replace the checked value."""

    witness: Any = None


@dataclass(frozen=True)
class CounterPrimal:
    delta: Any


@dataclass(frozen=True)
class PrimalOk:
    witness: Any = None


@dataclass(frozen=True)
class CounterDual:
    gamma: Any


@dataclass
class Choice:
    """Seeded tie-break hook handed to witness checks."""

    rng: random.Random
    smallest_stratum: bool = False

    def pick(self, candidates: Sequence):
        if not candidates:
            raise ValueError("no candidates to pick from")
        return candidates[self.rng.randrange(len(candidates))]


@dataclass
class LagrangianInstance(Generic[X, Y]):
    evaluate: Callable[[X, Y], int]
    dual_witness_check: Callable[[Y, Choice], Union[DualOk, CounterPrimal]]
    primal_witness_check: Callable[[X, Choice], Union[PrimalOk, CounterDual]]
    codomain: tuple[int, ...] = (-1, 1)
    join_x: Optional[Callable[[X, X], X]] = None
    join_y: Optional[Callable[[Y, Y], Y]] = None
    stratum_x: Optional[Callable[[X], int]] = None
    stratum_y: Optional[Callable[[Y], int]] = None
    enum_x: Optional[Callable[[], Iterable[X]]] = None
    enum_y: Optional[Callable[[], Iterable[Y]]] = None
    initial_x: Any = None
    initial_y: Any = None
    describe_x: Callable[[Any], Any] = repr
    describe_y: Callable[[Any], Any] = repr
    name: str = "lagrangian"

    def outcome(self, x: X, y: Y) -> Outcome:
        return Outcome(self.evaluate(x, y), self.codomain)


class Side(str, Enum):
    PRIMAL = "primal"
    DUAL = "dual"


@dataclass(frozen=True)
class EngineConfig:
    accumulate_x: bool = False
    accumulate_y: bool = False
    max_iterations: int = 100
    start_side: Side = Side.DUAL
    smallest_stratum: bool = False
    random_seed: int = 0
    check_counters: bool = True


@dataclass
class IterationRecord:
    iteration: int
    alpha: Any = None
    beta: Any = None
    delta: Any = None
    gamma: Any = None
    dual_outcome: Optional[str] = None  # "ok" | "counter"
    primal_outcome: Optional[str] = None
    order: tuple[str, str] = ("dual", "primal")


@dataclass
class IterationTrace:
    records: list[IterationRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def betas(self) -> list:
        return [r.beta for r in self.records if r.dual_outcome is not None]

    def alphas(self) -> list:
        return [r.alpha for r in self.records if r.primal_outcome is not None]

    def to_json(self, describe_x: Callable = repr, describe_y: Callable = repr) -> list[dict]:
        """Flatten into ``{iter, side, candidate, counter, outcome}`` objects."""
        out: list[dict] = []
        for r in self.records:
            checks = [
                ("dual", r.beta, r.delta, r.dual_outcome, describe_y, describe_x),
                ("primal", r.alpha, r.gamma, r.primal_outcome, describe_x, describe_y),
            ]
            for side, cand, counter, outcome, dc, dk in sorted(checks, key=lambda c: r.order.index(c[0])):
                if outcome is None:
                    continue
                out.append({
                    "iter": r.iteration,
                    "side": side,
                    "candidate": dc(cand),
                    "counter": None if counter is None or outcome == "ok" else dk(counter),
                    "outcome": outcome,
                })
        return out


@dataclass
class DualWitness:
    beta: Any
    trace: IterationTrace


@dataclass
class PrimalWitness:
    alpha: Any
    trace: IterationTrace


@dataclass
class Budget:
    trace: IterationTrace
    alpha: Any = None
    beta: Any = None


Verdict = Union[DualWitness, PrimalWitness, Budget]


def _validate(L: LagrangianInstance, cfg: EngineConfig) -> None:
    if cfg.max_iterations < 1:
        raise ConfigError("max_iterations must be at least 1")
    if cfg.accumulate_x and L.join_x is None:
        raise ConfigError("accumulation on X requested but the instance has no join_x")
    if cfg.accumulate_y and L.join_y is None:
        raise ConfigError("accumulation on Y requested but the instance has no join_y")
    if cfg.smallest_stratum and L.stratum_y is None and L.stratum_x is None:
        raise ConfigError("smallest_stratum requires a stratum function")


def run_primal_dual(L: LagrangianInstance, cfg: EngineConfig) -> Verdict:
    """Alternate dual and primal witness checks until one passes."""
    _validate(L, cfg)
    choice = Choice(random.Random(cfg.random_seed), cfg.smallest_stratum)
    alpha, beta = L.initial_x, L.initial_y
    trace = IterationTrace()

    def dual_step(rec: IterationRecord):
        nonlocal alpha
        rec.beta = beta
        res = L.dual_witness_check(beta, choice)
        if isinstance(res, DualOk):
            rec.dual_outcome = "ok"
            return DualWitness(beta if res.witness is None else res.witness, trace)
        if not isinstance(res, CounterPrimal):
            raise OracleError(f"dual check returned {res!r}")
        rec.delta, rec.dual_outcome = res.delta, "counter"
        if cfg.check_counters and not L.evaluate(res.delta, beta) < THRESHOLD:
            raise OracleError("primal counter does not satisfy L(delta, beta) < 0")
        alpha = L.join_x(alpha, res.delta) if cfg.accumulate_x and alpha is not None else res.delta
        return None

    def primal_step(rec: IterationRecord):
        nonlocal beta
        rec.alpha = alpha
        res = L.primal_witness_check(alpha, choice)
        if isinstance(res, PrimalOk):
            rec.primal_outcome = "ok"
            return PrimalWitness(alpha if res.witness is None else res.witness, trace)
        if not isinstance(res, CounterDual):
            raise OracleError(f"primal check returned {res!r}")
        rec.gamma, rec.primal_outcome = res.gamma, "counter"
        if cfg.check_counters and not L.evaluate(alpha, res.gamma) > THRESHOLD:
            raise OracleError("dual counter does not satisfy L(alpha, gamma) > 0")
        if cfg.smallest_stratum and L.stratum_y is not None and L.enum_y is not None:
            _assert_minimal_stratum(L, alpha, res.gamma)
        beta = L.join_y(beta, res.gamma) if cfg.accumulate_y and beta is not None else res.gamma
        return None

    steps = (dual_step, primal_step) if cfg.start_side == Side.DUAL else (primal_step, dual_step)
    for it in range(1, cfg.max_iterations + 1):
        rec = IterationRecord(it, order=tuple(s.__name__.split("_")[0] for s in steps))
        trace.records.append(rec)
        for step in steps:
            verdict = step(rec)
            if verdict is not None:
                return verdict
    return Budget(trace, alpha, beta)


def _assert_minimal_stratum(L: LagrangianInstance, alpha, gamma) -> None:
    best = min((L.stratum_y(y) for y in L.enum_y() if L.evaluate(alpha, y) > THRESHOLD), default=None)
    if best is not None and L.stratum_y(gamma) > best:
        raise OracleError(f"counter from stratum {L.stratum_y(gamma)} but stratum {best} was available")


# finite oracles ------------------------------------------------------------

def brute_force_optima(L: LagrangianInstance) -> tuple[Outcome, Outcome]:
    """Return ``(inf_x sup_y L, sup_y inf_x L)`` by exhaustive enumeration.

    Inner loops stop early once the extreme of the codomain is reached,
    which does not change the result.
    """
    if L.enum_x is None or L.enum_y is None:
        raise NotEnumerable("brute_force_optima needs enumerators for X and Y")
    lo, hi = min(L.codomain), max(L.codomain)
    xs, ys = list(L.enum_x()), list(L.enum_y())
    if not xs or not ys:
        raise NotEnumerable("empty X or Y")

    primal = hi
    for x in xs:
        s = lo
        for y in ys:
            s = max(s, L.evaluate(x, y))
            if s == hi:
                break
        primal = min(primal, s)
        if primal == lo:
            break
    dual = lo
    for y in ys:
        i = hi
        for x in xs:
            i = min(i, L.evaluate(x, y))
            if i == lo:
                break
        dual = max(dual, i)
        if dual == hi:
            break
    assert dual <= primal, "weak duality violated"
    return Outcome(primal, L.codomain), Outcome(dual, L.codomain)


def finite_instance(
    table: Callable[[Any, Any], int],
    xs: Sequence,
    ys: Sequence,
    codomain: tuple[int, ...] = (-1, 1),
    join_x=None,
    join_y=None,
    stratum_y=None,
    initial_x=None,
    initial_y=None,
) -> LagrangianInstance:
    """An instance whose witness checks enumerate the finite sides."""
    xs, ys = list(xs), list(ys)

    def dual_check(beta, choice: Choice):
        counters = [x for x in xs if table(x, beta) < THRESHOLD]
        return DualOk() if not counters else CounterPrimal(choice.pick(counters))

    def primal_check(alpha, choice: Choice):
        counters = [y for y in ys if table(alpha, y) > THRESHOLD]
        if not counters:
            return PrimalOk()
        if choice.smallest_stratum and stratum_y is not None:
            low = min(stratum_y(y) for y in counters)
            counters = [y for y in counters if stratum_y(y) == low]
        return CounterDual(choice.pick(counters))

    return LagrangianInstance(
        evaluate=table,
        dual_witness_check=dual_check,
        primal_witness_check=primal_check,
        codomain=codomain,
        join_x=join_x,
        join_y=join_y,
        stratum_y=stratum_y,
        enum_x=lambda: iter(xs),
        enum_y=lambda: iter(ys),
        initial_x=xs[0] if initial_x is None else initial_x,
        initial_y=ys[0] if initial_y is None else initial_y,
    )


def repeated(values: Iterable) -> list:
    """Values that occur more than once (exact equality), in order of repetition."""
    seen: list = []
    dup: list = []
    for v in values:
        if v in seen:
            dup.append(v)
        else:
            seen.append(v)
    return dup


# an instance over the integers without a saddle point -----------------------

def ge_lagrangian() -> LagrangianInstance:
    """``L(x, y) = -1`` iff ``x >= y`` over the integers; primal 1, dual -1."""

    def L(x: int, y: int) -> int:
        return -1 if x >= y else 1

    return LagrangianInstance(
        evaluate=L,
        dual_witness_check=lambda beta, c: CounterPrimal(beta),
        primal_witness_check=lambda alpha, c: CounterDual(alpha + 1),
        join_x=max,
        join_y=max,
        initial_x=0,
        initial_y=0,
        name="x>=y",
    )
