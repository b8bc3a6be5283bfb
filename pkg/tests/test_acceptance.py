"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run under pytest (the lines are repeated in the terminal summary) or
directly with ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import os
import random
import sys
import time
from contextlib import contextmanager
from itertools import combinations, combinations_with_replacement

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from pdverify.cegar import AbstractSafe, PredicatePool, abstract_error_search, run_cegar
from pdverify.certificates import Accept, Certificate, certificate_for, check_certificate
from pdverify.fixpoint import (
    FixConfig,
    FixStrategy,
    ReductionCapExceeded,
    bounded_semantics_oracle,
    l_fix,
    parse_problem,
    random_fix_problem,
    run_fix,
    strategy,
)
from pdverify.houdini import (
    dual_paths,
    houdini_fixpoint,
    l_pdh,
    pdh_invariant,
    random_pair,
    run_pd_houdini,
    subset_oracle,
    validate_pair,
    Ok,
)
from pdverify.ice import IceConfig, ice_oracle_instance, l_ice, path_samples, powerset_preds, run_ice
from pdverify.lagrangian import (
    Budget,
    CounterDual,
    CounterPrimal,
    DualOk,
    DualWitness,
    EngineConfig,
    LagrangianInstance,
    brute_force_optima,
    ge_lagrangian,
    repeated,
    run_primal_dual,
)
from pdverify.lra import Valid, forall_validity, gt, parse_prenex, term, var
from pdverify.parsing import read_file
from pdverify.qlra import certify_sat, extract_counter_skeleton, l_fk, project, run_fk
from pdverify.results import Status
from pdverify.skeleton import Choice, Leaf, Pass, check_skeleton
from pdverify.systems import (
    BOTTOM,
    TOP,
    Dwf,
    Inductive,
    Safe,
    Single,
    explicit_error_search,
    invariant_check,
    is_error_trace,
    symbolic_pred,
)
from pdverify.termination import (
    RankingTemplate,
    TerminationConfig,
    certify_termination,
    dwf_oracle,
    run_termination,
    single_oracle,
    template_pool,
)

from _gen import (
    all_systems,
    below,
    cegar_oracle_instance,
    enum_skeletons,
    monotone_instance,
    random_sentence,
    random_skeleton,
    random_system,
    random_table,
    subset_pool,
    table_instance,
)

DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
RESULTS: dict[int, str] = {}
PRODUCED: list = []  # (problem, certificate) for every witness produced below


def data(name: str) -> str:
    return os.path.join(DATA, name)


class Budgeted:
    def __init__(self):
        self.detail = ""


@contextmanager
def criterion(n: int, limit: float):
    """Time a criterion, record its line and fail it on overrun."""
    b = Budgeted()
    t = time.perf_counter()
    try:
        yield b
    except BaseException as e:
        _record(n, False, time.perf_counter() - t, limit, f"{type(e).__name__}: {e}".splitlines()[0])
        raise
    elapsed = time.perf_counter() - t
    ok = elapsed < limit
    _record(n, ok, elapsed, limit, b.detail if ok else f"too slow; {b.detail}")
    assert ok, f"criterion {n} took {elapsed:.2f}s, limit {limit}s"


def _record(n, ok, elapsed, limit, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s / {limit:g}s) {detail}"
    RESULTS[n] = line
    print(line)


def produced(problem, cert):
    assert cert is not None, "a witness verdict must come with a certificate"
    PRODUCED.append((problem, cert))


T0 = read_file(data("t0.sys"), "system")
T0_UNSAFE = read_file(data("t0_unsafe.sys"), "system")


# 1 ----------------------------------------------------------------------------------

def test_criterion_01_weak_duality():
    with criterion(1, 1.0) as c:
        rng = random.Random(1)
        gaps = 0
        for _ in range(1000):
            xs, ys, table = random_table(rng, 6, 6, (-1, 0, 1))
            p, d = brute_force_optima(table_instance(xs, ys, table))
            assert d.value <= p.value
            gaps += d.value < p.value
        c.detail = f"1000 tables, sup inf <= inf sup everywhere ({gaps} with a strict gap)"


# 2 ----------------------------------------------------------------------------------

def test_criterion_02_progress():
    with criterion(2, 5.0) as c:
        rng = random.Random(2)
        total = 0
        for seed in range(500):
            L = monotone_instance(rng)
            v = run_primal_dual(L, EngineConfig(accumulate_y=True, max_iterations=40, random_seed=seed))
            betas = v.trace.betas()
            assert not repeated(betas), f"instance {seed} repeated a dual candidate"
            total += len(betas)
        c.detail = f"500 monotone instances, {total} dual candidates, no repeats"


# 3 ----------------------------------------------------------------------------------

def test_criterion_03_duality_gap_divergence():
    with criterion(3, 1.0) as c:
        L = ge_lagrangian()
        assert L.evaluate(5, 5) == -1 and L.evaluate(4, 5) == 1
        for cap in (10, 100, 1000):
            v = run_primal_dual(L, EngineConfig(max_iterations=cap, accumulate_x=True, accumulate_y=True))
            assert isinstance(v, Budget) and len(v.trace) == cap
            v = run_primal_dual(L, EngineConfig(max_iterations=cap))
            assert isinstance(v, Budget) and len(v.trace) == cap
        c.detail = "Budget at caps 10/100/1000, no witness"


# 4 ----------------------------------------------------------------------------------

def _stratified_instance(rng, n):
    """Y = labelled elements with strata; one element at stratum n can never be refuted.

    X = finite sets of events, each event refuting a few other elements;
    L(x, y) = -1 iff some event in x refutes y.
    """
    size = rng.randint(1, 50)
    strata = [rng.randint(0, n) for _ in range(size - 1)] + [n]
    extra = [rng.randint(n + 1, n + 3) for _ in range(rng.randint(0, 10))]
    ys = list(range(size + len(extra)))
    stratum = dict(zip(ys, strata + extra))
    star = size - 1
    killers = {y: frozenset(rng.sample(range(8), rng.randint(1, 3))) for y in ys if y != star}
    events = {e: frozenset(y for y, k in killers.items() if e in k) for e in range(8)}

    def L(x, y):
        return -1 if any(y in events[e] for e in x) else 1

    def dual_check(beta, choice):
        if beta == star:
            return DualOk()
        return CounterPrimal(frozenset([choice.pick(sorted(killers[beta]))]))

    def primal_check(alpha, choice):
        alive = [y for y in ys if L(alpha, y) > 0]
        low = min(stratum[y] for y in alive)
        return CounterDual(choice.pick([y for y in alive if stratum[y] == low]))

    first = min(ys, key=lambda y: (stratum[y], y))
    inst = LagrangianInstance(
        evaluate=L,
        dual_witness_check=dual_check,
        primal_witness_check=primal_check,
        join_x=frozenset.union,
        stratum_y=stratum.__getitem__,
        enum_y=lambda: iter(ys),
        initial_x=frozenset(),
        initial_y=first,
    )
    return inst, sum(1 for y in ys if stratum[y] <= n), stratum


def test_criterion_04_stratified_termination():
    with criterion(4, 1.0) as c:
        rng = random.Random(4)
        worst = 0.0
        for n in range(4):
            for seed in range(60):
                L, bound, stratum = _stratified_instance(rng, n)
                v = run_primal_dual(L, EngineConfig(accumulate_x=True, smallest_stratum=True,
                                                    max_iterations=10_000, random_seed=seed))
                assert isinstance(v, DualWitness)
                assert stratum[v.beta] <= n
                assert len(v.trace) <= bound, (n, len(v.trace), bound)
                worst = max(worst, len(v.trace) / bound)
        c.detail = f"240 instances, n <= 3; iterations / |Y<=n| at most {worst:.2f}"


# 5 ----------------------------------------------------------------------------------

def test_criterion_05_cegar():
    with criterion(5, 30.0) as c:
        pool = read_file(data("pool.preds"), "pool")
        res = run_cegar(T0, pool)
        assert res.status == Status.SAFE
        assert isinstance(abstract_error_search(T0, res.witness), AbstractSafe)
        cert = certificate_for("cegar", res)
        assert check_certificate(T0, cert) == Accept()
        produced(T0, cert)

        bad = run_cegar(T0_UNSAFE, pool)
        assert bad.status == Status.UNSAFE
        assert is_error_trace(T0_UNSAFE, bad.witness.states)
        produced(T0_UNSAFE, certificate_for("cegar", bad))

        rng = random.Random(5)
        n_safe = 0
        for _ in range(200):
            ts = random_system(rng, 5)
            p, d = brute_force_optima(cegar_oracle_instance(ts))
            safe = isinstance(explicit_error_search(ts), Safe)
            assert p == d and (d.value == 1) == safe
            n_safe += safe
        c.detail = f"T0 safe + accepted, unsafe variant trace {len(bad.witness)} states, oracle 200/200 ({n_safe} safe)"


# 6 ----------------------------------------------------------------------------------

def test_criterion_06_ice():
    with criterion(6, 30.0) as c:
        pool = PredicatePool.of([BOTTOM, TOP] + [symbolic_pred(gt(var("x"), k)) for k in range(-4, 5)])
        res = run_ice(T0, pool)
        assert res.status == Status.SAFE
        assert isinstance(invariant_check(T0, [res.witness]), Inductive)
        produced(T0, certificate_for("ice", res))

        rng = random.Random(6)
        pairs = 0
        for _ in range(200):
            ts = random_system(rng, 5)
            samples = path_samples(ts)
            preds = powerset_preds(ts.states)
            for a in samples:
                for b in samples:
                    if a <= b:
                        pairs += 1
                        assert all(l_ice(ts, a, p) >= l_ice(ts, b, p) for p in preds)
            p, d = brute_force_optima(ice_oracle_instance(ts))
            assert p == d and (d.value == 1) == isinstance(explicit_error_search(ts), Safe)
        c.detail = f"T0 safe with {res.witness.ident}; {pairs} ordered sample pairs anti-monotone; oracle 200/200"


# 7 ----------------------------------------------------------------------------------

def test_criterion_07_houdini():
    with criterion(7, 120.0) as c:
        rng = random.Random(7)
        pairs = [random_pair(rng) for _ in range(220)]
        sweeps = paths = safe = 0
        for pair in pairs:
            assert isinstance(validate_pair(pair), Ok)
            S, B = pair.T.states, sorted(pair.base)
            xs = [frozenset(k) for r in range(len(S) + 1) for k in combinations(S, r)]
            ys = [frozenset(k) for r in range(len(B) + 1) for k in combinations(B, r)]
            for x in xs:
                for y in ys:
                    l_pdh(pair, x, y)  # raises IllFormed if both refutations apply
                    sweeps += 1
            for y in ys:
                if len(y) <= 4:
                    h = houdini_fixpoint(pair.T, y, pair.holds_base)
                    assert (h.invariant, h.safe) == subset_oracle(pair.T, y, pair.holds_base)
            for path in dual_paths(pair, 4):
                u = frozenset().union(*path)
                assert isinstance(invariant_check(pair.T, pair.predicates(u), require_safe=False), Inductive)
                paths += 1
            if pair.TI.bad:
                res = run_pd_houdini(pair)
                if res.status == Status.SAFE:
                    safe += 1
                    inv = pdh_invariant(pair, res.witness)
                    assert isinstance(invariant_check(pair.T, pair.predicates(inv)), Inductive)
                    produced(pair, certificate_for("pd-houdini", res))
        c.detail = f"{len(pairs)} pairs, {sweeps} (x,y) points well-formed, {paths} dual paths inductive, {safe} safe runs"


# 8 ----------------------------------------------------------------------------------

def _termination_systems(rng):
    for n in (1, 2, 3):
        yield from all_systems(n)
    for _ in range(300):
        yield random_system(rng, 6)


def test_criterion_08_termination():
    with criterion(8, 60.0) as c:
        cd = read_file(data("countdown.sys"), "system")
        ident = RankingTemplate((1,), 0)
        ice = run_termination(cd, "ice")
        assert ice.status == Status.TERMINATING and ice.witness == Single(ident)
        cg = run_termination(cd, "cegar")
        assert cg.status == Status.TERMINATING and ident in cg.witness.ranks
        for method, r in (("term-ice", ice), ("term-cegar", cg)):
            assert certify_termination(cd, r.witness)
            produced(cd, certificate_for(method, r))

        pool = [r for layer in template_pool(1, 1, 1) for r in layer]
        sets = [R for k in (1, 2) for R in combinations_with_replacement(pool, k)]
        rng = random.Random(8)
        n_sys = loops = 0
        for ts in _termination_systems(rng):
            n_sys += 1
            for r in pool:
                assert certify_termination(ts, Single(r)) == single_oracle(ts, r)
            for R in sets:
                assert certify_termination(ts, Dwf(R)) == dwf_oracle(ts, R)
            reach = set(ts.reachable())
            if any(s == t and s in reach for s, t in ts.trans):
                loops += 1
                assert not any(certify_termination(ts, Single(r)) for r in pool)
                assert not any(certify_termination(ts, Dwf(R)) for R in sets)
                for method in ("ice", "cegar"):
                    assert run_termination(ts, method).status != Status.TERMINATING
        c.detail = f"countdown certified; {n_sys} systems x {len(pool)} + {len(sets)} templates agree; {loops} self-loop systems never certified"


# 9 ----------------------------------------------------------------------------------

PHI = parse_prenex(
    "(exists (w) (forall (x) (exists (y) (forall (z)"
    " (and (or (< y 1) (< (* 2 w) y)) (or (< z y) (< x z)))))))"
)
T = term
PI = Choice("w", ((T("0"), Pass("x", Choice("y", ((T("x"), Pass("z", Leaf())), (T("(* 2 x)"), Pass("z", Leaf())))))),))
RHO = Pass("w", Choice("x", ((T("-1"), Pass("y", Choice("z", ((T("y"), Leaf()), (T("(/ (+ w y) 2)"), Leaf()))))),)))
PI2 = Choice("w", ((T("-2"), Pass("x", Choice("y", ((T("(+ x 1)"), Pass("z", Leaf())),)))),))
MONOTONE_FORMULAS = [
    "(exists (x) (< 0 x))",
    "(forall (x) (exists (y) (< x y)))",
    "(exists (x) (forall (y) (exists (z) (and (< x z) (or (< y z) (= y 1))))))",
    "(forall (x) (exists (y) (forall (z) (or (< x y) (< z y) (= x 0)))))",
]


def _check_monotone(phi) -> int:
    sats = enum_skeletons(phi, "sat", (0, 1), 2)
    unsats = enum_skeletons(phi, "unsat", (0, 1), 2)
    table = {(r, p): l_fk(phi, r, p) for r in unsats for p in sats}
    pairs = 0
    for b in sats:
        for a in below(b):
            pairs += 1
            assert all(table[r, a] <= table[r, b] for r in unsats)
    for b in unsats:
        for a in below(b):
            pairs += 1
            assert all(table[a, p] >= table[b, p] for p in sats)
    return pairs


def test_criterion_09_qlra():
    with criterion(9, 60.0) as c:
        assert check_skeleton(PHI, PI, "sat") and check_skeleton(PHI, RHO, "unsat")
        assert l_fk(PHI, RHO, PI) == -1
        assert not certify_sat(PHI, PI)
        assert certify_sat(PHI, PI2)

        res = run_fk(PHI)
        assert res.status == Status.VALID
        assert certify_sat(PHI, res.witness)
        produced(PHI, certificate_for("qlra", res))

        rng = random.Random(9)
        fuzzed = 0
        while fuzzed < 100:
            phi = random_sentence(rng, 4)
            pi = random_skeleton(rng, phi, "sat")
            if isinstance(forall_validity(project(phi, pi)), Valid):
                continue
            rho = extract_counter_skeleton(phi, pi)
            assert check_skeleton(phi, rho, "unsat") and l_fk(phi, rho, pi) == -1
            fuzzed += 1

        pairs = sum(_check_monotone(parse_prenex(f)) for f in MONOTONE_FORMULAS)
        c.detail = f"worked skeletons reproduced, run_fk valid in {len(res.trace)} iterations, 100/100 extractions, {pairs} ordered skeleton pairs monotone"


# 10 ---------------------------------------------------------------------------------

def test_criterion_10_fixpoint():
    with criterion(10, 120.0) as c:
        ex71 = read_file(data("ex71.fix"), "fixpoint")
        res = run_fix(ex71)
        assert res.status == Status.VALID
        assert bounded_semantics_oracle(ex71, 64)
        produced(ex71, certificate_for("fixpoint", res, FixConfig()))

        ex74 = read_file(data("ex74.fix"), "fixpoint")
        verdicts = {}
        for seed in range(1000):
            r = run_fix(ex74, FixConfig(random_seed=seed))
            assert r.status != Status.VALID
            verdicts[r.status.value] = verdicts.get(r.status.value, 0) + 1
            if seed < 5 and r.status == Status.INVALID:
                produced(ex74, certificate_for("fixpoint", r, FixConfig(random_seed=seed)))

        cd = parse_problem("(define (P x) :mu (or (<= x 0) (P (- x 1)))) (query (P 2))")
        assert l_fix(cd, FixStrategy(), strategy({"P": [RankingTemplate((1,), 0)]})) == 1
        assert l_fix(cd, FixStrategy(), strategy({"P": [RankingTemplate((0,), 0)]})) == -1

        rng = random.Random(10)
        cfg = FixConfig(max_offset=4, domain_bound=16)
        agree = escaped = capped = budget = 0
        for _ in range(300):
            p = random_fix_problem(rng)
            try:
                r = run_fix(p, cfg)
            except ReductionCapExceeded:
                capped += 1
                continue
            if r.status == Status.BUDGET:
                budget += 1
                continue
            if r.note == "oracle: domain escape":
                escaped += 1
                continue
            assert r.note == "oracle agrees", p.to_sexpr()
            agree += 1
            produced(p, certificate_for("fixpoint", r, cfg))
        c.detail = (f"ex71 valid + oracle(64); ex74 over 1000 seeds {verdicts}; l_fix 1/-1; "
                    f"fuzz {agree} agree, {escaped} escape, {budget} budget, {capped} capped")


# 11 ---------------------------------------------------------------------------------

def _extra_corpus():
    """Witnesses from every solver on fresh random inputs."""
    rng = random.Random(11)
    for seed in range(60):
        ts = random_system(rng, 5)
        pool = subset_pool(ts)
        for method, res in (("cegar", run_cegar(ts, pool)), ("ice", run_ice(ts, pool, IceConfig(max_iterations=400)))):
            yield ts, method, res, None
        for method in ("term-ice", "term-cegar"):
            yield ts, method, run_termination(ts, method.split("-")[1], TerminationConfig(random_seed=seed)), None
    for _ in range(40):
        pair = random_pair(rng)
        if pair.TI.bad:
            yield pair, "pd-houdini", run_pd_houdini(pair), None
    for seed in range(30):
        phi = random_sentence(rng, 3)
        yield phi, "qlra", run_fk(phi), None
    cfg = FixConfig()
    for _ in range(30):
        p = random_fix_problem(rng)
        try:
            yield p, "fixpoint", run_fix(p, cfg), cfg
        except ReductionCapExceeded:
            continue
    yield T0, "cegar", run_cegar(T0, read_file(data("pool.preds"), "pool")), None


def test_criterion_11_certificates():
    with criterion(11, 120.0) as c:
        corpus = list(PRODUCED)
        for problem, method, res, cfg in _extra_corpus():
            cert = certificate_for(method, res, cfg)
            if res.status.polarity != 0:
                assert cert is not None, (method, res)
                corpus.append((problem, cert))
        kinds: dict = {}
        for problem, cert in corpus:
            assert isinstance(cert, Certificate)
            verdict = check_certificate(problem, cert)
            assert verdict == Accept(), (cert.kind, verdict)
            kinds[cert.kind] = kinds.get(cert.kind, 0) + 1
        c.detail = f"{len(corpus)}/{len(corpus)} accepted: " + ", ".join(f"{k} {v}" for k, v in sorted(kinds.items()))


def main() -> int:
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except Exception:
            failed += 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
