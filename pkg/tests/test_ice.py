import random

from pdverify.cegar import PredicatePool
from pdverify.certificates import certificate_for, check_certificate
from pdverify.ice import (
    IceConfig,
    Pass,
    ice_oracle_instance,
    l_ice,
    learner,
    path_samples,
    powerset_preds,
    run_ice,
    teacher,
)
from pdverify.lagrangian import brute_force_optima
from pdverify.lra import formula, gt, var
from pdverify.parsing import read_file
from pdverify.results import Status
from pdverify.systems import (
    BOTTOM,
    TOP,
    Inductive,
    Safe,
    SymbolicTS,
    explicit_error_search,
    invariant_check,
    sample,
    symbolic_pred,
)

from _gen import random_system

T0 = SymbolicTS(("x",), formula("(= x 0)"), formula("(= x' (+ x 1))"), formula("(= x -3)"))
POOL = PredicatePool.of([BOTTOM, TOP] + [symbolic_pred(gt(var("x"), c)) for c in range(-4, 5)])


def test_l_ice_cases():
    p = symbolic_pred(formula("(> x 0)"))
    assert l_ice(T0, sample(), p) == 1
    assert l_ice(T0, sample(init=[(0,)]), p) == -1
    q = symbolic_pred(formula("(>= x 0)"))
    assert l_ice(T0, sample(init=[(0,)], trans=[((0,), (1,))]), q) == 1
    assert l_ice(T0, sample(trans=[((0,), (-1,))]), q) == -1
    assert l_ice(T0, sample(bad=[(5,)]), q) == -1


def test_l_ice_antimonotone_over_path_samples():
    rng = random.Random(0)
    for _ in range(60):
        ts = random_system(rng, 4)
        samples = path_samples(ts)
        preds = powerset_preds(ts.states)
        for a in samples:
            for b in samples:
                if a <= b:
                    assert all(l_ice(ts, a, p) >= l_ice(ts, b, p) for p in preds)


def test_teacher_reports_invariant_check_fact():
    ts = read_file("tests/data/t0_bounded.sys", "system")
    for p in powerset_preds(ts.states[4:9])[:40]:
        res = teacher(ts, p)
        ok = isinstance(invariant_check(ts, [p]), Inductive)
        assert isinstance(res, Pass) == ok
        if not ok:
            assert l_ice(ts, res, p) == -1


def test_learner_respects_sample():
    s = sample(init=[(0,)], bad=[(-3,)])
    p = learner(T0, s, POOL)
    assert l_ice(T0, s, p) == 1


def test_t0_safe_and_inductive():
    res = run_ice(T0, POOL)
    assert res.status == Status.SAFE
    assert isinstance(invariant_check(T0, [res.witness]), Inductive)
    assert check_certificate(T0, certificate_for("ice", res))


def test_exhausted_pool_is_unknown():
    res = run_ice(T0, PredicatePool.of([BOTTOM, TOP]))
    assert res.status == Status.UNKNOWN


def test_batches_still_sound():
    res = run_ice(T0, POOL, IceConfig(batch=3))
    assert res.status == Status.SAFE


def test_random_systems_against_reachability():
    rng = random.Random(1)
    for seed in range(100):
        ts = random_system(rng, 5)
        preds = powerset_preds(ts.states)
        res = run_ice(ts, PredicatePool.of(preds), IceConfig(random_seed=seed, max_iterations=400))
        safe = isinstance(explicit_error_search(ts), Safe)
        assert res.status == (Status.SAFE if safe else Status.UNKNOWN)
        if safe:
            assert check_certificate(ts, certificate_for("ice", res))


def test_idealized_duality():
    rng = random.Random(2)
    for _ in range(60):
        ts = random_system(rng, 4)
        p, d = brute_force_optima(ice_oracle_instance(ts))
        assert p == d
        assert (d.value == 1) == isinstance(explicit_error_search(ts), Safe)
