import random

import pytest

from pdverify.certificates import certificate_for, check_certificate
from pdverify.fixpoint import (
    DomainEscape,
    FixConfig,
    FixStrategy,
    ReductionCapExceeded,
    alternating_problem,
    bounded_semantics_oracle,
    certify_fix,
    check_strategy,
    countdown_problem,
    l_fix,
    parse_problem,
    random_fix_problem,
    run_fix,
    strategy,
)
from pdverify.parsing import read_file
from pdverify.results import Status
from pdverify.sexpr import ParseError, render
from pdverify.termination import RankingTemplate as RT

CD = parse_problem("(define (P x) :mu (or (<= x 0) (P (- x 1)))) (query (P 2))")


# problems --------------------------------------------------------------------------

def test_parse_rejects_unknown_predicate_and_arity():
    with pytest.raises(ParseError):
        parse_problem("(define (P x) :mu (Q x)) (query (P 0))")
    with pytest.raises(ParseError):
        parse_problem("(define (P x) :mu (P x x)) (query (P 0))")
    with pytest.raises(ParseError):
        parse_problem("(define (P x) :lfp (P x)) (query (P 0))")


def test_problem_roundtrip():
    for path in ("tests/data/ex71.fix", "tests/data/ex74.fix", "tests/data/countdown.fix"):
        p = read_file(path, "fixpoint")
        again = parse_problem(" ".join(render(e) for e in p.to_sexpr()))
        assert again.to_sexpr() == p.to_sexpr()


# bounded oracle against hand-derived truth -------------------------------------------

@pytest.mark.parametrize("start", [-2, 0, 3, 7])
def test_oracle_least_countdown(start):
    # every descent reaches x <= 0, so the least solution holds everywhere
    assert bounded_semantics_oracle(countdown_problem("mu", "or", 0, 1, f"(P {start})"), 16)
    # the conjunction is false at once above 0 and needs an infinite descent below,
    # which leaves any bounded domain
    conj = countdown_problem("mu", "and", 0, 1, f"(P {start})")
    if start > 0:
        assert not bounded_semantics_oracle(conj, 16)
    else:
        with pytest.raises(DomainEscape):
            bounded_semantics_oracle(conj, 16)


def test_oracle_greatest_countdown():
    # under nu, (x <= 1) and P(x - 1) fails at once above 1 and descends forever below
    assert not bounded_semantics_oracle(countdown_problem("nu", "and", 1, 1, "(P 3)"), 16)
    with pytest.raises(DomainEscape):
        bounded_semantics_oracle(countdown_problem("nu", "and", 1, 1, "(P 0)"), 16)


@pytest.mark.parametrize("start", [0, 1, 2])
def test_oracle_cyclic_least_and_greatest(start):
    # P(x) = P((x + 1) mod 3) with an unreachable base case: false under mu, true under nu
    assert not bounded_semantics_oracle(countdown_problem("mu", "or", 5, 1, f"(P {start})", 3), 8)
    assert bounded_semantics_oracle(countdown_problem("nu", "or", 5, 1, f"(P {start})", 3), 8)
    # with base case x = 2 the least solution holds on the whole cycle
    assert bounded_semantics_oracle(countdown_problem("mu", "or", 2, 1, f"(P {start})", 3), 8)


def test_oracle_escape_detected():
    p = parse_problem("(define (P x) :mu (P (+ x 1))) (query (P 0))")
    with pytest.raises(DomainEscape):
        bounded_semantics_oracle(p, 4)


# the Lagrangian ---------------------------------------------------------------------

def test_l_fix_countdown_values():
    assert l_fix(CD, FixStrategy(), strategy({"P": [RT((1,), 0)]})) == 1
    assert l_fix(CD, FixStrategy(), strategy({"P": [RT((0,), 0)]})) == -1


def test_l_fix_monotone_in_proponent():
    weak = strategy({"P": [RT((0,), 0)]})
    strong = weak.join(strategy({"P": [RT((1,), 0)]}))
    assert weak.leq(strong)
    assert l_fix(CD, FixStrategy(), weak) <= l_fix(CD, FixStrategy(), strong)


def test_strategy_shape_check():
    assert check_strategy(CD, strategy({"P": [RT((1,), 0)]}), "y")
    assert not check_strategy(CD, strategy({"P": [RT((1, 1), 0)]}), "y")


def test_reduction_cap_is_reported():
    ex71 = read_file("tests/data/ex71.fix", "fixpoint")
    with pytest.raises(ReductionCapExceeded):
        run_fix(ex71, FixConfig(reduction_cap=5))


# the solver -------------------------------------------------------------------------

def test_countdown_forall_valid():
    p = read_file("tests/data/countdown.fix", "fixpoint")
    res = run_fix(p)
    assert res.status == Status.VALID
    assert certify_fix(p, "y", res.witness)
    assert check_certificate(p, certificate_for("fixpoint", res, FixConfig()))


def test_unbounded_choice_never_valid():
    ex74 = read_file("tests/data/ex74.fix", "fixpoint")
    for seed in range(25):
        res = run_fix(ex74, FixConfig(random_seed=seed))
        assert res.status != Status.VALID
        if res.status == Status.INVALID:
            assert check_certificate(ex74, certificate_for("fixpoint", res, FixConfig(random_seed=seed)))


def test_alternating_family_agrees():
    cfg = FixConfig(max_offset=4, domain_bound=8)
    for outer in ("mu", "nu"):
        for inner in ("mu", "nu"):
            for op in ("or", "and"):
                res = run_fix(alternating_problem(outer, inner, op, 1, 1, 3, 0), cfg)
                assert res.note == "oracle agrees", (outer, inner, op)


def test_fuzz_agrees_with_oracle():
    rng = random.Random(11)
    cfg = FixConfig(max_offset=4, domain_bound=16)
    checked = 0
    for _ in range(60):
        p = random_fix_problem(rng)
        try:
            res = run_fix(p, cfg)
        except ReductionCapExceeded:
            continue
        if res.note == "oracle: domain escape" or res.status == Status.BUDGET:
            continue
        assert res.note == "oracle agrees", p.to_sexpr()
        assert check_certificate(p, certificate_for("fixpoint", res, cfg))
        checked += 1
    assert checked >= 30
