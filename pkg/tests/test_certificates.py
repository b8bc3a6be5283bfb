import pytest

from pdverify.certificates import (
    Accept,
    Certificate,
    KindMismatch,
    Reject,
    certificate_for,
    check_certificate,
    parse_certificate,
)
from pdverify.cegar import run_cegar
from pdverify.fixpoint import FixConfig, run_fix
from pdverify.houdini import run_pd_houdini
from pdverify.ice import run_ice
from pdverify.parsing import default_pool, read_file
from pdverify.qlra import run_fk
from pdverify.sexpr import ParseError
from pdverify.systems import Dwf, Single, Trace
from pdverify.termination import RankingTemplate, run_termination

T0 = read_file("tests/data/t0.sys", "system")
T0_UNSAFE = read_file("tests/data/t0_unsafe.sys", "system")
T0_BOUNDED = read_file("tests/data/t0_bounded.sys", "system")
COUNTDOWN = read_file("tests/data/countdown.sys", "system")


def _roundtrip(problem, cert):
    again = parse_certificate(cert.to_text())
    assert again.kind == cert.kind
    return check_certificate(problem, again)


def _produced():
    pool = read_file("tests/data/pool.preds", "pool")
    ice_pool = read_file("tests/data/ice.preds", "pool")
    pair = read_file("tests/data/pair.pair", "pair")
    phi = read_file("tests/data/ex61.fml", "sentence")
    cdfix = read_file("tests/data/countdown.fix", "fixpoint")
    ex74 = read_file("tests/data/ex74.fix", "fixpoint")
    yield T0, certificate_for("cegar", run_cegar(T0, pool))
    yield T0, certificate_for("cegar", run_cegar(T0, default_pool(T0)))
    yield T0_UNSAFE, certificate_for("cegar", run_cegar(T0_UNSAFE, pool))
    yield T0, certificate_for("ice", run_ice(T0, ice_pool))
    yield pair, certificate_for("pd-houdini", run_pd_houdini(pair))
    yield COUNTDOWN, certificate_for("term-ice", run_termination(COUNTDOWN, "ice"))
    yield COUNTDOWN, certificate_for("term-cegar", run_termination(COUNTDOWN, "cegar"))
    yield phi, certificate_for("qlra", run_fk(phi))
    yield cdfix, certificate_for("fixpoint", run_fix(cdfix), FixConfig())
    yield ex74, certificate_for("fixpoint", run_fix(ex74), FixConfig())


def test_produced_certificates_roundtrip_and_accept():
    kinds = set()
    for problem, cert in _produced():
        assert cert is not None
        assert _roundtrip(problem, cert) == Accept()
        kinds.add(cert.kind)
    assert kinds == {"predicates", "trace", "invariant", "houdini", "ranking", "dwf", "skeleton-sat",
                     "fix-valid", "fix-invalid"}


def test_invariant_file_accepted():
    cert = parse_certificate(open("tests/data/nonneg.cert").read())
    assert check_certificate(T0, cert)


def test_parity_rejected_for_consecution_on_bounded_system():
    cert = parse_certificate(open("tests/data/parity.cert").read())
    res = check_certificate(T0_BOUNDED, cert)
    assert isinstance(res, Reject) and res.reason == "consecution"
    assert res.detail == (0, 1)


def test_parity_on_rational_system_is_undecidable():
    cert = parse_certificate(open("tests/data/parity.cert").read())
    res = check_certificate(T0, cert)
    assert isinstance(res, Reject) and res.reason == "undecidable"


def test_kind_mismatch():
    cert = Certificate("ranking", Single(RankingTemplate((1,))))
    with pytest.raises(KindMismatch):
        check_certificate(read_file("tests/data/ex61.fml", "sentence"), cert)


def test_tampered_witnesses_rejected():
    assert not check_certificate(T0_UNSAFE, Certificate("trace", Trace(((0,), (2,), (3,)))))
    assert not check_certificate(COUNTDOWN, Certificate("ranking", Single(RankingTemplate((-1,)))))
    assert not check_certificate(COUNTDOWN, Certificate("dwf", Dwf((RankingTemplate((0,)),))))
    assert not check_certificate(COUNTDOWN, Certificate("dwf", Single(RankingTemplate((1,)))))
    assert not check_certificate(T0, parse_certificate("(certificate :kind predicates :witness ())"))


def test_unknown_kind_and_bad_syntax():
    with pytest.raises(ValueError):
        Certificate("proof", None)
    with pytest.raises(ParseError):
        parse_certificate("(certificate :kind proof :witness ())")
    with pytest.raises(ParseError):
        parse_certificate("(certificate :witness ())")
