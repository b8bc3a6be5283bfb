import io
import json
import subprocess
import sys

import pytest

from pdverify.cli import resolve_seed, run_command

D = "tests/data/"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def field(text, name):
    for line in text.splitlines():
        if line.startswith(name + ": "):
            return line[len(name) + 2:]
    return None


@pytest.mark.parametrize("argv,code,verdict", [
    (["verify", "safety", D + "t0.sys", "--pool", D + "pool.preds"], 0, "safe"),
    (["verify", "safety", D + "t0.sys", "--method", "ice", "--pool", D + "ice.preds"], 0, "safe"),
    (["verify", "safety", D + "t0_unsafe.sys", "--pool", D + "pool.preds"], 10, "unsafe"),
    (["verify", "safety", D + "pair.pair", "--method", "pd-houdini"], 0, "safe"),
    (["verify", "termination", D + "countdown.sys"], 0, "terminating"),
    (["verify", "termination", D + "countdown.sys", "--method", "term-ice"], 0, "terminating"),
    (["verify", "termination", D + "loop.sys"], 20, "unknown"),
    (["solve", "qlra", D + "ex61.fml"], 0, "valid"),
    (["solve", "fixpoint", D + "ex74.fix"], 10, "invalid"),
    (["verify", "safety", D + "t0.sys", "--max-iters", "0"], 20, "budget"),
])
def test_verdicts_and_exit_codes(argv, code, verdict):
    c, out, _ = run(*argv)
    assert c == code
    assert field(out, "verdict") == verdict


def test_unsafe_trace_is_printed():
    _, out, _ = run("verify", "safety", D + "t0_unsafe.sys", "--pool", D + "pool.preds")
    assert json.loads(field(out, "witness")) == ["(0)", "(1)", "(2)", "(3)"]


@pytest.mark.parametrize("argv", [
    ["verify", "safety", D + "missing.sys"],
    ["verify", "safety", D + "pool.preds"],
    ["verify", "termination", D + "t0.sys"],
    ["verify", "safety", D + "t0.sys", "--method", "magic"],
    ["verify", "safety", D + "t0.sys", "--max-iters", "-1"],
    ["solve", "qlra", D + "t0.sys"],
    ["frobnicate"],
])
def test_input_errors(argv):
    c, _, err = run(*argv)
    assert c == 2
    assert err.startswith("pdverify: error:")


def test_emit_trace(tmp_path):
    path = tmp_path / "trace.json"
    c, out, _ = run("verify", "safety", D + "t0.sys", "--pool", D + "pool.preds", "--emit-trace", str(path))
    assert c == 0 and field(out, "trace") == str(path)
    rows = json.loads(path.read_text())
    assert rows and all(set(r) == {"iter", "side", "candidate", "counter", "outcome"} for r in rows)
    assert rows[-1]["outcome"] == "ok"


def test_certificate_file_then_check(tmp_path):
    cert = tmp_path / "dwf.cert"
    c, out, _ = run("verify", "termination", D + "countdown.sys", "--certificate", str(cert))
    assert c == 0 and field(out, "certificate") == str(cert)
    assert run("check", D + "countdown.sys", str(cert))[:2] == (0, "accept: dwf\n")
    # the countdown ranking does not rank the self-loop system
    assert run("check", D + "loop.sys", str(cert))[0] == 10


@pytest.mark.parametrize("argv", [
    ["verify", "safety", D + "t0.sys", "--method", "ice", "--pool", D + "ice.preds"],
    ["verify", "safety", D + "pair.pair", "--method", "pd-houdini"],
    ["solve", "qlra", D + "ex61.fml"],
    ["solve", "fixpoint", D + "ex71.fix"],
    ["solve", "fixpoint", D + "ex74.fix"],
])
def test_every_cli_certificate_checks(tmp_path, argv):
    cert = tmp_path / "w.cert"
    c, _, _ = run(*argv, "--certificate", str(cert))
    assert c in (0, 10)
    assert run("check", argv[2], str(cert))[0] == 0


def test_check_reject_codes():
    assert run("check", D + "t0.sys", D + "nonneg.cert")[0] == 0
    c, out, _ = run("check", D + "t0_bounded.sys", D + "parity.cert")
    assert c == 10 and out.startswith("reject: consecution")
    c, out, _ = run("check", D + "t0.sys", D + "parity.cert")
    assert c == 10 and out.startswith("reject: undecidable")


def test_seed_resolution(monkeypatch):
    assert resolve_seed(5, {}) == 5
    assert resolve_seed(None, {"PDVERIFY_SEED": "7"}) == 7
    assert resolve_seed(None, {}) == 0
    monkeypatch.setenv("PDVERIFY_SEED", "oops")
    c, _, err = run("verify", "safety", D + "t0.sys")
    assert c == 2 and "PDVERIFY_SEED" in err


def test_same_seed_same_output(monkeypatch):
    monkeypatch.setenv("PDVERIFY_SEED", "3")
    a = run("solve", "qlra", D + "ex61.fml")
    b = run("solve", "qlra", D + "ex61.fml", "--seed", "3")
    assert a == b


def test_domain_bound_note():
    c, out, _ = run("solve", "fixpoint", D + "ex74.fix", "--domain-bound", "8")
    assert c == 10 and field(out, "note") == "oracle agrees"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pdverify.cli", "verify", "safety", D + "t0.sys"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "verdict: safe" in proc.stdout
