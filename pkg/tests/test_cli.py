import json
import subprocess
import sys

import pytest

from qra.cli import main

EV2 = '{"l":3,"factors":[{"kind":"ev","m":1,"a":"2"}]}'
TWO = '{"l":3,"factors":[{"kind":"ev","m":1,"a":"1"},{"kind":"ev","m":1,"a":"2"}]}'
SPECIAL = '{"l":3,"factors":[{"kind":"ev","m":1,"a":"1"},{"kind":"ev","m":1,"a":"eps^2"}]}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_construct(capsys):
    code, out = run(capsys, "construct", EV2)
    assert code == 0 and out["dim"] == 2 and out["audit"] == "pass"
    code, out = run(capsys, "construct", TWO)
    assert code == 0 and out["dim"] == 4 and out["audit"] == "pass"


def test_construct_from_file(capsys, tmp_path):
    f = tmp_path / "m.json"
    f.write_text(EV2)
    code, out = run(capsys, "construct", str(f))
    assert code == 0 and out["dim"] == 2


@pytest.mark.parametrize("argv", [
    ["construct", "{bad"],
    ["construct", '{"l":3,"factors":[{"kind":"nope"}]}'],
    ["--l", "4", "factor", "1-u"],
    ["--l", "1", "factor", "1-u"],
    ["factor", "1-u"],
    ["--l", "3", "factor", "(1-u"],
    ["verify", "no-such-check"],
    ["bogus-command"],
])
def test_parse_errors_exit_2(capsys, argv):
    code = main(argv)
    assert code == 2


def test_even_l_message_mentions_hypothesis(capsys):
    code, out = run(capsys, "--l", "4", "factor", "1-u")
    assert code == 2 and "root of unity hypothesis" in out["error"] and out["exit"] == 2


def test_drinfeld(capsys):
    code, out = run(capsys, "drinfeld", EV2)
    assert code == 0 and out["plus"] == "1 - 2*u" and out["reciprocity"]
    code, out = run(capsys, "--l", "5", "drinfeld", '{"factors":[{"kind":"ev","m":2,"a":"1"}]}')
    # (1 - eps u)(1 - eps^-1 u)
    assert out["plus"] == "1 + (1 + eps^2 + eps^3)*u + u^2"


def test_drinfeld_reducible_needs_index(capsys):
    code, out = run(capsys, "drinfeld", SPECIAL)
    assert code == 4 and out["exit"] == 4
    code, out = run(capsys, "drinfeld", SPECIAL, "--index", "0")
    assert code == 0 and out["weight"] == 2
    code, out = run(capsys, "drinfeld", SPECIAL, "--index", "7")
    assert code == 4


def test_factor(capsys):
    code, out = run(capsys, "--l", "3", "factor", "(1-2u)(1-u^3)")
    assert code == 0
    assert out["P0"] == "1 - 2*u" and out["P1"] == "1 - u^3"
    assert out["params"] == {"segments": [[1, "2"]], "frobenius": [[1, "1"]]}
    assert out["plan"]["factors"] == [{"kind": "ev", "m": 1, "a": "2"}, {"kind": "frob", "n": 1, "b": "1"}]


def test_factor_symbolic_has_no_plan(capsys):
    code, out = run(capsys, "factor", "1-a*u", "--l", "5")
    assert code == 0 and out["plan"] is None and out["segments"] == [[1, "a"]]


def test_irreducible(capsys):
    code, out = run(capsys, "irreducible", TWO)
    assert code == 0 and out["verdict"] == "irreducible"
    code, out = run(capsys, "irreducible", SPECIAL)
    assert code == 1 and out["verdict"] == "reducible" and out["witness_dim"] == 1


def test_classify(capsys):
    code, out = run(capsys, "--l", "3", "classify", "1-2u", "1-2u")
    assert code == 0 and out["isomorphic"]
    # Frobenius factor with b = 1 against b = eps, given by inverse roots
    orbit_eps = '{"roots":[{"val":"eps"},{"val":"eps^2"},{"val":"1"}]}'
    code, out = run(capsys, "--l", "3", "classify", "1-u^3", orbit_eps)
    assert code == 0 and out["isomorphic"]
    code, out = run(capsys, "--l", "3", "classify", "1-u^3", "1-2u^3")
    assert code == 1 and not out["isomorphic"]


def test_verify_selected(capsys):
    code, out = run(capsys, "verify", "lemma-5.1", "eq-18", "--max-r", "2")
    assert code == 0 and out["status"] == "pass"
    assert [c["check"] for c in out["checks"]] == ["eq-18", "lemma-5.1"]  # registry order
    assert "mutations" not in out
    assert all("seconds" not in c for c in out["checks"])
    code, out = run(capsys, "verify", "eq-1", "--timings")
    assert code == 0 and "seconds" in out["checks"][0]


def test_verify_output_reproducible(capsys):
    main(["verify", "eq-1", "lemma-3.3", "--max-r", "1"])
    a = capsys.readouterr().out
    main(["verify", "eq-1", "lemma-3.3", "--max-r", "1"])
    assert capsys.readouterr().out == a


def test_out_and_pretty(capsys, tmp_path):
    target = tmp_path / "o.json"
    code = main(["construct", EV2, "--out", str(target), "--pretty"])
    assert code == 0 and capsys.readouterr().out == ""
    text = target.read_text()
    assert "\n  " in text and json.loads(text)["dim"] == 2


def test_output_is_byte_identical():
    cmd = [sys.executable, "-m", "qra.cli", "--l", "3", "factor", "(1-eps*u)(1-eps^-1*u)(1-4u^3)^2"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.endswith(b"\n")
