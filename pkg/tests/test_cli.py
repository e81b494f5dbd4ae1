"""Command-line front end: exit codes, JSON contract and determinism."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from proxdiff import EntireSeries, exp_series, mp
from proxdiff.cli import main
from proxdiff.diffop import identity_symbol

MANIFEST = Path(__file__).parent / "data" / "corpus_manifest.json"
CONST1 = '{"family": "constant", "rho": 1}'
CONST2 = '{"family": "constant", "rho": 2}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, json.loads(out), err


def test_growth_scale_closed_form(capsys):
    code, out, _ = run(capsys, "growth-scale", "--order", CONST1, "--qmax", "3")
    assert code == 0
    ref = [mp.zero, mp.mpf(-1), mp.log(4 / mp.e ** 2), mp.log(27 / mp.e ** 3)]
    got = [mp.mpf(v) for v in out["ln_G"]]
    assert all(abs(a - b) < mp.mpf(10) ** -60 for a, b in zip(got, ref))
    assert all(isinstance(v, str) for v in out["ln_G"])


def test_eval_order(capsys):
    code, out, _ = run(capsys, "eval-order", "--order", CONST2, "--r", "10")
    assert code == 0 and mp.mpf(out["rho"]) == 2


def test_normalize(capsys):
    code, out, _ = run(capsys, "normalize", "--order", '{"family": "loglog", "rho": 2, "k": -1}')
    assert code == 0 and "r1" in out


def test_op_apply_identity(tmp_path, capsys):
    f = exp_series(1, 40)
    (tmp_path / "f.json").write_text(json.dumps(f.to_json()))
    (tmp_path / "id.json").write_text(json.dumps(identity_symbol().to_json()))
    code, out, _ = run(capsys, "op-apply", "--symbol", str(tmp_path / "id.json"),
                       "--series", str(tmp_path / "f.json"), "--order", CONST1)
    assert code == 0
    assert EntireSeries.from_json(out["result"]) == f
    assert mp.mpf(out["tail_bound"]) == 0
    assert out["result"] == f.to_json()


def test_hom_round_trip(capsys):
    sym = identity_symbol().to_json()
    sym["a_max"] = 4
    del sym["complete"]  # images cannot tell a complete symbol from a truncated one
    code, images, _ = run(capsys, "op-to-hom", "--symbol", json.dumps(sym))
    assert code == 0
    code, back, _ = run(capsys, "hom-to-op", "--images", json.dumps(images))
    assert code == 0 and back == sym


def test_estimate_type(capsys):
    series = json.dumps(exp_series(2, 200).to_json())
    code, out, _ = run(capsys, "estimate-type", "--order", CONST1, "--series", series)
    assert code == 0 and 1.9 <= float(out["sigma_hat"]) <= 2.1


def test_classify_series(capsys):
    series = json.dumps(exp_series(1, 200).to_json())
    code, out, _ = run(capsys, "classify-series", "--order", CONST1, "--series", series,
                       "--sigma", "2", "--mode", "minimal")
    assert code == 0 and out["verdict"] == "Member"


def test_classify_op(capsys):
    sym = json.dumps(identity_symbol().to_json())
    code, out, _ = run(capsys, "classify-op", "--symbol", sym, "--src-order", CONST1,
                       "--mode", "MinimalType", "--probes", "1,2")
    assert code == 0 and out["verdict"] == "Member"


def test_example_schrodinger(capsys):
    code, out, _ = run(capsys, "example-schrodinger", "--t", "1", "--k", "-1", "--eps", "1",
                       "--jmax", "400")
    assert code == 0
    assert out == {"in_D_varrho": True, "in_D_2": False, "in_D_2_minimal": True}


def test_verify_lemmas(capsys):
    code, out, err = run(capsys, "verify-lemmas", "--order", CONST2, "--qmax", "30")
    assert code == 0 and out["all_passed"]
    assert err.count("PASS") == len(out["table"])


def test_oracle_suite(capsys):
    code, out, _ = run(capsys, "oracle-suite", "--seeds", "20", "--manifest", str(MANIFEST))
    assert code == 0 and out["all_passed"] and out["manifest_mismatches"] == []


class TestErrors:
    def test_malformed_json_location(self, capsys):
        code, out, _ = run(capsys, "growth-scale", "--order", '{"family": "constant",\n "rho": }',
                           "--qmax", "3")
        assert code == 2
        loc = out["error"]["location"]
        assert loc["argument"] == "--order" and loc["line"] == 2 and loc["column"] == 9

    def test_missing_file(self, capsys, tmp_path):
        code, out, _ = run(capsys, "normalize", "--order", str(tmp_path / "nope.json"))
        assert code == 2 and out["error"]["location"]["argument"] == "--order"

    def test_precondition(self, capsys):
        images = {"n": 1, "b_max": 2, "entries": []}
        code, out, _ = run(capsys, "hom-to-op", "--images", json.dumps(images))
        assert code == 2 and out["error"]["type"] == "PreconditionError"
        assert "[0]" in out["error"]["message"] and "[2]" in out["error"]["message"]

    def test_domain(self, capsys):
        code, out, _ = run(capsys, "growth-scale", "--order", '{"family": "constant", "rho": -1}',
                           "--qmax", "3")
        assert code == 2

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2


def test_determinism_and_module_entry():
    argv = [sys.executable, "-m", "proxdiff", "example-schrodinger", "--jmax", "120", "--verbose"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["in_D_2_minimal"] is True


def test_precision_env(monkeypatch, capsys):
    monkeypatch.setenv("PO_PREC_BITS", "128")
    code, out, _ = run(capsys, "--prec-bits", "300", "growth-scale", "--order", CONST1,
                       "--qmax", "2")
    assert code == 0
    from proxdiff import get_precision, set_precision
    assert get_precision() == 300
    set_precision(256)
