import json
import subprocess
import sys

import pytest

from stitlab.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_truth_values(capsys, models_dir):
    sigma = models_dir / "sigma.json"
    assert run(capsys, "eval", "--model", sigma, "--formula", "~p", "--point", "m0:0")[0] == 0
    code, out, err = run(capsys, "eval", "--model", sigma, "--formula", "[i a]p",
                         "--point", "m0/h0")
    assert code == 1 and out.strip() == "false"
    assert "h0 = [m0]" in err


def test_eval_json_trace_and_extension(capsys, models_dir):
    code, out, _ = run(capsys, "eval", "--model", models_dir / "imagination_split.json",
                       "--formula", "[i a]p", "--point", "m0:0", "--trace", "--extension",
                       "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["value"] is True
    assert data["extension"] == ["m0/h0"]
    assert any("[imagine]" in line for line in data["trace"])


@pytest.mark.parametrize("argv", [
    ["--formula", "p", "--point", "m0:3"],
    ["--formula", "p", "--point", "zz"],
    ["--formula", "p &", "--point", "m0:0"],
    ["--formula", "[c z]p", "--point", "m0:0"],
    ["--formula", "p"],
])
def test_eval_errors(capsys, models_dir, argv):
    code, _, err = run(capsys, "eval", "--model", models_dir / "sigma.json", *argv)
    assert code == 2 and err.startswith("error:")


def test_eval_refuses_invalid_models_unless_forced(capsys, models_dir):
    bad = models_dir / "independence_violation.json"
    assert run(capsys, "eval", "--model", bad, "--formula", "p", "--point", "m0:0")[0] == 2
    code, _, err = run(capsys, "eval", "--model", bad, "--formula", "~p", "--point", "m0:0",
                       "--force")
    assert code == 0 and "warning" in err


def test_missing_model_file(capsys, tmp_path):
    assert run(capsys, "eval", "--model", tmp_path / "none.json", "--formula", "p",
               "--point", "m0:0")[0] == 2


@pytest.mark.parametrize("name,code", [
    ("sigma.json", 0), ("imagination_split.json", 0), ("cyclic.json", 1),
    ("two_roots.json", 1), ("diamond.json", 1), ("ncuh_violation.json", 1),
    ("independence_violation.json", 1),
])
def test_validate_exit_codes(capsys, models_dir, name, code):
    assert run(capsys, "validate", "--model", models_dir / name)[0] == code


def test_validate_json(capsys, models_dir):
    code, out, _ = run(capsys, "validate", "--model", models_dir / "independence_violation.json",
                       "--format", "json")
    data = json.loads(out)
    assert not data["ok"]
    assert data["violations"][0]["witness"]["selector"] == {"a": [0], "b": [1]}


def test_prove(capsys, proofs_dir, tmp_path):
    code, out, _ = run(capsys, "prove", proofs_dir / "converse_a5.proof")
    assert code == 0 and out.startswith("Accepted:") and "premise-free" in out
    bad = tmp_path / "bad.proof"
    bad.write_text("premises: p\n1. p ; PREM\n2. S p ; NEC 1\n")
    code, out, _ = run(capsys, "prove", bad)
    assert code == 1 and "Rejected at line 2" in out
    empty = tmp_path / "empty.proof"
    empty.write_text("# nothing here\n")
    assert run(capsys, "prove", empty)[0] == 2
    junk = tmp_path / "junk.proof"
    junk.write_text("1. p -> p\n")
    assert run(capsys, "prove", junk)[0] == 2


def test_prove_with_premises(capsys, tmp_path):
    f = tmp_path / "mp.proof"
    f.write_text("premises: p ; p -> q\n1. p ; PREM\n2. p -> q ; PREM\n3. q ; MP 1 2\n")
    code, out, _ = run(capsys, "prove", f, "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["premises"] == ["p", "p -> q"] and not data["premise_free"]


def test_search_round_trips_through_eval(capsys, tmp_path):
    out_file = tmp_path / "cm.json"
    code, out, _ = run(capsys, "search", "--formula", "[i a]p -> S [i a]p", "--out", out_file)
    assert code == 0 and "countermodel found" in out
    data = json.loads(out_file.read_text())
    moment, hist = data["point"]
    code, out, _ = run(capsys, "eval", "--model", out_file,
                       "--formula", "~([i a]p -> S [i a]p)", "--point", f"{moment}:{hist}")
    assert code == 0 and out.strip() == "true"
    assert run(capsys, "validate", "--model", out_file)[0] == 0


def test_search_not_found(capsys):
    code, out, _ = run(capsys, "search", "--formula", "S p -> p", "--format", "json")
    data = json.loads(out)
    assert code == 1 and not data["found"]
    assert data["bounds"]["max_moments"] == 3 and data["bounds"]["props"] == "definable"


def test_search_bound_errors(capsys):
    assert run(capsys, "search", "--formula", "p", "--max-moments", "9")[0] == 2
    assert run(capsys, "search", "--formula", "[c b]p", "--agents", "a")[0] == 2


def test_fuzz(capsys):
    code, out, _ = run(capsys, "fuzz", "--count", "10", "--seed", "3")
    assert code == 0 and "all axiom instances valid" in out
    code, out, _ = run(capsys, "fuzz", "--count", "40", "--inject-fault", "drop-clause-ii",
                       "--format", "json")
    data = json.loads(out)
    assert code == 1 and data["first_counterexample"]["kind"]
    code, _, err = run(capsys, "fuzz", "--count", "0")
    assert code == 0 and "warning" in err
    assert run(capsys, "fuzz", "--count", "-1")[0] == 2


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "--version")[0] == 0


def test_module_entry_point(models_dir):
    res = subprocess.run([sys.executable, "-m", "stitlab", "validate", "--model",
                          str(models_dir / "sigma.json")], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("OK")
