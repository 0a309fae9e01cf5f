import json
import subprocess
import sys

import pytest

from denomred.cli import main


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_psi_wheel3(capsys):
    code, out, _ = run(capsys, "psi", "--catalog", "wheel", "--n", "3")
    assert code == 0
    assert len(out.strip().split(" + ")) == 16


def test_psi_structured(capsys):
    code, out, _ = run(capsys, "psi", "--two-digit", "12,12", "--format", "structured")
    doc = json.loads(out)
    assert code == 0 and doc["psi"] == "a1 + a2" and doc["terms"] == 2


def test_graph_file(capsys, tmp_path):
    path = tmp_path / "tri.txt"
    path.write_text("1 2\n2 3\n3 1\n")
    code, out, _ = run(capsys, "psi", "--graph", str(path))
    assert code == 0 and out.strip() == "a1 + a2 + a3"


def test_dodgson(capsys):
    code, out, _ = run(capsys, "dodgson", "1", "1", "--catalog", "cycle", "--n", "3")
    assert code == 0 and out.strip() == "1"
    code, out, _ = run(capsys, "dodgson", "-", "-", "1", "--catalog", "cycle", "--n", "3")
    assert code == 0 and out.strip() == "a2 + a3"


def test_reduce_wheel3(capsys):
    code, out, _ = run(capsys, "reduce", "--catalog", "wheel", "--n", "3")
    assert code == 0
    assert "kinds WD,G,WD,G" in out
    assert "terminal bidegree (1,1)" in out


def test_reduce_structured_with_order(capsys):
    code, out, _ = run(capsys, "reduce", "--catalog", "wheel", "--n", "3", "--order", "6,5,4,3,2,1", "--stop", "3",
                       "--format", "structured")
    doc = json.loads(out)
    assert code == 0 and doc["command"] == "reduce"
    assert doc["order"][:3] == [6, 5, 4] and len(doc["steps"]) == 3


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--catalog", "wheel", "--n", "4", "--format", "structured")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "denominator-reducible"


def test_classify_budget_exhaustion(capsys):
    code, _, err = run(capsys, "classify", "--catalog", "g8", "--budget", "1")
    assert code == 1 and "budget" in err


def test_count(capsys):
    code, out, _ = run(capsys, "count", "--catalog", "wheel", "--n", "3", "--primes", "2,3", "--format", "structured")
    doc = json.loads(out)
    assert code == 0
    assert [r["count"] for r in doc["counts"]] == [35, 130]
    assert all(r["congruence"] for r in doc["counts"])


def test_count_budget(capsys):
    code, _, err = run(capsys, "count", "--catalog", "wheel", "--n", "4", "--primes", "5", "--budget", "10")
    assert code == 1 and "BudgetExceeded" in err


@pytest.mark.parametrize(
    "argv",
    [
        ("psi",),
        ("psi", "--catalog", "wheel", "--two-digit", "12"),
        ("psi", "--n", "3", "--two-digit", "12,12"),
        ("psi", "--catalog", "nope"),
        ("psi", "--catalog", "wheel", "--n", "2"),
        ("psi", "--two-digit", "11"),
        ("psi", "--two-digit", "12,34"),
        ("psi", "--graph", "/no/such/file"),
        ("dodgson", "x", "1", "--catalog", "wheel", "--n", "3"),
        ("dodgson", "9", "9", "--catalog", "wheel", "--n", "3"),
        ("count", "--catalog", "wheel", "--n", "3", "--primes", "4"),
        ("reduce", "--catalog", "wheel", "--n", "3", "--stop", "0"),
    ],
)
def test_bad_input_exits_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_budget_environment(capsys, monkeypatch):
    monkeypatch.setenv("DENOMRED_BUDGET", "zero")
    code, _, _ = run(capsys, "classify", "--catalog", "wheel", "--n", "3")
    assert code == 2


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--level", "quick")
    assert code == 0 and out.strip().endswith("checks passed")
    code, out, _ = run(capsys, "verify", "--level", "quick", "--format", "structured")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] is True and all(c["ok"] for c in doc["checks"])


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "denomred", "psi", "--two-digit", "12,23,31"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "a1 + a2 + a3"
