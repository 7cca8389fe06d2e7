"""CLI behaviour and golden outputs.

Set ``ASYM_REGEN_GOLDEN=1`` to rewrite the golden files after an intended change.
"""

import io
import json
import os
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pytest

from asym.cli import main
from asym.compat import DeltaSystem
from asym.extension import EstimateTable
from asym.generators import AgeCount
from asym.structures import FiniteStructure

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

CASES = {
    "validate_rg": ["validate", "rg.json"],
    "validate_broken": ["validate", "broken.json"],
    "sample_ex66": ["sample", "ex66.json", "--n", "3", "--seed", "7", "--count", "2"],
    "axioms_rg": ["axioms", "rg.json", "--n", "24", "--k", "2", "--trials", "3", "--seed", "5"],
    "estimate_rg_sentence": ["estimate", "rg.json", "--sentence", "exists x. exists y. (~x=y & E(x,y))",
                             "--n-list", "2,3,4", "--trials", "40", "--seed", "9"],
    "estimate_rg_axiom": ["estimate", "rg.json", "--axiom", "ext:2", "--n-list", "8,16", "--trials", "20",
                          "--seed", "9"],
    "efgame_ex66": ["efgame", "a_ex66.json", "b_ex66.json", "ex66.json", "--target", "4", "--seed", "3"],
    "efgame_ex66_unary": ["efgame", "a_ex66_plain.json", "b_ex66.json", "ex66.json", "--target", "4", "--seed", "3"],
    "meq_parity": ["meq", "parity.json", "--rel", "B=E(x,y)", "--rel", "I=x=y"],
    "meq_fallback": ["meq", "parity.json", "--rel", "D=E(x,y) & ~x=y"],
    "divides_blocks": ["divides", "blocks.json", "--phi", "x=x", "--psi", "Q(x,y)"],
    "divides_plus_one": ["divides", "blocks_plus_one.json", "--phi", "x=x", "--psi", "Q(x,y)", "--format", "json"],
    "count_ex66": ["count", "ex66.json", "--n-list", "2,3,10"],
    "classify_rg": ["classify", "rg.json"],
    "classify_l3t1": ["classify", "singleton_l3t1.json"],
    "classify_l2t1": ["classify", "singleton_l2t1.json"],
}


def run(argv, monkeypatch):
    monkeypatch.chdir(DATA)
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        try:
            code = main(argv)
        except SystemExit as exc:
            code = exc.code
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, monkeypatch):
    code, out, _ = run(CASES[name], monkeypatch)
    code2, out2, _ = run(CASES[name], monkeypatch)
    assert (code, out) == (code2, out2)
    text = f"exit {code}\n{out}"
    path = GOLDEN / f"{name}.txt"
    if os.environ.get("ASYM_REGEN_GOLDEN"):
        path.write_text(text)
    assert path.read_text() == text


def test_classify_rg(monkeypatch):
    code, out, _ = run(["classify", "rg.json"], monkeypatch)
    assert code == 0 and json.loads(out)["omega_stable"] is False


def test_validate_broken(monkeypatch):
    code, out, _ = run(["validate", "broken.json"], monkeypatch)
    data = json.loads(out)
    assert code == 1 and not data["valid"] and {v["kind"] for v in data["violations"]} == {"q"}


def test_count_ex66(monkeypatch):
    code, out, _ = run(["count", "ex66.json", "--n-list", "2"], monkeypatch)
    assert code == 0 and json.loads(out)["total"] == "8"
    assert AgeCount.from_json(out).total == 8


def test_outputs_reparse(monkeypatch, tmp_path):
    code, out, _ = run(["sample", "ex66.json", "--n", "4", "--seed", "1"], monkeypatch)
    assert FiniteStructure.from_json(out).size == 8
    code, out, _ = run(["estimate", "rg.json", "--axiom", "sigma:2", "--n-list", "4", "--trials", "3",
                        "--seed", "1"], monkeypatch)
    assert len(EstimateTable.from_csv(out)) == 1
    code, out, _ = run(["meq", "parity.json", "--rel", "B=E(x,y)"], monkeypatch)
    assert FiniteStructure.from_json(out).size == 6
    target = tmp_path / "c.json"
    code, _, _ = run(["classify", "ex66.json", "--out", str(target)], monkeypatch)
    assert code == 0 and "omega_stable" in json.loads(target.read_text())
    assert DeltaSystem.from_json((DATA / "ex66.json").read_text()).l == 2


def test_config_embedded(monkeypatch):
    _, out, _ = run(["sample", "rg.json", "--n", "2", "--seed", "123"], monkeypatch)
    assert json.loads(out)["config"]["seed"] == 123
    _, out, _ = run(["estimate", "rg.json", "--axiom", "sigma:2", "--n-list", "4", "--trials", "2", "--seed", "4"],
                    monkeypatch)
    assert out.startswith("# config: ") and '"seed": 4' in out.splitlines()[0]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["sample", "rg.json", "--n", "3"],  # seed is mandatory
        ["estimate", "rg.json", "--n-list", "4", "--trials", "2", "--seed", "1"],
        ["count", "ex66.json", "--n-list", "x"],
        ["bogus"],
    ],
)
def test_usage_errors(argv, monkeypatch):
    code, _, err = run(argv, monkeypatch)
    assert code == 2 and "usage:" in err


def test_data_errors_carry_context(monkeypatch, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vocab": [["Q", 2]],\n "l": }')
    code, _, err = run(["classify", str(bad)], monkeypatch)
    assert code == 1 and f"{bad}:2:" in err
    code, _, err = run(["estimate", "rg.json", "--sentence", "exists x. E(x,", "--n-list", "4", "--trials", "2",
                        "--seed", "1"], monkeypatch)
    assert code == 1 and "position" in err
    code, _, err = run(["count", "singleton_l3t1.json", "--n-list", "2"], monkeypatch)
    assert code == 1 and "singleton_l3t1.json" in err


def test_jobs_env_does_not_change_output(monkeypatch):
    argv = ["estimate", "rg.json", "--axiom", "ext:2", "--n-list", "8", "--trials", "8", "--seed", "2"]
    _, a, _ = run(argv, monkeypatch)
    monkeypatch.setenv("ASYM_JOBS", "2")
    _, b, _ = run(argv, monkeypatch)
    _, c, _ = run(argv + ["--jobs", "2"], monkeypatch)
    assert a == b == c


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "asym", "classify", str(DATA / "rg.json")], capture_output=True,
                         text=True)
    assert res.returncode == 0 and '"omega_stable": false' in res.stdout
