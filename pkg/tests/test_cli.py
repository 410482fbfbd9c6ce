import csv
import json
import math

import pytest

from epe import cli
from epe.errors import ScenarioError
from epe.scenario import (builtin, builtin_scenarios, encode_matrix, load_scenario,
                          parse_scenario)


def _bundle(out):
    data = json.loads((out / "bundle.json").read_text())
    data["provenance"].pop("timestamp")
    return data


def test_builtins_listed():
    assert set(builtin_scenarios()) >= {"two-slit", "two-slit-pointer", "chsh", "dowker-spin",
                                        "classical-table", "fixq2"}


@pytest.mark.parametrize("name", ["fixq2", "dowker-spin", "chsh", "classical-table"])
def test_demo_writes_all_outputs(tmp_path, name, capsys):
    out = tmp_path / name
    assert cli.main(["demo", name, "--out", str(out)]) == 0
    for f in ("bundle.json", "weights.csv", "probabilities.csv", "decoherence.csv", "report.txt"):
        assert (out / f).exists()
    b = _bundle(out)
    assert b["schema"] == 1 and b["scenario"] == name
    assert set(b["provenance"]) == {"artifact_version", "scenario_sha256", "seed", "tolerances"}
    assert name in capsys.readouterr().out


def test_fixq2_weight_table_entry(tmp_path):
    out = tmp_path / "f"
    assert cli.main(["demo", "fixq2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "weights.csv")))
    assert any(abs(float(r["weight"]) + 0.103553390593) < 1e-11 for r in rows)
    probs = list(csv.DictReader(open(out / "probabilities.csv")))
    assert list(probs[0]) == ["chain", "kind", "label", "p_epe", "p_dh", "sum", "sum_rule_dev"]
    joint = [r for r in probs if r["chain"] == "two-time" and r["kind"] == "joint"]
    assert float(next(r for r in joint if r["label"] == "1-0")["p_epe"]) == pytest.approx(
        -0.103553390593, abs=1e-11)
    assert all(abs(float(r["sum"]) - 1) < 1e-12 for r in joint)
    dec = list(csv.DictReader(open(out / "decoherence.csv")))
    assert list(dec[0]) == ["chain", "label_a", "label_b", "re", "im"]
    b = _bundle(out)
    assert b["results"]["decoherence"]["two-time"]["certified"] is False
    assert b["results"]["decoherence"]["one-time"]["certified"] is True


def test_two_slit_unrecorded_report(tmp_path):
    bundle = cli.run_scenario(parse_scenario(builtin("two-slit")), tmp_path)
    dec = bundle["results"]["decoherence"]["slit-bin"]
    assert not dec["certified"]
    assert "not certified" in (tmp_path / "report.txt").read_text()
    marg = bundle["results"]["probabilities"]["slit-bin"]["marginals"][1]
    assert marg["sum_rule_dev"] < 1e-10
    assert marg["max_interference"] > 1e-3


def test_determinism_and_seed(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["demo", "fixq2", "--out", str(a)])
    cli.main(["demo", "fixq2", "--out", str(b)])
    ta = (a / "bundle.json").read_text().splitlines()
    tb = (b / "bundle.json").read_text().splitlines()
    assert [x for x in ta if "timestamp" not in x] == [x for x in tb if "timestamp" not in x]
    c = tmp_path / "c"
    cli.main(["demo", "fixq2", "--out", str(c), "--seed", "123", "--eps", "1e-4"])
    pc = _bundle(c)["provenance"]
    assert pc["seed"] == 123 and pc["tolerances"]["eps"] == 1e-4


def test_run_file_roundtrip(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(builtin("dowker-spin")))
    sc = load_scenario(path)
    assert sc.real_path == (0, 1, 0)
    assert cli.main(["run", str(path), "--out", str(tmp_path / "o")]) == 0
    assert _bundle(tmp_path / "o")["results"]["adversarial"]["zero_witness"] is True


def test_non_hermitian_exit_code(tmp_path, capsys):
    data = builtin("fixq2")
    data["system"]["hamiltonian"] = encode_matrix([[0, 1], [0.5, 0]])
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert cli.main(["run", str(path), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "/system/hamiltonian" in err and "5.000e-01" in err


@pytest.mark.parametrize("mutate,where", [
    (lambda d: d.pop("system"), ""),
    (lambda d: d.update(schema=2), "/schema"),
    (lambda d: d["system"].update(dim=0), "/system/dim"),
    (lambda d: d["system"]["initial_state"].__setitem__(0, 1.0), "/system/initial_state/0"),
    (lambda d: d["chains"][0]["steps"][0].update(time=9), "/chains/0/steps/0/time"),
    (lambda d: d["chains"][0]["steps"][1].update(cells=[[0]]), "/chains/0/steps/1/cells"),
    (lambda d: d["analyses"].append("plot"), "/analyses/7"),
    (lambda d: d.update(tolerances={"foo": 1}), "/tolerances/foo"),
    (lambda d: d.update(real_path=[0, 1]), "/real_path"),
])
def test_schema_errors_carry_pointer(mutate, where):
    data = builtin("fixq2")
    mutate(data)
    with pytest.raises(ScenarioError) as info:
        parse_scenario(data)
    assert info.value.location == where


def test_invalid_json_and_missing_file(tmp_path, capsys):
    bad = tmp_path / "x.json"
    bad.write_text("{not json")
    assert cli.main(["run", str(bad)]) == 1
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 1


def test_cap_exceeded_is_input_error(tmp_path, capsys):
    assert cli.main(["demo", "two-slit", "--out", str(tmp_path), "--max-paths", "1000"]) == 1
    assert "class-operator route" in capsys.readouterr().err


def test_invariant_violation_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(cli, "NORM_CHECK", -1.0)
    assert cli.main(["demo", "fixq2", "--out", str(tmp_path)]) == 2
    assert "invariant violation" in capsys.readouterr().err


def test_show_and_list(capsys):
    assert cli.main(["list"]) == 0
    assert "two-slit" in capsys.readouterr().out
    assert cli.main(["show", "chsh"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["schema"] == 1


def test_json_rounding():
    out = cli.to_json({"x": 1 / 3, "y": [math.inf, -0.0], "z": 2 + 1j})
    assert out == {"x": 0.333333333333, "y": ["inf", 0.0], "z": [2.0, 1.0]}
