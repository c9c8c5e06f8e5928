import json
import math

import numpy as np
import pytest

from postsel.cli import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_PARSE,
    ExperimentConfig,
    format_table,
    emit_table,
    main,
    read_table,
    run,
)
from postsel.errors import InputError
from postsel.formats import serialize_circuit, serialize_state, serialize_truth_table
from postsel.gadget import OUTCOME_COLUMNS, GadgetParams, sweep
from postsel.instances import biased_circuit, cheating_circuit, deterministic_acceptor
from postsel.statevec import RegisterLayout, make_circuit


@pytest.fixture
def files(tmp_path):
    acc, psi = deterministic_acceptor(RegisterLayout(1, 1, 1), np.random.default_rng(0))
    half, half_psi = biased_circuit(RegisterLayout(1, 1, 1), 0.5, np.random.default_rng(1))
    paths = {
        "acc": tmp_path / "acc.circ",
        "acc_state": tmp_path / "acc.state",
        "half": tmp_path / "half.circ",
        "half_state": tmp_path / "half.state",
        "cheat": tmp_path / "cheat.circ",
        "bad": tmp_path / "bad.circ",
        "table": tmp_path / "t.tbl",
        "tie": tmp_path / "tie.tbl",
    }
    paths["acc"].write_text(serialize_circuit(acc))
    paths["acc_state"].write_text(serialize_state(psi))
    paths["half"].write_text(serialize_circuit(half))
    paths["half_state"].write_text(serialize_state(half_psi))
    paths["cheat"].write_text(serialize_circuit(cheating_circuit()))
    paths["bad"].write_text("registers witness1=1 witness2=0 ancilla=0\nH 0\nQQ 0\n")
    paths["table"].write_text(serialize_truth_table(2, (1, 1, 1, 0)))
    paths["tie"].write_text(serialize_truth_table(1, (1, 0)))
    return {k: str(v) for k, v in paths.items()}


def _report(path):
    with open(path) as fh:
        return json.load(fh)


def test_gadget_on_deterministic_acceptor(files, tmp_path):
    out = tmp_path / "r.json"
    rc = main(["gadget", "--circuit", files["acc"], "--witness", files["acc_state"], "--r", "1", "--out", str(out)])
    assert rc == EXIT_OK
    rep = _report(out)
    assert rep["schema_version"] == "1" and rep["seed"] == 0
    assert rep["command"]["command"] == "gadget"
    assert abs(rep["results"]["p_accept"] - 1.0) < 1e-9
    assert rep["results"]["rotation"] == 2.0**-10


def test_malformed_circuit_exit_2(files, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["decompose", "--circuit", files["bad"], "--basis", "0", "--out", str(out)]) == EXIT_PARSE
    assert ":3:" in capsys.readouterr().err
    assert not out.exists()


def test_invalid_config_exit_1(files, tmp_path):
    out = tmp_path / "r.json"
    assert main(["gadget", "--circuit", str(tmp_path / "nope.circ"), "--basis", "0", "--out", str(out)]) == EXIT_CONFIG
    assert main(["decide", "--circuit", files["acc"], "--c", "0.5", "--s", "0.6", "--out", str(out)]) == EXIT_CONFIG
    assert main(["pp", "--table", files["tie"], "--out", str(out)]) == EXIT_CONFIG
    assert main(["gadget", "--circuit", files["acc"], "--basis", "99"]) == EXIT_CONFIG
    assert not out.exists()
    with pytest.raises(SystemExit):
        main(["gadget", "--circuit", files["acc"]])  # argparse: witness required


def test_numeric_failure_exit_3(files, tmp_path, capsys):
    out = tmp_path / "r.json"
    circ = tmp_path / "one.circ"
    circ.write_text(serialize_circuit(make_circuit(1, ops=[("X", 0)])))
    rc = main(["gadget", "--circuit", str(circ), "--basis", "0", "--rotation", "1e-9", "--out", str(out)])
    assert rc == EXIT_NUMERIC
    assert "gadget" in capsys.readouterr().err
    assert not out.exists()


def test_run_is_deterministic(files):
    cfg = ExperimentConfig("optimize", circuit_path=files["cheat"], params={"method": "random", "samples": 500}, seed=5)
    r1, r2 = run(cfg), run(cfg)
    r1.pop("timing"), r2.pop("timing")
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)


def test_optimize_and_decide(files, capsys):
    assert main(["optimize", "--circuit", files["cheat"]]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert abs(rep["results"]["value"] - 0.5) < 1e-6
    assert abs(rep["results"]["entangled_optimum"] - 0.9) < 1e-12
    assert main(["decide", "--circuit", files["cheat"], "--c", "1", "--s", "0.75"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["results"]["decision"] == "indeterminate"


def test_pp_and_mn(files, capsys):
    assert main(["pp", "--table", files["table"]]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["results"]["decision"] == "majority-accept"
    assert main(["mn", "--circuit", files["acc"]]) == EXIT_OK
    res = json.loads(capsys.readouterr().out)["results"]
    assert abs(res["purity"] - 1) < 1e-9 and abs(res["eigenvalue"] - 1) < 1e-9


def test_decompose_with_full_and_register_witness(files, capsys):
    assert main(["decompose", "--circuit", files["half"], "--witness", files["half_state"]]) == EXIT_OK
    res = json.loads(capsys.readouterr().out)["results"]
    assert abs(res["p_x"] - 0.5) < 1e-12 and res["residual_f1"] < 1e-9


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_sweep_writes_table(files, tmp_path, fmt):
    out = tmp_path / f"s.{fmt}"
    rc = main(["sweep", "--circuit", files["half"], "--witness", files["half_state"],
               "--rotations", "0.01,0.001,0.0001", "--out", str(out), "--format", fmt])
    assert rc == EXIT_OK
    rows = read_table(out, fmt)
    assert [r.rotation for r in rows] == [0.01, 0.001, 0.0001]
    if fmt == "csv":
        assert out.read_text().splitlines()[0] == ",".join(OUTCOME_COLUMNS)


def test_emit_table_round_trip(tmp_path):
    c, psi = biased_circuit(RegisterLayout(1, 1, 1), 0.3, np.random.default_rng(2))
    outs = sweep(c, psi, [GadgetParams(rotation=t) for t in (0.1, math.pi / 100)])
    emit_table(outs, "csv", tmp_path / "a.csv")
    emit_table(outs, "json", tmp_path / "a.json")
    assert read_table(tmp_path / "a.csv", "csv") == read_table(tmp_path / "a.json", "json") == outs
    one = format_table(outs[:1], "csv").splitlines()
    assert len(one) == 2
    with pytest.raises(InputError):
        format_table([], "csv")


def test_unwritable_path_exit_1(files, tmp_path):
    out = tmp_path / "missing-dir" / "s.csv"
    rc = main(["sweep", "--circuit", files["half"], "--witness", files["half_state"],
               "--rotations", "0.1", "--out", str(out)])
    assert rc == EXIT_CONFIG
    assert not out.exists()
