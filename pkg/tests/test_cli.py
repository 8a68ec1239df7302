import csv
import json
import pathlib

import pytest

from qccd.cli import main
from qccd.sweep import COLUMNS, SweepError, SweepSpec, parse_topology, run_sweep

ROOT = pathlib.Path(__file__).resolve().parent.parent
L6 = str(ROOT / "fixtures" / "l6.json")
G23 = str(ROOT / "fixtures" / "g2x3.json")


@pytest.fixture
def qft8(tmp_path):
    path = tmp_path / "qft8.qasm"
    assert main(["gen", "QFT", "8", "-o", str(path)]) == 0
    return str(path)


def test_sim_writes_metrics_and_trace(tmp_path, qft8):
    out, trace = tmp_path / "m.json", tmp_path / "t.csv"
    assert main(["sim", "--circuit", qft8, "--device", L6, "-o", str(out), "--trace", str(trace)]) == 0
    d = json.loads(out.read_text())
    assert {"makespan_us", "fidelity", "max_motional_energy", "op_counts"} <= set(d)
    assert trace.read_text().startswith("id,kind,tag,start_us")


def test_compile_then_sim_program(tmp_path, qft8):
    prog = tmp_path / "p.json"
    assert main(["compile", "--circuit", qft8, "--device", G23, "--capacity", "6", "-o", str(prog)]) == 0
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["sim", "--program", str(prog), "--device", G23, "--capacity", "6", "-o", str(a)]) == 0
    assert main(["sim", "--circuit", qft8, "--device", G23, "--capacity", "6", "-o", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_outputs_byte_identical(tmp_path, qft8):
    for name in ("x", "y"):
        assert main(["sim", "--circuit", qft8, "--device", L6, "--gate", "AM2", "--reorder", "IS",
                     "--capacity", "5", "-o", str(tmp_path / f"{name}.json"),
                     "--trace", str(tmp_path / f"{name}.csv")]) == 0
    assert (tmp_path / "x.json").read_bytes() == (tmp_path / "y.json").read_bytes()
    assert (tmp_path / "x.csv").read_bytes() == (tmp_path / "y.csv").read_bytes()


def test_user_errors_exit_1(tmp_path, qft8, capsys):
    bad = tmp_path / "bad.qasm"
    bad.write_text("OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n")
    assert main(["sim", "--circuit", str(bad), "--device", L6]) == 1
    assert "line 3" in capsys.readouterr().err
    assert main(["sim", "--circuit", qft8]) == 1
    assert main(["sim", "--circuit", str(tmp_path / "missing.qasm"), "--device", L6]) == 1
    assert main(["sim", "--circuit", qft8, "--device", L6, "--capacity", "2"]) == 1
    with pytest.raises(SystemExit) as ei:
        main(["sim", "--gate", "XX"])
    assert ei.value.code == 1


def test_corrupt_program_is_user_error(tmp_path):
    prog = tmp_path / "p.json"
    prog.write_text(json.dumps({"num_qubits": 2, "initial_layout": [
        {"qubit": 0, "trap": 0, "position": 0}, {"qubit": 1, "trap": 1, "position": 0}],
        "instructions": [{"kind": "gate_ms", "ions": [0, 1], "tag": 0, "trap": 0}]}))
    assert main(["sim", "--program", str(prog), "--device", L6]) == 1


def test_topology_shorthand():
    assert parse_topology("L6") == {"type": "linear", "traps": 6}
    assert parse_topology("G2x3") == {"type": "grid", "rows": 2, "cols": 3}
    with pytest.raises(SweepError):
        parse_topology("ring")


def test_sweep_product_size():
    spec = SweepSpec.from_dict({"circuits": [{"family": "QFT", "n": 6}],
                                "axes": {"capacity": [15, 20, 25], "gate": ["FM", "AM2"]}})
    pts = spec.points()
    assert len(pts) == 6
    assert [(p.capacity, p.gate) for p in pts][:3] == [(15, "FM"), (15, "AM2"), (20, "FM")]


def test_sweep_empty_axes_single_row():
    rows = run_sweep(SweepSpec.from_dict({"circuits": [{"family": "QFT", "n": 4}]}), 1)
    assert len(rows) == 1 and rows[0]["error"] == "" and rows[0]["capacity"] == 25


def test_sweep_error_rows_do_not_crash():
    spec = SweepSpec.from_dict({"circuits": [{"family": "QFT", "n": 30}], "device": {"topology": "L2"},
                                "axes": {"capacity": [4, 20]}})
    rows = run_sweep(spec, 1)
    assert "usable capacity" in rows[0]["error"] and rows[1]["error"] == ""


def test_sweep_spec_errors():
    with pytest.raises(SweepError):
        SweepSpec.from_dict({"circuits": []})
    with pytest.raises(SweepError):
        SweepSpec.from_dict({"circuits": ["a.qasm"], "axes": {"colour": [1]}})
    with pytest.raises(SweepError):
        SweepSpec.from_dict({"circuits": ["a.qasm"], "axes": {"capacity": []}})


def test_sweep_concurrency_independent(tmp_path, monkeypatch):
    spec = {"circuits": [{"family": "RandomNN", "n": 16, "depth": 4, "seed": 1}, {"family": "BV", "n": 10}],
            "device": {"topology": "L3"},
            "axes": {"capacity": [6, 8], "topology": ["L3", "G2x2"], "reorder": ["GS", "IS"],
                     "physics": [{}, {"gamma": 1.0}]}}
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(spec))
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("QCCD_THREADS", threads)
        out = tmp_path / f"out{threads}.csv"
        assert main(["sweep", "--sweep", str(path), "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.DictReader(outs[0].decode().splitlines()))
    assert tuple(rows[0]) == COLUMNS and len(rows) == 32


def test_bad_thread_env(tmp_path, monkeypatch):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"circuits": [{"family": "QFT", "n": 4}]}))
    monkeypatch.setenv("QCCD_THREADS", "zero")
    assert main(["sweep", "--sweep", str(path)]) == 1
