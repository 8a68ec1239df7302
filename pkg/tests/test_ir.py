import pytest

from qccd.ir import (
    MEASURE,
    ONE_Q,
    TWO_Q,
    Circuit,
    CircuitError,
    Op,
    QasmError,
    build_dag,
    emit_json,
    emit_qasm,
    load_circuit,
    parse_json,
    parse_qasm,
)

HDR = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def test_parse_basic():
    c = parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];")
    assert c.num_qubits == 2
    assert [(o.kind, o.qubits) for o in c.ops] == [(ONE_Q, (0,)), (TWO_Q, (0, 1))]
    assert c.ops[0].label == "h"


def test_parse_measure():
    c = parse_qasm("qreg q[1]; creg c[1]; measure q[0] -> c[0];")
    assert [(o.kind, o.qubits) for o in c.ops] == [(MEASURE, (0,))]


def test_swap_expands_to_three():
    c = parse_qasm("qreg q[2]; swap q[0],q[1];")
    assert [(o.kind, o.qubits) for o in c.ops] == [(TWO_Q, (0, 1))] * 3


def test_params_comments_barrier_and_broadcast():
    text = HDR + "qreg q[3];\n// comment\nrz(pi/4) q[1];\nbarrier q;\nh q;\nu3(0.1, 0.2, 0.3) q[2];\n"
    c = parse_qasm(text)
    assert c.ops[0].params == ("pi/4",)
    assert [o.qubits for o in c.ops[1:4]] == [(0,), (1,), (2,)]
    assert c.ops[4].label == "u3" and len(c.ops[4].params) == 3


@pytest.mark.parametrize(
    "body,line,fragment",
    [
        ("qreg q[2];\nfoo q[0];", 2, "unknown gate"),
        ("qreg q[2];\nh q[5];", 2, "out of range"),
        ("qreg q[2];\nqreg r[2];", 2, "registers"),
        ("qreg q[2];\ncreg c[2];\nif (c==1) x q[0];", 3, ""),
        ("qreg q[2];\nmeasure q[0] -> c[0];\nh q[0];", 3, "measure"),
        ("qreg q[2];\nrx q[0];", 2, "param"),
        ("qreg q[2];\ncx q[0],q[0];", 2, ""),
    ],
)
def test_parse_errors_carry_position(body, line, fragment):
    with pytest.raises(QasmError) as ei:
        parse_qasm(body)
    assert ei.value.line == line
    assert str(ei.value).startswith(f"line {line}, col ")
    assert fragment in str(ei.value)


def test_unknown_gate_column():
    with pytest.raises(QasmError, match=r"line 2, col 3: unknown gate 'foo'"):
        parse_qasm("qreg q[1];\n  foo q[0];")


def test_qasm_round_trip():
    c = parse_qasm(HDR + "qreg q[3];\nh q[0];\nrx(0.5) q[1];\ncx q[0],q[2];\nmeasure q[2] -> c[2];\n")
    assert parse_qasm(emit_qasm(c)) == c


def test_json_examples():
    c = parse_json('{"num_qubits":2,"ops":[{"kind":"2q","qubits":[0,1]}]}')
    assert c == Circuit(2, (Op(TWO_Q, (0, 1)),))
    assert parse_json('{"num_qubits":1,"ops":[]}').ops == ()


@pytest.mark.parametrize(
    "text,path",
    [
        ('{"num_qubits":2,"ops":[{"kind":"2q","qubits":[0,0]}]}', "$.ops[0]"),
        ('{"num_qubits":2,"ops":[{"kind":"3q","qubits":[0,1]}]}', "$.ops[0].kind"),
        ('{"num_qubits":2,"ops":[{"kind":"1q","qubits":[7]}]}', "$.ops[0].qubits"),
        ('{"num_qubits":-1,"ops":[]}', "$.num_qubits"),
        ('{"num_qubits":2}', "$.ops"),
        ("[1,2", "$"),
    ],
)
def test_json_errors_name_path(text, path):
    with pytest.raises(CircuitError) as ei:
        parse_json(text)
    assert str(ei.value).startswith(path)


def test_json_round_trip():
    c = Circuit(3, (Op(ONE_Q, (0,), "rx", ("0.5",)), Op(TWO_Q, (2, 0)), Op(MEASURE, (1,))))
    assert parse_json(emit_json(c)) == c


def test_circuit_invariants():
    with pytest.raises(CircuitError):
        Circuit(2, (Op(TWO_Q, (0, 2)),))
    with pytest.raises(CircuitError):
        Circuit(2, (Op(MEASURE, (0,)), Op(ONE_Q, (0,), "h")))
    with pytest.raises(CircuitError):
        Op(TWO_Q, (1,))


def test_dag_examples():
    assert build_dag(Circuit(4, (Op(TWO_Q, (0, 1)), Op(TWO_Q, (2, 3))))).edges == []
    assert build_dag(Circuit(3, (Op(TWO_Q, (0, 1)), Op(TWO_Q, (1, 2))))).edges == [(0, 1)]
    chain = Circuit(5, tuple(Op(TWO_Q, (i, i + 1)) for i in range(4)))
    assert build_dag(chain).edges == [(0, 1), (1, 2), (2, 3)]


def test_load_circuit_dispatch(tmp_path):
    c = Circuit(2, (Op(TWO_Q, (0, 1)),))
    (tmp_path / "c.json").write_text(emit_json(c))
    (tmp_path / "c.qasm").write_text(emit_qasm(c))
    assert load_circuit(str(tmp_path / "c.json")) == c
    assert load_circuit(str(tmp_path / "c.qasm")) == c
