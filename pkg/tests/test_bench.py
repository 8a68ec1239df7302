import pytest

from qccd.bench import BenchSpec, Family, brickwork_pairs, bv, emit_qasm, gen, qaoa_nn, qft, random_nn
from qccd.ir import MEASURE, TWO_Q, parse_qasm


def test_qft_counts():
    assert qft(64).two_qubit_count == 64 * 63 // 2
    pairs = {frozenset(o.qubits) for o in qft(6).ops if o.kind == TWO_Q}
    assert len(pairs) == 15


def test_bv_counts():
    c = bv(64)
    assert c.num_qubits == 65
    assert c.two_qubit_count == 64
    assert bv(4, "1010").two_qubit_count == 2
    assert c.count(MEASURE) == 64


def test_qaoa_nn_pairs():
    c = qaoa_nn(4, 1)
    assert [o.qubits for o in c.ops if o.kind == TWO_Q] == [(0, 1), (1, 2), (2, 3)]
    assert qaoa_nn(20, 2).two_qubit_count == 38


def test_random_nn_brickwork_and_seed():
    c = random_nn(7, 5, seed=11)
    assert c.two_qubit_count == brickwork_pairs(7, 5) == 3 + 3 + 3 + 3 + 3
    assert all(abs(a - b) == 1 for a, b in (o.qubits for o in c.ops if o.kind == TWO_Q))
    assert random_nn(7, 5, seed=11) == c
    assert random_nn(7, 5, seed=12) != c


def test_specs_validate():
    with pytest.raises(ValueError):
        BenchSpec(Family.QFT, 1)
    with pytest.raises(ValueError):
        BenchSpec("RandomNN", 4, depth=3)
    with pytest.raises(ValueError):
        BenchSpec("BV", 3, secret="10")
    with pytest.raises(ValueError):
        BenchSpec("Nope", 3)
    assert gen(BenchSpec("QAOA_NN", 5, layers=3)).two_qubit_count == 12


@pytest.mark.parametrize("spec", [
    BenchSpec("QFT", 5), BenchSpec("BV", 5, secret="10110"), BenchSpec("QAOA_NN", 5, layers=2),
    BenchSpec("RandomNN", 5, depth=4, seed=0),
])
def test_qasm_round_trip(spec):
    c = gen(spec)
    assert parse_qasm(emit_qasm(c)) == c
