"""Property tests over randomly generated circuits, devices and parameters."""

import math

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from qccd.compiler import compile_circuit, validate
from qccd.device import HardwareConfig, make_grid, make_linear
from qccd.ir import MEASURE, ONE_Q, TWO_Q, Circuit, Op, build_dag, emit_json, parse_json
from qccd.models import (
    GateImpl,
    PhysicsParams,
    gate_time,
    heat_merge,
    heat_split,
    two_qubit_fidelity,
)
from qccd.program import COMPUTE_KINDS, Kind
from qccd.sim import Machine, audit, run

P = PhysicsParams()
SHUTTLE = {Kind.SPLIT, Kind.MOVE, Kind.CROSS, Kind.MERGE, Kind.WAIT}
SLOW = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def circuits(draw, min_q=2, max_q=12, max_ops=30):
    n = draw(st.integers(min_q, max_q))
    ops = []
    for _ in range(draw(st.integers(0, max_ops))):
        if draw(st.booleans()):
            a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            ops.append(Op(TWO_Q, (a, b)))
        else:
            label = draw(st.sampled_from(["h", "x", "t"]))
            ops.append(Op(ONE_Q, (draw(st.integers(0, n - 1)),), label))
    measured = draw(st.lists(st.integers(0, n - 1), unique=True, max_size=n))
    ops += [Op(MEASURE, (q,)) for q in measured]
    return Circuit(n, tuple(ops))


@st.composite
def hardware(draw, n_qubits):
    reorder = draw(st.sampled_from(["GS", "IS"]))
    gate = draw(st.sampled_from(list(GateImpl)))
    if draw(st.booleans()):
        traps = draw(st.integers(2, 5))
        cap = max(4, -(-n_qubits // traps) + 2 + draw(st.integers(0, 2)))
        g = make_linear(traps, cap)
    else:
        rows, cols = draw(st.sampled_from([(2, 2), (2, 3), (3, 2)]))
        cap = max(4, -(-n_qubits // (rows * cols)) + 2 + draw(st.integers(0, 2)))
        g = make_grid(rows, cols, cap)
    return HardwareConfig(g, gate, reorder)


@st.composite
def compiled(draw):
    c = draw(circuits())
    hw = draw(hardware(c.num_qubits))
    return c, hw, compile_circuit(c, hw)


# --- ir ---------------------------------------------------------------------

@given(circuits())
def test_json_round_trip(c):
    assert parse_json(emit_json(c)) == c


@given(circuits())
def test_dag_chains_each_qubit_in_source_order(c):
    dag = build_dag(c)
    edges = set(dag.edges)
    assert all(i < j for i, j in edges)
    for q in range(c.num_qubits):
        mine = [i for i, op in enumerate(c.ops) if q in op.qubits]
        for i, j in zip(mine, mine[1:]):
            assert (i, j) in edges


# --- models -----------------------------------------------------------------

energies = st.floats(0, 50, allow_nan=False)


@given(energies, st.integers(2, 40), st.data())
def test_split_conserves_plus_two_k1(e, n, data):
    nl = data.draw(st.integers(1, n - 1))
    left, right = heat_split(e, n, nl, P)
    assert left + right == pytest.approx(e + 2 * P.k1, abs=1e-12)


@given(energies, energies)
def test_merge_adds_k1(a, b):
    assert heat_merge(a, b, P) == pytest.approx(a + b + P.k1, abs=1e-12)


@given(st.integers(2, 40), st.data())
def test_gate_time_shapes(n, data):
    d = data.draw(st.integers(1, n - 1))
    assert gate_time("FM", d, n) == gate_time("FM", 1, n)
    assert gate_time("FM", 1, n + 1) >= gate_time("FM", 1, n)
    if d + 1 <= n - 1:
        for impl in ("AM1", "AM2", "PM"):
            assert gate_time(impl, d + 1, n) > gate_time(impl, d, n)


@given(st.floats(0, 1e4), st.floats(0, 20), st.integers(3, 60))
def test_fidelity_monotone(tau, nbar, n):
    f = two_qubit_fidelity(tau, nbar, n, P)
    assert two_qubit_fidelity(tau + 1, nbar, n, P).fidelity <= f.fidelity
    assert two_qubit_fidelity(tau, nbar + 0.1, n, P).fidelity <= f.fidelity
    assert two_qubit_fidelity(tau, nbar, n + 1, P).fidelity <= f.fidelity
    assert 0.0 <= f.fidelity <= 1.0
    if f.fidelity > 0:
        assert 1 - f.fidelity == pytest.approx(f.background + f.motional, abs=1e-12)


# --- compiler ---------------------------------------------------------------

@SLOW
@given(compiled())
def test_compiler_output_validates(case):
    c, hw, prog = case
    report = validate(prog, hw, c)
    assert report, report.message


@SLOW
@given(compiled())
def test_each_two_qubit_op_is_one_ms_gate(case):
    c, _, prog = case
    ms = [i.tag for i in prog.instructions if i.kind is Kind.GATE_MS]
    assert sorted(ms) == [i for i, op in enumerate(c.ops) if op.kind == TWO_Q]


@SLOW
@given(compiled())
def test_per_qubit_order_preserved(case):
    c, _, prog = case
    for q in range(c.num_qubits):
        tags = [i.tag for i in prog.instructions
                if isinstance(i.tag, int) and q in i.ions and i.kind in COMPUTE_KINDS]
        assert tags == [i for i, op in enumerate(c.ops) if q in op.qubits]


@SLOW
@given(circuits(max_q=6), st.sampled_from(["GS", "IS"]))
def test_single_trap_fit_never_shuttles(c, reorder):
    hw = HardwareConfig(make_linear(3, c.num_qubits + 2), reorder=reorder)
    prog = compile_circuit(c, hw)
    assert not any(i.kind in SHUTTLE or i.kind is Kind.SWAP_IS or i.kind is Kind.SWAP_GS
                   for i in prog.instructions)


@SLOW
@given(compiled())
def test_compile_is_deterministic(case):
    c, hw, prog = case
    assert compile_circuit(c, hw).to_json() == prog.to_json()


# --- sim --------------------------------------------------------------------

@SLOW
@given(compiled())
def test_simulation_invariants(case):
    _, hw, prog = case
    m = run(prog, hw)
    metrics = m.metrics()
    assert audit(m.events, hw) is None
    assert 0.0 <= metrics.fidelity <= 1.0
    assert math.exp(metrics.log_fidelity) == pytest.approx(metrics.fidelity, abs=1e-9)
    # critical path has no gaps
    assert metrics.compute_us + metrics.communicate_us == pytest.approx(metrics.makespan_us, abs=1e-6)
    busy: dict = {}
    for ev in m.events:
        if ev.ins.kind in (Kind.GATE_1Q, Kind.GATE_MS, Kind.MEASURE, Kind.SWAP_GS):
            busy[ev.trap] = busy.get(ev.trap, 0.0) + ev.duration
    assert all(t <= metrics.makespan_us + 1e-6 for t in busy.values())
    factors = [ev.fidelity for ev in m.events]
    assert all(0.0 <= f <= 1.0 for f in factors)


@given(circuits(max_q=6))
def test_sequential_single_trap_makespan_is_sum(c):
    hw = HardwareConfig(make_linear(1, c.num_qubits + 2))
    m = run(compile_circuit(c, hw), hw)
    assert m.makespan == pytest.approx(sum(e.duration for e in m.events), abs=1e-6)


@SLOW
@given(compiled())
def test_chain_energy_only_drops_at_splits(case):
    _, hw, prog = case
    m = Machine(hw, prog.initial_layout)
    for ins in prog.instructions:
        before = dict(m.energy)
        m.apply(ins)
        for t, e in m.energy.items():
            if e < before[t] - 1e-12:
                assert ins.kind is Kind.SPLIT and ins.trap == t
