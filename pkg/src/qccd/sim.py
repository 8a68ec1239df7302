"""Discrete-event execution of compiled QCCD programs.

Instructions are replayed in list order. Each one starts as soon as every
resource it needs is free: its ions, its trap (gates, splits, merges and
swaps hold the whole trap), and for a split, every segment and junction on
the shuttle leg up to the next merge. A leg acquires its full path before
departing and releases it when the merge finishes, so two shuttles never
share a segment or junction and no wait cycle can form.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .device import LEFT, HardwareConfig
from .models import (
    ShuttleOp,
    gate_time,
    heat_merge,
    heat_move,
    heat_split,
    measure_fidelity,
    one_qubit_fidelity,
    shuttle_op_time,
    two_qubit_fidelity,
)
from .program import COMPUTE_KINDS, CompiledProgram, Instruction, Kind

TRACE_COLUMNS = (
    "id", "kind", "tag", "start_us", "end_us", "location", "chain_n", "nbar",
    "fidelity", "background_err", "motional_err",
)


class SimulationError(RuntimeError):
    def __init__(self, index: int, message: str):
        super().__init__(f"instruction {index}: {message}")
        self.index = index


@dataclass
class Event:
    index: int
    ins: Instruction
    start: float
    end: float
    location: str
    chain_n: int = 0
    nbar: float = 0.0
    fidelity: float = 1.0
    background: float = 0.0
    motional: float = 0.0
    log_fidelity: float = 0.0
    pred: Optional[int] = None
    trap: Optional[int] = None

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass
class RunMetrics:
    makespan_us: float = 0.0
    fidelity: float = 1.0
    log_fidelity: float = 0.0
    max_motional_energy: float = 0.0
    background_error_sum: float = 0.0
    motional_error_sum: float = 0.0
    compute_us: float = 0.0
    communicate_us: float = 0.0
    op_counts: dict[str, int] = field(default_factory=lambda: {k.value: 0 for k in Kind})

    def to_dict(self) -> dict[str, Any]:
        return {
            "makespan_us": self.makespan_us,
            "fidelity": self.fidelity,
            "log_fidelity": self.log_fidelity if math.isfinite(self.log_fidelity) else None,
            "max_motional_energy": self.max_motional_energy,
            "background_error_sum": self.background_error_sum,
            "motional_error_sum": self.motional_error_sum,
            "compute_us": self.compute_us,
            "communicate_us": self.communicate_us,
            "op_counts": dict(self.op_counts),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _log(f: float) -> float:
    return math.log(f) if f > 0 else -math.inf


class Machine:
    """Mutable device state advanced one instruction at a time.

    Tracks chain contents and energies, where every ion is, and when each
    ion, trap, segment and junction next becomes free. Also used by the
    compiler to follow the layout and timing while it emits instructions.
    """

    def __init__(self, hw: HardwareConfig, layout: dict[int, tuple[int, int]]):
        self.hw = hw
        self.g = hw.graph
        self.p = hw.physics
        self.chains: dict[int, list[int]] = {t.id: [] for t in self.g.traps}
        for q, (trap, _) in sorted(layout.items(), key=lambda kv: kv[1]):
            if trap not in self.chains:
                raise ValueError(f"qubit {q} placed on non-trap node {trap}")
            self.chains[trap].append(q)
        for trap, chain in self.chains.items():
            if len(chain) > self.g.nodes[trap].capacity:
                raise ValueError(f"initial layout overfills trap {self.g.nodes[trap].name}")
        for q, (trap, pos) in layout.items():
            if self.chains[trap][pos] != q:
                raise ValueError("initial layout positions must be 0..k-1 per trap")
        self.energy: dict[int, float] = {t: 0.0 for t in self.chains}
        # where each ion is: ("trap", id), ("segment", id) or ("junction", id)
        self.where: dict[int, tuple[str, int]] = {q: ("trap", t) for q, (t, _) in layout.items()}
        self.ion_energy: dict[int, float] = {}
        self.moved: dict[int, bool] = {}
        self.held: dict[int, list[tuple[str, int]]] = {}
        self.owner: dict[tuple[str, int], int] = {}

        # busy-until time and the event that set it, per resource key
        self.free_at: dict[tuple[str, int], float] = {}
        self.last_event: dict[tuple[str, int], int] = {}
        self.events: list[Event] = []
        self.max_energy = 0.0

    # --- queries ------------------------------------------------------------

    def trap_of(self, q: int) -> Optional[int]:
        kind, where = self.where[q]
        return where if kind == "trap" else None

    def position(self, q: int) -> int:
        trap = self.trap_of(q)
        assert trap is not None
        return self.chains[trap].index(q)

    def ready(self, q: int) -> float:
        return self.free_at.get(("ion", q), 0.0)

    def trap_free(self, t: int) -> float:
        return self.free_at.get(("trap", t), 0.0)

    @property
    def makespan(self) -> float:
        return max((e.end for e in self.events), default=0.0)

    # --- helpers ------------------------------------------------------------

    def _start(self, keys: list[tuple[str, int]]) -> tuple[float, Optional[int]]:
        start, pred = 0.0, None
        for k in keys:
            if k in self.last_event and (pred is None or self.free_at[k] > start):
                start, pred = self.free_at[k], self.last_event[k]
        return start, pred

    def _finish(self, ev: Event, keys: list[tuple[str, int]]) -> Event:
        for k in keys:
            if k[0] == "trap":
                ev.trap = k[1]
            self.free_at[k] = ev.end
            self.last_event[k] = ev.index
        self.events.append(ev)
        return ev

    def _note_energy(self, trap: int) -> None:
        if self.energy[trap] > self.max_energy:
            self.max_energy = self.energy[trap]

    def _in_trap(self, idx: int, q: int, trap: Optional[int] = None) -> int:
        t = self.trap_of(q)
        if t is None:
            raise SimulationError(idx, f"ion {q} is not in a trap")
        if trap is not None and t != trap:
            raise SimulationError(idx, f"ion {q} is in trap {t}, not {trap}")
        return t

    def _ms(self, trap: int, a: int, b: int) -> tuple[float, float, float, float, float]:
        chain = self.chains[trap]
        n = len(chain)
        d = abs(chain.index(a) - chain.index(b))
        tau = gate_time(self.hw.gate_impl, d, n)
        gf = two_qubit_fidelity(tau, self.energy[trap], n, self.p)
        return tau, gf.fidelity, gf.background, gf.motional, _log(gf.fidelity)

    # --- execution ----------------------------------------------------------

    def apply(self, ins: Instruction) -> Event:
        idx = len(self.events)
        handler = getattr(self, f"_do_{ins.kind.value}")
        return handler(idx, ins)

    def _do_gate1q(self, idx: int, ins: Instruction) -> Event:
        return self._single(idx, ins, self.p.t_1q, one_qubit_fidelity(self.p))

    def _do_measure(self, idx: int, ins: Instruction) -> Event:
        return self._single(idx, ins, self.p.t_meas, measure_fidelity(self.p))

    def _single(self, idx: int, ins: Instruction, dur: float, f: float) -> Event:
        (q,) = ins.ions
        trap = self._in_trap(idx, q, ins.trap)
        keys = [("ion", q), ("trap", trap)]
        start, pred = self._start(keys)
        ev = Event(idx, ins, start, start + dur, self.g.nodes[trap].name, len(self.chains[trap]),
                   self.energy[trap], f, log_fidelity=_log(f), pred=pred)
        return self._finish(ev, keys)

    def _do_gate_ms(self, idx: int, ins: Instruction) -> Event:
        a, b = ins.ions
        trap = self._in_trap(idx, a, ins.trap)
        if self.trap_of(b) != trap:
            raise SimulationError(idx, f"ions {a} and {b} are not co-located")
        keys = [("ion", a), ("ion", b), ("trap", trap)]
        start, pred = self._start(keys)
        tau, f, bg, mot, lf = self._ms(trap, a, b)
        ev = Event(idx, ins, start, start + tau, self.g.nodes[trap].name, len(self.chains[trap]),
                   self.energy[trap], f, bg, mot, lf, pred)
        return self._finish(ev, keys)

    def _do_swap_gs(self, idx: int, ins: Instruction) -> Event:
        a, b = ins.ions
        trap = self._in_trap(idx, a, ins.trap)
        if self.trap_of(b) != trap:
            raise SimulationError(idx, f"swap ions {a} and {b} are not co-located")
        keys = [("ion", a), ("ion", b), ("trap", trap)]
        start, pred = self._start(keys)
        tau, f, bg, mot, lf = self._ms(trap, a, b)
        chain = self.chains[trap]
        i, j = chain.index(a), chain.index(b)
        chain[i], chain[j] = b, a
        ev = Event(idx, ins, start, start + 3 * tau, self.g.nodes[trap].name, len(chain),
                   self.energy[trap], f ** 3, 3 * bg, 3 * mot, 3 * lf, pred)
        return self._finish(ev, keys)

    def _do_swap_is(self, idx: int, ins: Instruction) -> Event:
        trap = ins.trap
        chain = self.chains.get(trap)
        pos = ins.position
        if chain is None or pos is None or not 0 <= pos < len(chain) - 1:
            raise SimulationError(idx, "invalid ion-swap position")
        a, b = chain[pos], chain[pos + 1]
        if set(ins.ions) != {a, b}:
            raise SimulationError(idx, f"ion-swap operands {ins.ions} are not at position {pos}")
        keys = [("ion", a), ("ion", b), ("trap", trap)]
        start, pred = self._start(keys)
        n = len(chain)
        dur = self.p.t_is_rotation
        if n > 2:
            # isolate the pair, rotate, rejoin
            pair, rest = heat_split(self.energy[trap], n, 2, self.p)
            self.energy[trap] = heat_merge(pair, rest, self.p)
            dur += shuttle_op_time(ShuttleOp.SPLIT, self.p) + shuttle_op_time(ShuttleOp.MERGE, self.p)
            self._note_energy(trap)
        chain[pos], chain[pos + 1] = b, a
        ev = Event(idx, ins, start, start + dur, self.g.nodes[trap].name, n, self.energy[trap], pred=pred)
        return self._finish(ev, keys)

    def _do_split(self, idx: int, ins: Instruction) -> Event:
        (q,) = ins.ions
        trap = self._in_trap(idx, q, ins.trap)
        seg = self.g.segments[ins.segment]
        if trap not in (seg.a, seg.b):
            raise SimulationError(idx, f"segment {seg.id} does not touch trap {trap}")
        chain = self.chains[trap]
        end = seg.end_at(trap)
        if chain[0 if end == LEFT else -1] != q:
            raise SimulationError(idx, f"ion {q} is not at the chain end facing segment {seg.id}")
        path = [("segment", s) for s in ins.reserve_segments] + [("junction", j) for j in ins.reserve_junctions]
        if ("segment", seg.id) not in path:
            path.insert(0, ("segment", seg.id))
        for r in path:
            if r in self.owner:
                raise SimulationError(idx, f"{r[0]} {r[1]} is held by in-flight ion {self.owner[r]}")
        keys = [("ion", q), ("trap", trap)]
        start, pred = self._start(keys + path)
        n = len(chain)
        e = self.energy[trap]
        if n == 1:
            # the emptied trap keeps its k1 share and hands it to the next arrival
            ion_e, rest_e = e + self.p.k1, self.p.k1
        elif end == LEFT:
            ion_e, rest_e = heat_split(e, n, 1, self.p)
        else:
            rest_e, ion_e = heat_split(e, n, n - 1, self.p)
        chain.remove(q)
        self.energy[trap] = rest_e
        self.ion_energy[q] = ion_e
        self.where[q] = ("segment", seg.id)
        self.moved[q] = False
        self.held[q] = path
        for r in path:
            self.owner[r] = q
            self.free_at[r] = math.inf
        self._note_energy(trap)
        dur = shuttle_op_time(ShuttleOp.SPLIT, self.p)
        ev = Event(idx, ins, start, start + dur, self.g.nodes[trap].name, n, e, pred=pred)
        return self._finish(ev, keys)

    def _held_check(self, idx: int, q: int, res: tuple[str, int]) -> None:
        if self.owner.get(res) != q:
            raise SimulationError(idx, f"ion {q} enters {res[0]} {res[1]} without holding it")

    def _do_move(self, idx: int, ins: Instruction) -> Event:
        (q,) = ins.ions
        kind, at = self.where[q]
        seg = self.g.segments[ins.segment]
        ok = (kind == "segment" and at == seg.id and not self.moved[q]) or (
            kind == "junction" and at in (seg.a, seg.b)
        )
        if not ok:
            raise SimulationError(idx, f"ion {q} cannot move along segment {seg.id} from {kind} {at}")
        self._held_check(idx, q, ("segment", seg.id))
        keys = [("ion", q)]
        start, pred = self._start(keys)
        self.ion_energy[q] = heat_move(self.ion_energy[q], 1, self.p)
        self.where[q] = ("segment", seg.id)
        self.moved[q] = True
        dur = shuttle_op_time(ShuttleOp.MOVE, self.p, 1)
        ev = Event(idx, ins, start, start + dur, f"S{seg.id}", 1, self.ion_energy[q], pred=pred)
        return self._finish(ev, keys)

    def _do_cross(self, idx: int, ins: Instruction) -> Event:
        (q,) = ins.ions
        j = ins.junction
        kind, at = self.where[q]
        if kind != "segment" or not self.moved[q] or j not in (self.g.segments[at].a, self.g.segments[at].b):
            raise SimulationError(idx, f"ion {q} is not at junction {j}")
        if self.g.nodes[j].is_trap:
            raise SimulationError(idx, f"node {j} is not a junction")
        self._held_check(idx, q, ("junction", j))
        keys = [("ion", q)]
        start, pred = self._start(keys)
        # crossing heats like one more segment
        self.ion_energy[q] = heat_move(self.ion_energy[q], 1, self.p)
        self.where[q] = ("junction", j)
        dur = shuttle_op_time(self.g.cross_op(j), self.p)
        ev = Event(idx, ins, start, start + dur, self.g.nodes[j].name, 1, self.ion_energy[q], pred=pred)
        return self._finish(ev, keys)

    def _do_merge(self, idx: int, ins: Instruction) -> Event:
        (q,) = ins.ions
        trap = ins.trap
        kind, at = self.where[q]
        seg = self.g.segments[ins.segment]
        if kind != "segment" or at != seg.id or not self.moved[q] or trap not in (seg.a, seg.b):
            raise SimulationError(idx, f"ion {q} cannot merge into trap {trap} from segment {seg.id}")
        chain = self.chains[trap]
        if len(chain) + 1 > self.g.nodes[trap].capacity:
            raise SimulationError(idx, f"merge overfills trap {self.g.nodes[trap].name}")
        keys = [("ion", q), ("trap", trap)]
        start, pred = self._start(keys)
        if seg.end_at(trap) == LEFT:
            chain.insert(0, q)
        else:
            chain.append(q)
        self.energy[trap] = heat_merge(self.energy[trap], self.ion_energy.pop(q), self.p)
        self.where[q] = ("trap", trap)
        self._note_energy(trap)
        dur = shuttle_op_time(ShuttleOp.MERGE, self.p)
        ev = Event(idx, ins, start, start + dur, self.g.nodes[trap].name, len(chain),
                   self.energy[trap], pred=pred)
        path = self.held.pop(q)
        for r in path:
            del self.owner[r]
        return self._finish(ev, keys + path)

    def _do_wait(self, idx: int, ins: Instruction) -> Event:
        (q,) = ins.ions
        keys = [("ion", q)]
        start, pred = self._start(keys)
        dur = ins.duration or 0.0
        name = self.g.nodes[ins.node].name if ins.node is not None else ""
        ev = Event(idx, ins, start, start + dur, name, pred=pred)
        return self._finish(ev, keys)

    # --- summary ------------------------------------------------------------

    def metrics(self) -> RunMetrics:
        m = RunMetrics()
        if self.in_flight():
            raise SimulationError(len(self.events), f"ions still in transit: {sorted(self.held)}")
        for ev in self.events:
            m.op_counts[ev.ins.kind.value] += 1
            m.log_fidelity += ev.log_fidelity
            m.background_error_sum += ev.background
            m.motional_error_sum += ev.motional
        m.fidelity = math.exp(m.log_fidelity)
        m.makespan_us = self.makespan
        m.max_motional_energy = self.max_energy
        m.compute_us, m.communicate_us = self.critical_split()
        return m

    def in_flight(self) -> bool:
        return bool(self.held)

    def critical_split(self) -> tuple[float, float]:
        """Compute and communication time along the critical path."""
        if not self.events:
            return 0.0, 0.0
        last = max(range(len(self.events)), key=lambda i: (self.events[i].end, i))
        compute = comm = 0.0
        i: Optional[int] = last
        while i is not None:
            ev = self.events[i]
            if ev.ins.kind in COMPUTE_KINDS:
                compute += ev.duration
            else:
                comm += ev.duration
            i = ev.pred
        return compute, comm


def run(prog: CompiledProgram, hw: HardwareConfig) -> Machine:
    m = Machine(hw, prog.initial_layout)
    for ins in prog.instructions:
        m.apply(ins)
    if m.in_flight():
        raise SimulationError(len(prog.instructions), "program ends with ions in transit")
    return m


def simulate(prog: CompiledProgram, hw: HardwareConfig) -> RunMetrics:
    return run(prog, hw).metrics()


def emit_trace(prog: CompiledProgram, hw: HardwareConfig) -> str:
    m = run(prog, hw)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for ev in m.events:
        w.writerow([
            ev.index, ev.ins.kind.value, ev.ins.tag, repr(ev.start), repr(ev.end), ev.location,
            ev.chain_n, repr(ev.nbar), repr(ev.fidelity), repr(ev.background), repr(ev.motional),
        ])
    return buf.getvalue()


_TRAP_KINDS = frozenset({
    Kind.GATE_1Q, Kind.GATE_MS, Kind.MEASURE, Kind.SWAP_GS, Kind.SWAP_IS, Kind.SPLIT, Kind.MERGE,
})


def audit(events: list[Event], hw: HardwareConfig, eps: float = 1e-9) -> Optional[str]:
    """Post-hoc exclusivity check of a simulated timeline.

    Returns a description of the first overlap found, or None. Traps and ions
    are held for the span of each instruction using them; segments and
    junctions are held from a leg's split to its merge.
    """
    spans: dict[tuple[str, int], list[tuple[float, float, int]]] = {}
    open_legs: dict[int, Event] = {}
    for ev in events:
        ins = ev.ins
        for q in ins.ions:
            spans.setdefault(("ion", q), []).append((ev.start, ev.end, ev.index))
        if ins.kind in _TRAP_KINDS:
            spans.setdefault(("trap", ev.trap), []).append((ev.start, ev.end, ev.index))
        if ins.kind is Kind.SPLIT:
            open_legs[ins.ions[0]] = ev
        elif ins.kind is Kind.MERGE:
            split = open_legs.pop(ins.ions[0])
            res = {("segment", split.ins.segment)}
            res.update(("segment", s) for s in split.ins.reserve_segments)
            res.update(("junction", j) for j in split.ins.reserve_junctions)
            for r in res:
                spans.setdefault(r, []).append((split.start, ev.end, split.index))
        elif ins.kind in (Kind.MOVE, Kind.CROSS):
            split = open_legs.get(ins.ions[0])
            r = ("segment", ins.segment) if ins.kind is Kind.MOVE else ("junction", ins.junction)
            held = split and (
                r == ("segment", split.ins.segment)
                or r[1] in (split.ins.reserve_segments if r[0] == "segment" else split.ins.reserve_junctions)
            )
            if not held:
                return f"instruction {ev.index} uses {r[0]} {r[1]} outside its reservation"
    for key, iv in spans.items():
        iv.sort()
        for (s0, e0, i0), (s1, e1, i1) in zip(iv, iv[1:]):
            if s1 < e0 - eps:
                return f"{key[0]} {key[1]} held by instructions {i0} and {i1} at once"
    return None
