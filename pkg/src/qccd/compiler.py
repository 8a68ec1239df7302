"""Map circuits onto QCCD devices and emit primitive instructions.

Pipeline: ``initial_map`` -> ``schedule`` -> ``route_parallel``. ``validate``
replays a program symbolically and then audits its simulated timeline.

Capacity policy: traps start at most ``capacity - 2`` full and are kept at
most ``capacity - 1`` full between operations, so an ion passing through
an intermediate trap always finds a free slot. When neither ion of a
cross-trap gate can join the other's trap, a third ion is first evicted
from the destination to the nearest trap with room.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .device import HardwareConfig, Reorder, ShuttlePath, shortest_shuttle_path
from .ir import MEASURE, ONE_Q, Circuit, build_dag
from .models import ShuttleOp, gate_time, shuttle_op_time
from .program import CompiledProgram, Instruction, Kind, Tag
from .sim import Machine, SimulationError, audit

BUFFER_SLOTS = 2


class CompileError(ValueError):
    def __init__(self, message: str, op_id: Optional[int] = None):
        prefix = f"op {op_id}: " if op_id is not None else ""
        super().__init__(prefix + message)
        self.op_id = op_id


def initial_map(c: Circuit, hw: HardwareConfig) -> dict[int, tuple[int, int]]:
    """Greedy placement by order of first use, filling traps in id order."""
    traps = hw.graph.traps
    usable = [max(t.capacity - BUFFER_SLOTS, 0) for t in traps]
    if sum(usable) < c.num_qubits:
        raise CompileError(
            f"{c.num_qubits} qubits exceed usable capacity {sum(usable)} "
            f"({len(traps)} traps, {BUFFER_SLOTS} buffer slots each)"
        )
    first_use: dict[int, int] = {}
    for i, op in enumerate(c.ops):
        for q in op.qubits:
            first_use.setdefault(q, i)
    order = sorted(range(c.num_qubits), key=lambda q: (first_use.get(q, math.inf), q))
    layout: dict[int, tuple[int, int]] = {}
    k = 0
    for trap, room in zip(traps, usable):
        for pos in range(room):
            if k == len(order):
                return layout
            layout[order[k]] = (trap.id, pos)
            k += 1
    return layout


class _Scheduler:
    def __init__(self, c: Circuit, hw: HardwareConfig, layout: dict[int, tuple[int, int]]):
        self.c = c
        self.hw = hw
        self.g = hw.graph
        self.p = hw.physics
        self.m = Machine(hw, layout)
        self.out: list[Instruction] = []
        self.future: dict[int, deque[int]] = {q: deque() for q in range(c.num_qubits)}
        for i, op in enumerate(c.ops):
            for q in op.qubits:
                self.future[q].append(i)
        self.merge_split = shuttle_op_time(ShuttleOp.MERGE, self.p) + shuttle_op_time(ShuttleOp.SPLIT, self.p)

    def emit(self, ins: Instruction) -> None:
        try:
            self.m.apply(ins)
        except SimulationError as exc:  # pragma: no cover - compiler bug
            raise CompileError(f"internal: {exc}", ins.tag if isinstance(ins.tag, int) else None)
        self.out.append(ins)

    # --- costs --------------------------------------------------------------

    def reorder_cost(self, n: int, k: int) -> float:
        """Time to bring an ion ``k`` places to a chain end in an ``n``-chain."""
        if k == 0:
            return 0.0
        if self.hw.reorder is Reorder.GS:
            return 3 * gate_time(self.hw.gate_impl, k, n)
        hop = self.p.t_is_rotation + (self.merge_split if n > 2 else 0.0)
        return k * hop

    def room(self, trap: int) -> bool:
        return len(self.m.chains[trap]) <= self.g.nodes[trap].capacity - BUFFER_SLOTS

    def route(self, q: int, src: int, dst: int) -> ShuttlePath:
        chain = self.m.chains[src]
        pos = chain.index(q)

        def source_cost(seg: int) -> float:
            end = 0 if self.g.segments[seg].end_at(src) == 0 else len(chain) - 1
            return self.reorder_cost(len(chain), abs(pos - end))

        def transit_cost(trap: int, seg_in: int, seg_out: int) -> float:
            same = self.g.segments[seg_in].end_at(trap) == self.g.segments[seg_out].end_at(trap)
            n = len(self.m.chains[trap]) + 1
            return self.merge_split + (0.0 if same else self.reorder_cost(n, n - 1))

        return shortest_shuttle_path(
            self.g, src, dst, self.p, source_cost=source_cost, transit_cost=transit_cost
        )

    # --- emission -----------------------------------------------------------

    def reorder(self, q: int, trap: int, seg: int) -> None:
        chain = self.m.chains[trap]
        end = 0 if self.g.segments[seg].end_at(trap) == 0 else len(chain) - 1
        pos = chain.index(q)
        if pos == end:
            return
        if self.hw.reorder is Reorder.GS:
            self.emit(Instruction(Kind.SWAP_GS, (q, chain[end]), "reorder", trap=trap))
            return
        step = 1 if end > pos else -1
        while pos != end:
            left = min(pos, pos + step)
            pair = (chain[left], chain[left + 1])
            self.emit(Instruction(Kind.SWAP_IS, pair, "reorder", trap=trap, position=left))
            pos += step

    def shuttle(self, q: int, path: ShuttlePath, tag: Tag) -> None:
        nodes, segs = path.nodes, path.segments
        i = 0
        while i < len(segs):
            trap = nodes[i]
            j = i + 1
            while not self.g.nodes[nodes[j]].is_trap:
                j += 1
            leg_segs = segs[i:j]
            leg_junctions = nodes[i + 1:j]
            self.reorder(q, trap, leg_segs[0])
            self.emit(Instruction(
                Kind.SPLIT, (q,), tag, trap=trap, segment=leg_segs[0],
                reserve_segments=tuple(leg_segs), reserve_junctions=tuple(leg_junctions),
            ))
            self.emit(Instruction(Kind.MOVE, (q,), tag, segment=leg_segs[0]))
            for jn, seg in zip(leg_junctions, leg_segs[1:]):
                self.emit(Instruction(Kind.CROSS, (q,), tag, junction=jn))
                self.emit(Instruction(Kind.MOVE, (q,), tag, segment=seg))
            self.emit(Instruction(Kind.MERGE, (q,), tag, trap=nodes[j], segment=leg_segs[-1]))
            i = j

    def next_use(self, q: int) -> float:
        f = self.future[q]
        return f[0] if f else math.inf

    def evict(self, trap: int, keep: set[int], op_id: int) -> None:
        victims = [x for x in self.m.chains[trap] if x not in keep]
        if not victims:
            raise CompileError(f"trap {self.g.nodes[trap].name} is full and nothing can be evicted", op_id)
        targets = [t.id for t in self.g.traps if t.id != trap and self.room(t.id)]
        if not targets:
            raise CompileError("capacity exceeded: no trap can take an evicted ion", op_id)
        # cheapest eviction first, then the ion needed furthest in the future
        options = []
        for x in victims:
            for t in targets:
                path = self.route(x, trap, t)
                options.append((path.cost, -self.next_use(x), x, t, path))
        options.sort(key=lambda o: o[:4])
        self.shuttle(options[0][2], options[0][4], "evict")

    def colocate(self, a: int, b: int, op_id: int) -> int:
        ta, tb = self.m.trap_of(a), self.m.trap_of(b)
        options = []
        for q, src, dst in ((a, ta, tb), (b, tb, ta)):
            path = self.route(q, src, dst)
            # ties go to the emptier destination, then out of the higher-id trap
            options.append((path.cost, len(self.m.chains[dst]), -src, q, src, dst, path))
        options.sort(key=lambda o: o[:3])
        feasible = [o for o in options if self.room(o[5])]
        if feasible:
            *_, q, src, dst, path = feasible[0]
        else:
            *_, q, src, dst, _ = options[0]
            self.evict(dst, {a, b}, op_id)
            path = self.route(q, src, dst)
        self.shuttle(q, path, op_id)
        return dst

    def gate(self, i: int) -> None:
        op = self.c.ops[i]
        if op.kind in (ONE_Q, MEASURE):
            (q,) = op.qubits
            kind = Kind.GATE_1Q if op.kind == ONE_Q else Kind.MEASURE
            self.emit(Instruction(kind, (q,), i, trap=self.m.trap_of(q)))
        else:
            a, b = op.qubits
            trap = self.m.trap_of(a)
            if trap != self.m.trap_of(b):
                trap = self.colocate(a, b, i)
            self.emit(Instruction(Kind.GATE_MS, (a, b), i, trap=trap))
        for q in op.qubits:
            self.future[q].popleft()

    def run(self) -> list[Instruction]:
        dag = build_dag(self.c)
        indeg = [len(p) for p in dag.preds]
        ready = [i for i, d in enumerate(indeg) if d == 0]
        while ready:
            # earliest ready gate first: the op whose operands free up soonest
            k = min(
                range(len(ready)),
                key=lambda r: (max(self.m.ready(q) for q in self.c.ops[ready[r]].qubits), ready[r]),
            )
            i = ready.pop(k)
            self.gate(i)
            for s in sorted(dag.succs[i]):
                indeg[s] -= 1
                if indeg[s] == 0:
                    ready.append(s)
        return self.out


def schedule(c: Circuit, hw: HardwareConfig, layout: dict[int, tuple[int, int]]) -> CompiledProgram:
    instructions = _Scheduler(c, hw, layout).run()
    return CompiledProgram(c.num_qubits, dict(layout), instructions)


def route_parallel(prog: CompiledProgram, hw: HardwareConfig) -> CompiledProgram:
    """Insert explicit waits where a shuttle is held up.

    A leg departs only once its whole path to the next trap is free (earlier
    instructions win); the ion waits in its trap until then. An ion that
    arrives while the destination trap is busy waits at the segment mouth.
    """
    m = Machine(hw, prog.initial_layout)
    out: list[Instruction] = []
    for ins in prog.instructions:
        wait = None
        if ins.kind is Kind.SPLIT:
            q = ins.ions[0]
            base = max(m.ready(q), m.trap_free(ins.trap))
            res = [("segment", s) for s in ins.reserve_segments] + [
                ("junction", j) for j in ins.reserve_junctions
            ]
            acquire = max([base] + [m.free_at.get(r, 0.0) for r in res])
            if acquire > base:
                wait = Instruction(Kind.WAIT, (q,), ins.tag, node=ins.trap, duration=acquire - m.ready(q))
        elif ins.kind is Kind.MERGE:
            q = ins.ions[0]
            if m.trap_free(ins.trap) > m.ready(q):
                wait = Instruction(
                    Kind.WAIT, (q,), ins.tag, node=ins.trap, duration=m.trap_free(ins.trap) - m.ready(q)
                )
        for x in (wait, ins):
            if x is not None:
                m.apply(x)
                out.append(x)
    return CompiledProgram(prog.num_qubits, dict(prog.initial_layout), out)


def compile_circuit(c: Circuit, hw: HardwareConfig) -> CompiledProgram:
    layout = initial_map(c, hw)
    return route_parallel(schedule(c, hw, layout), hw)


# --- validation -------------------------------------------------------------

@dataclass
class Report:
    ok: bool
    message: str = "ok"
    index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def _replay(prog: CompiledProgram, hw: HardwareConfig, circuit: Optional[Circuit]) -> Report:
    g = hw.graph
    chains: dict[int, list[int]] = {t.id: [] for t in g.traps}
    for q, (t, pos) in sorted(prog.initial_layout.items(), key=lambda kv: kv[1]):
        if t not in chains or pos != len(chains[t]):
            return Report(False, f"bad initial layout entry for qubit {q}")
        chains[t].append(q)
    for t, ch in chains.items():
        if len(ch) > g.nodes[t].capacity:
            return Report(False, f"capacity: initial layout overfills trap {g.nodes[t].name}")
    loc: dict[int, tuple[str, int]] = {q: ("trap", t) for q, (t, _) in prog.initial_layout.items()}
    fresh: dict[int, bool] = {}
    occupant: dict[tuple[str, int], int] = {}
    last_tag: dict[int, int] = {}
    seen_ops: dict[int, tuple[str, tuple[int, ...]]] = {}

    def trap_of(q: int) -> Optional[int]:
        where = loc.get(q)
        return where[1] if where and where[0] == "trap" else None

    def enter(q: int, res: tuple[str, int]) -> Optional[str]:
        other = occupant.get(res)
        if other is not None and other != q:
            return f"occupancy: ion {q} enters {res[0]} {res[1]} occupied by ion {other}"
        prev = loc[q]
        if prev[0] != "trap":
            occupant.pop(prev, None)
        occupant[res] = q
        loc[q] = res
        return None

    for i, ins in enumerate(prog.instructions):
        k = ins.kind
        if any(q not in loc for q in ins.ions):
            return Report(False, f"unknown ion in {ins.ions}", i)
        err: Optional[str] = None
        if k in (Kind.GATE_1Q, Kind.MEASURE, Kind.GATE_MS, Kind.SWAP_GS):
            traps = {trap_of(q) for q in ins.ions}
            if None in traps or len(traps) != 1:
                err = f"co-location: ions {ins.ions} are not together in one trap"
            elif ins.trap is not None and traps != {ins.trap}:
                err = f"co-location: ions {ins.ions} are not in trap {ins.trap}"
            elif k is Kind.SWAP_GS:
                ch = chains[traps.pop()]
                a, b = ch.index(ins.ions[0]), ch.index(ins.ions[1])
                ch[a], ch[b] = ch[b], ch[a]
            if err is None and isinstance(ins.tag, int) and k is not Kind.SWAP_GS:
                kind = {Kind.GATE_1Q: ONE_Q, Kind.MEASURE: MEASURE}.get(k, "2q")
                if ins.tag in seen_ops:
                    err = f"dependency: source op {ins.tag} executed twice"
                seen_ops[ins.tag] = (kind, tuple(ins.ions))
                for q in ins.ions:
                    if last_tag.get(q, -1) >= ins.tag:
                        err = f"dependency: op {ins.tag} on qubit {q} runs after op {last_tag[q]}"
                    last_tag[q] = ins.tag
        elif k is Kind.SWAP_IS:
            ch = chains.get(ins.trap)
            p = ins.position
            if ch is None or p is None or not 0 <= p < len(ch) - 1 or set(ch[p:p + 2]) != set(ins.ions):
                err = "ion swap: invalid position or operands"
            else:
                ch[p], ch[p + 1] = ch[p + 1], ch[p]
        elif k is Kind.SPLIT:
            q = ins.ions[0]
            seg = g.segments[ins.segment] if ins.segment is not None and ins.segment < len(g.segments) else None
            t = trap_of(q)
            if seg is None or t is None or t != ins.trap or t not in (seg.a, seg.b):
                err = f"split: ion {q} / segment {ins.segment} do not match trap {ins.trap}"
            else:
                ch = chains[t]
                if ch[0 if seg.end_at(t) == 0 else -1] != q:
                    err = f"split: ion {q} is not at the chain end facing segment {seg.id}"
                else:
                    err = enter(q, ("segment", seg.id))
                    if err is None:
                        ch.remove(q)
                        fresh[q] = True
        elif k is Kind.MOVE:
            q = ins.ions[0]
            seg = g.segments[ins.segment]
            where = loc[q]
            if where == ("segment", seg.id) and fresh.get(q):
                fresh[q] = False
            elif where[0] == "junction" and where[1] in (seg.a, seg.b):
                err = enter(q, ("segment", seg.id))
                fresh[q] = False
            else:
                err = f"move: ion {q} cannot traverse segment {seg.id} from {where}"
        elif k is Kind.CROSS:
            q = ins.ions[0]
            where = loc[q]
            j = ins.junction
            if (where[0] != "segment" or fresh.get(q) or j is None
                    or j not in (g.segments[where[1]].a, g.segments[where[1]].b)
                    or g.nodes[j].is_trap):
                err = f"cross: ion {q} is not at junction {j}"
            else:
                err = enter(q, ("junction", j))
        elif k is Kind.MERGE:
            q = ins.ions[0]
            where = loc[q]
            seg = g.segments[ins.segment]
            t = ins.trap
            if where != ("segment", seg.id) or fresh.get(q) or t not in (seg.a, seg.b) or t not in chains:
                err = f"merge: ion {q} cannot merge into trap {t} from segment {seg.id}"
            elif len(chains[t]) + 1 > g.nodes[t].capacity:
                err = f"capacity: merge overfills trap {g.nodes[t].name}"
            else:
                occupant.pop(where, None)
                loc[q] = ("trap", t)
                if seg.end_at(t) == 0:
                    chains[t].insert(0, q)
                else:
                    chains[t].append(q)
        if err:
            return Report(False, err, i)
    stranded = sorted(q for q, w in loc.items() if w[0] != "trap")
    if stranded:
        return Report(False, f"ions left in transit: {stranded}")
    if circuit is not None:
        for i, op in enumerate(circuit.ops):
            got = seen_ops.get(i)
            if got is None:
                return Report(False, f"coverage: source op {i} never executed")
            if got[0] != op.kind or set(got[1]) != set(op.qubits):
                return Report(False, f"coverage: source op {i} executed with wrong kind/operands")
        if len(seen_ops) != len(circuit.ops):
            return Report(False, "coverage: instructions reference unknown source ops")
    return Report(True)


def validate(prog: CompiledProgram, hw: HardwareConfig, circuit: Optional[Circuit] = None) -> Report:
    """Check capacity, co-location, exclusive segment/junction use and
    source-order preservation; returns the first violation found."""
    report = _replay(prog, hw, circuit)
    if not report:
        return report
    try:
        m = Machine(hw, prog.initial_layout)
        for ins in prog.instructions:
            m.apply(ins)
    except SimulationError as exc:
        return Report(False, f"timing replay: {exc}", exc.index)
    problem = audit(m.events, hw)
    if problem:
        return Report(False, f"occupancy: {problem}")
    return Report(True)
