"""QCCD device graphs: traps and junctions joined by shuttling segments."""

from __future__ import annotations

import enum
import heapq
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional

from .models import GateImpl, PhysicsParams, ShuttleOp, gate_time, shuttle_op_time

TRAP = "trap"
JUNCTION = "junction"
LEFT, RIGHT = 0, 1


class DeviceError(ValueError):
    pass


class Reorder(str, enum.Enum):
    GS = "GS"  # gate-based swap
    IS = "IS"  # physical ion swap, hop by hop


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    capacity: int = 0
    name: str = ""

    @property
    def is_trap(self) -> bool:
        return self.kind == TRAP


@dataclass(frozen=True)
class Segment:
    """A shuttling segment. ``a_end``/``b_end`` name the chain end (LEFT or
    RIGHT) the segment attaches to when the endpoint is a trap."""

    id: int
    a: int
    b: int
    a_end: Optional[int] = None
    b_end: Optional[int] = None

    def other(self, node: int) -> int:
        return self.b if node == self.a else self.a

    def end_at(self, node: int) -> Optional[int]:
        return self.a_end if node == self.a else self.b_end


@dataclass
class DeviceGraph:
    nodes: list[Node]
    segments: list[Segment]
    topology: str = "custom"
    adj: dict[int, list[Segment]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        if ids != list(range(len(ids))):
            raise DeviceError("node ids must be 0..n-1 in order")
        self.adj = {n.id: [] for n in self.nodes}
        pairs = set()
        for i, s in enumerate(self.segments):
            if s.id != i:
                raise DeviceError("segment ids must be 0..m-1 in order")
            if s.a == s.b:
                raise DeviceError(f"segment {s.id} is a self-loop")
            if s.a not in self.adj or s.b not in self.adj:
                raise DeviceError(f"segment {s.id} references an unknown node")
            key = frozenset((s.a, s.b))
            if key in pairs:
                raise DeviceError(f"duplicate segment between nodes {s.a} and {s.b}")
            pairs.add(key)
            self.adj[s.a].append(s)
            self.adj[s.b].append(s)
        self._check()

    def _check(self) -> None:
        for n in self.nodes:
            deg = len(self.adj[n.id])
            if n.is_trap:
                if n.capacity < 2:
                    raise DeviceError(f"trap {n.name} capacity must be >= 2")
                # a chain has two ends; a lone trap may have none
                if deg > 2 or (deg == 0 and len(self.nodes) > 1):
                    raise DeviceError(f"trap {n.name} must have 1 or 2 segments, has {deg}")
                ends = [s.end_at(n.id) for s in self.adj[n.id]]
                if any(e not in (LEFT, RIGHT) for e in ends) or len(set(ends)) != len(ends):
                    raise DeviceError(f"trap {n.name} segments must attach to distinct chain ends")
            elif n.kind == JUNCTION:
                if deg not in (3, 4):
                    raise DeviceError(f"junction {n.name} must have degree 3 or 4, has {deg}")
            else:
                raise DeviceError(f"unknown node kind {n.kind!r}")
        if self.nodes:
            seen = {0}
            stack = [0]
            while stack:
                u = stack.pop()
                for s in self.adj[u]:
                    v = s.other(u)
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            if len(seen) != len(self.nodes):
                raise DeviceError("device graph is not connected")

    @property
    def traps(self) -> list[Node]:
        return [n for n in self.nodes if n.is_trap]

    @property
    def junctions(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == JUNCTION]

    def degree(self, node: int) -> int:
        return len(self.adj[node])

    def segment_at_end(self, trap: int, end: int) -> Optional[Segment]:
        for s in self.adj[trap]:
            if s.end_at(trap) == end:
                return s
        return None

    def segment_between(self, u: int, v: int) -> Segment:
        for s in self.adj[u]:
            if s.other(u) == v:
                return s
        raise DeviceError(f"no segment between {u} and {v}")

    def cross_op(self, junction: int) -> ShuttleOp:
        return ShuttleOp.CROSS_X if self.degree(junction) == 4 else ShuttleOp.CROSS_Y

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": [
                {"id": n.id, "kind": n.kind, "capacity": n.capacity, "name": n.name}
                for n in self.nodes
            ],
            "segments": [
                {"a": s.a, "b": s.b, "a_end": s.a_end, "b_end": s.b_end} for s in self.segments
            ],
        }


def make_linear(n_traps: int, capacity: int) -> DeviceGraph:
    if n_traps < 1:
        raise DeviceError("a linear device needs at least one trap")
    nodes = [Node(i, TRAP, capacity, f"T{i}") for i in range(n_traps)]
    segs = [Segment(i, i, i + 1, RIGHT, LEFT) for i in range(n_traps - 1)]
    return DeviceGraph(nodes, segs, topology="linear")


def make_grid(rows: int, cols: int, capacity: int) -> DeviceGraph:
    """Grid of traps. Horizontally adjacent traps in a row meet at a junction;
    junctions in the same column are linked vertically."""
    if rows < 2 or cols < 2:
        raise DeviceError("a grid device needs at least 2 rows and 2 columns")
    nodes = [Node(r * cols + c, TRAP, capacity, f"T({r},{c})") for r in range(rows) for c in range(cols)]
    jbase = rows * cols

    def jid(r: int, c: int) -> int:
        return jbase + r * (cols - 1) + c

    nodes += [Node(jid(r, c), JUNCTION, 0, f"J({r},{c})") for r in range(rows) for c in range(cols - 1)]
    segs: list[Segment] = []
    for r in range(rows):
        for c in range(cols - 1):
            segs.append(Segment(len(segs), r * cols + c, jid(r, c), RIGHT, None))
            segs.append(Segment(len(segs), jid(r, c), r * cols + c + 1, None, LEFT))
    for r in range(rows - 1):
        for c in range(cols - 1):
            segs.append(Segment(len(segs), jid(r, c), jid(r + 1, c)))
    return DeviceGraph(nodes, segs, topology="grid")


def make_custom(nodes: list[Mapping[str, Any]], segments: list[Any], capacity: int) -> DeviceGraph:
    """Build a graph from config records.

    Nodes are ``{"kind": "trap"|"junction", "capacity"?: int, "name"?: str}``
    in id order. Segments are ``[a, b]`` pairs or ``{"a", "b", "a_end"?,
    "b_end"?}`` objects; a trap's unlabelled segments take the left end first.
    """
    built = []
    for i, raw in enumerate(nodes):
        kind = raw.get("kind", TRAP)
        cap = int(raw.get("capacity", capacity)) if kind == TRAP else 0
        prefix = "T" if kind == TRAP else "J"
        built.append(Node(i, kind, cap, raw.get("name", f"{prefix}{i}")))
    used: dict[int, set[int]] = {}
    segs = []
    for i, raw in enumerate(segments):
        if isinstance(raw, Mapping):
            a, b = int(raw["a"]), int(raw["b"])
            ends = [raw.get("a_end"), raw.get("b_end")]
        else:
            a, b = int(raw[0]), int(raw[1])
            ends = [None, None]
        for k, node in enumerate((a, b)):
            if node >= len(built) or node < 0:
                raise DeviceError(f"segment {i} references unknown node {node}")
            if built[node].is_trap:
                taken = used.setdefault(node, set())
                if ends[k] is None:
                    ends[k] = LEFT if LEFT not in taken else RIGHT
                taken.add(ends[k])
            else:
                ends[k] = None
        segs.append(Segment(i, a, b, ends[0], ends[1]))
    return DeviceGraph(built, segs, topology="custom")


@dataclass(frozen=True)
class HardwareConfig:
    graph: DeviceGraph
    gate_impl: GateImpl = GateImpl.FM
    reorder: Reorder = Reorder.GS
    physics: PhysicsParams = field(default_factory=PhysicsParams)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gate_impl", GateImpl(self.gate_impl))
        object.__setattr__(self, "reorder", Reorder(self.reorder))


def device_from_config(cfg: Mapping[str, Any], *, capacity: int | None = None) -> DeviceGraph:
    topo = cfg.get("topology", {"type": "linear", "traps": 6})
    cap = int(capacity if capacity is not None else cfg.get("capacity", 25))
    kind = topo.get("type")
    if kind == "linear":
        return make_linear(int(topo["traps"]), cap)
    if kind == "grid":
        return make_grid(int(topo["rows"]), int(topo["cols"]), cap)
    if kind == "custom":
        nodes = topo["nodes"]
        if capacity is not None:
            nodes = [{k: v for k, v in n.items() if k != "capacity"} for n in nodes]
        return make_custom(nodes, topo["segments"], cap)
    raise DeviceError(f"unknown topology type {kind!r}")


def hardware_from_config(
    cfg: Mapping[str, Any],
    *,
    gate: str | None = None,
    reorder: str | None = None,
    capacity: int | None = None,
) -> HardwareConfig:
    """Build a HardwareConfig from a device-config mapping; keyword arguments
    override the corresponding config entries."""
    try:
        return HardwareConfig(
            graph=device_from_config(cfg, capacity=capacity),
            gate_impl=GateImpl(gate or cfg.get("gate", "FM")),
            reorder=Reorder(reorder or cfg.get("reorder", "GS")),
            physics=PhysicsParams.from_dict(cfg.get("physics")),
        )
    except (KeyError, TypeError) as exc:
        raise DeviceError(f"malformed device config: {exc!r}") from None


def load_hardware(path: str, **overrides: Any) -> HardwareConfig:
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    return hardware_from_config(cfg, **overrides)


# --- routing ----------------------------------------------------------------

@dataclass(frozen=True)
class ShuttlePath:
    """Alternating nodes/segments: ``segments[i]`` joins ``nodes[i]`` and
    ``nodes[i + 1]``."""

    nodes: tuple[int, ...]
    segments: tuple[int, ...]
    cost: float

    @property
    def is_empty(self) -> bool:
        return not self.segments


SourceCost = Callable[[int], float]
TransitCost = Callable[[int, int, int], float]


def default_transit_cost(g: DeviceGraph, physics: PhysicsParams) -> TransitCost:
    """Merge + split at an intermediate trap, plus a GS-style reorder across a
    full chain when the ion must leave by the opposite end."""
    merge_split = shuttle_op_time(ShuttleOp.MERGE, physics) + shuttle_op_time(ShuttleOp.SPLIT, physics)

    def cost(trap: int, seg_in: int, seg_out: int) -> float:
        if g.segments[seg_in].end_at(trap) == g.segments[seg_out].end_at(trap):
            return merge_split
        n = max(g.nodes[trap].capacity, 2)
        return merge_split + 3 * gate_time(GateImpl.FM, n - 1, n)

    return cost


def shortest_shuttle_path(
    g: DeviceGraph,
    src: int,
    dst: int,
    physics: PhysicsParams,
    *,
    source_cost: SourceCost | None = None,
    transit_cost: TransitCost | None = None,
) -> ShuttlePath:
    """Cheapest shuttle route between two traps under the time model.

    Moves, junction crossings, the final merge and the initial split are
    priced from ``physics``. ``source_cost(exit_segment)`` adds any reorder
    needed before leaving ``src``; ``transit_cost(trap, seg_in, seg_out)``
    prices passing through an intermediate trap. Ties go to the
    lexicographically smallest node sequence.
    """
    if not (g.nodes[src].is_trap and g.nodes[dst].is_trap):
        raise DeviceError("shuttle endpoints must be traps")
    if src == dst:
        return ShuttlePath((src,), (), 0.0)
    transit_cost = transit_cost or default_transit_cost(g, physics)
    move = shuttle_op_time(ShuttleOp.MOVE, physics)
    split = shuttle_op_time(ShuttleOp.SPLIT, physics)
    merge = shuttle_op_time(ShuttleOp.MERGE, physics)

    # state: (node, segment used to arrive); heap key breaks ties on node ids
    heap: list[tuple[float, tuple[int, ...], tuple[int, ...]]] = []
    for s in g.adj[src]:
        c0 = split + move + (source_cost(s.id) if source_cost else 0.0)
        heapq.heappush(heap, (c0, (src, s.other(src)), (s.id,)))
    done: set[tuple[int, int]] = set()
    while heap:
        cost, nodes, segs = heapq.heappop(heap)
        u, via = nodes[-1], segs[-1]
        if (u, via) in done:
            continue
        done.add((u, via))
        if u == dst:
            return ShuttlePath(nodes, segs, cost + merge)
        node = g.nodes[u]
        if node.is_trap and u == src:
            continue
        for s in g.adj[u]:
            v = s.other(u)
            if s.id == via or v in nodes:
                continue
            if node.is_trap:
                step = transit_cost(u, via, s.id)
            else:
                step = shuttle_op_time(g.cross_op(u), physics)
            heapq.heappush(heap, (cost + step + move, nodes + (v,), segs + (s.id,)))
    raise DeviceError(f"no shuttle path from {g.nodes[src].name} to {g.nodes[dst].name}")
