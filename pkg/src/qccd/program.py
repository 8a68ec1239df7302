"""Primitive QCCD instructions and compiled programs."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Optional, Union

Tag = Union[int, str]  # source op index, or "reorder" / "transit" / "evict"


class Kind(str, enum.Enum):
    GATE_1Q = "gate1q"
    GATE_MS = "gate_ms"
    MEASURE = "measure"
    SPLIT = "split"
    MOVE = "move"
    CROSS = "cross"
    MERGE = "merge"
    SWAP_GS = "swap_gs"
    SWAP_IS = "swap_is"
    WAIT = "wait"


COMPUTE_KINDS = frozenset({Kind.GATE_1Q, Kind.GATE_MS, Kind.MEASURE, Kind.SWAP_GS})
SHUTTLE_KINDS = frozenset({Kind.SPLIT, Kind.MOVE, Kind.CROSS, Kind.MERGE, Kind.WAIT})


@dataclass(frozen=True)
class Instruction:
    """One primitive operation.

    Field use by kind:

    - gate1q / measure: ``ions=(q,)``
    - gate_ms: ``ions=(a, b)``, ``trap``
    - split: ``ions=(q,)``, ``trap``, ``segment`` (exit), ``reserve_*`` (the
      segments and junctions held from split until the matching merge)
    - move: ``ions=(q,)``, ``segment``
    - cross: ``ions=(q,)``, ``junction``
    - merge: ``ions=(q,)``, ``trap``, ``segment`` (entry)
    - swap_gs: ``ions=(a, b)``, ``trap``
    - swap_is: ``ions`` the two swapped ions, ``trap``, ``position`` of the left one
    - wait: ``ions=(q,)``, ``node`` waited at, ``duration``
    """

    kind: Kind
    ions: tuple[int, ...]
    tag: Tag
    trap: Optional[int] = None
    segment: Optional[int] = None
    junction: Optional[int] = None
    position: Optional[int] = None
    node: Optional[int] = None
    duration: Optional[float] = None
    reserve_segments: tuple[int, ...] = ()
    reserve_junctions: tuple[int, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value, "ions": list(self.ions), "tag": self.tag}
        for name in ("trap", "segment", "junction", "position", "node", "duration"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        if self.kind is Kind.SPLIT:
            d["reserve_segments"] = list(self.reserve_segments)
            d["reserve_junctions"] = list(self.reserve_junctions)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Instruction":
        return cls(
            kind=Kind(d["kind"]),
            ions=tuple(d["ions"]),
            tag=d["tag"],
            trap=d.get("trap"),
            segment=d.get("segment"),
            junction=d.get("junction"),
            position=d.get("position"),
            node=d.get("node"),
            duration=d.get("duration"),
            reserve_segments=tuple(d.get("reserve_segments", ())),
            reserve_junctions=tuple(d.get("reserve_junctions", ())),
        )


@dataclass
class CompiledProgram:
    """``initial_layout`` maps each program qubit to (trap, chain position).

    Instructions execute in list order per resource: an ion's instructions,
    and a trap's instructions, run in the order listed.
    """

    num_qubits: int
    initial_layout: dict[int, tuple[int, int]]
    instructions: list[Instruction] = field(default_factory=list)

    def chains(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for q, (trap, pos) in sorted(self.initial_layout.items(), key=lambda kv: kv[1]):
            out.setdefault(trap, []).append(q)
        return out

    def dependencies(self) -> list[tuple[int, int]]:
        """Per-ion and per-trap ordering edges between instruction indices."""
        last: dict[tuple[str, int], int] = {}
        edges = set()
        for i, ins in enumerate(self.instructions):
            keys = [("ion", q) for q in ins.ions]
            if ins.trap is not None:
                keys.append(("trap", ins.trap))
            for k in keys:
                if k in last:
                    edges.add((last[k], i))
                last[k] = i
        return sorted(edges)

    def count(self, kind: Kind) -> int:
        return sum(ins.kind is kind for ins in self.instructions)

    def to_json(self) -> str:
        data = {
            "num_qubits": self.num_qubits,
            "initial_layout": [
                {"qubit": q, "trap": t, "position": p}
                for q, (t, p) in sorted(self.initial_layout.items())
            ],
            "instructions": [ins.to_dict() for ins in self.instructions],
        }
        return json.dumps(data, indent=None, separators=(",", ":")).replace("},{", "},\n{") + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CompiledProgram":
        data = json.loads(text)
        layout = {e["qubit"]: (e["trap"], e["position"]) for e in data["initial_layout"]}
        return cls(
            num_qubits=data["num_qubits"],
            initial_layout=layout,
            instructions=[Instruction.from_dict(d) for d in data["instructions"]],
        )
