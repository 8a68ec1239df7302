"""Circuit IR: a straight-line list of 1q / 2q / measure operations.

Two-qubit operations carry no gate name. Every source entangling gate is
costed downstream as one MS gate, so the name would carry no information.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable

ONE_Q = "1q"
TWO_Q = "2q"
MEASURE = "measure"
KINDS = (ONE_Q, TWO_Q, MEASURE)

# name -> number of parameters
ONE_QUBIT_GATES = {
    "h": 0, "x": 0, "y": 0, "z": 0, "s": 0, "t": 0, "sdg": 0, "tdg": 0,
    "rx": 1, "ry": 1, "rz": 1, "u1": 1, "u2": 2, "u3": 3,
}
TWO_QUBIT_GATES = ("cx", "cz", "ms", "swap")


class CircuitError(ValueError):
    pass


class QasmError(CircuitError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Op:
    kind: str
    qubits: tuple[int, ...]
    label: str = ""
    params: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise CircuitError(f"unknown op kind {self.kind!r}")
        want = 2 if self.kind == TWO_Q else 1
        if len(self.qubits) != want:
            raise CircuitError(f"{self.kind} op needs {want} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"repeated qubit operand in {self.qubits}")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    ops: tuple[Op, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        if self.num_qubits < 0:
            raise CircuitError("negative qubit count")
        measured: set[int] = set()
        for i, op in enumerate(self.ops):
            for q in op.qubits:
                if not 0 <= q < self.num_qubits:
                    raise CircuitError(f"op {i}: qubit {q} out of range [0, {self.num_qubits})")
                if q in measured:
                    raise CircuitError(f"op {i}: qubit {q} used after measurement")
            if op.kind == MEASURE:
                measured.add(op.qubits[0])

    def count(self, kind: str) -> int:
        return sum(op.kind == kind for op in self.ops)

    @property
    def two_qubit_count(self) -> int:
        return self.count(TWO_Q)


@dataclass
class DependencyDag:
    preds: list[set[int]]
    succs: list[set[int]] = field(default_factory=list)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, i) for i, ps in enumerate(self.preds) for p in ps)


def build_dag(c: Circuit) -> DependencyDag:
    """Chain each op to the previous op on each of its qubits."""
    n = len(c.ops)
    preds: list[set[int]] = [set() for _ in range(n)]
    succs: list[set[int]] = [set() for _ in range(n)]
    last: dict[int, int] = {}
    for i, op in enumerate(c.ops):
        for q in op.qubits:
            if q in last:
                preds[i].add(last[q])
                succs[last[q]].add(i)
            last[q] = i
    return DependencyDag(preds, succs)


# --- JSON -------------------------------------------------------------------

def emit_json(c: Circuit) -> str:
    ops = []
    for op in c.ops:
        d: dict[str, Any] = {"kind": op.kind, "qubits": list(op.qubits)}
        if op.label:
            d["label"] = op.label
        if op.params:
            d["params"] = list(op.params)
        ops.append(d)
    return json.dumps({"num_qubits": c.num_qubits, "ops": ops}, indent=1) + "\n"


def parse_json(text: str) -> Circuit:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"$: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise CircuitError("$: expected an object")
    n = data.get("num_qubits")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise CircuitError("$.num_qubits: expected a non-negative integer")
    raw_ops = data.get("ops")
    if not isinstance(raw_ops, list):
        raise CircuitError("$.ops: expected a list")
    ops = []
    for i, raw in enumerate(raw_ops):
        path = f"$.ops[{i}]"
        if not isinstance(raw, dict):
            raise CircuitError(f"{path}: expected an object")
        kind = raw.get("kind")
        if kind not in KINDS:
            raise CircuitError(f"{path}.kind: expected one of {KINDS}, got {kind!r}")
        qubits = raw.get("qubits")
        if not isinstance(qubits, list) or not all(
            isinstance(q, int) and not isinstance(q, bool) for q in qubits
        ):
            raise CircuitError(f"{path}.qubits: expected a list of integers")
        label = raw.get("label", "")
        params = raw.get("params", [])
        if not isinstance(label, str):
            raise CircuitError(f"{path}.label: expected a string")
        if not isinstance(params, list) or not all(isinstance(p, str) for p in params):
            raise CircuitError(f"{path}.params: expected a list of strings")
        try:
            ops.append(Op(kind, tuple(qubits), label, tuple(params)))
        except CircuitError as exc:
            raise CircuitError(f"{path}: {exc}") from None
        for q in qubits:
            if not 0 <= q < n:
                raise CircuitError(f"{path}.qubits: qubit {q} out of range [0, {n})")
    try:
        return Circuit(n, tuple(ops))
    except CircuitError as exc:
        raise CircuitError(f"$.ops: {exc}") from None


# --- OpenQASM 2.0 subset ----------------------------------------------------

_ARG = re.compile(r"\s*([A-Za-z_]\w*)\s*(?:\[\s*(\d+)\s*\])?\s*")
_HEAD = re.compile(r"([A-Za-z_]\w*)\s*(?:\((.*?)\))?\s*(.*)$", re.S)


def _statements(text: str) -> Iterable[tuple[str, int, int]]:
    """Yield (statement, line, col) with comments stripped, split on ';'."""
    buf: list[str] = []
    start: tuple[int, int] | None = None
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if text.startswith("//", i):
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch in "{}":
            pos = start or (line, col)
            raise QasmError("blocks (gate definitions, control flow) are not supported", *pos)
        if ch == ";":
            if start is not None:
                yield "".join(buf).strip(), start[0], start[1]
            buf, start = [], None
        else:
            if start is None and not ch.isspace():
                start = (line, col)
            if start is not None:
                buf.append(ch)
        if ch == "\n":
            line, col = line + 1, 1
        else:
            col += 1
        i += 1
    if start is not None:
        raise QasmError("missing ';'", *start)


class _QasmReader:
    def __init__(self) -> None:
        self.qreg: tuple[str, int] | None = None
        self.cregs: dict[str, int] = {}
        self.ops: list[Op] = []
        self.measured: set[int] = set()

    def add(self, op: Op, line: int, col: int) -> None:
        for q in op.qubits:
            if q in self.measured:
                raise QasmError(f"qubit {q} used after measurement", line, col)
        if op.kind == MEASURE:
            self.measured.add(op.qubits[0])
        self.ops.append(op)

    def args(self, text: str, line: int, col: int) -> list[list[int]]:
        """Resolve comma-separated qubit operands; a bare register broadcasts."""
        out = []
        offset = 0
        for part in text.split(","):
            m = _ARG.fullmatch(part)
            acol = col + offset + (len(part) - len(part.lstrip()))
            offset += len(part) + 1
            if not m:
                raise QasmError(f"malformed operand {part.strip()!r}", line, acol)
            if self.qreg is None:
                raise QasmError("operand used before qreg declaration", line, acol)
            name, idx = m.group(1), m.group(2)
            reg, size = self.qreg
            if name != reg:
                raise QasmError(f"unknown quantum register {name!r}", line, acol)
            if idx is None:
                out.append(list(range(size)))
            else:
                q = int(idx)
                if q >= size:
                    raise QasmError(f"qubit index {q} out of range for {reg}[{size}]", line, acol)
                out.append([q])
        return out

    def statement(self, stmt: str, line: int, col: int) -> None:
        m = _HEAD.match(stmt)
        if not m:
            raise QasmError(f"cannot parse statement {stmt!r}", line, col)
        name, params, rest = m.group(1), m.group(2), m.group(3)
        rest_col = col + stmt.index(rest) if rest else col + len(stmt)
        if name == "OPENQASM":
            if not rest.strip().startswith("2"):
                raise QasmError(f"unsupported OpenQASM version {rest.strip()!r}", line, col)
            return
        if name == "include" or name == "barrier":
            return
        if name in ("qreg", "creg"):
            a = re.fullmatch(r"([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]\s*", rest)
            if not a:
                raise QasmError(f"malformed {name} declaration", line, col)
            reg, size = a.group(1), int(a.group(2))
            if name == "creg":
                self.cregs[reg] = size
            elif self.qreg is not None:
                raise QasmError("multiple quantum registers are not supported", line, col)
            else:
                self.qreg = (reg, size)
            return
        if name == "if":
            raise QasmError("classical control is not supported", line, col)
        if name in ("gate", "opaque", "reset"):
            raise QasmError(f"'{name}' statements are not supported", line, col)
        if name == "measure":
            if "->" not in rest:
                raise QasmError("measure needs '-> creg'", line, col)
            src = rest.split("->")[0]
            for group in self.args(src, line, rest_col):
                for q in group:
                    self.add(Op(MEASURE, (q,)), line, col)
            return
        plist = tuple(p.strip() for p in params.split(",")) if params else ()
        if name in ONE_QUBIT_GATES:
            if len(plist) != ONE_QUBIT_GATES[name]:
                raise QasmError(
                    f"gate {name} takes {ONE_QUBIT_GATES[name]} parameter(s), got {len(plist)}",
                    line, col,
                )
            groups = self.args(rest, line, rest_col)
            if len(groups) != 1:
                raise QasmError(f"gate {name} takes one operand", line, rest_col)
            for q in groups[0]:
                self.add(Op(ONE_Q, (q,), name, plist), line, col)
            return
        if name in TWO_QUBIT_GATES:
            groups = self.args(rest, line, rest_col)
            if len(groups) != 2:
                raise QasmError(f"gate {name} takes two operands", line, rest_col)
            a, b = groups
            if len(a) != len(b) and min(len(a), len(b)) != 1:
                raise QasmError("register size mismatch in broadcast", line, rest_col)
            width = max(len(a), len(b))
            for k in range(width):
                qa, qb = a[k if len(a) > 1 else 0], b[k if len(b) > 1 else 0]
                if qa == qb:
                    raise QasmError(f"gate {name} applied to the same qubit twice", line, rest_col)
                # swap costs three MS gates
                reps = 3 if name == "swap" else 1
                for _ in range(reps):
                    self.add(Op(TWO_Q, (qa, qb)), line, col)
            return
        raise QasmError(f"unknown gate {name!r}", line, col)


def parse_qasm(text: str) -> Circuit:
    reader = _QasmReader()
    for stmt, line, col in _statements(text):
        reader.statement(stmt, line, col)
    n = reader.qreg[1] if reader.qreg else 0
    return Circuit(n, tuple(reader.ops))


def _fmt_1q(op: Op) -> str:
    params = f"({','.join(op.params)})" if op.params else ""
    return f"{op.label}{params}"


def emit_qasm(c: Circuit) -> str:
    """Render as OpenQASM 2.0 such that ``parse_qasm`` gives back ``c``."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.num_qubits}];"]
    if any(op.kind == MEASURE for op in c.ops):
        lines.append(f"creg c[{c.num_qubits}];")
    for op in c.ops:
        if op.kind == ONE_Q:
            if ONE_QUBIT_GATES.get(op.label) != len(op.params):
                raise CircuitError(f"1q op {op.label!r}{op.params} has no OpenQASM spelling")
            lines.append(f"{_fmt_1q(op)} q[{op.qubits[0]}];")
        elif op.kind == TWO_Q:
            lines.append(f"cx q[{op.qubits[0]}],q[{op.qubits[1]}];")
        else:
            q = op.qubits[0]
            lines.append(f"measure q[{q}] -> c[{q}];")
    return "\n".join(lines) + "\n"


def load_circuit(path: str) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_json(text) if path.endswith(".json") else parse_qasm(text)
