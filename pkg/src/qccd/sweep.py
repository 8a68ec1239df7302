"""Design-space sweeps: a cartesian product of device axes over circuits.

A sweep spec is JSON::

    {
      "circuits": ["fixtures/irregular48.qasm",
                   {"family": "RandomNN", "n": 60, "depth": 20, "seed": 7}],
      "device": {"topology": {"type": "linear", "traps": 6}, "capacity": 20},
      "axes": {"capacity": [15, 20], "topology": ["L6", "G2x3"],
               "gate": ["FM"], "reorder": ["GS"], "physics": [{"gamma": 1.0}]},
      "output": "sweep.csv"
    }

Every axis is optional; a missing axis takes the base device value, so empty
axes give one row per circuit. Rows come out in circuit-major, then axis
order (capacity, topology, gate, reorder, physics) whatever the concurrency.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Union

from .bench import BenchSpec, gen
from .compiler import CompileError, compile_circuit, validate
from .device import DeviceError, hardware_from_config
from .ir import Circuit, CircuitError, load_circuit
from .program import Kind
from .sim import SimulationError, simulate

AXES = ("capacity", "topology", "gate", "reorder", "physics")
METRIC_COLUMNS = (
    "makespan_us", "fidelity", "log_fidelity", "max_motional_energy",
    "background_error_sum", "motional_error_sum", "compute_us", "communicate_us",
)
COLUMNS = (
    ("circuit",) + AXES + METRIC_COLUMNS + tuple(f"n_{k.value}" for k in Kind) + ("error",)
)

CircuitSource = Union[str, Mapping[str, Any]]


class SweepError(ValueError):
    pass


def parse_topology(t: Union[str, Mapping[str, Any]]) -> dict[str, Any]:
    """``"L6"`` -> 6-trap linear, ``"G2x3"`` -> 2x3 grid; mappings pass through."""
    if isinstance(t, Mapping):
        return dict(t)
    m = re.fullmatch(r"L(\d+)", t)
    if m:
        return {"type": "linear", "traps": int(m[1])}
    m = re.fullmatch(r"G(\d+)x(\d+)", t)
    if m:
        return {"type": "grid", "rows": int(m[1]), "cols": int(m[2])}
    raise SweepError(f"unknown topology shorthand {t!r} (use e.g. L6 or G2x3)")


def topology_name(t: Mapping[str, Any]) -> str:
    if t.get("type") == "linear":
        return f"L{t['traps']}"
    if t.get("type") == "grid":
        return f"G{t['rows']}x{t['cols']}"
    return "custom"


def circuit_name(src: CircuitSource) -> str:
    if isinstance(src, str):
        return os.path.basename(src)
    s = BenchSpec(**src)
    extra = {"BV": f",s={s.secret}" if s.secret else "", "QAOA_NN": f",p={s.layers}",
             "RandomNN": f",d={s.depth},seed={s.seed}"}.get(s.family.value, "")
    return f"{s.family.value}({s.n}{extra})"


def load_source(src: CircuitSource) -> Circuit:
    if isinstance(src, str):
        return load_circuit(src)
    return gen(BenchSpec(**src))


@dataclass(frozen=True)
class Point:
    circuit: CircuitSource
    capacity: int
    topology: dict[str, Any]
    gate: str
    reorder: str
    physics: dict[str, Any]
    base: dict[str, Any] = field(default_factory=dict)

    def params(self) -> dict[str, Any]:
        return {
            "circuit": circuit_name(self.circuit),
            "capacity": self.capacity,
            "topology": topology_name(self.topology),
            "gate": self.gate,
            "reorder": self.reorder,
            "physics": json.dumps(self.physics, sort_keys=True, separators=(",", ":")),
        }


@dataclass
class SweepSpec:
    circuits: list[CircuitSource]
    device: dict[str, Any] = field(default_factory=dict)
    axes: dict[str, list[Any]] = field(default_factory=dict)
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.circuits:
            raise SweepError("a sweep needs at least one circuit")
        unknown = set(self.axes) - set(AXES)
        if unknown:
            raise SweepError(f"unknown sweep axes {sorted(unknown)}; expected {list(AXES)}")
        for k, v in self.axes.items():
            if not isinstance(v, list) or not v:
                raise SweepError(f"axis {k!r} must be a non-empty list")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SweepSpec":
        extra = set(d) - {"circuits", "device", "axes", "output"}
        if extra:
            raise SweepError(f"unknown sweep keys {sorted(extra)}")
        if "circuits" not in d:
            raise SweepError("sweep spec is missing 'circuits'")
        return cls(list(d["circuits"]), dict(d.get("device", {})), dict(d.get("axes", {})), d.get("output"))

    @classmethod
    def load(cls, path: str) -> "SweepSpec":
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise SweepError(f"{path}: invalid JSON: {exc}") from None

    def points(self) -> list[Point]:
        base = self.device
        defaults = {
            "capacity": [int(base.get("capacity", 25))],
            "topology": [base.get("topology", {"type": "linear", "traps": 6})],
            "gate": [base.get("gate", "FM")],
            "reorder": [base.get("reorder", "GS")],
            "physics": [{}],
        }
        axes = [self.axes.get(k, defaults[k]) for k in AXES]
        out = []
        for src in self.circuits:
            for cap, topo, gate, reorder, phys in itertools.product(*axes):
                out.append(Point(src, int(cap), parse_topology(topo), str(gate), str(reorder), dict(phys), base))
        return out


def run_point(pt: Point) -> dict[str, Any]:
    row: dict[str, Any] = dict.fromkeys(COLUMNS, "")
    row.update(pt.params())
    try:
        cfg = dict(pt.base)
        cfg["topology"] = pt.topology
        physics = dict(cfg.get("physics", {}))
        physics.update(pt.physics)
        cfg["physics"] = physics
        hw = hardware_from_config(cfg, gate=pt.gate, reorder=pt.reorder, capacity=pt.capacity)
        c = load_source(pt.circuit)
        prog = compile_circuit(c, hw)
        report = validate(prog, hw, c)
        if not report:
            raise CompileError(f"invalid program: {report.message}")
        m = simulate(prog, hw)
    except (CompileError, DeviceError, CircuitError, SimulationError, ValueError, OSError) as exc:
        row["error"] = str(exc)
        return row
    d = m.to_dict()
    for k in METRIC_COLUMNS:
        row[k] = "" if d[k] is None else repr(d[k])
    for k, v in m.op_counts.items():
        row[f"n_{k}"] = v
    return row


def workers() -> int:
    env = os.environ.get("QCCD_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise SweepError(f"QCCD_THREADS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise SweepError("QCCD_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, max_workers: Optional[int] = None) -> list[dict[str, Any]]:
    pts = spec.points()
    n = min(max_workers or workers(), len(pts))
    if n <= 1:
        return [run_point(p) for p in pts]
    with ProcessPoolExecutor(max_workers=n) as pool:
        # map preserves input order, so rows stay canonical
        return list(pool.map(run_point, pts))


def to_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
