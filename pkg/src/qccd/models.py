"""Physical performance models for QCCD devices.

Gate durations, shuttling operation durations, motional-energy bookkeeping
for split/merge/move, and two-qubit gate fidelity. All times are in
microseconds, energies in motional quanta.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Mapping, NamedTuple


class GateImpl(str, enum.Enum):
    AM1 = "AM1"
    AM2 = "AM2"
    PM = "PM"
    FM = "FM"


class ShuttleOp(str, enum.Enum):
    MOVE = "move"
    SPLIT = "split"
    MERGE = "merge"
    CROSS_Y = "y_cross"
    CROSS_X = "x_cross"


@dataclass(frozen=True)
class ShuttleTimes:
    move_per_segment: float = 5.0
    split: float = 80.0
    merge: float = 80.0
    y_cross: float = 100.0
    x_cross: float = 120.0


@dataclass(frozen=True)
class PhysicsParams:
    """Tunable physics constants.

    ``gamma`` is the background heating error rate in 1/s and ``A0`` scales
    the laser-instability term ``A(N) = A0 * N / ln N``. Neither is a measured
    quantity; the defaults put a 15-ion FM gate at roughly 1e-3 error from
    each term.
    """

    k1: float = 0.1
    k2: float = 0.01
    gamma: float = 10.0
    A0: float = 1.8e-4
    t_1q: float = 10.0
    f_1q_err: float = 1e-5
    t_meas: float = 100.0
    f_meas_err: float = 1e-3
    t_is_rotation: float = 80.0
    shuttle_times: ShuttleTimes = field(default_factory=ShuttleTimes)

    def __post_init__(self) -> None:
        times = [self.t_1q, self.t_meas, self.t_is_rotation, *asdict(self.shuttle_times).values()]
        if any(t < 0 for t in times):
            raise ValueError("operation times must be non-negative")
        for name in ("f_1q_err", "f_meas_err"):
            if not 0 <= getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.k1 < 0 or self.k2 < 0 or self.gamma < 0 or self.A0 < 0:
            raise ValueError("k1, k2, gamma and A0 must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> "PhysicsParams":
        return cls().with_overrides(data or {})

    def with_overrides(self, data: Mapping[str, Any]) -> "PhysicsParams":
        known = {f.name for f in fields(self)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown physics parameter(s): {sorted(unknown)}")
        kwargs = {k: v for k, v in data.items() if k != "shuttle_times"}
        if "shuttle_times" in data:
            st = data["shuttle_times"]
            bad = set(st) - {f.name for f in fields(ShuttleTimes)}
            if bad:
                raise ValueError(f"unknown shuttle time(s): {sorted(bad)}")
            kwargs["shuttle_times"] = replace(self.shuttle_times, **{k: float(v) for k, v in st.items()})
        return replace(self, **kwargs)


def gate_time(impl: GateImpl | str, d: int, n: int) -> float:
    """MS gate duration in microseconds.

    ``d`` is the positional separation of the two ions (adjacent ions have
    ``d == 1``) and ``n`` the number of ions in the chain.
    """
    impl = GateImpl(impl)
    if n < 2:
        raise ValueError(f"chain length must be >= 2, got {n}")
    if not 1 <= d <= n - 1:
        raise ValueError(f"separation d={d} outside [1, {n - 1}]")
    if impl is GateImpl.AM1:
        return 100.0 * d - 22.0
    if impl is GateImpl.AM2:
        return 38.0 * d + 10.0
    if impl is GateImpl.PM:
        return 5.0 * d + 160.0
    return max(13.33 * n - 54.0, 100.0)


def shuttle_op_time(op: ShuttleOp | str, p: PhysicsParams, n_segments: int = 1) -> float:
    op = ShuttleOp(op)
    st = p.shuttle_times
    if op is ShuttleOp.MOVE:
        if n_segments < 1:
            raise ValueError("a move covers at least one segment")
        return st.move_per_segment * n_segments
    return {
        ShuttleOp.SPLIT: st.split,
        ShuttleOp.MERGE: st.merge,
        ShuttleOp.CROSS_Y: st.y_cross,
        ShuttleOp.CROSS_X: st.x_cross,
    }[op]


def heat_split(e: float, n_total: int, n_left: int, p: PhysicsParams) -> tuple[float, float]:
    """Energies of the (left, right) sub-chains after splitting ``n_total`` ions."""
    if not 1 <= n_left < n_total:
        raise ValueError(f"cannot split {n_total} ions into {n_left} + {n_total - n_left}")
    left = e * n_left / n_total + p.k1
    right = e * (n_total - n_left) / n_total + p.k1
    return left, right


def heat_merge(e1: float, e2: float, p: PhysicsParams) -> float:
    return e1 + e2 + p.k1


def heat_move(e: float, n_segments: int, p: PhysicsParams) -> float:
    if n_segments < 0:
        raise ValueError("negative segment count")
    return e + p.k2 * n_segments


class GateFidelity(NamedTuple):
    fidelity: float
    background: float
    motional: float


def laser_instability(n: int, p: PhysicsParams) -> float:
    return p.A0 * n / math.log(n)


def two_qubit_fidelity(tau: float, n_bar: float, n: int, p: PhysicsParams) -> GateFidelity:
    """Fidelity of one MS gate of duration ``tau`` (us) on an ``n``-ion chain.

    ``1 - F`` splits into a background-heating term proportional to ``tau``
    and a thermal term growing with chain energy ``n_bar``. The returned
    fidelity is clamped at 0; the error terms are not.
    """
    if n < 2:
        raise ValueError("two-qubit gates need a chain of at least 2 ions")
    background = p.gamma * tau * 1e-6
    motional = laser_instability(n, p) * (2.0 * n_bar + 1.0)
    return GateFidelity(max(0.0, 1.0 - background - motional), background, motional)


def one_qubit_fidelity(p: PhysicsParams) -> float:
    return 1.0 - p.f_1q_err


def measure_fidelity(p: PhysicsParams) -> float:
    return 1.0 - p.f_meas_err
