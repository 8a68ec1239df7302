"""Benchmark circuit generators.

Two-qubit counts follow closed forms: QFT ``n(n-1)/2`` (one entangling gate
per controlled phase), BV ``popcount(secret)``, QAOA_NN ``p(n-1)`` and
RandomNN ``sum over layers of the brickwork pair count``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ir import MEASURE, ONE_Q, TWO_Q, Circuit, Op, emit_qasm  # noqa: F401  (re-export)


class Family(str, enum.Enum):
    QFT = "QFT"
    BV = "BV"
    QAOA_NN = "QAOA_NN"
    RANDOM_NN = "RandomNN"


@dataclass(frozen=True)
class BenchSpec:
    family: Family
    n: int
    secret: Optional[str] = None  # BV, defaults to all ones
    layers: int = 1  # QAOA_NN
    depth: int = 0  # RandomNN
    seed: Optional[int] = None  # RandomNN

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if self.n < 2:
            raise ValueError("benchmarks need n >= 2")
        if self.family is Family.BV and self.secret is not None:
            if len(self.secret) != self.n or set(self.secret) - {"0", "1"}:
                raise ValueError(f"BV secret must be a {self.n}-bit 0/1 string")
        if self.family is Family.QAOA_NN and self.layers < 1:
            raise ValueError("QAOA_NN needs at least one layer")
        if self.family is Family.RANDOM_NN:
            if self.seed is None:
                raise ValueError("RandomNN requires a seed")
            if self.depth < 1:
                raise ValueError("RandomNN needs depth >= 1")


def qft(n: int) -> Circuit:
    ops = []
    for i in range(n):
        ops.append(Op(ONE_Q, (i,), "h"))
        for j in range(i + 1, n):
            ops.append(Op(TWO_Q, (j, i)))
    return Circuit(n, ops)


def bv(n: int, secret: Optional[str] = None) -> Circuit:
    """Bernstein-Vazirani on ``n`` data qubits plus an ancilla (qubit ``n``)."""
    secret = secret or "1" * n
    anc = n
    ops = [Op(ONE_Q, (anc,), "x"), Op(ONE_Q, (anc,), "h")]
    ops += [Op(ONE_Q, (i,), "h") for i in range(n)]
    ops += [Op(TWO_Q, (i, anc)) for i, bit in enumerate(secret) if bit == "1"]
    ops += [Op(ONE_Q, (i,), "h") for i in range(n)]
    ops += [Op(MEASURE, (i,)) for i in range(n)]
    return Circuit(n + 1, ops)


def qaoa_nn(n: int, layers: int = 1) -> Circuit:
    ops = [Op(ONE_Q, (i,), "h") for i in range(n)]
    for _ in range(layers):
        ops += [Op(TWO_Q, (i, i + 1)) for i in range(n - 1)]
        ops += [Op(ONE_Q, (i,), "rx", ("0.5",)) for i in range(n)]
    return Circuit(n, ops)


_RANDOM_1Q = (("rx", ("pi/2",)), ("ry", ("pi/2",)), ("t", ()))


def random_nn(n: int, depth: int, seed: int) -> Circuit:
    """Brickwork of nearest-neighbour entanglers, each layer preceded by a
    random single-qubit gate on every qubit."""
    rng = np.random.default_rng(seed)
    ops = []
    for layer in range(depth):
        for q, pick in enumerate(rng.integers(len(_RANDOM_1Q), size=n)):
            label, params = _RANDOM_1Q[int(pick)]
            ops.append(Op(ONE_Q, (q,), label, params))
        ops += [Op(TWO_Q, (i, i + 1)) for i in range(layer % 2, n - 1, 2)]
    return Circuit(n, ops)


def brickwork_pairs(n: int, depth: int) -> int:
    return sum((n - layer % 2) // 2 for layer in range(depth))


def gen(spec: BenchSpec) -> Circuit:
    if spec.family is Family.QFT:
        return qft(spec.n)
    if spec.family is Family.BV:
        return bv(spec.n, spec.secret)
    if spec.family is Family.QAOA_NN:
        return qaoa_nn(spec.n, spec.layers)
    assert spec.seed is not None
    return random_nn(spec.n, spec.depth, spec.seed)
