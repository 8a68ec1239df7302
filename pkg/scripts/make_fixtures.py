"""Regenerate the files in fixtures/. Output is deterministic."""

import json
import pathlib

import numpy as np

from qccd.ir import ONE_Q, TWO_Q, Circuit, Op, emit_qasm

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def irregular(n=48, gates=80, seed=0):
    """Uniformly random qubit pairs: most gates span distant traps."""
    rng = np.random.default_rng(seed)
    ops = [Op(ONE_Q, (q,), "h") for q in range(n)]
    for _ in range(gates):
        a, b = rng.choice(n, 2, replace=False)
        ops.append(Op(TWO_Q, (int(a), int(b))))
    return Circuit(n, ops)


DEVICES = {
    "l6.json": {"topology": {"type": "linear", "traps": 6}, "capacity": 20, "gate": "FM", "reorder": "GS"},
    "g2x3.json": {"topology": {"type": "grid", "rows": 2, "cols": 3}, "capacity": 20, "gate": "FM", "reorder": "GS"},
}

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    (OUT / "irregular48.qasm").write_text(emit_qasm(irregular()))
    for name, cfg in DEVICES.items():
        (OUT / name).write_text(json.dumps(cfg, indent=2) + "\n")
    print("wrote", sorted(p.name for p in OUT.iterdir()))
