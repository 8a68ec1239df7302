"""Gate implementation and reordering method on L6."""

from _common import run

SPEC = {
    "circuits": [
        {"family": "QFT", "n": 20},
        {"family": "QAOA_NN", "n": 20, "layers": 2},
        {"family": "RandomNN", "n": 32, "depth": 16, "seed": 7},
    ],
    "device": {"topology": "L6", "capacity": 20},
    "axes": {"gate": ["AM1", "AM2", "PM", "FM"], "reorder": ["GS", "IS"]},
}

if __name__ == "__main__":
    run(SPEC, "microarch_sweep.csv",
        ["circuit", "gate", "reorder", "fidelity", "makespan_us", "n_swap_gs", "n_swap_is", "error"])
