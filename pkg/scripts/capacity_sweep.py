"""Trap capacity sweep on L6: fidelity, runtime split and heating vs capacity."""

from _common import run

SPEC = {
    "circuits": [
        {"family": "RandomNN", "n": 60, "depth": 20, "seed": 7},
        {"family": "QFT", "n": 48},
        {"family": "BV", "n": 47},
        {"family": "QAOA_NN", "n": 48, "layers": 2},
    ],
    "device": {"topology": "L6", "gate": "FM", "reorder": "GS"},
    "axes": {"capacity": [10, 15, 20, 25, 30, 35]},
}

if __name__ == "__main__":
    run(SPEC, "capacity_sweep.csv",
        ["circuit", "capacity", "fidelity", "makespan_us", "compute_us", "communicate_us",
         "max_motional_energy", "background_error_sum", "motional_error_sum", "error"])
