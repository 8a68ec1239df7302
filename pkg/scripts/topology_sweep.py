"""Linear vs grid topology at equal capacity."""

from _common import ROOT, run

SPEC = {
    "circuits": [
        str(ROOT / "fixtures" / "irregular48.qasm"),
        {"family": "QFT", "n": 48},
        {"family": "BV", "n": 47},
        {"family": "QAOA_NN", "n": 48},
        {"family": "RandomNN", "n": 48, "depth": 20, "seed": 7},
    ],
    "device": {"gate": "FM", "reorder": "GS"},
    "axes": {"capacity": [12, 16, 20, 24], "topology": ["L6", "G2x3"]},
}

if __name__ == "__main__":
    run(SPEC, "topology_sweep.csv",
        ["circuit", "capacity", "topology", "fidelity", "makespan_us", "n_split", "n_cross", "error"])
