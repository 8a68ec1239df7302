"""Hand-derived reference values, computed without touching qccd code."""

import math

GAMMA, A0, K1, K2 = 10.0, 1.8e-4, 0.1, 0.01


def ms_fidelity(tau_us, nbar, n):
    return 1 - GAMMA * tau_us * 1e-6 - A0 * (n / math.log(n)) * (2 * nbar + 1)


def golden():
    """2-trap linear device, capacity 4, FM gates, GS reordering.

    Circuit 2q(0,1), 2q(2,3), 2q(0,3); layout T0=[0,1], T1=[2,3].
    Both candidate moves for the last gate cost the same (one swap plus the
    shuttle) and both traps hold 2 ions, so ion 3 leaves the higher-id trap.
    It sits away from T1's exit, so it is first swapped with ion 2.
    """
    fm = 100.0  # 13.33 N - 54 < 100 for N <= 11
    rows = [
        # kind, start, end, nbar at execution
        ("gate_ms", 0.0, 100.0, 0.0),  # (0,1) in T0
        ("gate_ms", 0.0, 100.0, 0.0),  # (2,3) in T1
        ("swap_gs", 100.0, 400.0, 0.0),  # 3 MS at d=1, N=2
        ("split", 400.0, 480.0, 0.0),  # parent chain energy
        ("move", 480.0, 485.0, K1 + K2),  # ion leaves with 0*1/2 + k1, then one segment
        ("merge", 485.0, 565.0, 0.0 + (K1 + K2) + K1),
        ("gate_ms", 565.0, 665.0, 2 * K1 + K2),  # (0,3) at d=2 in a 3-chain
    ]
    f2 = ms_fidelity(fm, 0.0, 2)
    f3 = ms_fidelity(fm, 2 * K1 + K2, 3)
    return {
        "rows": rows,
        "makespan": 665.0,
        "fidelity": f2 ** 5 * f3,
        "max_energy": 2 * K1 + K2,
        "compute": 100.0 + 300.0 + 100.0,
        "communicate": 80.0 + 5.0 + 80.0,
        "t1_energy_after": K1,
    }
