"""Reusable circuit families and the benchmark-suite generator."""
from __future__ import annotations

import math

import numpy as np

from .circuit import Circuit


def ghz_circuit(n: int, measured: bool = True) -> Circuit:
    c = Circuit(n, n if measured else 0, name=f"ghz_{n}")
    c.gate("h", 0)
    for q in range(n - 1):
        c.gate("cx", q, q + 1)
    if measured:
        c.measure_all()
    return c


def w_state_circuit(n: int, measured: bool = True) -> Circuit:
    """Equal superposition of the n one-hot basis states.

    Cascade construction: a controlled ry spreads amplitude from qubit k-1
    onto qubit k, then a cx moves the excitation.  The controlled ry is
    expanded as ry(t/2); cx; ry(-t/2); cx, which is exact.
    """
    c = Circuit(n, n if measured else 0, name=f"w_{n}")
    c.gate("x", 0)
    for k in range(1, n):
        # keep 1/sqrt(n) of the remaining sqrt((n-k+1)/n) amplitude behind
        theta = 2.0 * math.acos(1.0 / math.sqrt(n - k + 1))
        c.gate("ry", k, params=(theta / 2.0,))
        c.gate("cx", k - 1, k)
        c.gate("ry", k, params=(-theta / 2.0,))
        c.gate("cx", k - 1, k)
        c.gate("cx", k, k - 1)
    if measured:
        c.measure_all()
    return c


def qaoa_line_circuit(
    n: int, layers: int, seed: int, measured: bool = True
) -> Circuit:
    """QAOA on the path graph: nearest-neighbor zz couplers plus x mixers."""
    rng = np.random.default_rng(seed)
    c = Circuit(n, n if measured else 0, name=f"qaoa_line_{n}x{layers}")
    for q in range(n):
        c.gate("h", q)
    for _ in range(layers):
        gamma = float(rng.uniform(0.1, math.pi - 0.1))
        beta = float(rng.uniform(0.1, math.pi - 0.1))
        for q in range(n - 1):
            c.gate("cx", q, q + 1)
            c.gate("rz", q + 1, params=(2.0 * gamma,))
            c.gate("cx", q, q + 1)
        for q in range(n):
            c.gate("rx", q, params=(2.0 * beta,))
    if measured:
        c.measure_all()
    return c


def ry_ansatz_circuit(
    n: int, layers: int, seed: int, measured: bool = True
) -> Circuit:
    """Hardware-efficient ansatz: ry layers separated by cx ladders."""
    rng = np.random.default_rng(seed)
    c = Circuit(n, n if measured else 0, name=f"ry_ansatz_{n}x{layers}")
    for _ in range(layers):
        for q in range(n):
            c.gate("ry", q, params=(float(rng.uniform(0, 2 * math.pi)),))
        for q in range(n - 1):
            c.gate("cx", q, q + 1)
    for q in range(n):
        c.gate("ry", q, params=(float(rng.uniform(0, 2 * math.pi)),))
    if measured:
        c.measure_all()
    return c


_CLIFFORD_1Q = ("h", "s", "sdg", "x", "y", "z")


def clifford_circuit(
    n: int, n_gates: int, seed: int, measured: bool = True
) -> Circuit:
    """Random Clifford word biased toward nearest-neighbor cx gates."""
    rng = np.random.default_rng(seed)
    c = Circuit(n, n if measured else 0, name=f"clifford_{n}_{seed}")
    for _ in range(n_gates):
        if n > 1 and rng.random() < 0.4:
            a = int(rng.integers(0, n - 1))
            c.gate("cx", a, a + 1)
        else:
            c.gate(str(rng.choice(_CLIFFORD_1Q)), int(rng.integers(0, n)))
    if measured:
        c.measure_all()
    return c


def clifford_t_circuit(
    n: int, n_gates: int, seed: int, measured: bool = True
) -> Circuit:
    """Dense Clifford+T word with cx over arbitrary qubit pairs."""
    rng = np.random.default_rng(seed)
    c = Circuit(n, n if measured else 0, name=f"clifford_t_{n}_{seed}")
    for _ in range(n_gates):
        roll = rng.random()
        if n > 1 and roll < 0.35:
            a, b = rng.choice(n, size=2, replace=False)
            c.gate("cx", int(a), int(b))
        elif roll < 0.6:
            c.gate(str(rng.choice(("t", "tdg"))), int(rng.integers(0, n)))
        else:
            c.gate(str(rng.choice(_CLIFFORD_1Q)), int(rng.integers(0, n)))
    if measured:
        c.measure_all()
    return c


# --- benchmark suite ---------------------------------------------------------


def _ramp(i: int, count: int, lo: int, hi: int) -> int:
    """Integer ramp from lo to hi inclusive as i runs over range(count)."""
    return lo + ((hi - lo) * i) // (count - 1)


def _family_circuits(per_family: int, seed: int) -> tuple[list, list, list]:
    # Per-circuit seeds are derived arithmetically from the master seed so
    # the same seed always regenerates identical files.
    sub = lambda i: seed * 10007 + i

    clifford = []
    for i in range(per_family):
        n = _ramp(i, per_family, 4, 24)
        clifford.append(clifford_circuit(n, 2 * n, seed=sub(i)))

    low_ent = []
    for i in range(per_family):
        n = _ramp(i, per_family, 4, 24)
        kind = i % 3
        if kind == 0:
            low_ent.append(ghz_circuit(n))
        elif kind == 1:
            low_ent.append(qaoa_line_circuit(n, 1, seed=sub(100 + i)))
        else:
            low_ent.append(ry_ansatz_circuit(n, 2, seed=sub(200 + i)))

    high_ent = []
    for i in range(per_family):
        n = _ramp(i, per_family, 4, 12)
        high_ent.append(clifford_t_circuit(n, 8 * n, seed=sub(300 + i)))

    return clifford, low_ent, high_ent


def generate_torture_suite(seed: int = 0, per_family: int = 30) -> list[Circuit]:
    """Mixed benchmark batch: equal thirds of shallow nearest-neighbor
    Clifford words (4-24 qubits), low-entanglement structured circuits
    (GHZ / line QAOA / ry ansatz, 4-24 qubits), and dense Clifford+T words
    (4-12 qubits).  Deterministic in the seed."""
    clifford, low_ent, high_ent = _family_circuits(per_family, seed)
    circuits = clifford + low_ent + high_ent
    for i, c in enumerate(circuits):
        c.name = f"{i:02d}_{c.name}"
    return circuits


def generate_validation_suite(seed: int = 1, per_family: int = 20) -> list[Circuit]:
    """Smaller mixed set drawn from the same three families, for checking
    backend-selection quality against measured runtimes."""
    clifford, low_ent, high_ent = _family_circuits(per_family, seed)
    circuits = clifford + low_ent + high_ent
    for i, c in enumerate(circuits):
        c.name = f"v{i:02d}_{c.name}"
    return circuits


def write_suite(circuits: list[Circuit], out_dir: str) -> list[str]:
    """Write each circuit to out_dir as OpenQASM, returning the paths."""
    import os

    from .qasm import to_qasm

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for c in circuits:
        path = os.path.join(out_dir, f"{c.name}.qasm")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(to_qasm(c))
        paths.append(path)
    return paths
