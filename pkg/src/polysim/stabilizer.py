"""Stabilizer backend: binary tableau simulation of Clifford circuits.

The tableau holds 2n rows of X and Z bits plus a phase column; rows 0..n-1
are destabilizers, rows n..2n-1 stabilizers.  Gate updates are vectorized
over rows, so circuits with hundreds of qubits stay cheap.
"""
from __future__ import annotations

import time

import numpy as np

from .circuit import ONE_QUBIT_CLIFFORD, Circuit
from .result import BackendError, NoMeasurementsError, RunResult, clbit_order, measurement_map, pack_bitstring


class NotCliffordError(BackendError):
    """Raised when a non-Clifford gate reaches the tableau backend."""


class Tableau:
    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        self.x[np.arange(n), np.arange(n)] = 1          # destabilizers X_i
        self.z[n + np.arange(n), np.arange(n)] = 1      # stabilizers Z_i

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        return t

    # --- Clifford gates ----------------------------------------------------

    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def sdg(self, q: int) -> None:
        self.r ^= self.x[:, q] & (self.z[:, q] ^ 1)
        self.z[:, q] ^= self.x[:, q]

    def x_gate(self, q: int) -> None:
        self.r ^= self.z[:, q]

    def y_gate(self, q: int) -> None:
        self.r ^= self.x[:, q] ^ self.z[:, q]

    def z_gate(self, q: int) -> None:
        self.r ^= self.x[:, q]

    def cx(self, c: int, t: int) -> None:
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cz(self, a: int, b: int) -> None:
        self.h(b)
        self.cx(a, b)
        self.h(b)

    def swap(self, a: int, b: int) -> None:
        self.cx(a, b)
        self.cx(b, a)
        self.cx(a, b)

    def apply(self, inst) -> None:
        kind = inst.kind
        if kind == "barrier":
            return
        if kind in ONE_QUBIT_CLIFFORD:
            q = inst.qubits[0]
            if kind == "h":
                self.h(q)
            elif kind == "s":
                self.s(q)
            elif kind == "sdg":
                self.sdg(q)
            elif kind == "x":
                self.x_gate(q)
            elif kind == "y":
                self.y_gate(q)
            else:
                self.z_gate(q)
            return
        if kind == "cx":
            self.cx(*inst.qubits)
        elif kind == "cz":
            self.cz(*inst.qubits)
        elif kind == "swap":
            self.swap(*inst.qubits)
        else:
            raise NotCliffordError(f"{kind} is not simulable on a tableau")

    # --- measurement ---------------------------------------------------------

    def _phase_exponents(self, rows: np.ndarray, p: int) -> np.ndarray:
        """Sum of single-qubit phase contributions for multiplying rows by row p."""
        x1, z1 = self.x[p].astype(np.int64), self.z[p].astype(np.int64)
        x2, z2 = self.x[rows].astype(np.int64), self.z[rows].astype(np.int64)
        g = np.zeros_like(x2)
        both = (x1 == 1) & (z1 == 1)
        only_x = (x1 == 1) & (z1 == 0)
        only_z = (x1 == 0) & (z1 == 1)
        g += np.where(both, z2 - x2, 0)
        g += np.where(only_x, z2 * (2 * x2 - 1), 0)
        g += np.where(only_z, x2 * (1 - 2 * z2), 0)
        return g.sum(axis=1)

    def _rowsum_many(self, rows: np.ndarray, p: int) -> None:
        """row_i <- row_i * row_p for every i in rows (phases mod 4)."""
        if rows.size == 0:
            return
        total = 2 * self.r[rows].astype(np.int64) + 2 * int(self.r[p])
        total += self._phase_exponents(rows, p)
        self.r[rows] = ((total % 4) // 2).astype(np.uint8)
        self.x[rows] ^= self.x[p]
        self.z[rows] ^= self.z[p]

    def measure(self, q: int, rng: np.random.Generator) -> int:
        n = self.n
        stab_x = self.x[n:, q]
        anticommuting = np.flatnonzero(stab_x)
        if anticommuting.size:
            p = n + int(anticommuting[0])
            others = np.flatnonzero(self.x[:, q])
            others = others[others != p]
            self._rowsum_many(others, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, q] = 1
            outcome = int(rng.integers(2))
            self.r[p] = outcome
            return outcome
        # Deterministic outcome: accumulate stabilizer products on a scratch row.
        scratch_x = np.zeros(n, dtype=np.uint8)
        scratch_z = np.zeros(n, dtype=np.uint8)
        scratch_r = 0
        for i in np.flatnonzero(self.x[:n, q]):
            p = n + int(i)
            x1, z1 = self.x[p].astype(np.int64), self.z[p].astype(np.int64)
            x2, z2 = scratch_x.astype(np.int64), scratch_z.astype(np.int64)
            g = np.where(
                (x1 == 1) & (z1 == 1),
                z2 - x2,
                np.where(
                    (x1 == 1) & (z1 == 0),
                    z2 * (2 * x2 - 1),
                    np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0),
                ),
            ).sum()
            total = 2 * scratch_r + 2 * int(self.r[p]) + g
            scratch_r = (total % 4) // 2
            scratch_x ^= self.x[p]
            scratch_z ^= self.z[p]
        return int(scratch_r)

    def reset(self, q: int, rng: np.random.Generator) -> None:
        if self.measure(q, rng) == 1:
            self.x_gate(q)

    # --- validation helpers --------------------------------------------------

    def symplectic_products(self) -> np.ndarray:
        """Pairwise commutation table: entry (i,j) is 1 when rows anticommute."""
        x = self.x.astype(np.int64)
        z = self.z.astype(np.int64)
        return ((x @ z.T) + (z @ x.T)) % 2


def run(c: Circuit, shots: int, seed: int) -> RunResult:
    """Clifford execution: shared prefix, per-shot replay of the measuring tail."""
    if shots < 1:
        raise ValueError("shots must be positive")
    measures = measurement_map(c)
    if not measures:
        raise NoMeasurementsError("circuit has no measurements")
    start = time.perf_counter()
    split = next(
        i for i, inst in enumerate(c.instructions) if inst.kind in ("measure", "reset")
    )
    prefix = Tableau(c.n_qubits)
    for inst in c.instructions[:split]:
        prefix.apply(inst)
    suffix = [i for i in c.instructions[split:] if i.kind != "barrier"]
    clbits = clbit_order(measures)
    rng = np.random.default_rng(seed)
    counts: dict[str, int] = {}
    for _ in range(shots):
        tab = prefix.copy()
        values: dict[int, int] = {}
        for inst in suffix:
            if inst.kind == "measure":
                values[inst.clbit] = tab.measure(inst.qubits[0], rng)
            elif inst.kind == "reset":
                tab.reset(inst.qubits[0], rng)
            else:
                tab.apply(inst)
        key = pack_bitstring(values, clbits)
        counts[key] = counts.get(key, 0) + 1
    wall = time.perf_counter() - start
    return RunResult(counts=counts, shots=shots, backend="stab", seed=seed, wall_time=wall)
