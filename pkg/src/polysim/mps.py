"""Matrix-product-state backend.

Site tensors have shape (chi_left, 2, chi_right) with qubit q at site q.
Two-site updates contract the neighboring tensors, apply the gate, and split
back with an SVD truncated to chi_max; singular values below 1e-14 of the
largest are dropped as numerically zero and the kept spectrum is renormalized,
with the discarded weight accumulated on the state.  Gates on non-adjacent
qubits ride swap chains, each swap itself a truncated two-site update.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import gates
from .circuit import ONE_QUBIT_GATES, Circuit
from .features import extract_features
from .result import (
    BackendError,
    NoMeasurementsError,
    RunResult,
    clbit_order,
    measurement_map,
    pack_bitstring,
)

REL_CUTOFF = 1e-14
DEFAULT_CHI_CAP = 256

_SWAP_LOCAL = gates.two_qubit_matrix("swap")


class ChiCapError(BackendError):
    """Bond dimension doubling passed the cap without reaching the threshold."""


class MpsState:
    def __init__(self, n: int, chi_max: int):
        if n < 1:
            raise ValueError("need at least one site")
        if chi_max < 1:
            raise ValueError("chi_max must be at least 1")
        self.n = n
        self.chi_max = chi_max
        self.tensors = []
        for _ in range(n):
            t = np.zeros((1, 2, 1), dtype=complex)
            t[0, 0, 0] = 1.0
            self.tensors.append(t)
        self.center = 0
        self.truncation_error = 0.0

    @classmethod
    def random(cls, n: int, chi: int, rng: np.random.Generator) -> "MpsState":
        """A normalized random state with interior bonds saturated at chi."""
        state = cls(n, chi)
        dims = [1] + [min(chi, 2 ** min(i + 1, n - i - 1)) for i in range(n - 1)] + [1]
        state.tensors = [
            (rng.normal(size=(dims[i], 2, dims[i + 1]))
             + 1j * rng.normal(size=(dims[i], 2, dims[i + 1])))
            for i in range(n)
        ]
        state.center = 0
        state.move_center(n - 1)
        state.move_center(0)
        t = state.tensors[0]
        state.tensors[0] = t / np.linalg.norm(t)
        return state

    def copy(self) -> "MpsState":
        dup = MpsState.__new__(MpsState)
        dup.n = self.n
        dup.chi_max = self.chi_max
        dup.tensors = [t.copy() for t in self.tensors]
        dup.center = self.center
        dup.truncation_error = self.truncation_error
        return dup

    def bond_dims(self) -> list[int]:
        return [self.tensors[i].shape[2] for i in range(self.n - 1)]

    def norm(self) -> float:
        target = self.center
        return float(np.linalg.norm(self.tensors[target]))

    # --- canonical form ------------------------------------------------------

    def move_center(self, target: int) -> None:
        while self.center < target:
            i = self.center
            chi_l, _, chi_r = self.tensors[i].shape
            q, r = np.linalg.qr(self.tensors[i].reshape(chi_l * 2, chi_r))
            self.tensors[i] = q.reshape(chi_l, 2, -1)
            self.tensors[i + 1] = np.tensordot(r, self.tensors[i + 1], axes=(1, 0))
            self.center = i + 1
        while self.center > target:
            i = self.center
            chi_l, _, chi_r = self.tensors[i].shape
            q, r = np.linalg.qr(self.tensors[i].reshape(chi_l, 2 * chi_r).T)
            self.tensors[i] = q.T.reshape(-1, 2, chi_r)
            self.tensors[i - 1] = np.tensordot(self.tensors[i - 1], r.T, axes=(2, 0))
            self.center = i - 1

    # --- gates -----------------------------------------------------------------

    def apply_1q(self, q: int, m: np.ndarray) -> None:
        self.tensors[q] = np.tensordot(m, self.tensors[q], axes=(1, 1)).transpose(1, 0, 2)

    def apply_two_site(self, left: int, m4: np.ndarray) -> None:
        """Apply a 4x4 gate (site `left` is the low bit) to sites left, left+1."""
        if self.center < left:
            self.move_center(left)
        elif self.center > left + 1:
            self.move_center(left + 1)
        a, b = self.tensors[left], self.tensors[left + 1]
        chi_l, chi_r = a.shape[0], b.shape[2]
        theta = np.tensordot(a, b, axes=(2, 0))  # (chi_l, s0, s1, chi_r)
        m_t = m4.reshape(2, 2, 2, 2)  # [s1', s0', s1, s0]
        theta = np.tensordot(m_t, theta, axes=([2, 3], [2, 1]))  # (s1', s0', chi_l, chi_r)
        theta = theta.transpose(2, 1, 0, 3)
        mat = theta.reshape(chi_l * 2, 2 * chi_r)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        if s[0] > 0:
            significant = int(np.count_nonzero(s > s[0] * REL_CUTOFF))
        else:
            significant = 1
        k = max(1, min(self.chi_max, significant))
        norm2 = float(np.sum(s**2))
        # only weight lost to the chi cap counts; sub-cutoff values are noise
        discarded = float(np.sum(s[k:significant] ** 2))
        self.truncation_error += discarded / norm2
        kept = s[:k] / np.linalg.norm(s[:k])
        self.tensors[left] = u[:, :k].reshape(chi_l, 2, k)
        self.tensors[left + 1] = (kept[:, None] * vh[:k]).reshape(k, 2, chi_r)
        self.center = left + 1

    def _local_matrix(self, inst, left_is_first: bool) -> np.ndarray:
        m4 = gates.two_qubit_matrix(inst.kind)
        if left_is_first:
            return m4
        perm = [0, 2, 1, 3]  # swap which qubit is the low bit
        return m4[np.ix_(perm, perm)]

    def apply_gate(self, inst) -> None:
        if inst.kind == "barrier":
            return
        if inst.kind in ONE_QUBIT_GATES:
            self.apply_1q(
                inst.qubits[0], gates.single_qubit_matrix(inst.kind, inst.params)
            )
            return
        qa, qb = inst.qubits
        lo, hi = min(qa, qb), max(qa, qb)
        if hi - lo == 1:
            self.apply_two_site(lo, self._local_matrix(inst, left_is_first=qa == lo))
            return
        for j in range(hi - 1, lo, -1):
            self.apply_two_site(j, _SWAP_LOCAL)
        self.apply_two_site(lo, self._local_matrix(inst, left_is_first=qa == lo))
        for j in range(lo + 1, hi):
            self.apply_two_site(j, _SWAP_LOCAL)

    # --- measurement -----------------------------------------------------------

    def measure(self, q: int, rng: np.random.Generator) -> int:
        self.move_center(q)
        t = self.tensors[q]
        w0 = float(np.linalg.norm(t[:, 0, :]) ** 2)
        w1 = float(np.linalg.norm(t[:, 1, :]) ** 2)
        p1 = w1 / (w0 + w1)
        outcome = 1 if rng.random() < p1 else 0
        p = p1 if outcome else 1.0 - p1
        projected = t.copy()
        projected[:, 1 - outcome, :] = 0.0
        self.tensors[q] = projected / math.sqrt(p * (w0 + w1))
        return outcome

    def reset(self, q: int, rng: np.random.Generator) -> None:
        if self.measure(q, rng) == 1:
            self.apply_1q(q, gates.single_qubit_matrix("x"))

    def sample_terminal(
        self, shots: int, rng: np.random.Generator
    ) -> list[tuple[int, int]]:
        """Sample full bitstrings by sweeping sites left to right.

        Shots are carried as counts and split binomially at each site, so the
        cost scales with the number of distinct outcome prefixes rather than
        with the shot count.  Returns (basis_index, count) pairs.
        """
        self.move_center(0)
        norm = np.linalg.norm(self.tensors[0])
        branches: list[tuple[np.ndarray, int, int]] = [
            (np.ones(1, dtype=complex), shots, 0)
        ]
        for site in range(self.n):
            a = self.tensors[site] / (norm if site == 0 else 1.0)
            grown: list[tuple[np.ndarray, int, int]] = []
            for env, count, code in branches:
                b = np.tensordot(env, a, axes=(0, 0))  # (2, chi_r)
                w0 = float(np.linalg.norm(b[0]) ** 2)
                w1 = float(np.linalg.norm(b[1]) ** 2)
                p0 = w0 / (w0 + w1)
                c0 = int(rng.binomial(count, p0))
                c1 = count - c0
                if c0:
                    grown.append((b[0] / np.linalg.norm(b[0]), c0, code))
                if c1:
                    grown.append((b[1] / np.linalg.norm(b[1]), c1, code | (1 << site)))
            branches = grown
        return [(code, count) for _, count, code in branches]

    # --- diagnostics -----------------------------------------------------------

    def to_statevector(self) -> np.ndarray:
        acc = self.tensors[0][0]  # (2, chi)
        for t in self.tensors[1:]:
            acc = np.tensordot(acc, t, axes=(acc.ndim - 1, 0))
        acc = acc[..., 0]  # drop the trailing unit bond
        return acc.transpose(tuple(reversed(range(self.n)))).reshape(-1)


def _run_unitaries(c: Circuit, chi_max: int, upto: int | None = None) -> MpsState:
    state = MpsState(c.n_qubits, chi_max)
    stop = len(c.instructions) if upto is None else upto
    for inst in c.instructions[:stop]:
        if inst.is_unitary:
            state.apply_gate(inst)
    return state


def _replay_shots(
    prefix: MpsState, suffix: list, n_shots: int, rng: np.random.Generator
) -> dict[str, int]:
    counts: dict[str, int] = {}
    clbits = clbit_order([(i.qubits[0], i.clbit) for i in suffix if i.kind == "measure"])
    for _ in range(n_shots):
        state = prefix.copy()
        values: dict[int, int] = {}
        for inst in suffix:
            if inst.kind == "measure":
                values[inst.clbit] = state.measure(inst.qubits[0], rng)
            elif inst.kind == "reset":
                state.reset(inst.qubits[0], rng)
            else:
                state.apply_gate(inst)
        key = pack_bitstring(values, clbits)
        counts[key] = counts.get(key, 0) + 1
    return counts


def run(
    c: Circuit,
    shots: int,
    seed: int,
    chi_max: int,
    workers: int = 1,
) -> RunResult:
    """Execute on an MPS with the given bond-dimension cap."""
    if shots < 1:
        raise ValueError("shots must be positive")
    measures = measurement_map(c)
    if not measures:
        raise NoMeasurementsError("circuit has no measurements")
    start = time.perf_counter()
    features = extract_features(c)

    if features.terminal_measurement_only:
        state = _run_unitaries(c, chi_max)
        rng = np.random.default_rng(seed)
        latest_source: dict[int, int] = {}
        for qubit, clbit in measures:
            latest_source[clbit] = qubit
        clbits = sorted(latest_source)
        counts: dict[str, int] = {}
        for code, count in state.sample_terminal(shots, rng):
            values = {cl: (code >> latest_source[cl]) & 1 for cl in clbits}
            key = pack_bitstring(values, clbits)
            counts[key] = counts.get(key, 0) + count
        trunc = state.truncation_error
    else:
        split = next(
            i for i, inst in enumerate(c.instructions) if inst.kind in ("measure", "reset")
        )
        prefix = _run_unitaries(c, chi_max, upto=split)
        suffix = [i for i in c.instructions[split:] if i.kind != "barrier"]
        workers = max(1, min(workers, shots))
        if workers == 1:
            counts = _replay_shots(prefix, suffix, shots, np.random.default_rng(seed))
        else:
            sizes = [
                shots // workers + (1 if w < shots % workers else 0)
                for w in range(workers)
            ]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(
                        _replay_shots, prefix, suffix, sizes[w], np.random.default_rng(seed + w)
                    )
                    for w in range(workers)
                ]
                counts = {}
                for fut in futures:
                    for key, value in fut.result().items():
                        counts[key] = counts.get(key, 0) + value
        trunc = prefix.truncation_error

    wall = time.perf_counter() - start
    return RunResult(
        counts=counts,
        shots=shots,
        backend="mps",
        seed=seed,
        wall_time=wall,
        metadata={"chi_max": chi_max, "truncation_error": trunc},
    )


def final_truncation_error(c: Circuit, chi_max: int) -> float:
    """Accumulated discarded weight after the circuit's unitary part."""
    return _run_unitaries(c, chi_max).truncation_error


class FidelityLoopResult:
    def __init__(self, result: RunResult, chi: int, fidelity: float, iterations: int):
        self.result = result
        self.chi = chi
        self.fidelity = fidelity
        self.iterations = iterations


def run_with_fidelity_loop(
    c: Circuit,
    shots: int,
    seed: int,
    threshold: float = 0.95,
    chi_init: int = 4,
    chi_cap: int = DEFAULT_CHI_CAP,
) -> FidelityLoopResult:
    """Double chi until the mirror-circuit fidelity clears the threshold.

    Each candidate chi is scored by running the circuit's unitary part
    followed by its inverse and measuring how often the all-zeros string
    comes back; the accepted chi then produces the reported run.
    """
    from .metrics import mirror_fidelity

    chi = chi_init
    iterations = 0
    while chi <= chi_cap:
        iterations += 1
        fidelity = mirror_fidelity(c, backend="mps", shots=shots, seed=seed, chi=chi)
        if fidelity >= threshold:
            result = run(c, shots, seed, chi_max=chi)
            return FidelityLoopResult(result, chi, fidelity, iterations)
        chi *= 2
    raise ChiCapError(
        f"fidelity stayed below {threshold} up to the chi cap {chi_cap}"
    )
