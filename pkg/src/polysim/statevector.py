"""Dense state-vector backend.

Qubit 0 is the least significant bit of the amplitude index.  Gate kernels
operate in place on reshaped views, with special paths for diagonal and
generalized-permutation matrices so the Clifford workhorses (cx, cz, swap,
phase gates) touch each amplitude once.
"""
from __future__ import annotations

import time
import weakref
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import gates
from .circuit import ONE_QUBIT_GATES, Circuit
from .features import extract_features
from .result import (
    BackendError,
    NoMeasurementsError,
    QubitCapError,
    RunResult,
    clbit_order,
    measurement_map,
    pack_bitstring,
    sample_measurement_groups,
)

DEFAULT_QUBIT_CAP = 26


def apply_1q(amps: np.ndarray, n: int, q: int, m: np.ndarray) -> None:
    arr = amps.reshape(-1, 2, 1 << q)
    if m[0, 1] == 0 and m[1, 0] == 0:
        if m[0, 0] != 1:
            arr[:, 0, :] *= m[0, 0]
        if m[1, 1] != 1:
            arr[:, 1, :] *= m[1, 1]
        return
    if m[0, 0] == 0 and m[1, 1] == 0:
        tmp = arr[:, 0, :].copy()
        arr[:, 0, :] = arr[:, 1, :]
        arr[:, 1, :] = tmp
        if m[0, 1] != 1:
            arr[:, 0, :] *= m[0, 1]
        if m[1, 0] != 1:
            arr[:, 1, :] *= m[1, 0]
        return
    lo = arr[:, 0, :].copy()
    hi = arr[:, 1, :]
    arr[:, 0, :] = m[0, 0] * lo + m[0, 1] * hi
    arr[:, 1, :] = m[1, 0] * lo + m[1, 1] * hi


def _slice_2q(amps: np.ndarray, n: int, qa: int, qb: int):
    """Views of the four (b_a, b_b) amplitude subsets for qubits qa, qb."""
    lo, hi = (qa, qb) if qa < qb else (qb, qa)
    arr = amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)

    def view(i: int):
        b_a = i & 1
        b_b = (i >> 1) & 1
        if qa < qb:
            return arr[:, b_b, :, b_a, :]
        return arr[:, b_a, :, b_b, :]

    return view


def apply_2q(amps: np.ndarray, n: int, qa: int, qb: int, m: np.ndarray) -> None:
    view = _slice_2q(amps, n, qa, qb)
    nonzero = [np.flatnonzero(m[i]) for i in range(4)]
    if all(len(nz) == 1 for nz in nonzero):
        sources = [int(nz[0]) for nz in nonzero]
        if sources == [0, 1, 2, 3]:  # diagonal
            for i in range(4):
                if m[i, i] != 1:
                    view(i)[...] *= m[i, i]
            return
        # Generalized permutation: follow each cycle with one temporary.
        done = [False] * 4
        for start in range(4):
            if done[start]:
                continue
            cycle = [start]
            nxt = sources[start]
            while nxt != start:
                cycle.append(nxt)
                nxt = sources[nxt]
            if len(cycle) == 1:
                if m[start, start] != 1:
                    view(start)[...] *= m[start, start]
                done[start] = True
                continue
            tmp = view(cycle[-1]).copy()
            for i in range(len(cycle) - 1, 0, -1):
                dst, src = cycle[i], cycle[i - 1]
                view(dst)[...] = m[dst, src] * view(src) if m[dst, src] != 1 else view(src)
                done[dst] = True
            first = cycle[0]
            view(first)[...] = m[first, cycle[-1]] * tmp if m[first, cycle[-1]] != 1 else tmp
            done[first] = True
        return
    temps = [view(i).copy() for i in range(4)]
    for i in range(4):
        acc = None
        for j in range(4):
            if m[i, j] == 0:
                continue
            term = temps[j] if m[i, j] == 1 else m[i, j] * temps[j]
            acc = term if acc is None else acc + term
        view(i)[...] = 0 if acc is None else acc


def apply_instruction(amps: np.ndarray, n: int, inst) -> None:
    if inst.kind == "barrier":
        return
    if inst.kind in ONE_QUBIT_GATES:
        apply_1q(amps, n, inst.qubits[0], gates.single_qubit_matrix(inst.kind, inst.params))
    else:
        apply_2q(amps, n, inst.qubits[0], inst.qubits[1], gates.two_qubit_matrix(inst.kind))


def zero_state(n: int) -> np.ndarray:
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return amps


def marginal_probs(amps: np.ndarray, n: int, qubits: tuple[int, ...]) -> np.ndarray:
    """Joint probabilities of the given (ascending) qubits, little-endian."""
    probs = np.abs(amps.reshape([2] * n)) ** 2
    drop = tuple(n - 1 - q for q in range(n) if q not in set(qubits))
    if drop:
        probs = probs.sum(axis=drop)
    # Remaining axes run from the highest kept qubit down to the lowest, which
    # is exactly little-endian order after flattening.
    return probs.reshape(-1)


def _measure_qubit(amps: np.ndarray, n: int, q: int, rng: np.random.Generator) -> int:
    arr = amps.reshape(-1, 2, 1 << q)
    p1 = float(np.sum(np.abs(arr[:, 1, :]) ** 2))
    outcome = 1 if rng.random() < p1 else 0
    p = p1 if outcome else 1.0 - p1
    arr[:, 1 - outcome, :] = 0.0
    amps *= 1.0 / np.sqrt(p)
    return outcome


def _reset_qubit(amps: np.ndarray, n: int, q: int, rng: np.random.Generator) -> None:
    if _measure_qubit(amps, n, q, rng) == 1:
        apply_1q(amps, n, q, gates.single_qubit_matrix("x"))


def _replay_shots(
    prefix: np.ndarray,
    n: int,
    suffix: list,
    n_shots: int,
    rng: np.random.Generator,
) -> dict[str, int]:
    counts: dict[str, int] = {}
    all_measures = [(i.qubits[0], i.clbit) for i in suffix if i.kind == "measure"]
    clbits = clbit_order(all_measures)
    for _ in range(n_shots):
        amps = prefix.copy()
        values: dict[int, int] = {}
        for inst in suffix:
            if inst.kind == "measure":
                values[inst.clbit] = _measure_qubit(amps, n, inst.qubits[0], rng)
            elif inst.kind == "reset":
                _reset_qubit(amps, n, inst.qubits[0], rng)
            else:
                apply_instruction(amps, n, inst)
        key = pack_bitstring(values, clbits)
        counts[key] = counts.get(key, 0) + 1
    return counts


def run(
    c: Circuit,
    shots: int,
    seed: int,
    workers: int = 1,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> RunResult:
    """Execute a circuit and return sampled measurement counts.

    Terminal-measurement circuits are executed once and sampled through an
    alias table; anything with mid-circuit measurement or reset replays the
    suffix per shot on a clone of the prefix state.  With ``workers`` > 1 the
    replay fans out in chunks, worker w drawing from a stream seeded with
    ``seed + w``; merged counts equal a sequential run of the same streams.
    """
    if c.n_qubits > qubit_cap:
        raise QubitCapError(f"{c.n_qubits} qubits exceeds the configured cap {qubit_cap}")
    if shots < 1:
        raise ValueError("shots must be positive")
    measures = measurement_map(c)
    if not measures:
        raise NoMeasurementsError("circuit has no measurements")
    start = time.perf_counter()
    features = extract_features(c)
    n = c.n_qubits

    if features.terminal_measurement_only:
        amps = zero_state(n)
        for inst in c.instructions:
            if inst.is_unitary:
                apply_instruction(amps, n, inst)
        qubits = tuple(sorted({q for q, _ in measures}))
        probs = marginal_probs(amps, n, qubits)
        rng = np.random.default_rng(seed)
        counts = sample_measurement_groups([(qubits, probs)], measures, shots, rng)
    else:
        split = next(
            i for i, inst in enumerate(c.instructions) if inst.kind in ("measure", "reset")
        )
        prefix_state = zero_state(n)
        for inst in c.instructions[:split]:
            if inst.is_unitary:
                apply_instruction(prefix_state, n, inst)
        suffix = [i for i in c.instructions[split:] if i.kind != "barrier"]
        workers = max(1, min(workers, shots))
        chunk_sizes = [
            shots // workers + (1 if w < shots % workers else 0) for w in range(workers)
        ]
        if workers == 1:
            counts = _replay_shots(
                prefix_state, n, suffix, shots, np.random.default_rng(seed)
            )
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(
                        _replay_shots,
                        prefix_state,
                        n,
                        suffix,
                        chunk_sizes[w],
                        np.random.default_rng(seed + w),
                    )
                    for w in range(workers)
                ]
                counts = {}
                for fut in futures:
                    for key, value in fut.result().items():
                        counts[key] = counts.get(key, 0) + value

    wall = time.perf_counter() - start
    return RunResult(counts=counts, shots=shots, backend="sv", seed=seed, wall_time=wall)


_state_cache: "weakref.WeakKeyDictionary[Circuit, np.ndarray]" = weakref.WeakKeyDictionary()


def final_state(c: Circuit, qubit_cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """The state after the circuit's unitary part, cached per Circuit object."""
    cached = _state_cache.get(c)
    if cached is not None:
        return cached
    if c.n_qubits > qubit_cap:
        raise QubitCapError(f"{c.n_qubits} qubits exceeds the configured cap {qubit_cap}")
    features = extract_features(c)
    if not features.terminal_measurement_only:
        raise BackendError("expectation values need a circuit without mid-circuit collapse")
    amps = zero_state(c.n_qubits)
    for inst in c.instructions:
        if inst.is_unitary:
            apply_instruction(amps, c.n_qubits, inst)
    _state_cache[c] = amps
    return amps


def expectation(c: Circuit, z_qubits, qubit_cap: int = DEFAULT_QUBIT_CAP) -> float:
    """<Z x ... x Z> over the given qubits, from one pass over probabilities.

    Uses the cached post-circuit state, so repeated observables on the same
    circuit object pay for a single execution.
    """
    z_qubits = tuple(z_qubits)
    for q in z_qubits:
        if not 0 <= q < c.n_qubits:
            raise ValueError(f"qubit {q} out of range")
    amps = final_state(c, qubit_cap=qubit_cap)
    probs = np.abs(amps) ** 2
    mask = np.uint64(sum(1 << q for q in set(z_qubits)))
    indices = np.arange(probs.size, dtype=np.uint64)
    parity = (np.bitwise_count(indices & mask) & np.uint64(1)).astype(float)
    return float(np.sum(probs * (1.0 - 2.0 * parity)))
