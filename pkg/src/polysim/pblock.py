"""Partitioned-block simulator.

Every qubit starts in its own single-qubit state vector.  Two-qubit gates
merge the owning blocks (tensor product, qubit list re-sorted, amplitudes
permuted), so a block always covers exactly the qubits that have actually
interacted.  Measuring a qubit projects its block and factors the qubit back
out into a singleton, shrinking the live dimension.  The distributed variant
places qubits on virtual QPUs via the partitioner and realizes cross-QPU cx
gates with a telegate gadget over per-link communication qubit pairs.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import statevector
from .circuit import Circuit, Instruction
from .features import extract_features
from .partition import PartitionPlan, VqpuLayout, partition_circuit
from .result import (
    BackendError,
    NoMeasurementsError,
    RunResult,
    clbit_order,
    measurement_map,
    pack_bitstring,
    sample_measurement_groups,
)


def reorder_qubits(state: np.ndarray, current: list[int], target: list[int]) -> np.ndarray:
    """Permute a local state vector from one qubit ordering to another.

    Orderings list global qubit indices with position 0 as the least
    significant bit of the local amplitude index.
    """
    m = len(current)
    pos_of = {q: p for p, q in enumerate(current)}
    perm = [m - 1 - pos_of[target[m - 1 - axis]] for axis in range(m)]
    return state.reshape([2] * m).transpose(perm).reshape(-1)


@dataclass
class Block:
    qubits: list[int]  # ascending global indices; position 0 is the local LSB
    state: np.ndarray

    @property
    def dim(self) -> int:
        return self.state.size


class PBlockState:
    def __init__(self, n: int):
        self.n = n
        self.block_of: dict[int, Block] = {}
        for q in range(n):
            state = np.zeros(2, dtype=complex)
            state[0] = 1.0
            self.block_of[q] = Block([q], state)

    def blocks(self) -> list[Block]:
        seen: list[Block] = []
        for q in range(self.n):
            b = self.block_of[q]
            if all(b is not s for s in seen):
                seen.append(b)
        return seen

    def max_dim(self) -> int:
        return max(b.dim for b in self.blocks())

    def _merge(self, a: Block, b: Block) -> Block:
        combined_order = a.qubits + b.qubits
        state = np.multiply.outer(b.state, a.state).reshape(-1)
        target = sorted(combined_order)
        merged = Block(target, reorder_qubits(state, combined_order, target))
        for q in target:
            self.block_of[q] = merged
        return merged

    def apply(self, inst: Instruction) -> None:
        if inst.kind == "barrier":
            return
        if len(inst.qubits) == 1:
            block = self.block_of[inst.qubits[0]]
            local = Instruction(
                inst.kind, (block.qubits.index(inst.qubits[0]),), inst.params
            )
            statevector.apply_instruction(block.state, len(block.qubits), local)
            return
        qa, qb = inst.qubits
        block = self.block_of[qa]
        other = self.block_of[qb]
        if block is not other:
            block = self._merge(block, other)
        local = Instruction(
            inst.kind,
            (block.qubits.index(qa), block.qubits.index(qb)),
            inst.params,
        )
        statevector.apply_instruction(block.state, len(block.qubits), local)

    def measure_and_factor(self, qubit: int, rng: np.random.Generator) -> int:
        block = self.block_of[qubit]
        n_local = len(block.qubits)
        pos = block.qubits.index(qubit)
        bit = statevector._measure_qubit(block.state, n_local, pos, rng)
        if n_local > 1:
            kept = block.state.reshape(-1, 2, 1 << pos)[:, bit, :].reshape(-1)
            rest = Block([q for q in block.qubits if q != qubit], kept)
            for q in rest.qubits:
                self.block_of[q] = rest
        single = np.zeros(2, dtype=complex)
        single[bit] = 1.0
        self.block_of[qubit] = Block([qubit], single)
        return bit

    def reset(self, qubit: int, rng: np.random.Generator) -> None:
        self.measure_and_factor(qubit, rng)
        single = np.zeros(2, dtype=complex)
        single[0] = 1.0
        self.block_of[qubit] = Block([qubit], single)

    def set_basis(self, qubit: int, bit: int) -> None:
        """Force a qubit known to sit in a singleton block to |bit>."""
        block = self.block_of[qubit]
        if len(block.qubits) != 1:
            raise BackendError("can only set basis state on a factored qubit")
        state = np.zeros(2, dtype=complex)
        state[bit] = 1.0
        block.state = state

    def contract(self) -> np.ndarray:
        """Global little-endian amplitudes (for validation at small n)."""
        order: list[int] = []
        vec = np.ones(1, dtype=complex)
        for block in self.blocks():
            vec = np.multiply.outer(block.state, vec).reshape(-1)
            order = order + block.qubits
        return reorder_qubits(vec, order, sorted(order))


def _measured_groups(state: PBlockState, measured: set[int]):
    groups = []
    for block in state.blocks():
        qs = tuple(q for q in block.qubits if q in measured)
        if not qs:
            continue
        locals_ = tuple(block.qubits.index(q) for q in qs)
        probs = statevector.marginal_probs(block.state, len(block.qubits), locals_)
        groups.append((qs, probs))
    groups.sort(key=lambda g: g[0][0])
    return groups


def run(c: Circuit, shots: int, seed: int, workers: int = 1) -> RunResult:
    """Block-partitioned execution without a vQPU layout."""
    if shots < 1:
        raise ValueError("shots must be positive")
    measures = measurement_map(c)
    if not measures:
        raise NoMeasurementsError("circuit has no measurements")
    start = time.perf_counter()
    features = extract_features(c)
    trace: list[int] = []

    if features.terminal_measurement_only:
        state = PBlockState(c.n_qubits)
        for inst in c.instructions:
            if inst.is_unitary:
                state.apply(inst)
                trace.append(state.max_dim())
        groups = _measured_groups(state, {q for q, _ in measures})
        counts = sample_measurement_groups(
            groups, measures, shots, np.random.default_rng(seed)
        )
    else:
        counts = _replay_all(c, shots, seed, workers, trace)

    wall = time.perf_counter() - start
    return RunResult(
        counts=counts,
        shots=shots,
        backend="pblock",
        seed=seed,
        wall_time=wall,
        metadata={
            "max_block_dim": max(trace) if trace else 2,
            "block_dim_trace": trace,
        },
    )


def _one_replay(
    c: Circuit, shot_rng: np.random.Generator, trace: list[int] | None
) -> str:
    state = PBlockState(c.n_qubits)
    values: dict[int, int] = {}
    for inst in c.instructions:
        if inst.kind == "measure":
            values[inst.clbit] = state.measure_and_factor(inst.qubits[0], shot_rng)
        elif inst.kind == "reset":
            state.reset(inst.qubits[0], shot_rng)
        elif inst.is_unitary:
            state.apply(inst)
        if trace is not None:
            trace.append(state.max_dim())
    clbits = clbit_order(measurement_map(c))
    return pack_bitstring(values, clbits)


def _replay_all(
    c: Circuit, shots: int, seed: int, workers: int, trace: list[int]
) -> dict[str, int]:
    # Every shot replays the whole circuit on a fresh state with its own
    # derived stream, so results do not depend on the worker count.
    def chunk(lo: int, hi: int) -> dict[str, int]:
        out: dict[str, int] = {}
        for s in range(lo, hi):
            key = _one_replay(c, np.random.default_rng([seed, s]), trace if s == 0 else None)
            out[key] = out.get(key, 0) + 1
        return out

    workers = max(1, min(workers, shots))
    if workers == 1:
        return chunk(0, shots)
    bounds = np.linspace(0, shots, workers + 1, dtype=int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(chunk, int(bounds[w]), int(bounds[w + 1]))
            for w in range(workers)
        ]
        counts: dict[str, int] = {}
        for fut in futures:
            for key, value in fut.result().items():
                counts[key] = counts.get(key, 0) + value
    return counts


# --- distributed execution ------------------------------------------------------


@dataclass
class _DistProgram:
    plan: PartitionPlan
    remapped: Circuit
    total_qubits: int
    vqpu_of: list[int]
    comm_pair: dict[tuple[int, int], tuple[int, int]]


def _build_program(c: Circuit, layout: VqpuLayout, seed: int) -> _DistProgram:
    plan = partition_circuit(c, layout, seed)
    perm = plan.permutation
    vqpu_of = [0] * c.n_qubits
    slot = 0
    for g, group in enumerate(plan.groups):
        for _ in group:
            vqpu_of[slot] = g
            slot += 1

    comm_pair: dict[tuple[int, int], tuple[int, int]] = {}
    base = c.n_qubits
    for link in plan.layout.links:
        comm_pair[link] = (base, base + 1)
        base += 2

    remapped = Circuit(c.n_qubits, c.n_clbits, name=f"{c.name}_remapped")
    for inst in c.instructions:
        qubits = tuple(perm[q] for q in inst.qubits)
        remapped.append(Instruction(inst.kind, qubits, inst.params, inst.clbit))
    return _DistProgram(plan, remapped, base, vqpu_of, comm_pair)


def _gadget_cx(
    state: PBlockState,
    control: int,
    target: int,
    comm: tuple[int, int],
    rng: np.random.Generator,
    stats: list[dict] | None,
) -> None:
    """Teleported cx across a link, consuming one Bell pair on comm qubits."""
    m_c, m_t = comm
    state.apply(Instruction("h", (m_c,)))
    state.apply(Instruction("cx", (m_c, m_t)))
    state.apply(Instruction("cx", (control, m_c)))
    if state.measure_and_factor(m_c, rng):
        state.apply(Instruction("x", (m_t,)))
    state.apply(Instruction("cx", (m_t, target)))
    state.apply(Instruction("h", (m_t,)))
    if state.measure_and_factor(m_t, rng):
        state.apply(Instruction("z", (control,)))
    state.set_basis(m_c, 0)
    state.set_basis(m_t, 0)
    if stats is not None:
        after = state.block_of[target].dim
        stats.append({
            "block_dim_after": after,
            "retained_dim": after * 4,  # both comm qubits would stay entangled
        })


def _cross_pair(program: _DistProgram, qa: int, qb: int) -> tuple[int, int]:
    link = (
        min(program.vqpu_of[qa], program.vqpu_of[qb]),
        max(program.vqpu_of[qa], program.vqpu_of[qb]),
    )
    pair = program.comm_pair.get(link)
    if pair is None:
        raise BackendError(f"no link between vQPUs {link[0]} and {link[1]}")
    return pair


def _apply_distributed(
    program: _DistProgram,
    state: PBlockState,
    inst: Instruction,
    rng: np.random.Generator,
    stats: list[dict] | None,
) -> None:
    qa, qb = inst.qubits
    pair = _cross_pair(program, qa, qb)
    if inst.kind == "cx":
        _gadget_cx(state, qa, qb, pair, rng, stats)
    elif inst.kind == "cz":
        state.apply(Instruction("h", (qb,)))
        _gadget_cx(state, qa, qb, pair, rng, stats)
        state.apply(Instruction("h", (qb,)))
    elif inst.kind == "swap":
        _gadget_cx(state, qa, qb, pair, rng, stats)
        _gadget_cx(state, qb, qa, pair, rng, stats)
        _gadget_cx(state, qa, qb, pair, rng, stats)
    else:
        raise BackendError(f"unsupported two-qubit kind {inst.kind!r}")


def run_distributed(
    c: Circuit,
    layout: VqpuLayout,
    shots: int,
    seed: int,
    workers: int = 1,
) -> RunResult:
    """Execute across virtual QPUs after cut-minimizing qubit placement."""
    if shots < 1:
        raise ValueError("shots must be positive")
    measures = measurement_map(c)
    if not measures:
        raise NoMeasurementsError("circuit has no measurements")
    start = time.perf_counter()
    program = _build_program(c, layout, seed)
    remapped = program.remapped
    features = extract_features(remapped)
    trace: list[int] = []
    gadget_stats: list[dict] = []

    if features.terminal_measurement_only:
        # Telegate corrections make the post-gadget state identical on every
        # measurement branch, so one pass builds the final blocks and the
        # terminal shots are alias-sampled from their marginals.
        rng = np.random.default_rng(seed)
        state = PBlockState(program.total_qubits)
        for inst in remapped.instructions:
            if not inst.is_unitary:
                continue
            if len(inst.qubits) == 2 and program.vqpu_of[
                inst.qubits[0]
            ] != program.vqpu_of[inst.qubits[1]]:
                _apply_distributed(program, state, inst, rng, gadget_stats)
            else:
                state.apply(inst)
            trace.append(state.max_dim())
        remapped_measures = measurement_map(remapped)
        groups = _measured_groups(state, {q for q, _ in remapped_measures})
        counts = sample_measurement_groups(groups, remapped_measures, shots, rng)
    else:
        clbits = clbit_order(measures)

        def one_shot(s: int) -> str:
            shot_rng = np.random.default_rng([seed, s])
            state = PBlockState(program.total_qubits)
            values: dict[int, int] = {}
            record = s == 0
            for inst in remapped.instructions:
                if inst.kind == "measure":
                    values[inst.clbit] = state.measure_and_factor(
                        inst.qubits[0], shot_rng
                    )
                elif inst.kind == "reset":
                    state.reset(inst.qubits[0], shot_rng)
                elif len(inst.qubits) == 2 and program.vqpu_of[
                    inst.qubits[0]
                ] != program.vqpu_of[inst.qubits[1]]:
                    _apply_distributed(
                        program, state, inst, shot_rng, gadget_stats if record else None
                    )
                elif inst.is_unitary:
                    state.apply(inst)
                if record:
                    trace.append(state.max_dim())
            return pack_bitstring(values, clbits)

        def chunk(lo: int, hi: int) -> dict[str, int]:
            out: dict[str, int] = {}
            for s in range(lo, hi):
                key = one_shot(s)
                out[key] = out.get(key, 0) + 1
            return out

        workers = max(1, min(workers, shots))
        if workers == 1:
            counts = chunk(0, shots)
        else:
            bounds = np.linspace(0, shots, workers + 1, dtype=int)
            counts = {}
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(chunk, int(bounds[w]), int(bounds[w + 1]))
                    for w in range(workers)
                ]
                for fut in futures:
                    for key, value in fut.result().items():
                        counts[key] = counts.get(key, 0) + value

    wall = time.perf_counter() - start
    return RunResult(
        counts=counts,
        shots=shots,
        backend="pblock",
        seed=seed,
        wall_time=wall,
        metadata={
            "max_block_dim": max(trace) if trace else 2,
            "block_dim_trace": trace,
            "gadgets": gadget_stats,
            "cut_weight": program.plan.cut_weight,
            "permutation": {str(k): v for k, v in program.plan.permutation.items()},
        },
    )
