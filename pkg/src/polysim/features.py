"""Structural circuit features consumed by the runtime predictor."""
from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import (
    ONE_QUBIT_CLIFFORD,
    ONE_QUBIT_GATES,
    TWO_QUBIT_GATES,
    Circuit,
    is_clifford,
)

GATE_CLASSES = ("1q-clifford", "1q-nonclifford", "2q", "measure", "reset")


@dataclass(frozen=True)
class CircuitFeatures:
    n_qubits: int
    total_gates: int
    counts_by_class: dict[str, int]
    is_clifford: bool
    terminal_measurement_only: bool
    depth: int
    entanglement_proxy: int
    interaction_graph: dict[tuple[int, int], int] = field(repr=False)


def extract_features(c: Circuit) -> CircuitFeatures:
    """Count and classify instructions and summarize circuit structure.

    The entanglement proxy is the largest number of two-qubit gates crossing
    any single cut of the linear qubit ordering; it upper-bounds the base-2
    log of the Schmidt rank reachable across that cut.
    """
    counts = dict.fromkeys(GATE_CLASSES, 0)
    qubit_level = [0] * c.n_qubits
    cut_crossings = [0] * max(c.n_qubits - 1, 1)
    graph: dict[tuple[int, int], int] = {}
    measured: set[int] = set()
    terminal_only = True

    for inst in c.instructions:
        if inst.kind == "barrier":
            continue
        if inst.kind == "measure":
            counts["measure"] += 1
            measured.add(inst.qubits[0])
        elif inst.kind == "reset":
            counts["reset"] += 1
            terminal_only = False
        elif inst.kind in TWO_QUBIT_GATES:
            counts["2q"] += 1
            a, b = sorted(inst.qubits)
            edge = (a, b)
            graph[edge] = graph.get(edge, 0) + 1
            for cut in range(a, b):
                cut_crossings[cut] += 1
        elif inst.kind in ONE_QUBIT_CLIFFORD:
            counts["1q-clifford"] += 1
        elif inst.kind in ONE_QUBIT_GATES:
            counts["1q-nonclifford"] += 1
        if inst.is_unitary and any(q in measured for q in inst.qubits):
            terminal_only = False
        level = 1 + max(qubit_level[q] for q in inst.qubits)
        for q in inst.qubits:
            qubit_level[q] = level

    return CircuitFeatures(
        n_qubits=c.n_qubits,
        total_gates=sum(counts.values()),
        counts_by_class=counts,
        is_clifford=is_clifford(c),
        terminal_measurement_only=terminal_only,
        depth=max(qubit_level),
        entanglement_proxy=max(cut_crossings) if c.n_qubits > 1 else 0,
        interaction_graph=graph,
    )
