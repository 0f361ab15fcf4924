"""Run results and helpers shared by every backend."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .sampling import AliasTable


class BackendError(RuntimeError):
    """A backend could not execute the circuit it was given."""


class NoMeasurementsError(BackendError):
    """The circuit measures nothing, so sampling would produce empty counts."""


class QubitCapError(BackendError):
    """The circuit needs more qubits than the backend is configured to hold."""


@dataclass
class RunResult:
    counts: dict[str, int]
    shots: int
    backend: str
    seed: int
    wall_time: float
    predicted_time: float | None = None
    metadata: dict = field(default_factory=dict)


def measurement_map(c: Circuit) -> list[tuple[int, int]]:
    """All (qubit, clbit) measure pairs in execution order."""
    return [(i.qubits[0], i.clbit) for i in c.instructions if i.kind == "measure"]


def clbit_order(measures: list[tuple[int, int]]) -> list[int]:
    """Measured clbits, ascending; clbit order defines bitstring positions."""
    return sorted({cl for _, cl in measures})


def pack_bitstring(values: dict[int, int], clbits: list[int]) -> str:
    """Render clbit values with the lowest measured clbit rightmost."""
    return "".join(str(values[c]) for c in reversed(clbits))


def sample_measurement_groups(
    groups: list[tuple[tuple[int, ...], np.ndarray]],
    measures: list[tuple[int, int]],
    shots: int,
    rng: np.random.Generator,
) -> dict[str, int]:
    """Sample terminal measurements from per-group marginal distributions.

    Each group is a set of measured qubits (ascending) together with their
    joint probability vector, little-endian in that qubit order.  Groups are
    independent, so a full shot is assembled from one alias draw per group.
    """
    if not measures:
        raise NoMeasurementsError("circuit has no measurements")
    qubit_bits: dict[int, np.ndarray] = {}
    for qubits, probs in groups:
        table = AliasTable.from_probs(probs)
        idx = table.sample_indices(rng, shots)
        for j, q in enumerate(qubits):
            qubit_bits[q] = ((idx >> j) & 1).astype(np.int64)

    latest_source: dict[int, int] = {}
    for qubit, clbit in measures:
        latest_source[clbit] = qubit
    clbits = sorted(latest_source)
    if len(clbits) > 63:
        raise BackendError("more than 63 measured clbits")
    codes = np.zeros(shots, dtype=np.int64)
    for pos, cl in enumerate(clbits):
        codes |= qubit_bits[latest_source[cl]] << pos
    values, freq = np.unique(codes, return_counts=True)
    width = len(clbits)
    return {format(int(v), f"0{width}b"): int(k) for v, k in zip(values, freq)}
