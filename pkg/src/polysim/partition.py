"""Qubit-to-vQPU placement that minimizes cut interaction weight.

Placement runs in two phases: greedy growth seeded from the heaviest
interaction edges, then Kernighan-Lin style refinement that keeps applying
the best improving swap or move until none exists.  Both phases iterate in
sorted order, so results are reproducible for a fixed seed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .circuit import Circuit
from .features import extract_features


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class VqpuLayout:
    """k virtual QPUs of fixed capacity joined by pairwise links."""

    k: int
    capacity: int
    links: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.k < 1 or self.capacity < 1:
            raise PartitionError("need k >= 1 and capacity >= 1")
        if not self.links:
            full = tuple(
                (a, b) for a in range(self.k) for b in range(a + 1, self.k)
            )
            object.__setattr__(self, "links", full)
        norm = []
        for a, b in self.links:
            if not (0 <= a < self.k and 0 <= b < self.k) or a == b:
                raise PartitionError(f"bad link ({a}, {b})")
            norm.append((min(a, b), max(a, b)))
        object.__setattr__(self, "links", tuple(sorted(set(norm))))

    @classmethod
    def from_dict(cls, d: dict) -> "VqpuLayout":
        try:
            k = int(d["k"])
            capacity = int(d["capacity"])
        except KeyError as missing:
            raise PartitionError(f"layout is missing {missing}") from None
        links = tuple((int(a), int(b)) for a, b in d.get("links", ()))
        return cls(k, capacity, links)

    @classmethod
    def from_json(cls, path: str) -> "VqpuLayout":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class PartitionPlan:
    layout: VqpuLayout
    groups: list[list[int]]       # original qubit indices per vQPU, ascending
    assignment: dict[int, int]    # original qubit -> vQPU
    permutation: dict[int, int]   # original qubit -> remapped qubit
    cut_weight: int


def _cut_weight(edges: dict[tuple[int, int], int], assign: dict[int, int]) -> int:
    return sum(w for (a, b), w in edges.items() if assign[a] != assign[b])


def partition_circuit(c: Circuit, layout: VqpuLayout, seed: int) -> PartitionPlan:
    n = c.n_qubits
    if n > layout.k * layout.capacity:
        raise PartitionError(
            f"{n} qubits exceed {layout.k} vQPUs x {layout.capacity}"
        )
    # Both phases break ties by index, so the outcome is the same for every
    # seed; the parameter stays so callers can thread one through uniformly.
    del seed
    edges = dict(extract_features(c).interaction_graph)

    if layout.k == 1:
        groups = [list(range(n))]
        assign = {q: 0 for q in range(n)}
        return PartitionPlan(layout, groups, assign, {q: q for q in range(n)}, 0)

    # Phase 1: grow groups from the heaviest edges outward.
    assign: dict[int, int] = {}
    load = [0] * layout.k
    order = sorted(edges.items(), key=lambda kv: (-kv[1], kv[0]))
    for (a, b), _ in order:
        if a in assign and b in assign:
            continue
        if a in assign or b in assign:
            placed, other = (a, b) if a in assign else (b, a)
            g = assign[placed]
            if load[g] < layout.capacity:
                assign[other] = g
                load[g] += 1
            continue
        g = min(range(layout.k), key=lambda i: (load[i], i))
        if load[g] + 2 <= layout.capacity:
            assign[a] = assign[b] = g
            load[g] += 2
        elif load[g] + 1 <= layout.capacity:
            assign[a] = g
            load[g] += 1
    for q in range(n):
        if q not in assign:
            g = min(range(layout.k), key=lambda i: (load[i], i))
            assign[q] = g
            load[g] += 1

    # Phase 2: apply the best improving swap or move until none remains.
    neighbors: dict[int, dict[int, int]] = {q: {} for q in range(n)}
    for (a, b), w in edges.items():
        neighbors[a][b] = w
        neighbors[b][a] = w

    def external_gain(q: int, target: int) -> int:
        # cut change if q alone moved to target (negative is better)
        delta = 0
        for other, w in neighbors[q].items():
            if assign[other] == assign[q]:
                delta += w
            elif assign[other] == target:
                delta -= w
        return delta

    while True:
        best = 0
        best_action = None
        for q in range(n):
            for g in range(layout.k):
                if g == assign[q]:
                    continue
                if load[g] < layout.capacity:
                    gain = -external_gain(q, g)
                    if gain > best:
                        best = gain
                        best_action = ("move", q, g)
        for a in range(n):
            for b in range(a + 1, n):
                ga, gb = assign[a], assign[b]
                if ga == gb:
                    continue
                gain = -(external_gain(a, gb) + external_gain(b, ga))
                gain -= 2 * neighbors[a].get(b, 0)  # pair edge stays cut
                if gain > best:
                    best = gain
                    best_action = ("swap", a, b)
        if best_action is None:
            break
        if best_action[0] == "move":
            _, q, g = best_action
            load[assign[q]] -= 1
            assign[q] = g
            load[g] += 1
        else:
            _, a, b = best_action
            assign[a], assign[b] = assign[b], assign[a]

    groups = [sorted(q for q in range(n) if assign[q] == g) for g in range(layout.k)]
    permutation: dict[int, int] = {}
    next_slot = 0
    for g in range(layout.k):
        for q in groups[g]:
            permutation[q] = next_slot
            next_slot += 1
    return PartitionPlan(layout, groups, assign, permutation, _cut_weight(edges, assign))
