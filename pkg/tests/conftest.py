from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from polysim.circuit import Circuit, Instruction


def ghz(n: int, measured: bool = True) -> Circuit:
    c = Circuit(n, n if measured else 0)
    c.gate("h", 0)
    for q in range(n - 1):
        c.gate("cx", q, q + 1)
    if measured:
        for q in range(n):
            c.measure(q, q)
    return c


def phase(c: Circuit, lam: float, q: int) -> None:
    c.gate("u", q, params=(0.0, 0.0, lam))


def controlled_phase(c: Circuit, theta: float, a: int, b: int) -> None:
    """diag(1, 1, 1, e^{i theta}) with no global phase, from u and cx."""
    c.gate("cx", a, b)
    phase(c, -theta / 2, b)
    c.gate("cx", a, b)
    phase(c, theta / 2, b)
    phase(c, theta / 2, a)


def qft(n: int) -> Circuit:
    c = Circuit(n)
    for target in reversed(range(n)):
        c.gate("h", target)
        for control in reversed(range(target)):
            controlled_phase(c, math.pi / 2 ** (target - control), control, target)
    for i in range(n // 2):
        c.gate("swap", i, n - 1 - i)
    return c


def random_circuit(
    n: int,
    n_gates: int,
    rng: np.random.Generator,
    clifford_only: bool = False,
    measured: bool = True,
    two_qubit_fraction: float = 0.35,
) -> Circuit:
    c = Circuit(n, n if measured else 0)
    one_q = ["h", "x", "y", "z", "s", "sdg"]
    if not clifford_only:
        one_q = one_q + ["t", "tdg", "rx", "ry", "rz", "u"]
    two_q = ["cx", "cz", "swap"]
    for _ in range(n_gates):
        if n >= 2 and rng.random() < two_qubit_fraction:
            a, b = rng.choice(n, size=2, replace=False)
            c.gate(str(rng.choice(two_q)), int(a), int(b))
        else:
            kind = str(rng.choice(one_q))
            q = int(rng.integers(n))
            if kind in ("rx", "ry", "rz"):
                c.gate(kind, q, params=(float(rng.uniform(0, 2 * math.pi)),))
            elif kind == "u":
                c.gate(kind, q, params=tuple(rng.uniform(0, 2 * math.pi, size=3)))
            else:
                c.gate(kind, q)
    if measured:
        for q in range(n):
            c.measure(q, q)
    return c


# --- independent reference simulator (oracle) -------------------------------
# Tensor layout differs from the package kernels on purpose: axis i of the
# state tensor is qubit i, and gates are contracted with einsum.


def oracle_zero(n: int) -> np.ndarray:
    t = np.zeros([2] * n, dtype=complex)
    t[(0,) * n] = 1.0
    return t


def oracle_apply(tensor: np.ndarray, inst: Instruction) -> np.ndarray:
    from polysim import gates

    n = tensor.ndim
    if inst.kind == "barrier":
        return tensor
    if len(inst.qubits) == 1:
        m = gates.single_qubit_matrix(inst.kind, inst.params)
        out = np.tensordot(m, tensor, axes=([1], [inst.qubits[0]]))
        return np.moveaxis(out, 0, inst.qubits[0])
    qa, qb = inst.qubits
    m = gates.two_qubit_matrix(inst.kind).reshape(2, 2, 2, 2)
    # m indices: [b_out, a_out, b_in, a_in] with a the first listed qubit.
    out = np.tensordot(m, tensor, axes=([2, 3], [qb, qa]))
    return np.moveaxis(out, [0, 1], [qb, qa])


def oracle_statevector(c: Circuit) -> np.ndarray:
    """Amplitudes in little-endian index order from the reference contraction."""
    t = oracle_zero(c.n_qubits)
    for inst in c.instructions:
        if inst.kind in ("measure", "reset"):
            raise ValueError("oracle_statevector handles unitary circuits only")
        t = oracle_apply(t, inst)
    return t.transpose(tuple(reversed(range(c.n_qubits)))).reshape(-1)


def oracle_distribution(c: Circuit) -> dict[str, float]:
    """Exact outcome distribution by branch enumeration over measurements."""
    final: dict[str, float] = {}
    clbits = sorted({i.clbit for i in c.instructions if i.kind == "measure"})

    def walk(tensor: np.ndarray, pos: int, weight: float, values: dict[int, int]) -> None:
        for k in range(pos, len(c.instructions)):
            inst = c.instructions[k]
            if inst.kind in ("measure", "reset"):
                q = inst.qubits[0]
                for outcome in (0, 1):
                    proj = tensor.copy()
                    idx = [slice(None)] * c.n_qubits
                    idx[q] = 1 - outcome
                    proj[tuple(idx)] = 0.0
                    p = float(np.sum(np.abs(proj) ** 2))
                    if p < 1e-12:
                        continue
                    proj /= math.sqrt(p)
                    if inst.kind == "reset" and outcome == 1:
                        proj = oracle_apply(proj, Instruction("x", (q,)))
                    new_values = dict(values)
                    if inst.kind == "measure":
                        new_values[inst.clbit] = outcome
                    walk(proj, k + 1, weight * p, new_values)
                return
            tensor = oracle_apply(tensor, inst)
        key = "".join(str(values[cb]) for cb in reversed(clbits))
        final[key] = final.get(key, 0.0) + weight

    walk(oracle_zero(c.n_qubits), 0, 1.0, {})
    return final


# --- statistical helpers -----------------------------------------------------


def chisquare_pvalue(counts: dict[str, int], expected: dict[str, float], shots: int) -> float:
    """One-sample chi-square of counts against an exact distribution."""
    support = sorted(set(expected) | set(counts))
    observed = np.array([counts.get(k, 0) for k in support], dtype=float)
    probs = np.array([expected.get(k, 0.0) for k in support], dtype=float)
    keep = probs > 0
    if not keep.all() and observed[~keep].sum() > 0:
        return 0.0  # impossible outcome observed
    observed, probs = observed[keep], probs[keep]
    # Pool bins with tiny expectation to keep the statistic well behaved.
    order = np.argsort(probs)
    observed, probs = observed[order], probs[order]
    exp_counts = probs * shots
    pooled_obs, pooled_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, exp_counts):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and pooled_exp:
        pooled_obs[-1] += acc_o
        pooled_exp[-1] += acc_e
    elif acc_e > 0:
        pooled_obs, pooled_exp = [acc_o], [acc_e]
    if len(pooled_exp) < 2:
        return 1.0
    stat, p = stats.chisquare(pooled_obs, pooled_exp)
    return float(p)


def two_sample_chisquare_pvalue(a: dict[str, int], b: dict[str, int]) -> float:
    """Two-sample homogeneity test between count maps."""
    support = sorted(set(a) | set(b))
    table = np.array(
        [[a.get(k, 0) for k in support], [b.get(k, 0) for k in support]], dtype=float
    )
    col_sums = table.sum(axis=0)
    # Pool sparse columns so expected counts stay reasonable.
    order = np.argsort(col_sums)
    pooled = []
    acc = np.zeros(2)
    for j in order:
        acc += table[:, j]
        if acc.sum() >= 10:
            pooled.append(acc.copy())
            acc[:] = 0
    if acc.sum() > 0:
        if pooled:
            pooled[-1] += acc
        else:
            pooled.append(acc.copy())
    table = np.array(pooled).T
    if table.shape[1] < 2:
        return 1.0
    _, p, _, _ = stats.chi2_contingency(table)
    return float(p)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260816)
