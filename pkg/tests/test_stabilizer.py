from __future__ import annotations

import numpy as np
import pytest

from polysim import stabilizer as stab
from polysim.circuit import Circuit
from polysim.result import NoMeasurementsError
from conftest import chisquare_pvalue, ghz, oracle_distribution, random_circuit


def test_ghz40_two_outcomes_fast():
    result = stab.run(ghz(40), shots=100, seed=4)
    assert set(result.counts) <= {"0" * 40, "1" * 40}
    assert sum(result.counts.values()) == 100
    assert len(result.counts) == 2  # both branches show up in 100 shots
    assert result.wall_time < 5.0


def test_deterministic_outcomes():
    c = Circuit(2, 2)
    c.gate("x", 0)
    c.measure(0, 0)
    c.measure(0, 1)  # measuring again gives the same answer
    counts = stab.run(c, shots=20, seed=0).counts
    assert counts == {"11": 20}


def test_plus_state_measurement_random():
    c = Circuit(1, 1)
    c.gate("h", 0)
    c.measure(0, 0)
    counts = stab.run(c, shots=10_000, seed=8).counts
    assert abs(counts["0"] - 5000) < 300


def test_mid_circuit_double_hadamard():
    c = Circuit(1, 2)
    c.gate("h", 0)
    c.measure(0, 0)
    c.gate("h", 0)
    c.measure(0, 1)
    counts = stab.run(c, shots=40_000, seed=2).counts
    expected = {k: 0.25 for k in ("00", "01", "10", "11")}
    assert chisquare_pvalue(counts, expected, 40_000) > 0.001


def test_reset():
    c = Circuit(1, 1)
    c.gate("h", 0)
    from polysim.circuit import Instruction

    c.append(Instruction("reset", (0,)))
    c.measure(0, 0)
    assert stab.run(c, shots=50, seed=1).counts == {"0": 50}


def test_y_and_phase_gates():
    c = Circuit(1, 1)
    c.gate("y", 0)
    c.measure(0, 0)
    assert stab.run(c, shots=10, seed=0).counts == {"1": 10}
    d = Circuit(1, 1)
    d.gate("h", 0).gate("s", 0).gate("s", 0).gate("h", 0)  # HSSH = HZH = X
    d.measure(0, 0)
    assert stab.run(d, shots=10, seed=0).counts == {"1": 10}
    e = Circuit(1, 1)
    e.gate("h", 0).gate("s", 0).gate("sdg", 0).gate("h", 0)  # identity
    e.measure(0, 0)
    assert stab.run(e, shots=10, seed=0).counts == {"0": 10}


def test_cz_and_swap():
    c = Circuit(2, 2)
    c.gate("h", 0).gate("h", 1).gate("cz", 0, 1).gate("h", 1)  # h.cz.h = cx(0,1)
    c.gate("swap", 0, 1)
    c.measure(0, 0)
    c.measure(1, 1)
    counts = stab.run(c, shots=4000, seed=3).counts
    assert set(counts) == {"00", "11"}


def test_against_branch_oracle(rng):
    for trial in range(15):
        n = int(rng.integers(1, 6))
        c = random_circuit(n, int(rng.integers(3, 20)), rng, clifford_only=True)
        expected = oracle_distribution(c)
        counts = stab.run(c, shots=20_000, seed=1000 + trial).counts
        assert chisquare_pvalue(counts, expected, 20_000) > 0.001


def test_tableau_group_structure(rng):
    """Destabilizer i anticommutes exactly with stabilizer i, rest commute."""
    for _ in range(25):
        n = int(rng.integers(2, 7))
        c = random_circuit(n, 30, rng, clifford_only=True, measured=False)
        tab = stab.Tableau(n)
        for inst in c.instructions:
            tab.apply(inst)
        products = tab.symplectic_products()
        expected = np.zeros((2 * n, 2 * n), dtype=np.int64)
        expected[:n, n:] = np.eye(n, dtype=np.int64)
        expected[n:, :n] = np.eye(n, dtype=np.int64)
        np.testing.assert_array_equal(products, expected)


def test_seed_determinism():
    c = random_circuit(5, 25, np.random.default_rng(1), clifford_only=True)
    a = stab.run(c, shots=500, seed=99).counts
    b = stab.run(c, shots=500, seed=99).counts
    assert a == b


def test_non_clifford_rejected():
    c = Circuit(1, 1)
    c.gate("t", 0)
    c.measure(0, 0)
    with pytest.raises(stab.NotCliffordError):
        stab.run(c, shots=1, seed=0)
    d = Circuit(1, 1)
    d.gate("rz", 0, params=(0.0,))  # angle zero is still routed away
    d.measure(0, 0)
    with pytest.raises(stab.NotCliffordError):
        stab.run(d, shots=1, seed=0)


def test_no_measurements():
    c = Circuit(2)
    c.gate("h", 0)
    with pytest.raises(NoMeasurementsError):
        stab.run(c, shots=5, seed=0)
