"""Stochastic error model: rates, species distributions, independence."""

import numpy as np
import pytest

from ftqc.noise import (FaultLocation, NoiseModel, measurement_flip,
                        prep_fault, sample_fault)
from ftqc.rng import stream_rng


def gate_loc(kind, qubits):
    return FaultLocation(0, "gate", kind, qubits)


IDLE = FaultLocation(0, "idle", "", (1,))


def test_zero_noise_never_fires(rng):
    model = NoiseModel.ideal()
    for _ in range(200):
        assert sample_fault(IDLE, model, rng) == []
        assert sample_fault(gate_loc("cnot", (1, 2)), model, rng) == []
        assert not measurement_flip(model, rng)
        assert prep_fault(model, rng) is None


def test_idle_letter_frequencies(rng):
    model = NoiseModel(eps_store=0.03)
    n = 10 ** 6
    counts = {"X": 0, "Y": 0, "Z": 0}
    for _ in range(n):
        for q, letter in sample_fault(IDLE, model, rng):
            counts[letter] += 1
    sigma = np.sqrt(n * 0.01 * 0.99)
    for letter in "XYZ":
        assert abs(counts[letter] - n * 0.01) < 3 * sigma


def test_cnot_all_operands_always_two_entries(rng):
    model = NoiseModel(eps_gate={"cnot": 1.0})
    for _ in range(300):
        fault = sample_fault(gate_loc("cnot", (3, 9)), model, rng)
        assert len(fault) == 2
        assert {q for q, _ in fault} == {3, 9}
        assert all(letter in "XYZ" for _, letter in fault)


def test_uniform_nontrivial_mode_covers_all_patterns(rng):
    model = NoiseModel(eps_gate={"cnot": 1.0}, multiqubit_mode="uniform-nontrivial")
    seen = set()
    n = 8000
    for _ in range(n):
        fault = sample_fault(gate_loc("cnot", (1, 2)), model, rng)
        assert fault  # never the identity
        seen.add(tuple(sorted(fault)))
    assert len(seen) == 15
    # uniformity within 4 sigma per pattern
    counts = {}
    rng2 = stream_rng(1, 0)
    for _ in range(n):
        fault = tuple(sorted(sample_fault(gate_loc("cnot", (1, 2)), model, rng2)))
        counts[fault] = counts.get(fault, 0) + 1
    expect = n / 15
    sigma = np.sqrt(n * (1 / 15) * (14 / 15))
    for pattern, c in counts.items():
        assert abs(c - expect) < 4 * sigma


def test_measurement_flip_rate(rng):
    model = NoiseModel(eps_meas=0.5)
    n = 10 ** 5
    flips = sum(measurement_flip(model, rng) for _ in range(n))
    sigma = np.sqrt(n * 0.25)
    assert abs(flips - n / 2) < 3 * sigma


def test_prep_fault_is_bit_flip(rng):
    model = NoiseModel(eps_prep=1.0)
    assert prep_fault(model, rng) == "X"


def test_locations_statistically_independent(rng):
    # joint frequency of faults at two fixed locations ~ product of marginals
    model = NoiseModel(eps_store=0.02)
    n = 10 ** 6
    both = 0
    first = 0
    second = 0
    for _ in range(n):
        a = bool(sample_fault(IDLE, model, rng))
        b = bool(sample_fault(FaultLocation(1, "idle", "", (2,)), model, rng))
        first += a
        second += b
        both += a and b
    p_joint = both / n
    p_prod = (first / n) * (second / n)
    sigma = np.sqrt(p_prod * (1 - p_prod) / n)
    assert abs(p_joint - p_prod) < 3 * sigma + 1e-9


def test_fault_stream_ignores_circuit_data(rng):
    """Same seed, two different input states: identical fault streams."""
    from ftqc import builders
    from ftqc.runner import run_circuit_tableau
    from ftqc.tableau import StabilizerTableau

    circ = builders.build_naive_syndrome()
    noise = NoiseModel(eps_store=0.05, eps_gate={"cnot": 0.08}, eps_meas=0.03)
    streams = []
    for flip_input in (False, True):
        tab = StabilizerTableau(10)
        if flip_input:
            for q in range(1, 8):
                tab.apply_gate("X", (q,))
        rec = run_circuit_tableau(circ, noise, stream_rng(77, 0), tableau=tab)
        streams.append([(loc.index, loc.kind, tuple(fault) if isinstance(fault, list) else fault)
                        for loc, fault in rec.faults])
    assert streams[0] == streams[1]


def test_config_round_trip():
    model = NoiseModel(eps_store=1e-3, eps_gate={"cnot": 2e-3, "h": 1e-4},
                       eps_prep=5e-4, eps_meas=7e-4, leak_rate=1e-5,
                       multiqubit_mode="uniform-nontrivial")
    again = NoiseModel.from_config(model.config_items())
    assert again == model


def test_unknown_config_key_rejected():
    with pytest.raises(KeyError):
        NoiseModel.from_config({"eps_storr": 0.1})


def test_bad_probability_rejected():
    with pytest.raises(ValueError):
        NoiseModel(eps_store=1.5)
    with pytest.raises(ValueError):
        NoiseModel(multiqubit_mode="sideways")
