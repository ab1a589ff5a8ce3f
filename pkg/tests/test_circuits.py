"""Circuit IR: validation rules and exact text round-trips."""

import pytest

from ftqc.circuits import (
    Circuit,
    CircuitBuilder,
    CircuitError,
    GateOp,
    bit,
    parity,
)


def test_builder_and_validation():
    b = CircuitBuilder(3)
    b.add("H", 1)
    b.add("X", 2)
    b.tick()
    b.add("CNOT", 1, 2)
    b.tick()
    c = b.measure(2)
    b.tick()
    b.add("Z", 1, cond=bit(c))
    circ = b.build()
    assert circ.num_qubits == 3
    assert circ.num_cbits == 1
    circ.validate()


def test_qubit_reuse_within_timestep_rejected():
    circ = Circuit(2, 0, [(GateOp("H", (1,)), GateOp("X", (1,)))])
    with pytest.raises(CircuitError):
        circ.validate()


def test_cbit_read_before_written_rejected():
    circ = Circuit(2, 1, [
        (GateOp("X", (1,), cond=bit(0)),),
        (GateOp("MEAS", (2,), cbit=0),),
    ])
    with pytest.raises(CircuitError):
        circ.validate()


def test_cond_in_same_step_as_measure_rejected():
    circ = Circuit(2, 1, [
        (GateOp("MEAS", (1,), cbit=0), GateOp("X", (2,), cond=bit(0))),
    ])
    with pytest.raises(CircuitError):
        circ.validate()


def test_repeated_operand_rejected():
    with pytest.raises(CircuitError):
        GateOp("CNOT", (2, 2))


def test_text_round_trip_simple():
    b = CircuitBuilder(7)
    b.add("CNOT", 3, 7)
    b.add("H", 1)
    b.tick()
    c = b.measure(4)
    b.tick()
    b.add("X", 7, cond=bit(c))
    circ = b.build()
    text = circ.to_text()
    assert "CNOT 3 7" in text
    assert "MEAS 4 -> c0" in text
    assert "COND c0 X 7" in text
    again = Circuit.from_text(text)
    assert again.to_text() == text
    assert again.timesteps == circ.timesteps


def test_text_round_trip_parity_conditions():
    b = CircuitBuilder(4)
    bits = [b.measure(q) for q in (1, 2, 3)]
    b.tick()
    b.add("Z", 4, cond=(parity(bits, 1), parity(bits[:2], 0)))
    circ = b.build()
    text = circ.to_text()
    assert "COND c0^c1^c2 & c0^c1=0 Z 4" in text.replace("=1 ", " ")
    again = Circuit.from_text(text)
    assert again.timesteps == circ.timesteps
    assert again.to_text() == text


def test_empty_timestep_round_trip():
    circ = Circuit(2, 0, [(GateOp("H", (1,)),), (), (GateOp("X", (2,)),)])
    again = Circuit.from_text(circ.to_text())
    assert again.timesteps == circ.timesteps


def test_bad_header():
    with pytest.raises(CircuitError):
        Circuit.from_text("NOPE 3\nH 1\n")


def test_unknown_gate():
    with pytest.raises(CircuitError):
        Circuit.from_text("QUBITS 2 CBITS 0\nFROB 1\n")
