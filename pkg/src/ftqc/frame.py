"""Pauli-frame sampler: classical error propagation through Clifford circuits.

Instead of simulating states, a frame tracks the accumulated Pauli error
as two bitmasks (X-part, Z-part) and conjugates them through each gate.
For stochastic Pauli noise on Clifford circuits this reproduces the exact
distribution of measurement-outcome *flips* relative to a noiseless
reference run: a computational-basis measurement of qubit q flips iff the
frame has an X-part on q.  Signs are irrelevant to flip statistics, so the
frame stores no phase.

Bitmask layout: qubit q (1-based) occupies bit q-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ftqc.circuits import Circuit, Condition
from ftqc.noise import FaultLocation, NoiseModel, measurement_flip, sample_fault
from ftqc.pauli import PauliString, UnsupportedGate
from ftqc.tableau import StabilizerTableau


class PauliFrame:
    """Accumulated Pauli error over n qubits plus measurement-flip record."""

    __slots__ = ("n", "x", "z", "flips")

    def __init__(self, n: int):
        self.n = n
        self.x = 0
        self.z = 0
        self.flips: list[int] = []

    # -- error injection and readout ---------------------------------------

    def inject(self, qubit: int, letter: str) -> None:
        b = 1 << (qubit - 1)
        if letter in ("X", "Y"):
            self.x ^= b
        if letter in ("Z", "Y"):
            self.z ^= b

    def inject_pauli(self, p: PauliString) -> None:
        for q in p.support():
            self.inject(q, p.letter(q))

    @property
    def error(self) -> PauliString:
        """Current accumulated error as a PauliString (phase dropped)."""
        x = np.array([(self.x >> j) & 1 for j in range(self.n)], dtype=np.uint8)
        z = np.array([(self.z >> j) & 1 for j in range(self.n)], dtype=np.uint8)
        return PauliString(self.n, x, z)

    # -- propagation ---------------------------------------------------------

    def gate(self, kind: str, qubits: tuple[int, ...]) -> None:
        if kind == "H":
            b = 1 << (qubits[0] - 1)
            xb, zb = self.x & b, self.z & b
            if xb != zb:
                self.x ^= b
                self.z ^= b
        elif kind in ("P", "PINV"):
            b = 1 << (qubits[0] - 1)
            if self.x & b:
                self.z ^= b
        elif kind in ("X", "Z"):
            pass  # Pauli gates conjugate Paulis to themselves up to sign
        elif kind == "CNOT":
            bc = 1 << (qubits[0] - 1)
            bt = 1 << (qubits[1] - 1)
            if self.x & bc:
                self.x ^= bt
            if self.z & bt:
                self.z ^= bc
        else:
            raise UnsupportedGate(f"frame cannot propagate through {kind!r}")

    def measure_flip(self, qubit: int) -> int:
        """Outcome flip of a computational-basis measurement (records it)."""
        flip = (self.x >> (qubit - 1)) & 1
        self.flips.append(flip)
        return flip

    def peek_flip(self, qubit: int) -> int:
        return (self.x >> (qubit - 1)) & 1

    def reset(self, qubit: int) -> None:
        """Fresh qubit replaces this one; any pending error is wiped."""
        b = 1 << (qubit - 1)
        self.x &= ~b
        self.z &= ~b


@dataclass
class FrameSampleRecord:
    outcomes: dict[int, int]            # cbit -> reference XOR flip
    flips: dict[int, int]               # cbit -> flip relative to reference
    faults: list[tuple[FaultLocation, list]] = field(default_factory=list)
    residual: PauliString | None = None  # frame error at circuit exit


class FrameSampler:
    """Repeated fast noise sampling of one static Clifford circuit.

    The reference outcome of every classical bit is fixed once at
    construction by a noiseless tableau run (measurements that are
    genuinely random in the circuit are frozen to one consistent draw).
    Conditioned operations must be Pauli (X/Z): when noise flips a
    condition relative to the reference, the difference between applying
    and not applying a Pauli is folded into the frame.
    """

    def __init__(self, circuit: Circuit, reference_rng: np.random.Generator | None = None,
                 initial: StabilizerTableau | None = None):
        """``initial`` seeds the reference run (e.g. an encoded data block);
        the default is |0...0>.  Conditions over functionals whose reference
        value is random still sample the correct flip distribution, but the
        reference is frozen to one consistent draw."""
        circuit.validate()
        self.circuit = circuit
        rng = reference_rng if reference_rng is not None else np.random.default_rng(0)
        self.reference = _tableau_reference(circuit, rng, initial)

    def sample(self, noise: NoiseModel, rng: np.random.Generator,
               plan: dict[int, list] | None = None) -> FrameSampleRecord:
        """Propagate one noisy shot.

        ``plan`` maps location indices (the enumeration order of
        ``ftqc.runner.circuit_locations``) to forced injections; planned
        locations skip stochastic sampling.
        """
        frame = PauliFrame(self.circuit.num_qubits)
        outcomes: dict[int, int] = {}
        flips: dict[int, int] = {}
        faults: list[tuple[FaultLocation, list]] = []
        index = 0

        def fire(loc: FaultLocation) -> list:
            if plan is not None and loc.index in plan:
                return plan[loc.index]
            if loc.kind == "meas":
                return ["flip"] if measurement_flip(noise, rng) else []
            return sample_fault(loc, noise, rng)

        for step in self.circuit.timesteps:
            touched: set[int] = set()
            measure_ops = []
            for op in step:
                touched.update(op.qubits)
                if op.kind == "MEAS":
                    measure_ops.append(op)
                    continue
                if op.kind == "DISCARD":
                    frame.reset(op.qubits[0])
                    continue
                if op.kind == "PREP0":
                    loc = FaultLocation(index, "prep", "", op.qubits)
                    index += 1
                    frame.reset(op.qubits[0])
                else:
                    fired = _eval_condition(op.cond, outcomes)
                    ref_fired = _eval_condition(op.cond, self.reference)
                    if op.cond is None:
                        frame.gate(op.kind, op.qubits)
                    elif op.kind in ("X", "Z"):
                        if fired != ref_fired:
                            # branch difference is exactly the fix-up Pauli
                            frame.inject(op.qubits[0], op.kind)
                    else:
                        if fired != ref_fired:
                            raise UnsupportedGate(
                                "frame sampling supports conditioned Pauli fix-ups only")
                        if fired:
                            frame.gate(op.kind, op.qubits)
                    loc = FaultLocation(index, "gate", op.kind.lower(), op.qubits)
                    index += 1
                fault = fire(loc)
                if fault:
                    faults.append((loc, fault))
                    for q, letter in fault:
                        frame.inject(q, letter)
            for op in measure_ops:
                loc = FaultLocation(index, "meas", "", op.qubits)
                index += 1
                flip = frame.measure_flip(op.qubits[0])
                if fire(loc):
                    flip ^= 1
                    faults.append((loc, ["flip"]))
                flips[op.cbit] = flip
                outcomes[op.cbit] = self.reference[op.cbit] ^ flip
            idle = sorted(set(range(1, self.circuit.num_qubits + 1)) - touched)
            for q in idle:
                loc = FaultLocation(index, "idle", "", (q,))
                index += 1
                fault = fire(loc)
                if fault:
                    faults.append((loc, fault))
                    for qq, letter in fault:
                        frame.inject(qq, letter)
        record = FrameSampleRecord(outcomes=outcomes, flips=flips, faults=faults)
        record.residual = frame.error
        return record


def frame_sample(circuit: Circuit, noise: NoiseModel,
                 rng: np.random.Generator) -> FrameSampleRecord:
    """One-shot convenience wrapper; reference outcomes drawn from ``rng``."""
    return FrameSampler(circuit, reference_rng=rng).sample(noise, rng)


def _eval_condition(cond: Condition | None, bits: dict[int, int]) -> bool:
    if cond is None:
        return True
    for cbits, want in cond:
        parity = 0
        for c in cbits:
            parity ^= bits[c]
        if parity != want:
            return False
    return True


def _tableau_reference(circuit: Circuit, rng: np.random.Generator,
                       initial: StabilizerTableau | None = None) -> dict[int, int]:
    tab = initial.copy() if initial is not None else StabilizerTableau(circuit.num_qubits)
    bits: dict[int, int] = {}
    for step in circuit.timesteps:
        measure_ops = []
        for op in step:
            if op.kind == "MEAS":
                measure_ops.append(op)
            elif op.kind == "PREP0":
                tab.reset(op.qubits[0], rng)
            elif op.kind == "DISCARD":
                tab.reset(op.qubits[0], rng)
            else:
                if _eval_condition(op.cond, bits):
                    tab.apply_gate(op.kind, op.qubits)
        for op in measure_ops:
            bits[op.cbit] = tab.measure_z(op.qubits[0], rng)
    return bits
