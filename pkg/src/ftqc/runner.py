"""Execution machinery shared by static circuits and adaptive protocols.

Fault locations
---------------
Within each timestep the enumeration order is fixed: gate/prep ops in
program order, then measurements, then idle slots in ascending qubit
order.  Idle slots cover every circuit qubit not touched by the step.
This order is identical for the tableau runner and the frame sampler, so
an injection plan ``{location_index: payload}`` means the same fault in
both; exhaustive sweeps iterate ``circuit_locations``.

Executor
--------
Adaptive protocols (verified ancilla preparation, syndrome repetition)
cannot be a fixed circuit, so they drive an engine through an Executor
that assigns location indices on the fly, samples noise, honors injection
plans, and tracks leaked qubits (any gate touching a leaked qubit acts as
the identity).  The executor charges one idle (storage) location per live
untouched qubit per explicit ``step``/``idle`` call; ancillas are live
from ``prep0`` until measurement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ftqc.circuits import Circuit
from ftqc.frame import PauliFrame, _eval_condition
from ftqc.noise import (FaultLocation, NoiseModel, leak_check,
                        measurement_flip, sample_fault)
from ftqc.pauli import PauliString
from ftqc.tableau import StabilizerTableau


def circuit_locations(circuit: Circuit) -> list[FaultLocation]:
    """Census of every fault location in a static circuit."""
    out: list[FaultLocation] = []
    index = 0
    for step in circuit.timesteps:
        touched: set[int] = set()
        measure_ops = []
        for op in step:
            touched.update(op.qubits)
            if op.kind == "MEAS":
                measure_ops.append(op)
            elif op.kind == "DISCARD":
                continue
            elif op.kind == "PREP0":
                out.append(FaultLocation(index, "prep", "", op.qubits))
                index += 1
            else:
                out.append(FaultLocation(index, "gate", op.kind.lower(), op.qubits))
                index += 1
        for op in measure_ops:
            out.append(FaultLocation(index, "meas", "", op.qubits))
            index += 1
        for q in sorted(set(range(1, circuit.num_qubits + 1)) - touched):
            out.append(FaultLocation(index, "idle", "", (q,)))
            index += 1
    return out


@dataclass
class CircuitRunRecord:
    outcomes: dict[int, int]
    faults: list[tuple[FaultLocation, list]] = field(default_factory=list)


def run_circuit_tableau(circuit: Circuit, noise: NoiseModel,
                        rng: np.random.Generator,
                        plan: Optional[dict[int, list]] = None,
                        tableau: Optional[StabilizerTableau] = None) -> CircuitRunRecord:
    """Run a static Clifford circuit on the tableau engine under noise.

    Location enumeration matches the frame sampler exactly, so the same
    plan injects the same fault.
    """
    circuit.validate()
    tab = tableau if tableau is not None else StabilizerTableau(circuit.num_qubits)
    outcomes: dict[int, int] = {}
    faults: list[tuple[FaultLocation, list]] = []
    index = 0

    def fire(loc: FaultLocation) -> list:
        if plan is not None and loc.index in plan:
            return plan[loc.index]
        if loc.kind == "meas":
            return ["flip"] if measurement_flip(noise, rng) else []
        return sample_fault(loc, noise, rng)

    def inject(fault: list) -> None:
        for q, letter in fault:
            tab.inject_pauli(PauliString.single(tab.n, q, letter))

    for step in circuit.timesteps:
        touched: set[int] = set()
        measure_ops = []
        for op in step:
            touched.update(op.qubits)
            if op.kind == "MEAS":
                measure_ops.append(op)
                continue
            if op.kind == "DISCARD":
                tab.reset(op.qubits[0], rng)
                continue
            if op.kind == "PREP0":
                loc = FaultLocation(index, "prep", "", op.qubits)
                index += 1
                tab.reset(op.qubits[0], rng)
            else:
                if _eval_condition(op.cond, outcomes):
                    tab.apply_gate(op.kind, op.qubits)
                loc = FaultLocation(index, "gate", op.kind.lower(), op.qubits)
                index += 1
            fault = fire(loc)
            if fault:
                faults.append((loc, fault))
                inject(fault)
        for op in measure_ops:
            loc = FaultLocation(index, "meas", "", op.qubits)
            index += 1
            bit = tab.measure_z(op.qubits[0], rng)
            if fire(loc):
                bit ^= 1
                faults.append((loc, ["flip"]))
            outcomes[op.cbit] = bit
        for q in sorted(set(range(1, circuit.num_qubits + 1)) - touched):
            loc = FaultLocation(index, "idle", "", (q,))
            index += 1
            fault = fire(loc)
            if fault:
                faults.append((loc, fault))
                inject(fault)
    return CircuitRunRecord(outcomes=outcomes, faults=faults)


def run_circuit_dense_branches(circuit: Circuit, initial, tol: float = 1e-12):
    """Enumerate every measurement branch of a circuit on the dense engine.

    Yields (outcomes, probability, final_state) for each branch with
    probability above ``tol``.  Conditions are evaluated per branch.
    ``initial`` is a StateVector already holding the input state.
    """
    from ftqc.statevector import StateVector  # local import, heavy module

    circuit.validate()
    program: list = []
    for step in circuit.timesteps:
        gates = [op for op in step if op.kind != "MEAS"]
        meas = [op for op in step if op.kind == "MEAS"]
        program.extend(gates + meas)

    def walk(pos: int, sv: StateVector, outcomes: dict[int, int], prob: float):
        while pos < len(program):
            op = program[pos]
            pos += 1
            if op.kind == "MEAS":
                for bitval in (0, 1):
                    p = sv.prob_of(op.qubits[0], bitval)
                    if p * prob <= tol:
                        continue
                    branch = sv.copy()
                    branch.postselect(op.qubits[0], bitval)
                    sub = dict(outcomes)
                    sub[op.cbit] = bitval
                    yield from walk(pos, branch, sub, prob * p)
                return
            if op.kind in ("PREP0", "DISCARD"):
                # deterministic reset via the two projection branches
                for bitval in (0, 1):
                    p = sv.prob_of(op.qubits[0], bitval)
                    if p * prob <= tol:
                        continue
                    branch = sv.copy()
                    branch.postselect(op.qubits[0], bitval)
                    if bitval == 1:
                        branch.apply("X", op.qubits[0])
                    yield from walk(pos, branch, dict(outcomes), prob * p)
                return
            if _eval_condition(op.cond, outcomes):
                sv.apply(op.kind, *op.qubits)
        yield outcomes, prob, sv

    yield from walk(0, initial.copy(), {}, 1.0)


# -- engines for adaptive protocols ---------------------------------------------


class TableauProtocolEngine:
    """Exact engine: raw measurement bits, genuine collapse."""

    kind = "tableau"

    def __init__(self, n: int, rng: np.random.Generator):
        self.tab = StabilizerTableau(n)
        self.rng = rng
        self.n = n

    def gate(self, kind: str, qubits: tuple[int, ...]) -> None:
        self.tab.apply_gate(kind, qubits)

    def measure_z(self, qubit: int) -> int:
        return self.tab.measure_z(qubit, self.rng)

    def reset(self, qubit: int) -> None:
        self.tab.reset(qubit, self.rng)

    def inject(self, qubit: int, letter: str) -> None:
        self.tab.inject_pauli(PauliString.single(self.n, qubit, letter))


class FrameProtocolEngine:
    """Fast engine: measurement returns outcome *flips* (zero reference).

    Valid for protocols whose classical decisions factor through
    functionals that are deterministically zero in the noiseless run
    (parity checks of codeword readouts, verification bits); the recovery
    and memory experiments here are all of this form.
    """

    kind = "frame"

    def __init__(self, n: int, rng: np.random.Generator):
        self.frame = PauliFrame(n)
        self.rng = rng
        self.n = n

    def gate(self, kind: str, qubits: tuple[int, ...]) -> None:
        self.frame.gate(kind, qubits)

    def measure_z(self, qubit: int) -> int:
        return self.frame.peek_flip(qubit)

    def reset(self, qubit: int) -> None:
        self.frame.reset(qubit)

    def inject(self, qubit: int, letter: str) -> None:
        self.frame.inject(qubit, letter)


class PreparationFailure(RuntimeError):
    """Verified-ancilla retry budget exhausted."""


_LETTERS = ("X", "Y", "Z")


class Executor:
    """Drives an engine with noise sampling, fault plans, and leakage.

    Storage (idle) noise is charged per explicit ``step``/``idle`` call to
    the live qubits not touched by it.  Sections wrapped in
    ``idle_suspended`` charge no storage at all: that is the maximal-
    parallelism reading under which ancilla factories run concurrently
    with the computation, so the data does not age while a verified
    ancilla is being built (the factory's own gate, preparation, and
    measurement faults are still sampled).
    """

    def __init__(self, engine, noise: Optional[NoiseModel] = None,
                 rng: Optional[np.random.Generator] = None,
                 plan: Optional[dict[int, list]] = None,
                 record_locations: bool = False):
        self.engine = engine
        self.noise = noise if noise is not None else NoiseModel.ideal()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.plan = plan
        self.locations: Optional[list[FaultLocation]] = [] if record_locations else None
        self.index = 0
        self.live: set[int] = set()
        self.leaked: set[int] = set()
        self.faults: list[tuple[FaultLocation, list]] = []
        self.ancillas_consumed = 0
        self._idle_active = True
        self._skip_sampling = self.noise.is_trivial and plan is None
        self._slow = record_locations or plan is not None

    def idle_suspended(self):
        """Context manager: no storage aging inside (offline factory section)."""
        return _IdleSuspension(self)

    # -- location plumbing ---------------------------------------------------

    def _loc(self, kind: str, gate_kind: str, qubits: tuple[int, ...]) -> FaultLocation:
        loc = FaultLocation(self.index, kind, gate_kind, qubits)
        self.index += 1
        if self.locations is not None:
            self.locations.append(loc)
        return loc

    def _fire(self, loc: FaultLocation) -> list:
        if self.plan is not None and loc.index in self.plan:
            return self.plan[loc.index]
        if self._skip_sampling:
            return []
        if loc.kind == "meas":
            return ["flip"] if measurement_flip(self.noise, self.rng) else []
        return sample_fault(loc, self.noise, self.rng)

    def _record(self, kind: str, gate_kind: str, qubits: tuple[int, ...],
                fault: list) -> None:
        self.faults.append((FaultLocation(self.index - 1, kind, gate_kind, qubits),
                            fault))

    def _draw_gate_fault(self, qubits: tuple[int, ...]) -> list:
        if len(qubits) == 1 or self.noise.multiqubit_mode == "all-operands":
            return [(q, _LETTERS[int(self.rng.integers(3))]) for q in qubits]
        pattern = 1 + int(self.rng.integers(4 ** len(qubits) - 1))
        fault = []
        for q in qubits:
            letter_index = pattern % 4
            pattern //= 4
            if letter_index:
                fault.append((q, _LETTERS[letter_index - 1]))
        return fault

    # -- operations ------------------------------------------------------------

    def gate(self, kind: str, *qubits: int) -> None:
        if self._slow:
            loc = self._loc("gate", kind.lower(), tuple(qubits))
            fault = self._fire(loc)
        else:
            self.index += 1
            fault = None
            if not self._skip_sampling:
                eps = self.noise.gate_eps(kind)
                if eps > 0 and self.rng.random() < eps:
                    fault = self._draw_gate_fault(tuple(qubits))
        if not self.leaked or self.leaked.isdisjoint(qubits):
            self.engine.gate(kind, tuple(qubits))
        if fault:
            if self._slow:
                self.faults.append((loc, fault))
            else:
                self._record("gate", kind.lower(), tuple(qubits), fault)
            for q, letter in fault:
                self.engine.inject(q, letter)
        if not self._skip_sampling and self.noise.leak_rate > 0:
            for q in qubits:
                if leak_check(self.noise, self.rng):
                    self.leaked.add(q)

    def pauli_fixup(self, kind: str, qubit: int) -> None:
        """Classically conditioned X/Z repair.

        The noiseless reference of every protocol here fires no fix-ups, so
        on the frame engine a fired fix-up is a deviation from the
        reference and enters the frame as an injected Pauli; on state
        engines it is an ordinary gate.  Either way it is a noisy gate
        location.
        """
        loc = self._loc("gate", kind.lower(), (qubit,))
        if qubit not in self.leaked:
            if getattr(self.engine, "kind", "") == "frame":
                self.engine.inject(qubit, kind)
            else:
                self.engine.gate(kind, (qubit,))
        fault = self._fire(loc)
        if fault:
            self.faults.append((loc, fault))
            for q, letter in fault:
                self.engine.inject(q, letter)

    def fixup_step(self, ops: list[tuple[str, tuple[int, ...]]]) -> None:
        """Parallel timestep of conditioned Pauli repairs."""
        touched: set[int] = set()
        for kind, qubits in ops:
            self.pauli_fixup(kind, qubits[0])
            touched.update(qubits)
        if self._idle_active:
            self.idle(sorted(self.live - touched))

    def prep0(self, qubit: int) -> None:
        if self._slow:
            loc = self._loc("prep", "", (qubit,))
            fault = self._fire(loc)
        else:
            self.index += 1
            fault = None
            if not self._skip_sampling and self.noise.eps_prep > 0:
                if self.rng.random() < self.noise.eps_prep:
                    fault = [(qubit, "X")]
        self.engine.reset(qubit)
        self.leaked.discard(qubit)
        self.live.add(qubit)
        if fault:
            if self._slow:
                self.faults.append((loc, fault))
            else:
                self._record("prep", "", (qubit,), fault)
            for q, letter in fault:
                self.engine.inject(q, letter)

    def measure(self, qubit: int) -> int:
        if self._slow:
            loc = self._loc("meas", "", (qubit,))
            flip = bool(self._fire(loc))
        else:
            self.index += 1
            flip = (not self._skip_sampling and self.noise.eps_meas > 0
                    and self.rng.random() < self.noise.eps_meas)
        bit = 0 if qubit in self.leaked else self.engine.measure_z(qubit)
        if flip:
            bit ^= 1
            self._record("meas", "", (qubit,), ["flip"])
        self.live.discard(qubit)
        return bit

    def discard(self, qubit: int) -> None:
        self.engine.reset(qubit)
        self.leaked.discard(qubit)
        self.live.discard(qubit)

    def idle(self, qubits) -> None:
        """One storage timestep on the given qubits (no-op while suspended)."""
        if not self._idle_active:
            return
        if self._slow:
            for q in qubits:
                loc = self._loc("idle", "", (q,))
                fault = self._fire(loc)
                if fault:
                    self.faults.append((loc, fault))
                    for qq, letter in fault:
                        self.engine.inject(qq, letter)
                if (not self._skip_sampling and self.noise.leak_rate > 0
                        and leak_check(self.noise, self.rng)):
                    self.leaked.add(q)
            return
        k = len(qubits)
        self.index += k
        if self._skip_sampling:
            return
        eps = self.noise.eps_store
        if eps > 0:
            draws = self.rng.random(k)
            for i in range(k):
                if draws[i] < eps:
                    letter = _LETTERS[int(self.rng.integers(3))]
                    loc = FaultLocation(self.index - k + i, "idle", "", (qubits[i],))
                    self.faults.append((loc, [(qubits[i], letter)]))
                    self.engine.inject(qubits[i], letter)
        if self.noise.leak_rate > 0:
            draws = self.rng.random(k)
            for i in range(k):
                if draws[i] < self.noise.leak_rate:
                    self.leaked.add(qubits[i])

    def step(self, ops: list[tuple[str, tuple[int, ...]]]) -> None:
        """One parallel timestep: gates, then storage on live untouched qubits."""
        touched: set[int] = set()
        for kind, qubits in ops:
            self.gate(kind, *qubits)
            touched.update(qubits)
        if self._idle_active and self.live:
            self.idle(sorted(self.live - touched))

    def run_steps(self, steps: list[list[tuple[str, tuple[int, ...]]]],
                  qmap: Optional[dict[int, int]] = None) -> None:
        """Run timestep lists, optionally remapping 1-based qubit labels."""
        for ops in steps:
            if qmap is None:
                self.step(ops)
            else:
                self.step([(kind, tuple(qmap[q] for q in qubits))
                           for kind, qubits in ops])


class _IdleSuspension:
    def __init__(self, ex: Executor):
        self.ex = ex
        self.prev = True

    def __enter__(self):
        self.prev = self.ex._idle_active
        self.ex._idle_active = False
        return self.ex

    def __exit__(self, *exc):
        self.ex._idle_active = self.prev
        return False
