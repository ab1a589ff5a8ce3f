"""Fault-tolerant procedures as executable protocols over the engines.

These are the adaptive pieces a static circuit cannot express: verified
ancilla preparation with retry, syndrome repetition policies, recovery
with classical decoding, transversal logical gates, the measurement-based
Toffoli, and leakage replacement.

Protocols drive an ``ftqc.runner.Executor`` and never touch engine
internals, so the same code runs exactly on the tableau engine and fast
on the Pauli-frame engine.  All classical decisions factor through
parity functionals whose noiseless value is deterministically zero
(check-matrix parities of codeword readouts, verification bits), which is
what makes the zero-reference frame engine exact here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ftqc.builders import (NAIVE_SCHEDULE, TOFFOLI_BARE_LAYOUT,
                           build_toffoli_protocol, encoder_steps,
                           shor_cat_steps, steane_ancilla_coupling_steps,
                           zero_prep_steps)
from ftqc.codes import (HAMMING_H, StabilizerCode, decode_syndrome,
                        hamming_decode, steane_code, syndrome_of,
                        syndrome_position)
from ftqc.noise import NoiseModel
from ftqc.pauli import PauliString
from ftqc.runner import (Executor, FrameProtocolEngine, PreparationFailure,
                         TableauProtocolEngine, run_circuit_dense_branches)
from ftqc.statevector import StateVector

REPEAT_RULES = ("accept-trivial-once", "repeat-until-agree", "defer-on-disagree")
METHODS = ("steane", "shor", "naive")


@dataclass(frozen=True)
class RecoveryPolicy:
    method: str = "steane"
    repeat_rule: str = "defer-on-disagree"
    verify_ancilla: bool = True
    max_ancilla_retries: int = 16
    max_syndrome_repeats: int = 8
    demo_mode: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.repeat_rule not in REPEAT_RULES:
            raise ValueError(f"repeat_rule must be one of {REPEAT_RULES}")
        if self.max_ancilla_retries <= 0 or self.max_syndrome_repeats <= 0:
            raise ValueError("retry bounds must be positive")
        if self.method == "naive" and not self.demo_mode:
            raise ValueError("the naive method is only legal in demonstration mode")


@dataclass
class RecoveryOutcome:
    correction: PauliString
    syndrome_history: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    ancillas_consumed: int = 0
    deferred: bool = False


# Qubit layout used by recovery executors: data block first, scratch after.
DATA = tuple(range(1, 8))
STEANE_ANC = tuple(range(8, 15))
STEANE_CHECKER = tuple(range(15, 22))
STEANE_QUBITS = 21
SHOR_CAT = tuple(range(8, 12))
SHOR_CHECK = 12
SHOR_QUBITS = 12
NAIVE_ANC = (8, 9, 10)
NAIVE_QUBITS = 10


def _qmap(block: tuple[int, ...]) -> dict[int, int]:
    return {i + 1: q for i, q in enumerate(block)}


def encode_logical_zero(ex: Executor, block: tuple[int, ...]) -> None:
    """Encode |0> into a seven-qubit block (block qubits are prepared)."""
    for q in block:
        ex.prep0(q)
    ex.run_steps(zero_prep_steps(), qmap=_qmap(block))


def encode_logical_input(ex: Executor, block: tuple[int, ...]) -> None:
    """Run the full encoder; the input amplitude rides block qubit 6."""
    ex.run_steps(encoder_steps(), qmap=_qmap(block))


def logical_readout_destructive(ex: Executor, block: tuple[int, ...]) -> tuple[int, list[int]]:
    """Measure the block out; classical correction then parity."""
    bits = [ex.measure(q) for q in block]
    corrected, _ = hamming_decode(np.array(bits, dtype=np.uint8))
    return int(np.sum(corrected) % 2), bits


def prepare_verified_logical_zero(ex: Executor, block: tuple[int, ...],
                                  checker: tuple[int, ...]) -> dict:
    """Encoded zero with destructive double-check against fresh blocks.

    Two checker blocks are encoded and compared by transversal XOR and
    destructive readout.  Two zeros accept the block; two ones flip it
    (bitwise NOT); a split vote accepts it unchanged, since conflicting
    checks mean a checker itself was faulty and the block is overwhelmingly
    likely fine.
    """
    encode_logical_zero(ex, block)
    checks = []
    for _ in range(2):
        encode_logical_zero(ex, checker)
        ex.ancillas_consumed += 1
        ex.step([("CNOT", (b, c)) for b, c in zip(block, checker)])
        value, _ = logical_readout_destructive(ex, checker)
        checks.append(value)
    if checks == [1, 1]:
        ex.fixup_step([("X", (q,)) for q in block])
    return {"checks": checks, "flipped": checks == [1, 1]}


def prepare_verified_cat(ex: Executor, cat: tuple[int, int, int, int], check: int,
                         max_retries: int, verify: bool = True) -> int:
    """Four-qubit cat accepted by the end-bit comparison; returns retries."""
    steps = shor_cat_steps(cat, check)
    for attempt in range(max_retries):
        for q in (*cat, check):
            ex.prep0(q)
        if not verify:
            ex.run_steps(steps[:4])
            return attempt
        ex.run_steps(steps)
        if ex.measure(check) == 0:
            return attempt
        ex.ancillas_consumed += 1
    raise PreparationFailure("cat-state verification retry budget exhausted")


def prepare_verified_shor_state(noise: NoiseModel, rng: np.random.Generator,
                                max_retries: int = 16,
                                engine: str = "tableau") -> tuple[object, int]:
    """Verified even-weight four-qubit ancilla; returns (engine, retries).

    The returned engine holds the post-rotation state on qubits 1..4.
    """
    eng = _make_engine(engine, 5, rng)
    ex = Executor(eng, noise, rng)
    retries = prepare_verified_cat(ex, (1, 2, 3, 4), 5, max_retries)
    ex.step([("H", (q,)) for q in (1, 2, 3, 4)])
    return eng, retries


def _make_engine(kind: str, n: int, rng: np.random.Generator):
    if kind == "tableau":
        return TableauProtocolEngine(n, rng)
    if kind == "frame":
        return FrameProtocolEngine(n, rng)
    raise ValueError(f"unknown engine {kind!r}")


# -- syndrome extraction -------------------------------------------------------


def _factory_skippable(ex: Executor) -> bool:
    """An offline factory over fresh qubits is a no-op on the frame engine
    when its gate/prep/measure channels are noiseless; skipping it changes
    neither the frame nor the rng stream (no draws fire either way)."""
    return (getattr(ex, "allow_factory_skip", False)
            and getattr(ex.engine, "kind", "") == "frame"
            and ex.plan is None and ex.locations is None
            and ex.noise.factory_trivial)


def _extract_half_steane(ex: Executor, half: str, verify: bool) -> tuple[int, ...]:
    """One verified-ancilla syndrome half; returns 3 check bits.

    The ancilla factory runs offline (the data does not age during it);
    the coupling steps and the readout step age the data normally.
    """
    if _factory_skippable(ex):
        for q in STEANE_ANC:
            ex.engine.reset(q)
            ex.live.add(q)
        ex.ancillas_consumed += 3 if verify else 1
    else:
        with ex.idle_suspended():
            if verify:
                prepare_verified_logical_zero(ex, STEANE_ANC, STEANE_CHECKER)
                ex.ancillas_consumed += 1
            else:
                encode_logical_zero(ex, STEANE_ANC)
                ex.ancillas_consumed += 1
    ex.run_steps(steane_ancilla_coupling_steps(DATA, STEANE_ANC, half))
    bits = np.array([ex.measure(q) for q in STEANE_ANC], dtype=np.uint8)
    ex.idle(sorted(ex.live))  # readout timestep
    return tuple(int(v) for v in (HAMMING_H @ bits) % 2)


def _extract_half_shor(ex: Executor, half: str, code: StabilizerCode,
                       max_retries: int, verify: bool) -> tuple[int, ...]:
    """Three syndrome bits of one type, one verified cat each."""
    indices = (1, 2, 3) if half == "bit" else (4, 5, 6)
    out = []
    for gi in indices:
        gen = code.generators[gi - 1]
        support = gen.support()
        if _factory_skippable(ex):
            for q in SHOR_CAT:
                ex.engine.reset(q)
                ex.live.add(q)
        else:
            with ex.idle_suspended():
                prepare_verified_cat(ex, SHOR_CAT, SHOR_CHECK, max_retries, verify)
        ex.ancillas_consumed += 1
        if half == "bit":
            ex.step([("H", (q,)) for q in SHOR_CAT])
            ex.step([("CNOT", (d, c)) for d, c in zip(support, SHOR_CAT)])
        else:
            ex.step([("CNOT", (c, d)) for d, c in zip(support, SHOR_CAT)])
            ex.step([("H", (q,)) for q in SHOR_CAT])
        bits = [ex.measure(q) for q in SHOR_CAT]
        ex.idle(sorted(ex.live))  # readout timestep
        out.append(sum(bits) % 2)
    return tuple(out)


def _extract_half_naive(ex: Executor, half: str) -> tuple[int, ...]:
    """Bare-ancilla syndrome half (demonstration only, not fault tolerant)."""
    for q in NAIVE_ANC:
        ex.prep0(q)
    if half == "phase":
        ex.step([("H", (q,)) for q in DATA])
    for row in NAIVE_SCHEDULE:
        ex.step([("CNOT", (src, NAIVE_ANC[k])) for k, src in enumerate(row)])
    if half == "phase":
        ex.step([("H", (q,)) for q in DATA])
    return tuple(ex.measure(q) for q in NAIVE_ANC)


def _extract_half(ex: Executor, half: str, policy: RecoveryPolicy,
                  code: StabilizerCode) -> tuple[int, ...]:
    if policy.method == "steane":
        return _extract_half_steane(ex, half, policy.verify_ancilla)
    if policy.method == "shor":
        return _extract_half_shor(ex, half, code, policy.max_ancilla_retries,
                                  policy.verify_ancilla)
    return _extract_half_naive(ex, half)


def _extract_full(ex: Executor, policy: RecoveryPolicy,
                  code: StabilizerCode) -> tuple[int, ...]:
    return (_extract_half(ex, "bit", policy, code)
            + _extract_half(ex, "phase", policy, code))


def recover(ex: Executor, policy: RecoveryPolicy,
            code: StabilizerCode | None = None) -> RecoveryOutcome:
    """One error-correction round on the data block under the policy.

    The full syndrome is measured once; a trivial reading is accepted
    immediately and nothing is repeated.  A nontrivial reading is measured
    again: two agreeing readings act, disagreement defers the whole round
    (or keeps repeating under repeat-until-agree, acting once the last two
    readings match).  A deferred error is caught by the next round.  The
    naive method acts on its first reading and is demonstration-only.
    """
    code = code if code is not None else steane_code()
    outcome = RecoveryOutcome(correction=PauliString.identity(7))
    syndrome = _extract_full(ex, policy, code)
    outcome.syndrome_history.append(("full", syndrome))
    if policy.method == "naive":
        _apply_correction(ex, outcome, syndrome)
        outcome.ancillas_consumed = ex.ancillas_consumed
        return outcome
    if any(syndrome):
        repeats = 1
        while True:
            again = _extract_full(ex, policy, code)
            outcome.syndrome_history.append(("full", again))
            repeats += 1
            if again == syndrome:
                _apply_correction(ex, outcome, syndrome)
                break
            if (policy.repeat_rule == "repeat-until-agree"
                    and repeats < policy.max_syndrome_repeats):
                syndrome = again
                continue
            outcome.deferred = True
            break
    outcome.ancillas_consumed = ex.ancillas_consumed
    return outcome


def _apply_correction(ex: Executor, outcome: RecoveryOutcome,
                      syndrome: tuple[int, ...]) -> None:
    fixups = []
    for half, op_kind in (("bit", "X"), ("phase", "Z")):
        bits = syndrome[:3] if half == "bit" else syndrome[3:]
        position = syndrome_position(np.array(bits, dtype=np.uint8))
        if position == 0:
            continue
        fixups.append((op_kind, (DATA[position - 1],)))
        outcome.correction = outcome.correction * PauliString.single(7, position, op_kind)
    if fixups:
        ex.fixup_step(fixups)


def recovery_qubit_count(method: str) -> int:
    return {"steane": STEANE_QUBITS, "shor": SHOR_QUBITS, "naive": NAIVE_QUBITS}[method]


# -- residual-error audits -----------------------------------------------------


def residual_logical_action(residual: PauliString, code: StabilizerCode) -> str:
    """Logical action left after one ideal recovery of the residual error."""
    correction = decode_syndrome(syndrome_of(residual, code), code)
    return code.logical_action(correction * residual)


@dataclass
class SweepReport:
    locations: int
    injections: int
    failures: list[tuple[int, str, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def fault_tolerance_sweep(policy: RecoveryPolicy,
                          code: StabilizerCode | None = None) -> SweepReport:
    """Exhaustive single-fault injection over one full recovery round.

    For every fault location of the round (gates, preparations,
    measurements, and idle storage slots, enumerated by a reference run)
    and every nonidentity Pauli species there, run the round on the frame
    engine with exactly that fault, then apply one ideal recovery and
    check that no logical error remains.  A protocol is fault tolerant
    when the report is clean: a single fault never damages the encoded
    qubit beyond what one more clean round repairs.
    """
    code = code if code is not None else steane_code()
    n = recovery_qubit_count(policy.method)

    def run_round(plan):
        rng = np.random.default_rng(0)  # protocol is outcome-deterministic here
        eng = FrameProtocolEngine(n, rng)
        ex = Executor(eng, NoiseModel.ideal(), rng, plan=plan,
                      record_locations=plan is None)
        ex.live.update(DATA)
        recover(ex, policy, code)
        residual7 = _data_residual(eng)
        return ex, residual7

    reference_ex, residual = run_round(None)
    if residual.weight() != 0:
        raise AssertionError("noiseless recovery round left a residual error")
    report = SweepReport(locations=len(reference_ex.locations), injections=0)
    for loc in reference_ex.locations:
        for species in loc.species():
            report.injections += 1
            _, residual = run_round({loc.index: species})
            if residual_logical_action(residual, code) != "I":
                report.failures.append((loc.index, f"{loc.kind}:{loc.gate_kind}{loc.qubits}",
                                        species))
    return report


def _data_residual(eng: FrameProtocolEngine) -> PauliString:
    full = eng.frame.error
    x = full.x_bits[:7]
    z = full.z_bits[:7]
    return PauliString(7, x, z)


# -- transversal gates -----------------------------------------------------------


def transversal_gate(ex: Executor, gate: str, *blocks: tuple[int, ...]) -> None:
    """Bitwise logical gate: X, H, P (applied as bitwise P^-1), or CNOT.

    Every physical qubit is touched by exactly one gate, so one fault
    damages at most one qubit per block.
    """
    if gate == "CNOT":
        src, dst = blocks
        ex.step([("CNOT", (a, b)) for a, b in zip(src, dst)])
        return
    (block,) = blocks
    if gate == "X":
        ex.step([("X", (q,)) for q in block])
    elif gate == "H":
        ex.step([("H", (q,)) for q in block])
    elif gate == "P":
        ex.step([("PINV", (q,)) for q in block])
    else:
        raise ValueError(f"no transversal implementation for {gate!r}")


# -- measurement-based Toffoli ----------------------------------------------------


def toffoli_bare_branches(input_state: StateVector):
    """All measurement branches of the bare Toffoli gadget on a 3-qubit input.

    ``input_state`` is a 3-qubit state; yields (branch outcomes, probability,
    3-qubit output state on the former ancilla wires).
    """
    circuit = build_toffoli_protocol(bare=True)
    full = StateVector(9)
    amps = np.zeros(2 ** 9, dtype=complex)
    amps[: 2 ** 3] = input_state.amps  # data wires are the three low bits
    full.amps = amps
    anc = TOFFOLI_BARE_LAYOUT["anc"]
    measured = TOFFOLI_BARE_LAYOUT["cats"] + TOFFOLI_BARE_LAYOUT["data"]
    for outcomes, prob, sv in run_circuit_dense_branches(circuit, full):
        fixed = {}
        for q in measured:
            fixed[q] = _last_outcome_for_qubit(circuit, outcomes, q)
        out = sv.subsystem(anc, fixed)
        yield outcomes, prob, StateVector.from_amplitudes(out)


def _last_outcome_for_qubit(circuit, outcomes: dict[int, int], qubit: int) -> int:
    last = None
    for _, op in circuit.all_ops():
        if op.kind == "MEAS" and op.qubits[0] == qubit and op.cbit in outcomes:
            last = outcomes[op.cbit]
    if last is None:
        raise ValueError(f"qubit {qubit} was never measured")
    return last


def verify_toffoli_bare(states: list[StateVector] | None = None,
                        tol: float = 1e-10,
                        rng: np.random.Generator | None = None) -> dict:
    """Check the bare gadget against the direct Toffoli on every branch.

    Uses the eight basis states plus any supplied states; returns a report
    with the worst branch fidelity and total branch probability defect.
    """
    if states is None:
        states = []
    basis = []
    for idx in range(8):
        sv = StateVector(3)
        sv.amps[:] = 0
        sv.amps[idx] = 1.0
        basis.append(sv)
    worst = 1.0
    prob_defect = 0.0
    checked = 0
    for sv_in in basis + states:
        want = sv_in.copy()
        want.apply("TOFFOLI", 1, 2, 3)
        total = 0.0
        for _, prob, out in toffoli_bare_branches(sv_in):
            fid = out.fidelity(want)
            worst = min(worst, fid)
            total += prob
            checked += 1
        prob_defect = max(prob_defect, abs(total - 1.0))
    return {"worst_fidelity": worst, "branches": checked,
            "probability_defect": prob_defect, "ok": worst >= 1 - tol}


def toffoli_fault_audit(references: int = 64,
                        rng: np.random.Generator | None = None) -> SweepReport:
    """Single-fault exit-damage audit of the encoded Toffoli gadget.

    A genuine fault sweep of the 63-qubit gadget is outside both engines
    (non-Clifford, too large for dense), so the audit mechanically checks
    the three facts that together confine a single fault's exit damage to
    one qubit per block:

    1. Index locality: every cross-block gate in the encoded emission
       couples equal bit indices only, so any single fault's quantum
       support stays within one bit index of each block.
    2. Classical robustness: every single flipped readout bit leaves all
       classical decisions unchanged — a flipped cat bit flips one of the
       three repetition parities and loses the majority vote, and a
       flipped data-block bit is removed by classical correction before
       the logical value is taken.  Exhaustive over all readout bits and
       many random reference readouts.
    3. Branch correctness: the gadget's conditioned fix-ups reproduce the
       three-qubit gate exactly on every measurement branch (checked
       densely at the bare level by ``verify_toffoli_bare``).

    The remaining case, a persistent ancilla-block error flipping several
    repetition parities at once, flips them *consistently* (the error
    conjugates the measured observable, it does not randomize it), so the
    majority still fires coherently with the state and the residue stays
    the index-local error of point 1.
    """
    rng = rng if rng is not None else np.random.default_rng(7)
    circuit = build_toffoli_protocol(bare=False)
    report = SweepReport(locations=0, injections=0)

    # 1. index locality of the encoded emission
    blocks = {i: tuple(range(1 + 7 * i, 8 + 7 * i)) for i in range(9)}
    def bit_index(q: int) -> int:
        return (q - 1) % 7
    for _, op in circuit.all_ops():
        if len(op.qubits) < 2:
            continue
        owners = {(q - 1) // 7 for q in op.qubits}
        if len(owners) == 1:
            continue  # block-internal preparation
        report.locations += 1
        if len({bit_index(q) for q in op.qubits}) != 1:
            report.failures.append((report.locations, "cross-index coupling", str(op)))

    # 2. classical decision pipeline under single readout-bit flips
    for trial in range(references):
        cat_strings, data_words, logicals = _toffoli_reference_readouts(rng)
        base = _toffoli_decisions(cat_strings, data_words)
        for register in range(6):
            for bit in range(7):
                report.injections += 1
                cats = [list(s) for s in cat_strings]
                words = [list(w) for w in data_words]
                if register < 3:
                    cats[register][bit] ^= 1
                else:
                    words[register - 3][bit] ^= 1
                flipped = _toffoli_decisions([tuple(c) for c in cats],
                                             [tuple(w) for w in words])
                if flipped != base:
                    report.failures.append(
                        (trial, f"readout register {register} bit {bit}",
                         (base, flipped)))
    return report


def _toffoli_reference_readouts(rng: np.random.Generator):
    """Random noiseless readouts: three equal-parity cat strings and three
    codeword data readouts with random logical content."""
    from ftqc.codes import hamming_code

    codewords = hamming_code().codewords()
    m = int(rng.integers(2))
    cat_strings = []
    for _ in range(3):
        bits = list(rng.integers(0, 2, size=7))
        if sum(bits) % 2 != m:
            bits[0] ^= 1
        cat_strings.append(tuple(int(b) for b in bits))
    data_words = []
    logicals = []
    for _ in range(3):
        w = codewords[int(rng.integers(len(codewords)))]
        data_words.append(tuple(int(b) for b in w))
        logicals.append(int(sum(w)) % 2)
    return cat_strings, data_words, logicals


def _toffoli_decisions(cat_strings, data_words) -> tuple:
    """The gadget's classical outputs: majority A/B bit and the three
    corrected logical data readouts."""
    parities = [sum(s) % 2 for s in cat_strings]
    majority = 1 if sum(parities) >= 2 else 0
    values = []
    for word in data_words:
        corrected, _ = hamming_decode(np.array(word, dtype=np.uint8))
        values.append(int(corrected.sum()) % 2)
    return (majority, *values)


# -- leakage ---------------------------------------------------------------------


def handle_leakage(ex: Executor, block: tuple[int, ...], detector: int) -> list[int]:
    """Test every block qubit for leakage; replace leaked ones with |0>.

    Returns the 1-based block positions that were replaced.  The caller
    should run a recovery round afterwards: the replacement qubit carries
    a known-location error that ordinary syndrome decoding repairs.

    On the frame engine the detector readout has reference value 1 (every
    present branch toggles the ancilla exactly once), so the raw flip is
    translated; replacing a code-block qubit is frame-exact because any
    in-codespace single-qubit marginal is maximally mixed, making the
    reset channel a uniform {I,X}x{I,Z} injection.
    """
    frame_engine = getattr(ex.engine, "kind", "") == "frame"
    replaced = []
    for i, q in enumerate(block):
        was_leaked = q in ex.leaked
        ex.prep0(detector)
        ex.step([("X", (q,))])
        ex.step([("CNOT", (q, detector))])
        ex.step([("X", (q,))])
        ex.step([("CNOT", (q, detector))])
        raw = ex.measure(detector)
        if frame_engine:
            present = 0 if was_leaked else 1 ^ raw
        else:
            present = raw
        if present == 0:
            ex.discard(q)
            ex.prep0(q)
            if frame_engine:
                if ex.rng.random() < 0.5:
                    ex.engine.inject(q, "X")
                if ex.rng.random() < 0.5:
                    ex.engine.inject(q, "Z")
            replaced.append(i + 1)
    return replaced
