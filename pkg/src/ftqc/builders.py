"""Builders for the laboratory's standard circuits.

Every builder is a pure function returning an immutable, validated
Circuit.  The seven-qubit-block circuits use canonical qubit labels
(single-flip syndrome = binary position index); the unitary encoder is
drawn against the information-bits-first check matrix and re-expressed in
canonical labels through the fixed wire permutation
``codes.ENCODER_WIRE_TO_QUBIT``.

Step lists (the ``*_steps`` helpers) are shared with the adaptive
protocols, which replay them through an Executor with a qubit remap.
"""

from __future__ import annotations

from ftqc.circuits import Circuit, CircuitBuilder, Condition, parity
from ftqc.codes import (ENCODER_WIRE_TO_QUBIT, HAMMING_H, LOGICAL_Z_SUPPORT,
                        StabilizerCode)

Step = list[tuple[str, tuple[int, ...]]]

ENCODER_INPUT_QUBIT = 6  # canonical label of the wire carrying a|0> + b|1>


def _apply_steps(b: CircuitBuilder, steps: list[Step], offset: int = 0) -> None:
    for ops in steps:
        for kind, qubits in ops:
            b.add(kind, *[q + offset for q in qubits])
        b.tick()


def encoder_steps(include_input_fanout: bool = True) -> list[Step]:
    """Unitary encoder in canonical labels.

    The three information wires are canonical qubits 4, 2, 1 (Hadamard
    targets); the input wire is canonical qubit 6 and fans out to qubits
    5 and 3; each information wire then switches on the parity qubits of
    its check-matrix row.
    """
    sigma = ENCODER_WIRE_TO_QUBIT
    info = [sigma[0], sigma[1], sigma[2]]           # wires 1..3 -> qubits 4,2,1
    inp = sigma[6]                                  # wire 7     -> qubit 6
    copies = [sigma[5], sigma[4]]                   # wires 6,5  -> qubits 5,3
    encoder_rows = ([4, 6, 7], [4, 5, 7], [4, 5, 6])  # wire targets per info wire
    steps: list[Step] = []
    if include_input_fanout:
        steps.append([("CNOT", (inp, copies[0]))] + [("H", (q,)) for q in info])
        steps.append([("CNOT", (inp, copies[1]))])
    else:
        steps.append([("H", (q,)) for q in info])
    targets = {j: [sigma[w - 1] for w in encoder_rows[j - 1]] for j in (1, 2, 3)}
    # round-robin packing keeps the nine parity XORs in three disjoint steps
    for shift in range(3):
        ops: Step = []
        for j in (1, 2, 3):
            ops.append(("CNOT", (info[j - 1], targets[j][(j + shift) % 3])))
        steps.append(ops)
    return steps


def zero_prep_steps() -> list[Step]:
    """Prepare the logical zero block from |0000000> (no input fanout)."""
    return encoder_steps(include_input_fanout=False)


def build_encoder() -> Circuit:
    """Seven-qubit encoder: input rides canonical qubit 6, rest start |0>."""
    b = CircuitBuilder(7)
    _apply_steps(b, encoder_steps())
    return b.build()


def build_zero_prep() -> Circuit:
    b = CircuitBuilder(7)
    _apply_steps(b, zero_prep_steps())
    return b.build()


# Hand-packed schedule of the twelve naive-syndrome XORs: step s couples
# NAIVE_SCHEDULE[s][k] -> ancilla k, all three pairs disjoint per step.
NAIVE_SCHEDULE = (
    (4, 2, 1),
    (5, 3, 7),
    (6, 7, 3),
    (7, 6, 5),
)


def build_naive_syndrome() -> Circuit:
    """Bit-flip syndrome with one bare ancilla qubit per check bit.

    Data qubits 1..7, ancillas 8..10; ancilla k collects the parity of the
    data positions in check row k, then is measured (c0..c2).  NOT fault
    tolerant: each ancilla is the target of four successive XORs, so a
    single ancilla phase error can feed back into several data qubits.
    """
    b = CircuitBuilder(10)
    for row in NAIVE_SCHEDULE:
        for k, src in enumerate(row):
            b.add("CNOT", src, 8 + k)
        b.tick()
    for k in range(3):
        b.measure(8 + k)
    b.tick()
    return b.build()


def shor_cat_steps(cat: tuple[int, int, int, int], check: int) -> list[Step]:
    """Build and check a four-qubit cat state: chain of XORs, then the two
    end bits are compared on a check qubit (any single faulty gate that
    puts two flips in the cat makes the ends disagree)."""
    c1, c2, c3, c4 = cat
    return [
        [("H", (c1,))],
        [("CNOT", (c1, c2))],
        [("CNOT", (c2, c3))],
        [("CNOT", (c3, c4))],
        [("CNOT", (c1, check))],
        [("CNOT", (c4, check))],
    ]


def build_shor_ancilla() -> Circuit:
    """Four-qubit even-weight ancilla with verification.

    Qubits 1..4 hold the ancilla, qubit 5 the check; c0 is the
    verification bit (0 = accept, 1 = discard and rebuild).  The closing
    Hadamards rotate the accepted cat into the equal superposition of all
    even-weight strings.
    """
    b = CircuitBuilder(5)
    _apply_steps(b, shor_cat_steps((1, 2, 3, 4), 5))
    b.measure(5)
    for q in (1, 2, 3, 4):
        b.add("H", q)
    b.tick()
    return b.build()


def build_shor_syndrome(code: StabilizerCode, generator_index: int) -> Circuit:
    """One syndrome bit of ``code`` via a verified four-bit ancilla.

    Data qubits 1..n, ancilla n+1..n+4, check qubit n+5; c0 is the
    verification bit and the last four classical bits are the ancilla
    readout.  The syndrome bit is the parity of those four bits; the rest
    of the readout is a uniformly random string carrying nothing about the
    data.

    Z-type checks rotate the ancilla into the even-weight superposition
    and each supported data qubit XORs into one ancilla bit.  X-type
    checks reverse the XOR direction, rotating the ancilla afterwards.
    Generators with X or Y sites mixed among Z sites are routed through
    per-site basis rotations into the Z-coupling path.
    """
    if not 1 <= generator_index <= len(code.generators):
        raise ValueError("generator index out of range")
    gen = code.generators[generator_index - 1]
    support = gen.support()
    if len(support) != 4:
        raise ValueError("four-bit ancilla coupling needs a weight-4 generator")
    y_count = sum(1 for q in support if gen.letter(q) == "Y")
    if (gen.phase_exp - y_count) % 4 != 0:
        raise ValueError("generator must be a positive Hermitian operator")
    letters = {q: gen.letter(q) for q in support}
    n = code.n
    cat = (n + 1, n + 2, n + 3, n + 4)
    check = n + 5
    b = CircuitBuilder(n + 5)
    _apply_steps(b, shor_cat_steps(cat, check))
    b.measure(check)
    b.tick()
    pure_x = all(v == "X" for v in letters.values())
    if pure_x:
        # X-type check: ancilla couples as the source, rotation afterwards
        for k, q in enumerate(support):
            b.add("CNOT", cat[k], q)
        b.tick()
        for q in cat:
            b.add("H", q)
        b.tick()
    else:
        y_sites = [q for q in support if letters[q] == "Y"]
        x_sites = [q for q in support if letters[q] == "X"]
        for q in cat:
            b.add("H", q)
        b.tick()
        if y_sites:
            for q in y_sites:
                b.add("PINV", q)
            b.tick()
        if y_sites or x_sites:
            for q in y_sites + x_sites:
                b.add("H", q)
            b.tick()
        for k, q in enumerate(support):
            b.add("CNOT", q, cat[k])
        b.tick()
        if y_sites or x_sites:
            for q in y_sites + x_sites:
                b.add("H", q)
            b.tick()
        if y_sites:
            for q in y_sites:
                b.add("P", q)
            b.tick()
    for q in cat:
        b.measure(q)
    b.tick()
    return b.build()


def steane_ancilla_coupling_steps(data: tuple[int, ...], anc: tuple[int, ...],
                                  kind: str) -> list[Step]:
    """Couple a verified zero block to the data for one syndrome half.

    kind="bit":   rotate the ancilla into the all-codeword superposition,
                  then XOR each data qubit into it (records bit flips).
    kind="phase": XOR each ancilla qubit into the data, then rotate the
                  ancilla (data phase flips ride backward into it).
    """
    if kind == "bit":
        return [
            [("H", (a,)) for a in anc],
            [("CNOT", (d, a)) for d, a in zip(data, anc)],
        ]
    if kind == "phase":
        return [
            [("CNOT", (a, d)) for d, a in zip(data, anc)],
            [("H", (a,)) for a in anc],
        ]
    raise ValueError("kind must be 'bit' or 'phase'")


def _verified_zero_static(b: CircuitBuilder, block: tuple[int, ...],
                          checker: tuple[int, ...]) -> list[list[int]]:
    """Static verified-zero prep: encode the block, then destructively
    compare it against two fresh encoded-zero checker blocks.

    Returns the two checker readout cbit lists.  The conditioned repair
    (flip on two agreeing nontrivial checks) is an adaptive decision and
    lives in the protocol layer, not in the static emission.
    """
    _apply_steps(b, zero_prep_steps(), offset=block[0] - 1)
    readouts = []
    for _ in range(2):
        for q in checker:
            b.add("PREP0", q)
        b.tick()
        _apply_steps(b, zero_prep_steps(), offset=checker[0] - 1)
        for src, dst in zip(block, checker):
            b.add("CNOT", src, dst)
        b.tick()
        cbits = [b.measure(q) for q in checker]
        b.tick()
        readouts.append(cbits)
    return readouts


def build_steane_syndrome(kind: str = "bit") -> Circuit:
    """One verified syndrome half: data 1..7, ancilla 8..14, checker 15..21.

    The last seven classical bits are the ancilla readout; the check-matrix
    parities of that readout are the syndrome bits.
    """
    data = tuple(range(1, 8))
    anc = tuple(range(8, 15))
    checker = tuple(range(15, 22))
    b = CircuitBuilder(21)
    _verified_zero_static(b, anc, checker)
    _apply_steps(b, steane_ancilla_coupling_steps(data, anc, kind))
    for q in anc:
        b.measure(q)
    b.tick()
    return b.build()


def _syndrome_pattern_condition(readout: list[int], position: int) -> list:
    """Clauses asserting H * readout equals the binary pattern of ``position``."""
    clauses = []
    for row in range(3):
        want = (position >> (2 - row)) & 1
        row_bits = tuple(readout[j] for j in range(7) if HAMMING_H[row, j])
        clauses.append(parity(row_bits, want))
    return clauses


def build_steane_recovery_round() -> Circuit:
    """Full recovery round: both syndrome halves, each measured twice, then
    corrections conditioned on the two passes agreeing.

    Layout: data 1..7, bit-ancilla 8..14, phase-ancilla 15..21, checker
    22..28 (reused).  A correction at position k fires only when both
    passes of its half read the check pattern of k; the conditions express
    this as parity clauses over the raw ancilla readouts.
    """
    data = tuple(range(1, 8))
    anc_bit = tuple(range(8, 15))
    anc_phase = tuple(range(15, 22))
    checker = tuple(range(22, 29))
    b = CircuitBuilder(28)
    readouts: dict[str, list[list[int]]] = {"bit": [], "phase": []}
    for _pass in range(2):
        for block in (anc_phase, anc_bit):
            for q in block:
                b.add("PREP0", q)
            b.tick()
            _verified_zero_static(b, block, checker)
        # couple the phase ancilla first, then the bit ancilla
        _apply_steps(b, steane_ancilla_coupling_steps(data, anc_phase, "phase"))
        _apply_steps(b, steane_ancilla_coupling_steps(data, anc_bit, "bit"))
        readouts["phase"].append([b.measure(q) for q in anc_phase])
        readouts["bit"].append([b.measure(q) for q in anc_bit])
        b.tick()
    for half, op_kind in (("bit", "X"), ("phase", "Z")):
        first, second = readouts[half]
        for position in range(1, 8):
            cond: Condition = tuple(
                _syndrome_pattern_condition(first, position)
                + _syndrome_pattern_condition(second, position))
            b.add(op_kind, position, cond=cond)
        b.tick()
    return b.build()


TOFFOLI_BARE_LAYOUT = {
    "anc": (1, 2, 3),
    "cats": (4, 5, 6),
    "data": (7, 8, 9),
}


def build_toffoli_protocol(bare: bool = True) -> Circuit:
    """Measurement-based Toffoli: AND-state ancilla, teleported coupling,
    conditioned fix-ups.

    bare=True: every block is one qubit (layout TOFFOLI_BARE_LAYOUT, nine
    qubits); the caller supplies the input state on the data qubits, so no
    preparation is emitted for them.  Suitable for dense verification.

    bare=False: the transversal seven-qubit-block version, self-contained
    with logical-zero data blocks, for structural and fault-count
    inspection only.  Its conditions use raw block parities; corrected
    classical decoding is not a linear function of the readout and belongs
    to the adaptive protocol layer.

    Stage 1 puts the three ancilla blocks in the uniform superposition and
    measures the AND-state observable three times through disposable cat
    controls (controlled phase on the third block, rotation, bitwise
    Toffoli into the cat, readout); the third block is flipped on a
    majority of ones.  Stage 2 couples the ancilla to the data, measures
    the data blocks, and applies the conditioned corrections; the ancilla
    blocks leave as the new data.
    """
    if bare:
        anc = {k: (TOFFOLI_BARE_LAYOUT["anc"][k - 1],) for k in (1, 2, 3)}
        cats = {r: (TOFFOLI_BARE_LAYOUT["cats"][r - 1],) for r in (1, 2, 3)}
        data = {k: (TOFFOLI_BARE_LAYOUT["data"][k - 1],) for k in (1, 2, 3)}
        total = 9
    else:
        def block(i: int) -> tuple[int, ...]:
            return tuple(range(1 + 7 * i, 8 + 7 * i))
        anc = {k: block(k - 1) for k in (1, 2, 3)}
        cats = {r: block(2 + r) for r in (1, 2, 3)}
        data = {k: block(5 + k) for k in (1, 2, 3)}
        total = 63
    b = CircuitBuilder(total)

    if not bare:
        for blk in (anc[1], anc[2], anc[3], data[1], data[2], data[3]):
            _apply_steps(b, zero_prep_steps(), offset=blk[0] - 1)
    for blk in (anc[1], anc[2], anc[3]):
        for q in blk:
            b.add("H", q)
    b.tick()

    # stage 1: three repetitions of the AND-state measurement
    rep_bits: list[tuple[int, ...]] = []
    for r in (1, 2, 3):
        cat = cats[r]
        b.add("H", cat[0])
        b.tick()
        if not bare:
            for i in range(6):
                b.add("CNOT", cat[i], cat[i + 1])
                b.tick()
        # controlled phase between each cat bit and the third ancilla block
        for aq in anc[3]:
            b.add("H", aq)
        b.tick()
        for cq, aq in zip(cat, anc[3]):
            b.add("CNOT", cq, aq)
        b.tick()
        for aq in anc[3]:
            b.add("H", aq)
        b.tick()
        # rotate the cat, then the bitwise Toffoli with the cat as target
        for cq in cat:
            b.add("H", cq)
        b.tick()
        for a1q, a2q, cq in zip(anc[1], anc[2], cat):
            b.add("TOFFOLI", a1q, a2q, cq)
        b.tick()
        rep_bits.append(tuple(b.measure(cq) for cq in cat))
        b.tick()
    # NOT the third block when the majority of the three readings is 1
    for pattern in ((1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)):
        cond = tuple(parity(rep_bits[i], pattern[i]) for i in range(3))
        for q in anc[3]:
            b.add("X", q, cond=cond)
        b.tick()

    # stage 2: couple to the data and measure the data blocks out
    for a1q, xq in zip(anc[1], data[1]):
        b.add("CNOT", a1q, xq)
    for a2q, yq in zip(anc[2], data[2]):
        b.add("CNOT", a2q, yq)
    for zq, a3q in zip(data[3], anc[3]):
        b.add("CNOT", zq, a3q)
    b.tick()
    for zq in data[3]:
        b.add("H", zq)
    b.tick()
    mz = tuple(b.measure(q) for q in data[3])
    my = tuple(b.measure(q) for q in data[2])
    mx = tuple(b.measure(q) for q in data[1])
    b.tick()

    # conditioned fix-ups in drawn order: phase pair on mz, then the value
    # repairs on my and mx (their order matters)
    cond_z = (parity(mz, 1),)
    for a2q in anc[2]:
        b.add("H", a2q, cond=cond_z)
    b.tick()
    for a1q, a2q in zip(anc[1], anc[2]):
        b.add("CNOT", a1q, a2q, cond=cond_z)
    b.tick()
    for a2q in anc[2]:
        b.add("H", a2q, cond=cond_z)
    for a3q in anc[3]:
        b.add("Z", a3q, cond=cond_z)
    b.tick()
    cond_y = (parity(my, 1),)
    for a2q in anc[2]:
        b.add("X", a2q, cond=cond_y)
    b.tick()
    for a1q, a3q in zip(anc[1], anc[3]):
        b.add("CNOT", a1q, a3q, cond=cond_y)
    b.tick()
    cond_x = (parity(mx, 1),)
    for a1q in anc[1]:
        b.add("X", a1q, cond=cond_x)
    b.tick()
    for a2q, a3q in zip(anc[2], anc[3]):
        b.add("CNOT", a2q, a3q, cond=cond_x)
    b.tick()
    return b.build()


def build_leak_detector() -> Circuit:
    """Ancilla-toggling presence test: data qubit 1, ancilla qubit 2.

    Both data branches toggle the ancilla exactly once, so a present qubit
    measures 1 with the ancilla left unentangled from the data value; a
    leaked qubit leaves every coupling inert and measures 0.
    """
    b = CircuitBuilder(2)
    b.add("PREP0", 2)
    b.tick()
    b.add("X", 1)
    b.tick()
    b.add("CNOT", 1, 2)
    b.tick()
    b.add("X", 1)
    b.tick()
    b.add("CNOT", 1, 2)
    b.tick()
    b.measure(2)
    b.tick()
    return b.build()


def build_logical_measurement(destructive: bool = True) -> Circuit:
    """Logical readout of a seven-qubit block.

    Destructive: measure all seven qubits; classically correcting the
    readout and taking its parity gives the logical value, so one flipped
    readout bit cannot change it.  Nondestructive: copy the weight-3
    logical-Z parity onto a bare ancilla (qubit 8) and measure, twice; a
    single flipped parity bit is caught by the repetition.
    """
    if destructive:
        b = CircuitBuilder(7)
        for q in range(1, 8):
            b.measure(q)
        b.tick()
        return b.build()
    b = CircuitBuilder(8)
    for _ in range(2):
        b.add("PREP0", 8)
        b.tick()
        for q in LOGICAL_Z_SUPPORT:
            b.add("CNOT", q, 8)
            b.tick()
        b.measure(8)
        b.tick()
    return b.build()
