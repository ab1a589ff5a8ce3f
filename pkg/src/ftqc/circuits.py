"""Timestep-ordered circuit IR with classical bits and conditioned operations.

A Circuit is a list of timesteps; each timestep is a tuple of GateOps that
act on disjoint qubits (parallelism is physical).  Classical bits are
written by MEAS ops and read by conditions.

A condition is a conjunction of parity clauses over classical bits:
each clause is ``(cbits, want)`` and holds when XOR of the named bits
equals ``want``.  This is rich enough to express "apply X at position k
when both syndrome passes read the pattern for k" while staying exactly
serializable.

Text form (round-trips exactly): a header line, then one line per
timestep with ops joined by " ; ":

    QUBITS 7 CBITS 3
    CNOT 1 2 ; H 3
    MEAS 4 -> c0
    COND c0 X 7
    COND c0^c1=0 & c2 Z 5

``COND c0`` is shorthand for ``COND c0=1``.  Qubit and bit indices are
1-based for qubits (matching generator notation) and 0-based for cbits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

GATE_KINDS = ("PREP0", "H", "P", "PINV", "X", "Z", "CNOT", "TOFFOLI",
              "MEAS", "DISCARD")
_ARITY = {"PREP0": 1, "H": 1, "P": 1, "PINV": 1, "X": 1, "Z": 1,
          "CNOT": 2, "TOFFOLI": 3, "MEAS": 1, "DISCARD": 1}

Clause = tuple[tuple[int, ...], int]
Condition = tuple[Clause, ...]


class CircuitError(ValueError):
    """Malformed circuit: bad operands, qubit reuse, or unwritten cbit."""


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple[int, ...]
    cbit: Optional[int] = None            # MEAS destination
    cond: Optional[Condition] = None      # conjunction of parity clauses

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _ARITY[self.kind]:
            raise CircuitError(f"{self.kind} takes {_ARITY[self.kind]} operands")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"repeated operand in {self}")
        if (self.kind == "MEAS") != (self.cbit is not None):
            raise CircuitError("MEAS and only MEAS writes a classical bit")


@dataclass
class Circuit:
    num_qubits: int
    num_cbits: int
    timesteps: list[tuple[GateOp, ...]] = field(default_factory=list)

    def validate(self) -> None:
        written: set[int] = set()
        for t, step in enumerate(self.timesteps):
            seen: set[int] = set()
            for op in step:
                for q in op.qubits:
                    if not 1 <= q <= self.num_qubits:
                        raise CircuitError(f"step {t}: qubit {q} out of range")
                    if q in seen:
                        raise CircuitError(f"step {t}: qubit {q} touched twice")
                    seen.add(q)
                if op.cond is not None:
                    for cbits, _ in op.cond:
                        for c in cbits:
                            if c not in written:
                                raise CircuitError(
                                    f"step {t}: cbit c{c} read before written")
            # All measurements of a step land after its gates, so a cbit
            # written in step t is first readable in step t+1.
            for op in step:
                if op.cbit is not None:
                    if not 0 <= op.cbit < self.num_cbits:
                        raise CircuitError(f"step {t}: cbit c{op.cbit} out of range")
                    written.add(op.cbit)

    def all_ops(self) -> Iterable[tuple[int, GateOp]]:
        for t, step in enumerate(self.timesteps):
            for op in step:
                yield t, op

    def count_ops(self, kind: str) -> int:
        return sum(1 for _, op in self.all_ops() if op.kind == kind)

    # -- text form ---------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"QUBITS {self.num_qubits} CBITS {self.num_cbits}"]
        for step in self.timesteps:
            lines.append(" ; ".join(_op_text(op) for op in step))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.strip().splitlines()]
        if not lines:
            raise CircuitError("empty circuit text")
        head = lines[0].split()
        if len(head) != 4 or head[0] != "QUBITS" or head[2] != "CBITS":
            raise CircuitError(f"bad header {lines[0]!r}")
        circ = cls(int(head[1]), int(head[3]))
        for ln in lines[1:]:
            if not ln:
                circ.timesteps.append(())
                continue
            ops = tuple(_parse_op(tok.strip()) for tok in ln.split(";"))
            circ.timesteps.append(ops)
        circ.validate()
        return circ


def _clause_text(clause: Clause) -> str:
    cbits, want = clause
    body = "^".join(f"c{c}" for c in cbits)
    if want == 1 and len(cbits) == 1:
        return body
    return f"{body}={want}"


def _op_text(op: GateOp) -> str:
    if op.kind == "MEAS":
        core = f"MEAS {op.qubits[0]} -> c{op.cbit}"
    else:
        core = " ".join([op.kind] + [str(q) for q in op.qubits])
    if op.cond is None:
        return core
    pred = " & ".join(_clause_text(cl) for cl in op.cond)
    return f"COND {pred} {core}"


def _parse_clause(text: str) -> Clause:
    want = 1
    if "=" in text:
        text, val = text.split("=")
        want = int(val)
        if want not in (0, 1):
            raise CircuitError(f"clause value must be 0/1 in {text!r}")
    cbits = []
    for tok in text.split("^"):
        tok = tok.strip()
        if not tok.startswith("c"):
            raise CircuitError(f"bad cbit token {tok!r}")
        cbits.append(int(tok[1:]))
    return tuple(cbits), want


def _parse_op(text: str) -> GateOp:
    toks = text.split()
    cond: Optional[Condition] = None
    if toks[0] == "COND":
        # predicate tokens run until a gate kind appears
        i = 1
        pred_toks: list[str] = []
        while i < len(toks) and toks[i] not in GATE_KINDS:
            pred_toks.append(toks[i])
            i += 1
        pred = "".join(pred_toks)
        cond = tuple(_parse_clause(part) for part in pred.split("&") if part)
        toks = toks[i:]
        if not toks:
            raise CircuitError(f"COND with no gate in {text!r}")
    kind = toks[0]
    if kind == "MEAS":
        if len(toks) != 4 or toks[2] != "->" or not toks[3].startswith("c"):
            raise CircuitError(f"bad MEAS syntax {text!r}")
        return GateOp("MEAS", (int(toks[1]),), cbit=int(toks[3][1:]), cond=cond)
    qubits = tuple(int(t) for t in toks[1:])
    return GateOp(kind, qubits, cond=cond)


class CircuitBuilder:
    """Incremental construction with explicit timestep boundaries."""

    def __init__(self, num_qubits: int):
        self.num_qubits = num_qubits
        self._steps: list[list[GateOp]] = []
        self._current: list[GateOp] = []
        self._next_cbit = 0

    def add(self, kind: str, *qubits: int, cond: Optional[Condition] = None) -> None:
        self._current.append(GateOp(kind, tuple(qubits), cond=cond))

    def measure(self, qubit: int, cond: Optional[Condition] = None) -> int:
        cbit = self._next_cbit
        self._next_cbit += 1
        self._current.append(GateOp("MEAS", (qubit,), cbit=cbit, cond=cond))
        return cbit

    def tick(self) -> None:
        self._steps.append(self._current)
        self._current = []

    def build(self) -> Circuit:
        if self._current:
            self.tick()
        circ = Circuit(self.num_qubits, self._next_cbit,
                       [tuple(s) for s in self._steps])
        circ.validate()
        return circ


def bit(cbit: int, want: int = 1) -> Condition:
    """Condition on a single classical bit."""
    return (((cbit,), want),)


def parity(cbits: Iterable[int], want: int) -> Clause:
    return (tuple(cbits), want)
