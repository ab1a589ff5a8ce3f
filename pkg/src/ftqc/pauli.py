"""Pauli operators in binary symplectic form with exact phase tracking.

An n-qubit Pauli is stored as a pair of n-bit vectors ``x_bits`` and
``z_bits`` plus a phase exponent k, representing the operator

    i^k * prod_j X_j^{x_j} Z_j^{z_j} .

The single-qubit letters are I, X, Z and Y, where Y denotes the *product*
X*Z (a real matrix, equal to -i times the Hermitian Pauli-Y).  Under this
convention X*Z = Y with phase +1 and Z*X = -Y; the phase field absorbs the
difference from the Hermitian convention exactly, as a power of i (mod 4),
never as a float.

Multiplication rule: since Z X = - X Z on one qubit,

    (i^a X^{x1} Z^{z1}) (i^b X^{x2} Z^{z2})
        = i^{a+b} (-1)^{z1 . x2} X^{x1+x2} Z^{z1+z2} ,

so the phase picks up 2 * sum_j(z1_j & x2_j) mod 4 and the bit vectors XOR.

All qubit positions in the public API are 1-based; storage is 0-based.
Values are immutable after construction and safe to share across threads.

Text form: an optional sign prefix ("+", "-", "+i", "-i") followed by a
length-n string over {I, X, Y, Z}, e.g. "IIIZZZZ" or "-IXY".
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

# Clifford gate kinds understood by conjugate_by_gate.
CLIFFORD_GATES = ("H", "P", "PINV", "X", "Z", "CNOT")

_PHASE_STR = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_STR_PHASE = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


class DimensionMismatch(ValueError):
    """Operands act on different numbers of qubits."""


class UnsupportedGate(ValueError):
    """Gate is outside the supported Clifford set."""


def _as_bits(n: int, bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8) & 1
    if arr.shape != (n,):
        raise DimensionMismatch(f"expected {n} bits, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


class PauliString:
    """Immutable n-qubit Pauli operator with exact phase in {1, i, -1, -i}."""

    __slots__ = ("n", "x_bits", "z_bits", "phase_exp")

    def __init__(self, n: int, x_bits, z_bits, phase_exp: int = 0):
        if n < 0:
            raise ValueError("qubit count must be nonnegative")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "x_bits", _as_bits(n, x_bits))
        object.__setattr__(self, "z_bits", _as_bits(n, z_bits))
        object.__setattr__(self, "phase_exp", int(phase_exp) & 3)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("PauliString is immutable")

    # -- constructors ----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def single(cls, n: int, position: int, letter: str, phase_exp: int = 0) -> "PauliString":
        """One nonidentity letter at 1-based ``position``, identity elsewhere."""
        if not 1 <= position <= n:
            raise DimensionMismatch(f"position {position} out of range 1..{n}")
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        try:
            x[position - 1], z[position - 1] = _LETTER_BITS[letter]
        except KeyError:
            raise ValueError(f"unknown Pauli letter {letter!r}") from None
        return cls(n, x, z, phase_exp)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse the "±IXYZ..." form, e.g. "IIIZZZZ", "-IXY", "+iZZ"."""
        s = text.strip()
        prefix = ""
        while s and s[0] in "+-i":
            prefix += s[0]
            s = s[1:]
        if prefix not in _STR_PHASE:
            raise ValueError(f"bad sign prefix in {text!r}")
        phase = _STR_PHASE[prefix]
        n = len(s)
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for j, ch in enumerate(s):
            if ch not in _LETTER_BITS:
                raise ValueError(f"unknown Pauli letter {ch!r} in {text!r}")
            x[j], z[j] = _LETTER_BITS[ch]
        return cls(n, x, z, phase)

    @classmethod
    def from_positions(cls, n: int, xs: Iterable[int] = (), zs: Iterable[int] = (),
                       phase_exp: int = 0) -> "PauliString":
        """Pauli with X-part at 1-based positions ``xs`` and Z-part at ``zs``."""
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for q in xs:
            x[q - 1] ^= 1
        for q in zs:
            z[q - 1] ^= 1
        return cls(n, x, z, phase_exp)

    # -- algebra ---------------------------------------------------------

    def multiply(self, other: "PauliString") -> "PauliString":
        """Operator product self * other with exact phase."""
        if self.n != other.n:
            raise DimensionMismatch(f"length mismatch: {self.n} vs {other.n}")
        cross = int(np.sum(self.z_bits & other.x_bits))
        phase = (self.phase_exp + other.phase_exp + 2 * cross) & 3
        return PauliString(self.n, self.x_bits ^ other.x_bits,
                           self.z_bits ^ other.z_bits, phase)

    __mul__ = multiply

    def commutes(self, other: "PauliString") -> bool:
        """True iff the symplectic inner product sum(x.z' + z.x') is even."""
        if self.n != other.n:
            raise DimensionMismatch(f"length mismatch: {self.n} vs {other.n}")
        sym = int(np.sum(self.x_bits & other.z_bits)) + int(np.sum(self.z_bits & other.x_bits))
        return sym % 2 == 0

    def weight(self) -> int:
        """Number of nonidentity sites."""
        return int(np.sum(self.x_bits | self.z_bits))

    def support(self) -> tuple[int, ...]:
        """1-based positions with a nonidentity letter."""
        return tuple(int(j) + 1 for j in np.nonzero(self.x_bits | self.z_bits)[0])

    def letter(self, position: int) -> str:
        """Letter at 1-based ``position``."""
        j = position - 1
        return _BITS_LETTER[(int(self.x_bits[j]), int(self.z_bits[j]))]

    def is_identity(self) -> bool:
        return self.weight() == 0 and self.phase_exp == 0

    def negate(self) -> "PauliString":
        return PauliString(self.n, self.x_bits, self.z_bits, self.phase_exp + 2)

    def equal_up_to_phase(self, other: "PauliString") -> bool:
        return (self.n == other.n
                and bool(np.array_equal(self.x_bits, other.x_bits))
                and bool(np.array_equal(self.z_bits, other.z_bits)))

    # -- dense form (library use; tests keep their own independent oracle)

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix, qubit 1 as the most significant bit."""
        mats = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        mats["Y"] = mats["X"] @ mats["Z"]
        out = np.array([[1.0 + 0j]])
        for pos in range(1, self.n + 1):
            out = np.kron(out, mats[self.letter(pos)])
        return (1j ** self.phase_exp) * out

    # -- dunder ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, PauliString)
                and self.phase_exp == other.phase_exp
                and self.equal_up_to_phase(other))

    def __hash__(self) -> int:
        return hash((self.n, self.x_bits.tobytes(), self.z_bits.tobytes(), self.phase_exp))

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __str__(self) -> str:
        body = "".join(self.letter(p) for p in range(1, self.n + 1))
        return _PHASE_STR[self.phase_exp] + body


def conjugate_by_gate(p: PauliString, gate) -> PauliString:
    """Conjugate ``p`` by a Clifford gate: returns g * p * g^{-1}.

    ``gate`` is anything with ``kind`` (one of H, P, PINV, X, Z, CNOT) and
    ``qubits`` (1-based operands); a ``(kind, qubits)`` tuple also works.
    """
    if isinstance(gate, tuple):
        kind, qubits = gate
    else:
        kind, qubits = gate.kind, gate.qubits
    return conjugate(p, kind, tuple(qubits))


def conjugate(p: PauliString, kind: str, qubits: tuple[int, ...]) -> PauliString:
    """Conjugation g * p * g^{-1} by gate ``kind`` on 1-based ``qubits``.

    Phase bookkeeping in the X^x Z^z convention:

        H:    (x, z) -> (z, x),       phase += 2*x*z
        P:    z ^= x,                 phase += x          (X -> i XZ)
        PINV: z ^= x,                 phase += 3*x        (X -> -i XZ)
        X:    phase += 2*z
        Z:    phase += 2*x
        CNOT: x_t ^= x_c, z_c ^= z_t, no phase
    """
    for q in qubits:
        if not 1 <= q <= p.n:
            raise DimensionMismatch(f"qubit {q} out of range 1..{p.n}")
    x = p.x_bits.copy()
    z = p.z_bits.copy()
    phase = p.phase_exp
    if kind == "H":
        (q,) = qubits
        j = q - 1
        phase += 2 * int(x[j]) * int(z[j])
        x[j], z[j] = z[j], x[j]
    elif kind == "P":
        (q,) = qubits
        j = q - 1
        phase += int(x[j])
        z[j] ^= x[j]
    elif kind == "PINV":
        (q,) = qubits
        j = q - 1
        phase += 3 * int(x[j])
        z[j] ^= x[j]
    elif kind == "X":
        (q,) = qubits
        phase += 2 * int(z[q - 1])
    elif kind == "Z":
        (q,) = qubits
        phase += 2 * int(x[q - 1])
    elif kind == "CNOT":
        c, t = qubits
        jc, jt = c - 1, t - 1
        x[jt] ^= x[jc]
        z[jc] ^= z[jt]
    else:
        raise UnsupportedGate(f"cannot conjugate by non-Clifford gate {kind!r}")
    return PauliString(p.n, x, z, phase)
