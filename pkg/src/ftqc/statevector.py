"""Dense statevector engine for small non-Clifford verification runs.

Amplitude index convention: qubit 1 is the most significant bit, so basis
state |b1 b2 ... bn> sits at index sum_j b_j << (n - j).  This matches the
left-to-right reading of codeword kets like |0001111>.

The engine supports H, P, PINV, X, Z, CNOT, TOFFOLI, computational-basis
measurement with Born-rule sampling or explicit postselection, and qubit
reset.  Norm is checked to 1e-10 after every operation.  The qubit count is
capped (default 22, about 16M amplitudes); raise the cap explicitly for
bigger runs.
"""

from __future__ import annotations

import math

import numpy as np

from ftqc.pauli import PauliString, UnsupportedGate

DEFAULT_QUBIT_CAP = 22

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_P = np.array([[1, 0], [0, 1j]], dtype=complex)
_PINV = np.array([[1, 0], [0, -1j]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_SINGLE = {"H": _H, "P": _P, "PINV": _PINV, "X": _X, "Z": _Z}


class QubitCapExceeded(ValueError):
    """Requested register is larger than the configured dense-engine cap."""


class StateVector:
    """Mutable dense state on n qubits, initialized to |0...0>."""

    def __init__(self, n: int, qubit_cap: int = DEFAULT_QUBIT_CAP):
        if n > qubit_cap:
            raise QubitCapExceeded(f"{n} qubits exceeds dense cap {qubit_cap}")
        self.n = n
        self.amps = np.zeros(2 ** n, dtype=complex)
        self.amps[0] = 1.0

    @classmethod
    def from_amplitudes(cls, amps, qubit_cap: int = DEFAULT_QUBIT_CAP) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        n = int(round(math.log2(amps.size)))
        if 2 ** n != amps.size:
            raise ValueError("amplitude count must be a power of two")
        sv = cls(n, qubit_cap)
        sv.amps = amps / np.linalg.norm(amps)
        return sv

    def copy(self) -> "StateVector":
        out = StateVector.__new__(StateVector)
        out.n = self.n
        out.amps = self.amps.copy()
        return out

    def _axis(self, qubit: int) -> int:
        if not 1 <= qubit <= self.n:
            raise ValueError(f"qubit {qubit} out of range 1..{self.n}")
        return qubit - 1  # qubit 1 = axis 0 = most significant bit

    def _check_norm(self) -> None:
        norm = float(np.sum(np.abs(self.amps) ** 2))
        if abs(norm - 1.0) > 1e-10:
            raise AssertionError(f"norm drifted to {norm}")

    # -- gates -------------------------------------------------------------

    def apply(self, kind: str, *qubits: int) -> None:
        if kind in _SINGLE:
            (q,) = qubits
            self._apply_single(_SINGLE[kind], q)
        elif kind == "CNOT":
            c, t = qubits
            self._apply_cnot(c, t)
        elif kind == "TOFFOLI":
            a, b, t = qubits
            self._apply_toffoli(a, b, t)
        else:
            raise UnsupportedGate(f"dense engine has no gate {kind!r}")
        self._check_norm()

    def _apply_single(self, mat: np.ndarray, qubit: int) -> None:
        ax = self._axis(qubit)
        t = self.amps.reshape([2] * self.n)
        t = np.moveaxis(t, ax, 0)
        new0 = mat[0, 0] * t[0] + mat[0, 1] * t[1]
        new1 = mat[1, 0] * t[0] + mat[1, 1] * t[1]
        t = np.stack([new0, new1])
        self.amps = np.moveaxis(t, 0, ax).reshape(-1)

    def _apply_cnot(self, control: int, target: int) -> None:
        ac, at = self._axis(control), self._axis(target)
        t = self.amps.reshape([2] * self.n).copy()
        idx10 = [slice(None)] * self.n
        idx11 = [slice(None)] * self.n
        idx10[ac], idx10[at] = 1, 0
        idx11[ac], idx11[at] = 1, 1
        t[tuple(idx10)], t[tuple(idx11)] = t[tuple(idx11)].copy(), t[tuple(idx10)].copy()
        self.amps = t.reshape(-1)

    def _apply_toffoli(self, c1: int, c2: int, target: int) -> None:
        a1, a2, at = self._axis(c1), self._axis(c2), self._axis(target)
        t = self.amps.reshape([2] * self.n).copy()
        i0 = [slice(None)] * self.n
        i1 = [slice(None)] * self.n
        i0[a1], i0[a2], i0[at] = 1, 1, 0
        i1[a1], i1[a2], i1[at] = 1, 1, 1
        t[tuple(i0)], t[tuple(i1)] = t[tuple(i1)].copy(), t[tuple(i0)].copy()
        self.amps = t.reshape(-1)

    def apply_pauli(self, p: PauliString) -> None:
        """Multiply the state by a Pauli operator (phase included)."""
        if p.n != self.n:
            raise ValueError("Pauli length mismatch")
        for pos in range(1, self.n + 1):
            letter = p.letter(pos)
            if letter == "X":
                self.apply("X", pos)
            elif letter == "Z":
                self.apply("Z", pos)
            elif letter == "Y":
                self.apply("Z", pos)
                self.apply("X", pos)  # Y = X*Z applied right factor first
        self.amps = (1j ** p.phase_exp) * self.amps

    # -- measurement ---------------------------------------------------------

    def prob_of(self, qubit: int, bit: int) -> float:
        ax = self._axis(qubit)
        t = self.amps.reshape([2] * self.n)
        sel = np.moveaxis(t, ax, 0)[bit]
        return float(np.sum(np.abs(sel) ** 2))

    def postselect(self, qubit: int, bit: int) -> float:
        """Project onto ``qubit == bit``; returns the branch probability.

        The state is renormalized; a zero-probability branch raises.
        """
        prob = self.prob_of(qubit, bit)
        if prob < 1e-300:
            raise ValueError(f"postselecting a zero-probability branch on qubit {qubit}")
        ax = self._axis(qubit)
        t = self.amps.reshape([2] * self.n).copy()
        idx = [slice(None)] * self.n
        idx[ax] = 1 - bit
        t[tuple(idx)] = 0.0
        self.amps = t.reshape(-1) / math.sqrt(prob)
        return prob

    def measure_z(self, qubit: int, rng: np.random.Generator) -> int:
        """Born-rule sample in the computational basis; collapses the state."""
        p1 = self.prob_of(qubit, 1)
        bit = 1 if rng.random() < p1 else 0
        self.postselect(qubit, bit)
        return bit

    def reset(self, qubit: int, rng: np.random.Generator) -> None:
        """Measure and flip to |0> if needed."""
        if self.measure_z(qubit, rng) == 1:
            self.apply("X", qubit)

    # -- inspection ------------------------------------------------------------

    def fidelity(self, other) -> float:
        """|<self|other>|^2; ``other`` may be a StateVector or raw amplitudes."""
        amps = other.amps if isinstance(other, StateVector) else np.asarray(other, dtype=complex)
        amps = amps / np.linalg.norm(amps)
        return float(abs(np.vdot(self.amps, amps)) ** 2)

    def subsystem(self, qubits: tuple[int, ...], fixed: dict[int, int]) -> np.ndarray:
        """Amplitudes on ``qubits`` when every other qubit is pinned in ``fixed``.

        Valid only when the complement qubits are in the given basis states
        (e.g. just measured); the returned vector is renormalized.
        """
        t = self.amps.reshape([2] * self.n)
        idx: list = [slice(None)] * self.n
        for q, bit in fixed.items():
            idx[self._axis(q)] = bit
        sub = np.asarray(t[tuple(idx)])
        remaining = [q for q in range(1, self.n + 1) if q not in fixed]
        order = [remaining.index(q) for q in qubits]
        sub = np.transpose(sub, axes=order) if sub.ndim > 1 else sub
        flat = sub.reshape(-1)
        norm = np.linalg.norm(flat)
        if norm < 1e-12:
            raise ValueError("fixed assignment has zero amplitude")
        return flat / norm


def basis_state(n: int, bits: str) -> StateVector:
    """|bits> with bits written qubit 1 first, e.g. basis_state(3, "110")."""
    if len(bits) != n:
        raise ValueError("bit string length mismatch")
    sv = StateVector(n)
    index = int(bits, 2)
    sv.amps[0] = 0.0
    sv.amps[index] = 1.0
    return sv
