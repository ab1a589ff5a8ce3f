"""Stabilizer tableau engine for Clifford circuits with measurement.

The state of n qubits is tracked by 2n Pauli rows over GF(2): rows
0..n-1 are destabilizers, rows n..2n-1 are stabilizers.  Gates update all
rows by conjugation in O(n); measuring an arbitrary Pauli observable is
O(n^2) worst case thanks to the destabilizer bookkeeping.

Row r represents the operator i^{phase[r]} * prod_j X_j^{X[r,j]} Z_j^{Z[r,j]}
with the exact mod-4 phase convention of ``ftqc.pauli`` (the letter Y means
the product X*Z).  A valid stabilizer row is a Hermitian involution, which
in this convention means phase[r] + (number of Y sites) is even; its sign
as a Hermitian operator is then +1 iff phase[r] == y_count mod 4.

Initial state is |0...0>: destabilizer i = X_i, stabilizer i = Z_i.
"""

from __future__ import annotations

import numpy as np

from ftqc.pauli import PauliString, UnsupportedGate
from ftqc.statevector import StateVector


class StabilizerTableau:
    """Mutable tableau on n qubits; single-owner, not thread-safe."""

    def __init__(self, n: int):
        self.n = n
        self.X = np.zeros((2 * n, n), dtype=np.uint8)
        self.Z = np.zeros((2 * n, n), dtype=np.uint8)
        self.phase = np.zeros(2 * n, dtype=np.int8)
        for i in range(n):
            self.X[i, i] = 1          # destabilizer i = X_i
            self.Z[n + i, i] = 1      # stabilizer i = Z_i

    def copy(self) -> "StabilizerTableau":
        out = StabilizerTableau.__new__(StabilizerTableau)
        out.n = self.n
        out.X = self.X.copy()
        out.Z = self.Z.copy()
        out.phase = self.phase.copy()
        return out

    # -- row access --------------------------------------------------------

    def row(self, r: int) -> PauliString:
        return PauliString(self.n, self.X[r], self.Z[r], int(self.phase[r]))

    def stabilizers(self) -> list[PauliString]:
        return [self.row(r) for r in range(self.n, 2 * self.n)]

    def destabilizers(self) -> list[PauliString]:
        return [self.row(r) for r in range(self.n)]

    def dump(self) -> str:
        """One stabilizer generator per line in the ±IXYZ text form."""
        return "\n".join(str(p) for p in self.stabilizers())

    def _rowmult(self, i: int, h: int) -> None:
        """row_h <- row_i * row_h (exact phase)."""
        cross = int(np.sum(self.Z[i] & self.X[h]))
        self.phase[h] = (self.phase[i] + self.phase[h] + 2 * cross) & 3
        self.X[h] ^= self.X[i]
        self.Z[h] ^= self.Z[i]

    # -- gates ---------------------------------------------------------------

    def apply_gate(self, kind: str, qubits: tuple[int, ...]) -> None:
        """Conjugate all rows by a Clifford gate (1-based qubits)."""
        if kind == "H":
            j = qubits[0] - 1
            self.phase[:] = (self.phase + 2 * (self.X[:, j] & self.Z[:, j])) & 3
            tmp = self.X[:, j].copy()
            self.X[:, j] = self.Z[:, j]
            self.Z[:, j] = tmp
        elif kind == "P":
            j = qubits[0] - 1
            self.phase[:] = (self.phase + self.X[:, j]) & 3
            self.Z[:, j] ^= self.X[:, j]
        elif kind == "PINV":
            j = qubits[0] - 1
            self.phase[:] = (self.phase + 3 * self.X[:, j]) & 3
            self.Z[:, j] ^= self.X[:, j]
        elif kind == "X":
            j = qubits[0] - 1
            self.phase[:] = (self.phase + 2 * self.Z[:, j]) & 3
        elif kind == "Z":
            j = qubits[0] - 1
            self.phase[:] = (self.phase + 2 * self.X[:, j]) & 3
        elif kind == "CNOT":
            c, t = qubits[0] - 1, qubits[1] - 1
            self.X[:, t] ^= self.X[:, c]
            self.Z[:, c] ^= self.Z[:, t]
        else:
            raise UnsupportedGate(f"tableau engine has no Clifford gate {kind!r}")

    def inject_pauli(self, p: PauliString) -> None:
        """Apply a Pauli error to the state: rows anticommuting with p flip sign."""
        if p.n != self.n:
            raise ValueError("Pauli length mismatch")
        anti = (self.X @ p.z_bits.astype(np.int32)
                + self.Z @ p.x_bits.astype(np.int32)) & 1
        self.phase[:] = (self.phase + 2 * anti) & 3

    # -- measurement ------------------------------------------------------------

    def _anti_mask(self, obs: PauliString) -> np.ndarray:
        return ((self.X @ obs.z_bits.astype(np.int32)
                 + self.Z @ obs.x_bits.astype(np.int32)) & 1).astype(bool)

    def measure(self, obs: PauliString, rng: np.random.Generator) -> tuple[int, bool]:
        """Measure a Pauli observable; returns (outcome in {+1,-1}, deterministic).

        ``obs`` must be a Hermitian involution (phase_exp + y_count even).
        Deterministic outcomes leave the state unchanged; random outcomes
        collapse it consistently.
        """
        if obs.n != self.n:
            raise ValueError("observable length mismatch")
        y_count = int(np.sum(obs.x_bits & obs.z_bits))
        if (obs.phase_exp + y_count) % 2 != 0:
            raise ValueError("observable is not a Hermitian involution")
        n = self.n
        anti = self._anti_mask(obs)
        stab_anti = np.nonzero(anti[n:])[0]
        if stab_anti.size > 0:
            p = n + int(stab_anti[0])
            for r in np.nonzero(anti)[0]:
                if r != p:
                    self._rowmult(p, int(r))
            self.X[p - n] = self.X[p]
            self.Z[p - n] = self.Z[p]
            self.phase[p - n] = self.phase[p]
            outcome = 1 if rng.random() < 0.5 else -1
            self.X[p] = obs.x_bits
            self.Z[p] = obs.z_bits
            self.phase[p] = (obs.phase_exp + (0 if outcome == 1 else 2)) & 3
            return outcome, False
        # Deterministic: obs = +/- product of stabilizer rows selected by the
        # destabilizers that anticommute with it.
        acc = PauliString.identity(n)
        for i in np.nonzero(anti[:n])[0]:
            acc = acc * self.row(n + int(i))
        if not acc.equal_up_to_phase(obs):
            raise AssertionError("tableau invariant violated in deterministic measurement")
        outcome = 1 if acc.phase_exp == obs.phase_exp else -1
        return outcome, True

    def measure_z(self, qubit: int, rng: np.random.Generator) -> int:
        """Computational-basis measurement of one qubit; returns the bit."""
        j = qubit - 1
        n = self.n
        xcol = self.X[:, j]
        stab_anti = np.nonzero(xcol[n:])[0]
        if stab_anti.size > 0:
            p = n + int(stab_anti[0])
            for r in np.nonzero(xcol)[0]:
                if r != p:
                    self._rowmult(p, int(r))
            self.X[p - n] = self.X[p]
            self.Z[p - n] = self.Z[p]
            self.phase[p - n] = self.phase[p]
            bit = 1 if rng.random() < 0.5 else 0
            self.X[p] = 0
            self.Z[p] = 0
            self.Z[p, j] = 1
            self.phase[p] = 2 if bit else 0
            return bit
        acc = PauliString.identity(n)
        for i in np.nonzero(xcol[:n])[0]:
            acc = acc * self.row(n + int(i))
        if not (acc.weight() == 1 and acc.z_bits[j] == 1 and acc.x_bits[j] == 0):
            raise AssertionError("tableau invariant violated in deterministic Z measurement")
        return 0 if acc.phase_exp == 0 else 1

    def reset(self, qubit: int, rng: np.random.Generator) -> None:
        """Collapse the qubit and flip it to |0>."""
        if self.measure_z(qubit, rng) == 1:
            self.apply_gate("X", (qubit,))

    # -- inspection ----------------------------------------------------------

    def check_invariants(self) -> None:
        """Raise if the destabilizer/stabilizer structure is broken."""
        n = self.n
        stabs = self.stabilizers()
        destabs = self.destabilizers()
        for i in range(n):
            for j in range(i + 1, n):
                if not stabs[i].commutes(stabs[j]):
                    raise AssertionError(f"stabilizers {i},{j} anticommute")
        for i in range(n):
            for j in range(n):
                want = i != j
                if destabs[i].commutes(stabs[j]) != want:
                    raise AssertionError(f"destabilizer {i} vs stabilizer {j} wrong")
        rows = np.concatenate([self.X[n:], self.Z[n:]], axis=1)
        if _gf2_rank(rows) != n:
            raise AssertionError("stabilizer rows are dependent")

    def to_statevector(self) -> StateVector:
        """Expand to a dense state (global phase arbitrary).

        Projects a fixed generic vector with (I + S)/2 for each stabilizer S.
        """
        n = self.n
        gen = np.random.Generator(np.random.Philox(key=np.uint64(0x5EED)))
        vec = gen.normal(size=2 ** n) + 1j * gen.normal(size=2 ** n)
        sv = StateVector.from_amplitudes(vec)
        for s in self.stabilizers():
            branch = sv.copy()
            branch.apply_pauli(s)
            sv.amps = (sv.amps + branch.amps) / 2.0
            norm = np.linalg.norm(sv.amps)
            if norm < 1e-12:
                raise AssertionError("projector annihilated the probe vector")
            sv.amps = sv.amps / norm
        return sv


def _gf2_rank(rows: np.ndarray) -> int:
    m = rows.astype(np.uint8).copy() & 1
    rank = 0
    cols = m.shape[1]
    for c in range(cols):
        pivots = np.nonzero(m[rank:, c])[0]
        if pivots.size == 0:
            continue
        piv = rank + int(pivots[0])
        m[[rank, piv]] = m[[piv, rank]]
        hits = np.nonzero(m[:, c])[0]
        for r in hits:
            if r != rank:
                m[r] ^= m[rank]
        rank += 1
        if rank == m.shape[0]:
            break
    return rank
