"""Classical Hamming machinery and quantum stabilizer-code definitions.

The canonical [7,4,3] parity-check matrix has column i equal to the binary
representation of i (row 1 most significant):

    H = [[0,0,0,1,1,1,1],
         [0,1,1,0,0,1,1],
         [1,0,1,0,1,0,1]]

so a single flipped bit is located by reading the syndrome as a binary
index.  A column-permuted form

    H' = [[1,0,0,1,0,1,1],
          [0,1,0,1,1,0,1],
          [0,0,1,1,1,1,0]]

puts the three information bits first and the four parity bits after; the
unitary encoder is drawn against it.  The bridge is the fixed permutation
ENCODER_WIRE_TO_QUBIT: encoder wire j carries canonical qubit sigma(j).

The seven-qubit CSS code is the simultaneous Hamming code in both the
computational and the Hadamard-rotated basis.  Its six stabilizer
generators are the rows of H as Z-strings and as X-strings; syndromes of
Z-checks locate bit flips and syndromes of X-checks locate phase flips.

A StabilizerCode carries generators, logical operators, the binary check
matrix hbar = [H_Z | H_X] (row i holds the Z-part bits then the X-part
bits of generator i), and an optional registered decoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ftqc.pauli import DimensionMismatch, PauliString

HAMMING_H = np.array([
    [0, 0, 0, 1, 1, 1, 1],
    [0, 1, 1, 0, 0, 1, 1],
    [1, 0, 1, 0, 1, 0, 1],
], dtype=np.uint8)

# Information-bits-first form used by the encoder circuit.
HAMMING_H_ENCODER = np.array([
    [1, 0, 0, 1, 0, 1, 1],
    [0, 1, 0, 1, 1, 0, 1],
    [0, 0, 1, 1, 1, 1, 0],
], dtype=np.uint8)

# Encoder wire j (1-based) carries canonical qubit ENCODER_WIRE_TO_QUBIT[j-1]:
# column j of the encoder form equals column sigma(j) of the canonical form.
ENCODER_WIRE_TO_QUBIT = (4, 2, 1, 7, 3, 5, 6)

# Weight-3 logical representatives: X on an odd-weight codeword support.
LOGICAL_X_SUPPORT = (1, 2, 3)
LOGICAL_Z_SUPPORT = (3, 5, 6)


class ClassicalCode:
    """Binary linear code given by a full-row-rank parity-check matrix."""

    def __init__(self, checks: np.ndarray):
        checks = np.asarray(checks, dtype=np.uint8) & 1
        if gf2_rank(checks) != checks.shape[0]:
            raise ValueError("parity-check matrix must have full row rank")
        self.checks = checks
        self.n = checks.shape[1]

    def syndrome(self, word) -> np.ndarray:
        word = np.asarray(word, dtype=np.uint8) & 1
        if word.shape != (self.n,):
            raise DimensionMismatch(f"expected {self.n}-bit word")
        return (self.checks @ word) % 2

    def codewords(self) -> list[np.ndarray]:
        """All codewords, by enumerating the kernel basis combinations."""
        basis = gf2_nullspace(self.checks)
        words = []
        for mask in range(2 ** len(basis)):
            w = np.zeros(self.n, dtype=np.uint8)
            for i, b in enumerate(basis):
                if (mask >> i) & 1:
                    w ^= b
            words.append(w)
        return words


def hamming_code() -> ClassicalCode:
    return ClassicalCode(HAMMING_H)


def hamming_syndrome(word) -> np.ndarray:
    """H * word mod 2 with the canonical matrix; 3 bits, row 1 first."""
    return hamming_code().syndrome(word)


def hamming_decode(word) -> tuple[np.ndarray, Optional[int]]:
    """Correct a single flipped bit; total function.

    Returns (corrected word, flipped 1-based position or None).  The
    syndrome read as a binary number is the position of the flip; two or
    more flips are silently miscorrected to the nearest codeword.
    """
    word = np.asarray(word, dtype=np.uint8).copy() & 1
    syn = hamming_syndrome(word)
    position = int(syn[0]) * 4 + int(syn[1]) * 2 + int(syn[2])
    if position == 0:
        return word, None
    word[position - 1] ^= 1
    return word, position


def syndrome_position(syndrome) -> int:
    """Read a 3-bit syndrome as a 1-based qubit position (0 = trivial)."""
    s = np.asarray(syndrome, dtype=np.uint8) & 1
    return int(s[0]) * 4 + int(s[1]) * 2 + int(s[2])


@dataclass
class StabilizerCode:
    n: int
    k: int
    generators: list[PauliString]
    logical_z: list[PauliString]
    logical_x: list[PauliString]
    decoder: Optional[Callable[[np.ndarray], PauliString]] = field(
        default=None, repr=False)

    @property
    def hbar(self) -> np.ndarray:
        """(n-k) x 2n binary matrix; row i = [z_bits | x_bits] of generator i."""
        rows = [np.concatenate([g.z_bits, g.x_bits]) for g in self.generators]
        return np.array(rows, dtype=np.uint8)

    def in_stabilizer_group(self, p: PauliString) -> bool:
        """True iff p equals a product of generators up to phase."""
        target = np.concatenate([p.z_bits, p.x_bits])
        return gf2_in_rowspace(self.hbar, target)

    def logical_action(self, p: PauliString) -> str:
        """Classify a syndrome-free Pauli as I, X, Z or Y on the code space.

        Only meaningful for k = 1 codes and for operators commuting with
        every generator.
        """
        if self.k != 1:
            raise ValueError("logical_action defined for k=1 codes")
        anti_z = not p.commutes(self.logical_z[0])   # flips logical Z => acts as X
        anti_x = not p.commutes(self.logical_x[0])
        return {(False, False): "I", (True, False): "X",
                (False, True): "Z", (True, True): "Y"}[(anti_z, anti_x)]


def steane_code() -> StabilizerCode:
    """The seven-qubit CSS code with its six canonical generators.

    Generators 1..3 are the Hamming rows as Z-strings (detect bit flips),
    generators 4..6 the same rows as X-strings (detect phase flips).
    Logical operators are the weight-3 representatives X_1 X_2 X_3 and
    Z_3 Z_5 Z_6 (either full-weight form Z^7 / X^7 reduces to these modulo
    the stabilizer).
    """
    gens = []
    for row in HAMMING_H:
        zs = [j + 1 for j in range(7) if row[j]]
        gens.append(PauliString.from_positions(7, zs=zs))
    for row in HAMMING_H:
        xs = [j + 1 for j in range(7) if row[j]]
        gens.append(PauliString.from_positions(7, xs=xs))
    logical_x = PauliString.from_positions(7, xs=LOGICAL_X_SUPPORT)
    logical_z = PauliString.from_positions(7, zs=LOGICAL_Z_SUPPORT)
    code = StabilizerCode(7, 1, gens, [logical_z], [logical_x])
    code.decoder = lambda syn: _steane_column_decoder(code, syn)
    return code


def syndrome_of(error: PauliString, code: StabilizerCode) -> np.ndarray:
    """Bit i is 1 iff the error anticommutes with generator i."""
    if error.n != code.n:
        raise DimensionMismatch("error length mismatch")
    return np.array([0 if error.commutes(g) else 1 for g in code.generators],
                    dtype=np.uint8)


def _steane_column_decoder(code: StabilizerCode, syndrome: np.ndarray) -> PauliString:
    syndrome = np.asarray(syndrome, dtype=np.uint8) & 1
    x_pos = syndrome_position(syndrome[:3])   # Z-checks locate bit flips
    z_pos = syndrome_position(syndrome[3:])   # X-checks locate phase flips
    correction = PauliString.identity(7)
    if x_pos:
        correction = correction * PauliString.single(7, x_pos, "X")
    if z_pos:
        correction = correction * PauliString.single(7, z_pos, "Z")
    return correction


def decode_syndrome(syndrome, code: StabilizerCode) -> PauliString:
    """Correction for a measured syndrome via the code's registered decoder."""
    if code.decoder is None:
        raise ValueError("code has no registered decoder")
    return code.decoder(np.asarray(syndrome, dtype=np.uint8))


def build_lookup_decoder(code: StabilizerCode, max_weight: int = 1) -> None:
    """Attach a minimum-weight lookup decoder built by error enumeration.

    Enumerates all errors up to ``max_weight`` and maps each syndrome to
    the first (lowest-weight) error producing it.  Colliding syndromes are
    accepted only when the error product lies in the stabilizer group
    (degenerate code); otherwise the code cannot correct to this weight.
    """
    table: dict[bytes, PauliString] = {
        bytes(np.zeros(len(code.generators), dtype=np.uint8)): PauliString.identity(code.n)
    }
    errors = _errors_up_to_weight(code.n, max_weight)
    for err in errors:
        key = bytes(syndrome_of(err, code))
        if key in table:
            clash = table[key] * err
            if not code.in_stabilizer_group(clash):
                raise ValueError(
                    f"syndrome collision between {table[key]} and {err} is not degenerate")
        else:
            table[key] = err

    def lookup(syndrome: np.ndarray) -> PauliString:
        key = bytes(np.asarray(syndrome, dtype=np.uint8) & 1)
        if key not in table:
            raise ValueError("syndrome outside the decoder table")
        return table[key]

    code.decoder = lookup


def _errors_up_to_weight(n: int, max_weight: int) -> list[PauliString]:
    singles = [PauliString.single(n, q, letter)
               for q in range(1, n + 1) for letter in "XYZ"]
    out = list(singles)
    layer = list(singles)
    for _ in range(max_weight - 1):
        nxt = []
        for e in layer:
            top = max(e.support())
            for q in range(top + 1, n + 1):
                for letter in "XYZ":
                    nxt.append(e * PauliString.single(n, q, letter))
        out.extend(nxt)
        layer = nxt
    return out


@dataclass
class ValidationReport:
    ok: bool
    failures: list[str]

    def __bool__(self) -> bool:
        return self.ok


def validate_code(code: StabilizerCode) -> ValidationReport:
    """Check commutation, independence, and logical-operator relations."""
    failures: list[str] = []
    gens = code.generators
    if len(gens) != code.n - code.k:
        failures.append(f"expected {code.n - code.k} generators, got {len(gens)}")
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if not gens[i].commutes(gens[j]):
                failures.append(f"generators {i + 1} and {j + 1} anticommute")
    if gf2_rank(code.hbar) != len(gens):
        failures.append("dependent generators")
    for name, ops in (("logical Z", code.logical_z), ("logical X", code.logical_x)):
        for idx, op in enumerate(ops):
            for j, g in enumerate(gens):
                if not op.commutes(g):
                    failures.append(f"{name} {idx + 1} anticommutes with generator {j + 1}")
    for i, zi in enumerate(code.logical_z):
        for j, xj in enumerate(code.logical_x):
            want = i != j
            if zi.commutes(xj) != want:
                rel = "commute" if want else "anticommute"
                failures.append(f"logical Z{i + 1} and X{j + 1} must {rel}")
    for ops in (code.logical_z, code.logical_x):
        for i in range(len(ops)):
            for j in range(i + 1, len(ops)):
                if not ops[i].commutes(ops[j]):
                    failures.append("logical operators of like type anticommute")
    return ValidationReport(not failures, failures)


# -- code definition files -----------------------------------------------------

def load_code(text: str) -> StabilizerCode:
    """Parse a code file: generator lines, then 'LZ'/'LX' logical lines.

    Example::

        IIIZZZZ
        ...
        LZ IIZIZZI
        LX XXXIIII

    The loaded code must pass validation.
    """
    gens: list[PauliString] = []
    lz: list[PauliString] = []
    lx: list[PauliString] = []
    for raw in text.strip().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("LZ"):
            lz.append(PauliString.from_text(line[2:].strip()))
        elif line.startswith("LX"):
            lx.append(PauliString.from_text(line[2:].strip()))
        else:
            gens.append(PauliString.from_text(line))
    if not gens:
        raise ValueError("code file has no generators")
    n = gens[0].n
    code = StabilizerCode(n, n - len(gens), gens, lz, lx)
    report = validate_code(code)
    if not report:
        raise ValueError("invalid code file: " + "; ".join(report.failures))
    return code


def dump_code(code: StabilizerCode) -> str:
    lines = [str(g).lstrip("+") for g in code.generators]
    lines += [f"LZ {str(p).lstrip('+')}" for p in code.logical_z]
    lines += [f"LX {str(p).lstrip('+')}" for p in code.logical_x]
    return "\n".join(lines) + "\n"


# -- GF(2) helpers -------------------------------------------------------------

def gf2_rank(rows: np.ndarray) -> int:
    m = (np.asarray(rows, dtype=np.uint8) & 1).copy()
    if m.size == 0:
        return 0
    rank = 0
    for c in range(m.shape[1]):
        pivots = np.nonzero(m[rank:, c])[0]
        if pivots.size == 0:
            continue
        piv = rank + int(pivots[0])
        m[[rank, piv]] = m[[piv, rank]]
        for r in np.nonzero(m[:, c])[0]:
            if r != rank:
                m[r] ^= m[rank]
        rank += 1
        if rank == m.shape[0]:
            break
    return rank


def gf2_in_rowspace(rows: np.ndarray, target: np.ndarray) -> bool:
    rows = np.asarray(rows, dtype=np.uint8) & 1
    target = np.asarray(target, dtype=np.uint8) & 1
    stacked = np.vstack([rows, target])
    return gf2_rank(stacked) == gf2_rank(rows)


def gf2_nullspace(rows: np.ndarray) -> list[np.ndarray]:
    m = (np.asarray(rows, dtype=np.uint8) & 1).copy()
    nrows, ncols = m.shape
    pivot_col: list[int] = []
    rank = 0
    for c in range(ncols):
        pivots = np.nonzero(m[rank:, c])[0]
        if pivots.size == 0:
            continue
        piv = rank + int(pivots[0])
        m[[rank, piv]] = m[[piv, rank]]
        for r in np.nonzero(m[:, c])[0]:
            if r != rank:
                m[r] ^= m[rank]
        pivot_col.append(c)
        rank += 1
        if rank == nrows:
            break
    free_cols = [c for c in range(ncols) if c not in pivot_col]
    basis = []
    for fc in free_cols:
        v = np.zeros(ncols, dtype=np.uint8)
        v[fc] = 1
        for r, pc in enumerate(pivot_col):
            if m[r, fc]:
                v[pc] = 1
        basis.append(v)
    return basis
