"""Shared oracle helpers: independent dense-matrix Pauli/Clifford algebra.

These build every matrix from the defining 2x2 forms with plain numpy so
the production bit-vector code is checked against something it does not
share a line with.
"""

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
Y2 = X2 @ Z2  # product convention: Y = X*Z
H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
P2 = np.array([[1, 0], [0, 1j]], dtype=complex)

LETTERS = {"I": I2, "X": X2, "Z": Z2, "Y": Y2}


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_matrix(text: str) -> np.ndarray:
    """Dense matrix of a ±IXYZ string (qubit 1 = most significant bit)."""
    s = text
    phase = 1.0 + 0j
    while s and s[0] in "+-i":
        if s[0] == "-":
            phase *= -1
        elif s[0] == "i":
            phase *= 1j
        s = s[1:]
    return phase * kron_all([LETTERS[c] for c in s])


def gate_matrix(kind: str, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Dense matrix of a gate embedded in n qubits (1-based positions)."""
    if kind in ("H", "P", "PINV", "X", "Z"):
        single = {"H": H2, "P": P2, "PINV": P2.conj().T, "X": X2, "Z": Z2}[kind]
        mats = [single if q == qubits[0] else I2 for q in range(1, n + 1)]
        return kron_all(mats)
    if kind == "CNOT":
        c, t = qubits
        proj0 = np.array([[1, 0], [0, 0]], dtype=complex)
        proj1 = np.array([[0, 0], [0, 1]], dtype=complex)
        term0 = kron_all([proj0 if q == c else I2 for q in range(1, n + 1)])
        term1 = kron_all(
            [proj1 if q == c else (X2 if q == t else I2) for q in range(1, n + 1)]
        )
        return term0 + term1
    if kind == "TOFFOLI":
        a, b, t = qubits
        dim = 2 ** n
        mat = np.zeros((dim, dim), dtype=complex)
        for idx in range(dim):
            bits = [(idx >> (n - q)) & 1 for q in range(1, n + 1)]
            if bits[a - 1] == 1 and bits[b - 1] == 1:
                bits[t - 1] ^= 1
            jdx = sum(bit << (n - q) for q, bit in zip(range(1, n + 1), bits))
            mat[jdx, idx] = 1.0
        return mat
    raise ValueError(kind)


def random_pauli_text(rng: np.random.Generator, n: int) -> str:
    sign = rng.choice(["", "-", "+i", "-i"])
    body = "".join(rng.choice(list("IXYZ")) for _ in range(n))
    return sign + body


def states_equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return abs(abs(np.vdot(a, b)) - 1.0) < tol


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
