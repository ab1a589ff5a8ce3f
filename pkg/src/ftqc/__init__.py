"""Fault-tolerant quantum error correction laboratory.

A small research stack for studying error-corrected quantum memories and
fault-tolerant gadgets at desk scale:

- exact Pauli algebra in binary symplectic form (``ftqc.pauli``)
- stabilizer-tableau, dense statevector, and Pauli-frame engines
  (``ftqc.tableau``, ``ftqc.statevector``, ``ftqc.frame``)
- the [7,4,3] Hamming code and the seven-qubit CSS code built on it
  (``ftqc.codes``)
- a timestep-ordered circuit IR plus builders for encoders, syndrome
  extraction, verified ancillas, the measurement-based Toffoli gadget,
  and leak detection (``ftqc.circuits``, ``ftqc.builders``)
- a stochastic Pauli noise model with storage/gate/prep/measurement
  faults and leakage (``ftqc.noise``)
- fault-tolerant recovery protocols with verified ancillas and syndrome
  repetition policies (``ftqc.protocols``)
- Monte Carlo logical-error estimation, pseudothreshold bisection, and
  the closed-form concatenation/tradeoff formulas (``ftqc.analysis``)
- nonabelian flux-pair gate calculus over finite groups, with the A5
  NOT-gate demonstration (``ftqc.fluxon``)
- a seeded batch-experiment CLI (``ftqc.cli``)

All public qubit and bit positions are 1-based; storage is 0-based
internally.
"""

from ftqc.pauli import PauliString

__all__ = ["PauliString"]
__version__ = "0.1.0"
