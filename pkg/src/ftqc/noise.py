"""Stochastic Pauli error model: storage, gate, preparation, measurement,
and leakage faults.

Errors are random and uncorrelated across locations; a fault at a
single-qubit location draws uniformly from {X, Y, Z} (each eps/3).  A
faulty multi-qubit gate, under the default ``all-operands`` mode, damages
every operand: each operand independently receives a uniform nonidentity
Pauli.  The ``uniform-nontrivial`` alternative draws one of the 4^k - 1
nonidentity k-qubit Paulis uniformly instead.

Leakage is a per-qubit, per-timestep escape flag: a leaked qubit makes
every subsequent gate touching it act as the identity until the qubit is
discarded and replaced.

Coherent/systematic errors are out of model by design.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

MULTIQUBIT_MODES = ("all-operands", "uniform-nontrivial")

_LETTERS = ("X", "Y", "Z")


@dataclass(frozen=True)
class NoiseModel:
    eps_store: float = 0.0
    eps_gate: Mapping[str, float] = field(default_factory=dict)  # keys: cnot, h, ...
    eps_prep: float = 0.0
    eps_meas: float = 0.0
    leak_rate: float = 0.0
    multiqubit_mode: str = "all-operands"

    def __post_init__(self):
        for name, v in (("eps_store", self.eps_store), ("eps_prep", self.eps_prep),
                        ("eps_meas", self.eps_meas), ("leak_rate", self.leak_rate)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0,1]")
        for kind, v in self.eps_gate.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"eps_gate.{kind}={v} outside [0,1]")
        if self.multiqubit_mode not in MULTIQUBIT_MODES:
            raise ValueError(f"multiqubit_mode must be one of {MULTIQUBIT_MODES}")

    def gate_eps(self, kind: str) -> float:
        return self.eps_gate.get(kind.lower(), 0.0)

    @property
    def is_trivial(self) -> bool:
        return (self.eps_store == 0 and self.eps_prep == 0 and self.eps_meas == 0
                and self.leak_rate == 0 and all(v == 0 for v in self.eps_gate.values()))

    @property
    def factory_trivial(self) -> bool:
        """True when gate/prep/measure/leak channels are all off, so an
        offline ancilla factory is exactly deterministic."""
        return (self.eps_prep == 0 and self.eps_meas == 0 and self.leak_rate == 0
                and all(v == 0 for v in self.eps_gate.values()))

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def uniform(cls, eps: float, *, store: bool = True, gates: bool = True,
                prep: bool = True, meas: bool = True,
                multiqubit_mode: str = "all-operands") -> "NoiseModel":
        """One knob for every enabled component."""
        gate_map = {}
        if gates:
            gate_map = {k: eps for k in ("h", "p", "pinv", "x", "z", "cnot", "toffoli")}
        return cls(eps_store=eps if store else 0.0, eps_gate=gate_map,
                   eps_prep=eps if prep else 0.0, eps_meas=eps if meas else 0.0,
                   multiqubit_mode=multiqubit_mode)

    @classmethod
    def from_config(cls, items: Mapping[str, object]) -> "NoiseModel":
        """Build from flat config keys: eps_store, eps_gate.cnot, eps_prep, ..."""
        kwargs: dict = {"eps_gate": {}}
        for key, value in items.items():
            if key.startswith("eps_gate."):
                kwargs["eps_gate"][key.split(".", 1)[1]] = float(value)  # type: ignore[index]
            elif key in ("eps_store", "eps_prep", "eps_meas", "leak_rate"):
                kwargs[key] = float(value)  # type: ignore[assignment]
            elif key == "multiqubit_mode":
                kwargs[key] = str(value)
            else:
                raise KeyError(f"unknown noise config key {key!r}")
        return cls(**kwargs)

    def config_items(self) -> dict[str, object]:
        out: dict[str, object] = {"eps_store": self.eps_store}
        for kind in sorted(self.eps_gate):
            out[f"eps_gate.{kind}"] = self.eps_gate[kind]
        out.update(eps_prep=self.eps_prep, eps_meas=self.eps_meas,
                   leak_rate=self.leak_rate, multiqubit_mode=self.multiqubit_mode)
        return out


@dataclass(frozen=True)
class FaultLocation:
    """One potential fault site: a gate execution, an idle slot, a
    preparation, or a measurement, with 1-based qubit operands."""
    index: int
    kind: str                  # "gate" | "idle" | "prep" | "meas"
    gate_kind: str             # gate name, or "" for idle/prep/meas
    qubits: tuple[int, ...]

    def species(self) -> list:
        """All distinct single-fault injections possible at this location."""
        if self.kind == "idle":
            return [[(self.qubits[0], letter)] for letter in _LETTERS]
        if self.kind == "prep":
            return [[(self.qubits[0], "X")]]
        if self.kind == "meas":
            return ["flip"]
        out = []
        k = len(self.qubits)
        for pattern in range(1, 4 ** k):
            fault = []
            value = pattern
            for q in self.qubits:
                letter_index = value % 4
                value //= 4
                if letter_index:
                    fault.append((q, _LETTERS[letter_index - 1]))
            out.append(fault)
        return out


def sample_fault(location: FaultLocation, model: NoiseModel,
                 rng: np.random.Generator) -> list[tuple[int, str]]:
    """Pauli fault drawn at a location; empty list when nothing fires.

    Fault content depends only on the rng stream position and the location
    structure, never on circuit data values.
    """
    if location.kind == "idle":
        if model.eps_store > 0 and rng.random() < model.eps_store:
            return [(location.qubits[0], _LETTERS[int(rng.integers(3))])]
        return []
    if location.kind == "prep":
        if model.eps_prep > 0 and rng.random() < model.eps_prep:
            return [(location.qubits[0], "X")]
        return []
    if location.kind == "meas":
        raise ValueError("measurement flips are Bernoulli draws, not Pauli faults")
    eps = model.gate_eps(location.gate_kind)
    if eps <= 0 or rng.random() >= eps:
        return []
    qubits = location.qubits
    if len(qubits) == 1:
        return [(qubits[0], _LETTERS[int(rng.integers(3))])]
    if model.multiqubit_mode == "all-operands":
        return [(q, _LETTERS[int(rng.integers(3))]) for q in qubits]
    pattern = 1 + int(rng.integers(4 ** len(qubits) - 1))
    fault = []
    for q in qubits:
        letter_index = pattern % 4
        pattern //= 4
        if letter_index:
            fault.append((q, _LETTERS[letter_index - 1]))
    return fault


def measurement_flip(model: NoiseModel, rng: np.random.Generator) -> bool:
    return model.eps_meas > 0 and rng.random() < model.eps_meas


def prep_fault(model: NoiseModel, rng: np.random.Generator) -> Optional[str]:
    if model.eps_prep > 0 and rng.random() < model.eps_prep:
        return "X"
    return None


def leak_check(model: NoiseModel, rng: np.random.Generator) -> bool:
    return model.leak_rate > 0 and rng.random() < model.leak_rate
