"""Topological gate calculus for flux pairs over a finite group.

A magnetic flux is labeled by a group element; computational registers
hold m flux-antiflux pairs |u, u^-1>, each stored by its u.  Carrying one
pair through another conjugates the inner flux by the outer flux value
while the outer pair (total flux trivial) is unchanged; exchanging two
pairs additionally swaps their slots.  Composition convention: mul(a, b)
applies b first, then a, so conjugation of u by v is inv(v)*u*v =
mul(mul(inv(v), u), v).

Flux measurement projects a pair onto a group element with Born weights;
charge measurement projects a two-state pair {u0, v^-1 u0 v} onto the
|+/-> superpositions distinguished by the trivial/nontrivial phase a v
projectile picks up around the pair.  Conjugacy-class-uniform pairs carry
no detectable charge: they are invariant under every conjugation.

The demonstration group is A5 (even permutations of five symbols, order
60), with computational fluxes u0 = (125), u1 = (234) and the swap flux
v = (14)(35).
"""

from __future__ import annotations

import math
from itertools import permutations
from typing import Iterable, Optional

import numpy as np

NORM_TOL = 1e-10


class FiniteGroup:
    """Finite group as explicit multiplication/inverse tables.

    Elements are indices 0..order-1 with index 0 the identity; labels are
    cycle-notation strings for permutation groups.
    """

    def __init__(self, table: np.ndarray, labels: Optional[list[str]] = None,
                 name: str = ""):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError("multiplication table must be square")
        self.order = table.shape[0]
        self.table = table
        self.name = name
        self.labels = labels if labels is not None else [str(i) for i in range(self.order)]
        self.identity = self._find_identity()
        if self.identity != 0:
            raise ValueError("element 0 must be the identity")
        self.inverse = self._build_inverses()
        self.validate()
        self.classes = self._conjugacy_classes()
        self._class_of = np.zeros(self.order, dtype=np.int64)
        for ci, cls in enumerate(self.classes):
            for u in cls:
                self._class_of[u] = ci

    # -- construction ------------------------------------------------------

    @classmethod
    def from_permutations(cls, perms: Iterable[tuple[int, ...]], degree: int,
                          name: str = "") -> "FiniteGroup":
        """Group from explicit permutation images (1-based tuples)."""
        elems = sorted(set(perms))
        ident = tuple(range(1, degree + 1))
        if ident not in elems:
            raise ValueError("permutation set must contain the identity")
        elems.remove(ident)
        elems.insert(0, ident)
        index = {p: i for i, p in enumerate(elems)}
        n = len(elems)
        table = np.zeros((n, n), dtype=np.int64)
        for i, a in enumerate(elems):
            for j, b in enumerate(elems):
                composed = tuple(a[b[k] - 1] for k in range(degree))  # apply b, then a
                if composed not in index:
                    raise ValueError("permutation set is not closed under composition")
                table[i, j] = index[composed]
        labels = [cycle_notation(p) for p in elems]
        group = cls(table, labels, name=name)
        group.permutations = elems
        return group

    @classmethod
    def alternating(cls, degree: int) -> "FiniteGroup":
        """Even permutations of 1..degree."""
        perms = [p for p in permutations(range(1, degree + 1)) if _is_even(p)]
        return cls.from_permutations(perms, degree, name=f"A{degree}")

    @classmethod
    def from_csv(cls, text: str, name: str = "") -> "FiniteGroup":
        """Multiplication table as CSV rows of element indices."""
        rows = [[int(v) for v in line.split(",")]
                for line in text.strip().splitlines() if line.strip()]
        return cls(np.array(rows, dtype=np.int64), name=name)

    def to_csv(self) -> str:
        return "\n".join(",".join(str(v) for v in row) for row in self.table) + "\n"

    # -- structure -----------------------------------------------------------

    def _find_identity(self) -> int:
        for e in range(self.order):
            if all(self.table[e, b] == b and self.table[b, e] == b
                   for b in range(self.order)):
                return e
        raise ValueError("table has no identity element")

    def _build_inverses(self) -> np.ndarray:
        inv = np.full(self.order, -1, dtype=np.int64)
        for a in range(self.order):
            hits = np.nonzero(self.table[a] == self.identity)[0]
            if hits.size != 1 or self.table[hits[0], a] != self.identity:
                raise ValueError(f"element {a} lacks a two-sided inverse")
            inv[a] = hits[0]
        return inv

    def validate(self) -> None:
        """Exhaustive associativity check (intended for order <= 60)."""
        t = self.table
        left = t[t, :]           # left[a,b,c] = (a*b)*c
        right = t[:, t]          # right[a,b,c] = a*(b*c)
        if not np.array_equal(left, right):
            raise ValueError("multiplication table is not associative")

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def conjugate(self, u: int, v: int) -> int:
        """inv(v) * u * v."""
        return self.mul(self.mul(self.inv(v), u), v)

    def _conjugacy_classes(self) -> list[tuple[int, ...]]:
        seen = set()
        classes = []
        for u in range(self.order):
            if u in seen:
                continue
            orbit = {self.conjugate(u, v) for v in range(self.order)}
            seen |= orbit
            classes.append(tuple(sorted(orbit)))
        return classes

    def conjugacy_class_of(self, u: int) -> tuple[int, ...]:
        return self.classes[self._class_of[u]]

    def element(self, label: str) -> int:
        """Look up an element by its cycle-notation label."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no element labeled {label!r}") from None

    def label(self, u: int) -> str:
        return self.labels[u]


def _is_even(perm: tuple[int, ...]) -> bool:
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm))
                     if perm[i] > perm[j])
    return inversions % 2 == 0


def cycle_notation(perm: tuple[int, ...]) -> str:
    """Cycle notation with fixed points omitted; identity is 'e'."""
    seen = set()
    cycles = []
    for start in range(1, len(perm) + 1):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        nxt = perm[start - 1]
        while nxt != start:
            cycle.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt - 1]
        if len(cycle) > 1:
            cycles.append("(" + "".join(str(v) for v in cycle) + ")")
    return "".join(cycles) if cycles else "e"


class FluxRegister:
    """Amplitude map over m-tuples of group elements (one per pair)."""

    def __init__(self, group: FiniteGroup, pair_count: int,
                 amplitudes: Optional[dict[tuple[int, ...], complex]] = None):
        self.group = group
        self.m = pair_count
        if amplitudes is None:
            amplitudes = {tuple([group.identity] * pair_count): 1.0 + 0j}
        self.amps: dict[tuple[int, ...], complex] = dict(amplitudes)
        self._check_norm()

    @classmethod
    def basis(cls, group: FiniteGroup, values: tuple[int, ...]) -> "FluxRegister":
        return cls(group, len(values), {tuple(values): 1.0 + 0j})

    def _check_norm(self) -> None:
        norm = sum(abs(a) ** 2 for a in self.amps.values())
        if abs(norm - 1.0) > NORM_TOL:
            raise AssertionError(f"register norm drifted to {norm}")

    def _check_pair(self, index: int) -> None:
        if not 1 <= index <= self.m:
            raise IndexError(f"pair index {index} out of range 1..{self.m}")

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amps.values()))

    def support(self) -> set[tuple[int, ...]]:
        return {k for k, a in self.amps.items() if abs(a) > 1e-12}

    def amplitude(self, values: tuple[int, ...]) -> complex:
        return self.amps.get(tuple(values), 0.0 + 0j)

    # -- gates -------------------------------------------------------------------

    def pull_through(self, inner: int, outer: int) -> None:
        """Carry pair ``inner`` through pair ``outer``: the inner flux is
        conjugated by the outer flux value in place; the outer pair is
        untouched.  Linear on superpositions; a permutation of basis
        tuples, hence exactly norm-preserving."""
        self._check_pair(inner)
        self._check_pair(outer)
        if inner == outer:
            raise IndexError("inner and outer pair must differ")
        g = self.group
        new: dict[tuple[int, ...], complex] = {}
        for key, amp in self.amps.items():
            u = key[inner - 1]
            v = key[outer - 1]
            out = list(key)
            out[inner - 1] = g.conjugate(u, v)
            new_key = tuple(out)
            new[new_key] = new.get(new_key, 0.0 + 0j) + amp
        self.amps = new
        self._check_norm()

    def exchange(self, left: int, right: int, inverse: bool = False) -> None:
        """Swap two pairs with the braiding twist: |u1>|u2> becomes
        |u2>|inv(u2) u1 u2>; ``inverse`` undoes it."""
        self._check_pair(left)
        self._check_pair(right)
        if left == right:
            raise IndexError("exchange needs two distinct pairs")
        g = self.group
        new: dict[tuple[int, ...], complex] = {}
        for key, amp in self.amps.items():
            u1 = key[left - 1]
            u2 = key[right - 1]
            out = list(key)
            if not inverse:
                out[left - 1] = u2
                out[right - 1] = g.conjugate(u1, u2)
            else:
                out[left - 1] = g.mul(g.mul(u1, u2), g.inv(u1))
                out[right - 1] = u1
            new_key = tuple(out)
            new[new_key] = new.get(new_key, 0.0 + 0j) + amp
        self.amps = new
        self._check_norm()

    # -- measurement ----------------------------------------------------------------

    def measure_flux(self, index: int, rng: np.random.Generator) -> int:
        """Born-rule projection of one pair onto a definite flux value."""
        self._check_pair(index)
        weights: dict[int, float] = {}
        for key, amp in self.amps.items():
            u = key[index - 1]
            weights[u] = weights.get(u, 0.0) + abs(amp) ** 2
        values = sorted(weights)
        probs = np.array([weights[u] for u in values])
        probs = probs / probs.sum()
        outcome = int(rng.choice(values, p=probs))
        keep = {k: a for k, a in self.amps.items() if k[index - 1] == outcome}
        scale = math.sqrt(sum(abs(a) ** 2 for a in keep.values()))
        self.amps = {k: a / scale for k, a in keep.items()}
        self._check_norm()
        return outcome

    def measure_charge_pm(self, index: int, v: int,
                          rng: np.random.Generator) -> int:
        """Project one pair onto (|u0> +/- |u1>)/sqrt(2) with u1 = inv(v) u0 v.

        Returns +1 for the symmetric state (trivial phase picked up by a
        v projectile) or -1.  The pair's support must lie in a two-state
        set {u0, inv(v) u0 v} with distinct members.
        """
        self._check_pair(index)
        g = self.group
        values = sorted({k[index - 1] for k in self.support()})
        if len(values) == 1:
            u0 = values[0]
            u1 = g.conjugate(u0, v)
            if u1 == u0:
                raise ValueError("flux commutes with the probe; no two-state split")
        elif len(values) == 2:
            a, b = values
            if g.conjugate(a, v) == b:
                u0, u1 = a, b
            elif g.conjugate(b, v) == a:
                u0, u1 = b, a
            else:
                raise ValueError("support is not conjugate under the probe flux")
        else:
            raise ValueError("support is wider than a two-state pair")
        # split every tuple into the +/- combinations on this slot
        plus: dict[tuple[int, ...], complex] = {}
        minus: dict[tuple[int, ...], complex] = {}
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        for key, amp in self.amps.items():
            u = key[index - 1]
            rest = key[:index - 1] + (None,) + key[index:]
            sign = 1.0 if u == u0 else -1.0
            plus[rest] = plus.get(rest, 0.0) + amp * inv_sqrt2
            minus[rest] = minus.get(rest, 0.0) + sign * amp * inv_sqrt2
        p_plus = sum(abs(a) ** 2 for a in plus.values())
        outcome = 1 if rng.random() < p_plus else -1
        chosen = plus if outcome == 1 else minus
        norm = math.sqrt(sum(abs(a) ** 2 for a in chosen.values()))
        new: dict[tuple[int, ...], complex] = {}
        for rest, amp in chosen.items():
            if abs(amp) < 1e-15:
                continue
            for u, sign in ((u0, 1.0), (u1, 1.0 if outcome == 1 else -1.0)):
                key = rest[:index - 1] + (u,) + rest[index:]
                new[key] = new.get(key, 0.0) + sign * amp * inv_sqrt2 / norm
        self.amps = new
        self._check_norm()
        return outcome


def charge_zero_pair(group: FiniteGroup, class_rep: int) -> FluxRegister:
    """Single pair in the uniform superposition over one conjugacy class:
    invariant under every conjugation, so it carries no detectable charge."""
    cls = group.conjugacy_class_of(class_rep)
    amp = 1.0 / math.sqrt(len(cls))
    return FluxRegister(group, 1, {(u,): amp for u in cls})


# -- A5 demonstration ----------------------------------------------------------------

A5_U0 = "(125)"
A5_U1 = "(234)"
A5_V = "(14)(35)"


def a5_not_demo(rng: Optional[np.random.Generator] = None) -> dict:
    """Pulling a computational pair through a (14)(35) pair swaps the
    three-cycle fluxes (125) and (234): a NOT gate on the flux qubit.

    Returns a report with the traces and per-check verdicts.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    group = FiniteGroup.alternating(5)
    u0 = group.element(A5_U0)
    u1 = group.element(A5_U1)
    v = group.element(A5_V)
    checks: dict[str, bool] = {}
    trace: list[str] = []

    checks["conjugation_swaps_fluxes"] = (group.conjugate(u0, v) == u1
                                          and group.conjugate(u1, v) == u0)
    trace.append(f"inv({A5_V}) {A5_U0} {A5_V} = {group.label(group.conjugate(u0, v))}")
    trace.append(f"inv({A5_V}) {A5_U1} {A5_V} = {group.label(group.conjugate(u1, v))}")

    reg = FluxRegister.basis(group, (u0, v))
    reg.pull_through(inner=1, outer=2)
    checks["basis_zero_to_one"] = reg.support() == {(u1, v)}
    trace.append(f"|{A5_U0}> -> |{group.label(next(iter(reg.support()))[0])}>")

    reg = FluxRegister.basis(group, (u1, v))
    reg.pull_through(inner=1, outer=2)
    checks["basis_one_to_zero"] = reg.support() == {(u0, v)}

    alpha, beta = 0.6, 0.8j
    reg = FluxRegister(group, 2, {(u0, v): alpha, (u1, v): beta})
    reg.pull_through(inner=1, outer=2)
    checks["superposition_swapped"] = (
        abs(reg.amplitude((u1, v)) - alpha) < 1e-12
        and abs(reg.amplitude((u0, v)) - beta) < 1e-12)
    trace.append(f"a|{A5_U0}> + b|{A5_U1}> -> a|{A5_U1}> + b|{A5_U0}>")

    reg.pull_through(inner=1, outer=2)
    checks["involution"] = (abs(reg.amplitude((u0, v)) - alpha) < 1e-12
                            and abs(reg.amplitude((u1, v)) - beta) < 1e-12)

    return {"group": group.name, "order": group.order,
            "u0": A5_U0, "u1": A5_U1, "v": A5_V,
            "checks": checks, "trace": trace,
            "ok": all(checks.values())}
