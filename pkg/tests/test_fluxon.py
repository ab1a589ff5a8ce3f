"""Finite-group flux-pair calculus, with permutation-composition oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftqc.fluxon import (FiniteGroup, FluxRegister, a5_not_demo,
                         charge_zero_pair, cycle_notation)


@pytest.fixture(scope="module")
def a5():
    return FiniteGroup.alternating(5)


def compose(a, b):
    """Oracle: apply permutation b first, then a (1-based image tuples)."""
    return tuple(a[b[k] - 1] for k in range(len(a)))


def invert(p):
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v - 1] = i + 1
    return tuple(out)


class TestFiniteGroup:
    def test_a5_order_and_classes(self, a5):
        assert a5.order == 60
        sizes = sorted(len(c) for c in a5.classes)
        assert sizes == [1, 12, 12, 15, 20]

    def test_identity_is_element_zero(self, a5):
        assert a5.identity == 0
        assert a5.label(0) == "e"

    def test_table_matches_permutation_oracle(self, a5, rng):
        perms = a5.permutations
        for _ in range(300):
            i, j = rng.integers(0, 60, size=2)
            want = compose(perms[i], perms[j])
            assert perms[a5.mul(int(i), int(j))] == want

    def test_inverses_match_oracle(self, a5):
        for i in range(60):
            assert a5.permutations[a5.inv(i)] == invert(a5.permutations[i])

    def test_conjugate_example(self, a5):
        u0 = a5.element("(125)")
        v = a5.element("(14)(35)")
        assert a5.label(a5.conjugate(u0, v)) == "(234)"

    def test_three_cycles_form_one_class_of_twenty(self, a5):
        cls = a5.conjugacy_class_of(a5.element("(125)"))
        assert len(cls) == 20
        assert all(a5.label(u).count("(") == 1 and len(a5.label(u)) == 5
                   for u in cls)

    def test_csv_round_trip(self, a5):
        again = FiniteGroup.from_csv(a5.to_csv())
        assert np.array_equal(again.table, a5.table)

    def test_bad_table_rejected(self):
        with pytest.raises(ValueError):
            FiniteGroup(np.array([[0, 1], [0, 1]]))

    @given(st.integers(0, 59), st.integers(0, 59), st.integers(0, 59))
    @settings(max_examples=60, deadline=None)
    def test_associativity_sampled(self, i, j, k):
        group = FiniteGroup.alternating(5)
        assert group.mul(group.mul(i, j), k) == group.mul(i, group.mul(j, k))

    def test_cycle_notation(self):
        assert cycle_notation((1, 2, 3, 4, 5)) == "e"
        assert cycle_notation((2, 5, 3, 4, 1)) == "(125)"
        assert cycle_notation((4, 2, 5, 1, 3)) == "(14)(35)"


class TestPullThrough:
    def test_named_example(self, a5):
        reg = FluxRegister.basis(a5, (a5.element("(125)"), a5.element("(14)(35)")))
        reg.pull_through(inner=1, outer=2)
        assert reg.support() == {(a5.element("(234)"), a5.element("(14)(35)"))}

    def test_identity_outer_is_noop(self, a5, rng):
        for _ in range(20):
            u = int(rng.integers(60))
            reg = FluxRegister.basis(a5, (u, a5.identity))
            reg.pull_through(1, 2)
            assert reg.support() == {(u, a5.identity)}

    def test_involution_outer_restores_exhaustive(self, a5):
        v = a5.element("(14)(35)")
        assert a5.mul(v, v) == a5.identity
        for u in range(60):
            reg = FluxRegister.basis(a5, (u, v))
            reg.pull_through(1, 2)
            reg.pull_through(1, 2)
            assert reg.support() == {(u, v)}

    def test_norm_preserved_on_superpositions(self, a5, rng):
        values = rng.choice(60, size=6, replace=False)
        amps = rng.normal(size=6) + 1j * rng.normal(size=6)
        amps /= np.linalg.norm(amps)
        reg = FluxRegister(a5, 2, {(int(u), int(rng.integers(60))): complex(c)
                                   for u, c in zip(values, amps)})
        reg.pull_through(1, 2)
        assert abs(reg.norm() - 1.0) < 1e-12

    def test_class_membership_invariant(self, a5, rng):
        for _ in range(40):
            u, v = (int(x) for x in rng.integers(0, 60, size=2))
            reg = FluxRegister.basis(a5, (u, v))
            reg.pull_through(1, 2)
            (u2, _), = reg.support()
            assert a5.conjugacy_class_of(u2) == a5.conjugacy_class_of(u)


class TestExchange:
    def test_commuting_fluxes_swap_without_twist(self, a5):
        u = a5.element("(125)")
        w = a5.mul(u, u)  # powers commute
        reg = FluxRegister.basis(a5, (u, w))
        reg.exchange(1, 2)
        assert reg.support() == {(w, u)}

    def test_named_braid(self, a5):
        u1 = a5.element("(12345)")
        u2 = a5.element("(125)")
        reg = FluxRegister.basis(a5, (u1, u2))
        reg.exchange(1, 2)
        want = a5.mul(a5.mul(a5.inv(u2), u1), u2)
        assert reg.support() == {(u2, want)}

    def test_exchange_inverse_round_trip(self, a5, rng):
        values = rng.choice(60, size=5, replace=False)
        amps = rng.normal(size=5) + 1j * rng.normal(size=5)
        amps /= np.linalg.norm(amps)
        state = {(int(u), int(rng.integers(60)), int(rng.integers(60))): complex(c)
                 for u, c in zip(values, amps)}
        reg = FluxRegister(a5, 3, state)
        before = dict(reg.amps)
        reg.exchange(2, 3)
        reg.exchange(2, 3, inverse=True)
        assert set(reg.amps) == set(before)
        for key, amp in before.items():
            assert abs(reg.amps[key] - amp) < 1e-12

    def test_exhaustive_conjugation_law(self, a5):
        # all 3600 flux pairs obey the braid law exactly
        bad = 0
        for u1 in range(60):
            for u2 in range(60):
                reg = FluxRegister.basis(a5, (u1, u2))
                reg.exchange(1, 2)
                if reg.support() != {(u2, a5.conjugate(u1, u2))}:
                    bad += 1
        assert bad == 0


class TestMeasurement:
    def test_basis_state_measures_itself(self, a5, rng):
        reg = FluxRegister.basis(a5, (17, 3))
        assert reg.measure_flux(1, rng) == 17
        assert reg.support() == {(17, 3)}

    def test_equal_superposition_statistics(self, a5):
        u0, u1 = a5.element("(125)"), a5.element("(234)")
        rng = np.random.default_rng(11)
        counts = {u0: 0, u1: 0}
        trials = 20000
        for _ in range(trials):
            reg = FluxRegister(a5, 1, {(u0,): 1 / np.sqrt(2), (u1,): 1 / np.sqrt(2)})
            counts[reg.measure_flux(1, rng)] += 1
        sigma = np.sqrt(trials * 0.25)
        assert abs(counts[u0] - trials / 2) < 3 * sigma

    def test_collapse_restricts_support(self, a5, rng):
        reg = FluxRegister(a5, 2, {(1, 5): 0.6, (2, 7): 0.8})
        outcome = reg.measure_flux(1, rng)
        assert all(k[0] == outcome for k in reg.support())
        assert abs(reg.norm() - 1.0) < 1e-12

    def test_charge_pm_on_plus_state(self, a5, rng):
        u0 = a5.element("(125)")
        v = a5.element("(14)(35)")
        u1 = a5.conjugate(u0, v)
        reg = FluxRegister(a5, 1, {(u0,): 1 / np.sqrt(2), (u1,): 1 / np.sqrt(2)})
        assert reg.measure_charge_pm(1, v, rng) == 1

    def test_charge_pm_on_flux_eigenstate(self, a5):
        u0 = a5.element("(125)")
        v = a5.element("(14)(35)")
        u1 = a5.conjugate(u0, v)
        rng = np.random.default_rng(5)
        plus = minus = 0
        for _ in range(4000):
            reg = FluxRegister.basis(a5, (u0,))
            sign = reg.measure_charge_pm(1, v, rng)
            # post-state is the matching +/- superposition (projector oracle)
            amp0, amp1 = reg.amplitude((u0,)), reg.amplitude((u1,))
            assert abs(amp0 - 1 / np.sqrt(2)) < 1e-12
            want1 = sign / np.sqrt(2)
            assert abs(amp1 - want1) < 1e-12
            plus += sign == 1
            minus += sign == -1
        sigma = np.sqrt(4000 * 0.25)
        assert abs(plus - 2000) < 3 * sigma

    def test_charge_pm_idempotent(self, a5, rng):
        u0 = a5.element("(125)")
        v = a5.element("(14)(35)")
        for _ in range(30):
            reg = FluxRegister.basis(a5, (u0,))
            first = reg.measure_charge_pm(1, v, rng)
            second = reg.measure_charge_pm(1, v, rng)
            assert first == second

    def test_charge_pm_rejects_wide_support(self, a5, rng):
        reg = FluxRegister(a5, 1, {(1,): 0.6, (2,): 0.48, (3,): 0.64})
        with pytest.raises(ValueError):
            reg.measure_charge_pm(1, a5.element("(14)(35)"), rng)


class TestChargeZero:
    def test_identity_class_is_single_state(self, a5):
        reg = charge_zero_pair(a5, a5.identity)
        assert reg.support() == {(0,)}

    def test_three_cycle_class_state(self, a5):
        reg = charge_zero_pair(a5, a5.element("(125)"))
        assert len(reg.support()) == 20
        amps = set(round(abs(a), 12) for a in reg.amps.values())
        assert amps == {round(1 / np.sqrt(20), 12)}

    def test_invariant_under_all_sixty_conjugations(self, a5):
        base = charge_zero_pair(a5, a5.element("(125)"))
        for v in range(60):
            reg = FluxRegister(a5, 2, {(u,) + (v,): amp
                                       for (u,), amp in base.amps.items()})
            reg.pull_through(1, 2)
            for (u,), amp in base.amps.items():
                assert abs(reg.amplitude((u, v)) - amp) < 1e-12

    def test_measurement_uniform_over_class(self, a5):
        rng = np.random.default_rng(21)
        counts = {}
        trials = 8000
        for _ in range(trials):
            reg = charge_zero_pair(a5, a5.element("(125)"))
            u = reg.measure_flux(1, rng)
            counts[u] = counts.get(u, 0) + 1
        assert len(counts) == 20
        expect = trials / 20
        sigma = np.sqrt(trials * (1 / 20) * (19 / 20))
        for u, n in counts.items():
            assert abs(n - expect) < 4 * sigma


def test_a5_not_demo_passes():
    report = a5_not_demo()
    assert report["ok"]
    assert report["u0"] == "(125)" and report["u1"] == "(234)"
    assert report["order"] == 60
