"""Fault-tolerant protocols: verified ancillas, recovery, transversal gates,
the measurement-based Toffoli, and leakage handling."""

import numpy as np
import pytest

from ftqc.codes import steane_code, syndrome_of
from ftqc.noise import NoiseModel
from ftqc.pauli import PauliString
from ftqc.protocols import (DATA, STEANE_ANC, STEANE_CHECKER, RecoveryPolicy,
                            encode_logical_zero, fault_tolerance_sweep,
                            handle_leakage, logical_readout_destructive,
                            prepare_verified_logical_zero,
                            prepare_verified_shor_state, recover,
                            recovery_qubit_count, residual_logical_action,
                            toffoli_fault_audit, transversal_gate,
                            verify_toffoli_bare)
from ftqc.runner import (Executor, FrameProtocolEngine, PreparationFailure,
                         TableauProtocolEngine)
from ftqc.statevector import StateVector


def fresh_tableau_executor(n=21, seed=0, noise=None):
    rng = np.random.default_rng(seed)
    engine = TableauProtocolEngine(n, rng)
    ex = Executor(engine, noise if noise else NoiseModel.ideal(), rng)
    return engine, ex


def embed(p: PauliString, n: int) -> PauliString:
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    x[: p.n] = p.x_bits
    z[: p.n] = p.z_bits
    return PauliString(n, x, z, p.phase_exp)


class TestVerifiedShorState:
    def test_noiseless_accepts_immediately(self, rng):
        engine, retries = prepare_verified_shor_state(NoiseModel.ideal(), rng)
        assert retries == 0
        # resulting state is the even-weight superposition: its stabilizer
        # group contains Z^4 and all X-pairs
        for text in ("ZZZZI", "XXIII", "IXXII", "IIXXI"):
            value, deterministic = engine.tab.measure(PauliString.from_text(text), rng)
            assert deterministic and value == 1

    def test_retry_budget_exhaustion(self, rng):
        # certain measurement flips force endless rejection
        noise = NoiseModel(eps_meas=1.0)
        with pytest.raises(PreparationFailure):
            prepare_verified_shor_state(noise, rng, max_retries=4)

    def test_heavy_noise_consumes_retries_deterministically(self):
        noise = NoiseModel(eps_gate={"cnot": 0.35})
        from ftqc.rng import stream_rng
        retries = [prepare_verified_shor_state(noise, stream_rng(3, i))[1]
                   for i in range(40)]
        again = [prepare_verified_shor_state(noise, stream_rng(3, i))[1]
                 for i in range(40)]
        assert retries == again
        assert max(retries) >= 1  # rejections do happen at this rate


class TestVerifiedLogicalZero:
    def test_noiseless_passes_both_checks(self, rng):
        engine, ex = fresh_tableau_executor()
        report = prepare_verified_logical_zero(ex, DATA, STEANE_CHECKER)
        assert report["checks"] == [0, 0] and not report["flipped"]
        code = steane_code()
        for g in code.generators + [code.logical_z[0]]:
            value, deterministic = engine.tab.measure(embed(g, 21), rng)
            assert deterministic and value == 1

    def test_single_corrupted_check_is_outvoted(self, rng):
        # force checker 1 to read logical one by injecting a logical flip
        # into it mid-verification: the conflicting second check leaves the
        # block untouched
        calls = {"n": 0}

        class FlipOnce(TableauProtocolEngine):
            def measure_z(self, qubit):
                return super().measure_z(qubit)

        engine, ex = fresh_tableau_executor()
        # run the protocol manually: encode, then corrupt the first checker
        encode_logical_zero(ex, DATA)
        checks = []
        for attempt in range(2):
            encode_logical_zero(ex, STEANE_CHECKER)
            if attempt == 0:
                for q in (STEANE_CHECKER[0], STEANE_CHECKER[1], STEANE_CHECKER[2]):
                    engine.tab.apply_gate("X", (q,))  # logical flip on checker
            ex.step([("CNOT", (b, c)) for b, c in zip(DATA, STEANE_CHECKER)])
            value, _ = logical_readout_destructive(ex, STEANE_CHECKER)
            checks.append(value)
        assert checks == [1, 0]
        # the block itself is still a clean logical zero
        code = steane_code()
        value, deterministic = engine.tab.measure(embed(code.logical_z[0], 21), rng)
        assert deterministic and value == 1

    def test_double_one_readings_flip_the_block(self, rng):
        # a genuinely flipped block reads one twice and is repaired
        engine, ex = fresh_tableau_executor()
        encode_logical_zero(ex, DATA)
        for q in (1, 2, 3):
            engine.tab.apply_gate("X", (q,))  # logical flip on the block
        checks = []
        for _ in range(2):
            encode_logical_zero(ex, STEANE_CHECKER)
            ex.step([("CNOT", (b, c)) for b, c in zip(DATA, STEANE_CHECKER)])
            value, _ = logical_readout_destructive(ex, STEANE_CHECKER)
            checks.append(value)
        assert checks == [1, 1]
        ex.step([("X", (q,)) for q in DATA])
        code = steane_code()
        value, deterministic = engine.tab.measure(embed(code.logical_z[0], 21), rng)
        assert deterministic and value == 1


class TestRecover:
    def test_injected_error_restored_on_tableau(self, rng):
        code = steane_code()
        for err_text in ("X5", "Z3", "Y7"):
            letter, pos = err_text[0], int(err_text[1])
            engine, ex = fresh_tableau_executor(seed=pos)
            encode_logical_zero(ex, DATA)
            engine.tab.inject_pauli(embed(PauliString.single(7, pos, letter), 21))
            outcome = recover(ex, RecoveryPolicy(), code)
            assert not outcome.deferred
            want = PauliString.single(7, pos, letter)
            assert outcome.correction.equal_up_to_phase(want)
            # block is back to the exact logical-zero stabilizer state
            for g in code.generators + [code.logical_z[0]]:
                value, deterministic = engine.tab.measure(embed(g, 21), rng)
                assert deterministic and value == 1

    def test_trivial_syndrome_not_repeated(self):
        engine, ex = fresh_tableau_executor()
        encode_logical_zero(ex, DATA)
        outcome = recover(ex, RecoveryPolicy(), steane_code())
        assert len(outcome.syndrome_history) == 1
        assert outcome.correction.weight() == 0

    def test_disagreement_defers_with_identity_correction(self, rng):
        # a measurement flip in extraction 1 makes it disagree with
        # extraction 2, so the round defers and applies nothing
        engine, ex0 = fresh_tableau_executor()
        encode_logical_zero(ex0, DATA)
        # locate the first syndrome-readout measurement location index by a
        # reference recording run on a frame engine
        ref_rng = np.random.default_rng(0)
        ref_engine = FrameProtocolEngine(21, ref_rng)
        ref = Executor(ref_engine, NoiseModel.ideal(), ref_rng, record_locations=True)
        ref.live.update(DATA)
        recover(ref, RecoveryPolicy(), steane_code())
        meas = [l for l in ref.locations if l.kind == "meas"]
        # the seven ancilla-readout measurements follow the 14 checker bits
        first_syndrome_meas = meas[14]
        assert first_syndrome_meas.qubits == (STEANE_ANC[0],)
        ex = Executor(engine, NoiseModel.ideal(), np.random.default_rng(1),
                      plan={first_syndrome_meas.index: ["flip"]})
        ex.live.update(DATA)
        outcome = recover(ex, RecoveryPolicy(), steane_code())
        assert outcome.deferred
        assert outcome.correction.weight() == 0

    def test_repeat_until_agree_eventually_acts(self, rng):
        engine, ex = fresh_tableau_executor()
        encode_logical_zero(ex, DATA)
        engine.tab.inject_pauli(embed(PauliString.single(7, 4, "X"), 21))
        policy = RecoveryPolicy(repeat_rule="repeat-until-agree")
        outcome = recover(ex, policy, steane_code())
        assert not outcome.deferred
        assert outcome.correction == PauliString.single(7, 4, "X")

    def test_naive_requires_demo_mode(self):
        with pytest.raises(ValueError):
            RecoveryPolicy(method="naive")


class TestFaultToleranceSweeps:
    def test_steane_sweep_clean(self):
        report = fault_tolerance_sweep(RecoveryPolicy(method="steane"))
        assert report.injections > 1000
        assert report.ok, report.failures[:5]

    def test_shor_sweep_clean(self):
        report = fault_tolerance_sweep(RecoveryPolicy(method="shor"))
        assert report.injections > 800
        assert report.ok, report.failures[:5]

    def test_naive_sweep_fails_somewhere(self):
        report = fault_tolerance_sweep(
            RecoveryPolicy(method="naive", demo_mode=True, verify_ancilla=False))
        assert len(report.failures) >= 1

    def test_tableau_cross_check_on_sampled_failing_and_passing_locations(self, rng):
        """Replay sweep verdicts on the exact tableau engine: for sampled
        locations, one noisy round + one ideal round must keep the encoded
        zero and plus states intact for the FT method."""
        code = steane_code()
        policy = RecoveryPolicy(method="steane")

        ref_rng = np.random.default_rng(0)
        ref_engine = FrameProtocolEngine(21, ref_rng)
        ref = Executor(ref_engine, NoiseModel.ideal(), ref_rng, record_locations=True)
        ref.live.update(DATA)
        recover(ref, policy, code)
        locations = ref.locations
        picks = [locations[int(i)]
                 for i in rng.choice(len(locations), size=12, replace=False)]
        for loc in picks:
            species = loc.species()[0]
            for prepare_plus in (False, True):
                engine, _ = fresh_tableau_executor(seed=loc.index)
                ex_prep = Executor(engine, NoiseModel.ideal(), engine.rng)
                encode_logical_zero(ex_prep, DATA)
                if prepare_plus:
                    for q in DATA:
                        engine.tab.apply_gate("H", (q,))
                ex = Executor(engine, NoiseModel.ideal(), engine.rng,
                              plan={loc.index: species})
                ex.live.update(DATA)
                recover(ex, policy, code)
                ideal = Executor(engine, NoiseModel.ideal(), engine.rng)
                ideal.live.update(DATA)
                recover(ideal, policy, code)
                logical = code.logical_x[0] if prepare_plus else code.logical_z[0]
                value, deterministic = engine.tab.measure(embed(logical, 21), engine.rng)
                assert deterministic and value == 1, (loc, species, prepare_plus)


class TestTransversalGates:
    def test_bitwise_not_flips_logical(self, rng):
        engine, ex = fresh_tableau_executor(n=7)
        encode_logical_zero(ex, tuple(range(1, 8)))
        transversal_gate(ex, "X", tuple(range(1, 8)))
        value, _ = logical_readout_destructive(ex, tuple(range(1, 8)))
        assert value == 1

    def test_bitwise_h_makes_even_superposition(self, rng):
        # logical H sends zero to the +1 eigenstate of logical X
        code = steane_code()
        engine, ex = fresh_tableau_executor(n=7)
        encode_logical_zero(ex, tuple(range(1, 8)))
        transversal_gate(ex, "H", tuple(range(1, 8)))
        value, deterministic = engine.tab.measure(code.logical_x[0], rng)
        assert deterministic and value == 1
        for g in code.generators:
            value, deterministic = engine.tab.measure(g, rng)
            assert deterministic and value == 1

    def test_bitwise_pinv_implements_logical_phase(self, rng):
        # on the plus state, a logical phase gate yields the +1 eigenstate
        # of i * X * Z (the conjugate of logical X under the phase gate)
        code = steane_code()
        engine, ex = fresh_tableau_executor(n=7)
        encode_logical_zero(ex, tuple(range(1, 8)))
        transversal_gate(ex, "H", tuple(range(1, 8)))
        transversal_gate(ex, "P", tuple(range(1, 8)))
        obs = code.logical_x[0] * code.logical_z[0]
        obs = PauliString(7, obs.x_bits, obs.z_bits, (obs.phase_exp + 1) % 4)
        value, deterministic = engine.tab.measure(obs, rng)
        assert deterministic and value == 1

    def test_transversal_cnot_on_logical_basis(self, rng):
        engine, ex = fresh_tableau_executor(n=14)
        src = tuple(range(1, 8))
        dst = tuple(range(8, 15))
        encode_logical_zero(ex, src)
        encode_logical_zero(ex, dst)
        transversal_gate(ex, "X", src)  # source = logical one
        transversal_gate(ex, "CNOT", src, dst)
        v_src, _ = logical_readout_destructive(ex, src)
        v_dst, _ = logical_readout_destructive(ex, dst)
        assert (v_src, v_dst) == (1, 1)

    def test_each_qubit_touched_once(self):
        engine, ex = fresh_tableau_executor(n=14)
        ex.live.update(range(1, 15))
        before = ex.index
        transversal_gate(ex, "CNOT", tuple(range(1, 8)), tuple(range(8, 15)))
        # 7 gate locations + 0 idle (every live qubit participates)
        assert ex.index - before == 7


class TestToffoliProtocol:
    def test_bare_reproduces_unitary_on_bases_and_random_states(self, rng):
        states = []
        for _ in range(4):
            amps = rng.normal(size=8) + 1j * rng.normal(size=8)
            states.append(StateVector.from_amplitudes(amps))
        report = verify_toffoli_bare(states)
        assert report["ok"]
        assert report["probability_defect"] < 1e-9

    def test_fault_audit_clean(self):
        report = toffoli_fault_audit(references=64)
        assert report.injections == 64 * 42
        assert report.locations > 50  # cross-block couplings audited
        assert report.ok, report.failures[:5]

    def test_fault_audit_discriminates_double_flips(self):
        # the audit's decision pipeline does change under two flips in one
        # register, confirming single-flip robustness is not vacuous
        from ftqc.protocols import _toffoli_decisions, _toffoli_reference_readouts
        rng = np.random.default_rng(0)
        hits = 0
        for _ in range(50):
            cats, words, _ = _toffoli_reference_readouts(rng)
            base = _toffoli_decisions(cats, words)
            bad_words = [list(w) for w in words]
            bad_words[0][0] ^= 1
            bad_words[0][1] ^= 1
            if _toffoli_decisions(cats, [tuple(w) for w in bad_words]) != base:
                hits += 1
        assert hits > 25


class TestLeakage:
    def test_no_leakage_leaves_block_alone(self, rng):
        engine, ex = fresh_tableau_executor(n=8, seed=5)
        encode_logical_zero(ex, tuple(range(1, 8)))
        replaced = handle_leakage(ex, tuple(range(1, 8)), detector=8)
        assert replaced == []
        code = steane_code()
        value, deterministic = engine.tab.measure(embed(code.logical_z[0], 8), rng)
        assert deterministic and value == 1

    @pytest.mark.parametrize("position", range(1, 8))
    def test_leaked_qubit_replaced_and_recovered(self, position, rng):
        # mark one qubit leaked; the detector spots it, replacement plus a
        # recovery round restores the encoded zero exactly
        n = 22
        engine, ex = fresh_tableau_executor(n=n, seed=position)
        encode_logical_zero(ex, DATA)
        ex.leaked.add(position)
        replaced = handle_leakage(ex, DATA, detector=22)
        assert replaced == [position]
        assert position not in ex.leaked
        recover(ex, RecoveryPolicy(), steane_code())
        code = steane_code()
        for g in code.generators + [code.logical_z[0]]:
            value, deterministic = engine.tab.measure(embed(g, n), engine.rng)
            assert deterministic and value == 1, (position, g)

    def test_unreplaced_leak_breaks_recovery(self, rng):
        # demonstration: skip detection and let recovery run with a leaked
        # qubit still flagged; couplings involving it act as identity and
        # the syndrome extraction cannot see or fix the damage
        n = 21
        failures = 0
        for position in range(1, 8):
            engine, ex = fresh_tableau_executor(n=n, seed=100 + position)
            encode_logical_zero(ex, DATA)
            ex.leaked.add(position)
            recover(ex, RecoveryPolicy(), steane_code())
            code = steane_code()
            value, deterministic = engine.tab.measure(embed(code.logical_z[0], n),
                                                      engine.rng)
            if not (deterministic and value == 1):
                failures += 1
        assert failures >= 1
