import math

import numpy as np
import pytest

from cointoss import (
    ExperimentParams,
    Outcome,
    ProtocolOrderError,
    bob_cheat_bound,
    cheat_alice_fixed_plus,
    cheat_bob_fixed_phase,
    cheat_bob_homodyne,
    homodyne_success,
    honest_alice,
    honest_bob,
    run_batch,
    run_session,
)
from cointoss.protocol import (
    AliceStrategy,
    BobStrategy,
    HonestAlice,
    SignalChoice,
    _honest_amplitude,
)

NOISELESS = ExperimentParams(0.27, 0.0, 6.0, 0.1, 0.0, 0.0)


class ForcedBitAlice(HonestAlice):
    """Honest play with a pinned private bit instead of a coin flip."""

    def __init__(self, bit: int) -> None:
        self._bit = bit

    def signal(self, params, rng):
        return SignalChoice(_honest_amplitude(self._bit, params.alpha_sq), self._bit)


class WrongAnnounceAlice(HonestAlice):
    """Send the bit-0 state but always claim bit 1 (guaranteed mismatch)."""

    def signal(self, params, rng):
        return SignalChoice(_honest_amplitude(0, params.alpha_sq), 0)

    def announce(self, choice, bob_bit, rng):
        return 1


class RecordingBob(BobStrategy):
    """Honest behaviour while logging everything the strategy is shown."""

    def __init__(self) -> None:
        self.step2_seen = []
        self.step4_seen = []

    def choose_bit(self, probe, rng):
        # the probe object itself is the only thing offered at step 2;
        # record the complete set of readable public attributes
        self.step2_seen.append(
            {name: getattr(probe, name) for name in dir(probe) if not name.startswith("_")}
        )
        return int(rng.integers(2))

    def finish(self, bob_bit, announced, clicked, rng):
        self.step4_seen.append((bob_bit, announced, clicked))
        return Outcome.ABORT if clicked else Outcome.from_bit(announced ^ bob_bit)


class TestHonestSessions:
    def test_noiseless_sessions_agree(self):
        for index in range(2000):
            t = run_session(honest_alice(), honest_bob(), NOISELESS, index)
            assert t.alice_output == t.bob_output
            assert t.alice_output != Outcome.ABORT
            assert t.alice_output == Outcome.from_bit(t.alice_bit ^ t.bob_bit)

    def test_noiseless_frequencies(self):
        n = 4000
        ones = sum(
            run_session(honest_alice(), honest_bob(), NOISELESS, i).alice_output
            is Outcome.ONE
            for i in range(n)
        )
        sigma = math.sqrt(n * 0.25)
        assert abs(ones - n / 2) <= 4 * sigma

    def test_replay_determinism(self, paper_params):
        first = [
            run_session(honest_alice(), honest_bob(), paper_params, i)
            for i in range(200)
        ]
        second = [
            run_session(honest_alice(), honest_bob(), paper_params, i)
            for i in range(200)
        ]
        assert first == second

    def test_abort_is_mutual_for_honest_parties(self):
        # huge dark counts force clicks; honest Alice must adopt the abort
        noisy = ExperimentParams(0.27, 0.0, 6.0, 0.1, 0.005, 0.9)
        transcripts = [
            run_session(honest_alice(), honest_bob(), noisy, i) for i in range(300)
        ]
        aborted = [t for t in transcripts if t.detector_clicked]
        assert aborted, "dark counts this large must produce clicks"
        for t in aborted:
            assert t.bob_output is Outcome.ABORT
            assert t.alice_output is Outcome.ABORT


class TestMismatchClickModel:
    def test_forced_mismatch_abort_rate(self, paper_params):
        # oracle: threshold click probability at the mismatch intensity
        # 4 mu_B + mu_leak, computed from first principles
        mu_b = 0.27 * 10.0 ** -0.6 * 0.1
        mu = 4 * mu_b + 0.005 * mu_b
        expected = 1.0 - (1.0 - 4.7e-5) * math.exp(-mu)
        assert expected == pytest.approx(0.02684, abs=5e-5)

        n = 60_000
        aborts = sum(
            run_session(WrongAnnounceAlice(), honest_bob(), paper_params, i).bob_output
            is Outcome.ABORT
            for i in range(n)
        )
        sigma = math.sqrt(expected * (1 - expected) / n)
        assert aborts / n == pytest.approx(expected, abs=4 * sigma)


class TestInformationHiding:
    def test_bob_sees_nothing_signal_dependent_before_step3(self, paper_params):
        observations = []
        for bit in (0, 1):
            bob = RecordingBob()
            run_session(
                ForcedBitAlice(bit),
                bob,
                paper_params,
                np.random.SeedSequence(99),
            )
            observations.append(bob.step2_seen)
        # identical seeds, opposite private bits: a non-measuring Bob must
        # observe exactly the same thing at step 2
        assert observations[0] == observations[1]
        # and the probe exposes no public reading of the raw amplitude
        (step2,) = observations[0]
        assert all(not isinstance(v, float) for v in step2.values())

    def test_amplitude_absent_from_probe_public_surface(self, paper_params):
        bob = RecordingBob()
        run_session(ForcedBitAlice(0), bob, paper_params, 3)
        (step2,) = bob.step2_seen
        assert set(step2) == {"consumed", "measure_displaced", "measure_homodyne"}


class ProbeHoardingBob(BobStrategy):
    """Keeps the probe and tries to measure after its step has passed."""

    def choose_bit(self, probe, rng):
        self.probe = probe
        return 0

    def finish(self, bob_bit, announced, clicked, rng):
        self.probe.measure_displaced(0)  # too late
        return Outcome.ZERO


class DoubleMeasureBob(BobStrategy):
    def choose_bit(self, probe, rng):
        probe.measure_displaced(0)
        probe.measure_homodyne()
        return 0

    def finish(self, bob_bit, announced, clicked, rng):
        return Outcome.ZERO


class BadBitBob(BobStrategy):
    def choose_bit(self, probe, rng):
        return 2

    def finish(self, bob_bit, announced, clicked, rng):
        return Outcome.ZERO


class OverdrivenAlice(AliceStrategy):
    def signal(self, params, rng):
        return SignalChoice(2.0 * math.sqrt(params.alpha_sq) + 1.0, 0)

    def announce(self, choice, bob_bit, rng):
        return 0

    def finish(self, choice, announced, bob_bit, bob_aborted, rng):
        return Outcome.ZERO


class TestOrderViolations:
    def test_probe_after_step2_faults(self, paper_params):
        with pytest.raises(ProtocolOrderError):
            run_session(honest_alice(), ProbeHoardingBob(), paper_params, 1)

    def test_double_measurement_faults(self, paper_params):
        with pytest.raises(ProtocolOrderError):
            run_session(honest_alice(), DoubleMeasureBob(), paper_params, 1)

    def test_non_bit_message_faults(self, paper_params):
        with pytest.raises(ProtocolOrderError):
            run_session(honest_alice(), BadBitBob(), paper_params, 1)

    def test_overdriven_amplitude_faults(self, paper_params):
        with pytest.raises(ProtocolOrderError):
            run_session(OverdrivenAlice(), honest_bob(), paper_params, 1)


class TestCheatStrategies:
    def test_fixed_plus_alice_always_names_her_target(self, paper_params):
        for index in range(500):
            t = run_session(
                cheat_alice_fixed_plus(Outcome.ONE), honest_bob(), paper_params, index
            )
            assert t.alice_bit ^ t.bob_bit == 1
            assert t.alice_output is Outcome.ONE
            if not t.detector_clicked:
                assert t.bob_output is Outcome.ONE

    def test_fixed_plus_success_respects_bound(self, paper_params):
        batch = run_batch(
            cheat_alice_fixed_plus(Outcome.ONE),
            honest_bob(),
            paper_params,
            30_000,
            211,
        )
        # closed-form success of this naive strategy from the click model
        mu_b = 0.27 * 10.0 ** -0.6 * 0.1
        mu_leak = 0.005 * mu_b
        pd = 4.7e-5
        expected = 0.5 * (1 - pd) * math.exp(-mu_leak) + 0.5 * (1 - pd) * math.exp(
            -4 * mu_b - mu_leak
        )
        sigma = math.sqrt(expected * (1 - expected) / batch.n_sessions)
        assert batch.estimate == pytest.approx(expected, abs=4 * sigma)
        assert batch.estimate <= 0.9971 + 4 * sigma

    def test_fixed_phase_bob_never_aborts(self, paper_params):
        for index in range(300):
            t = run_session(
                honest_alice(), cheat_bob_fixed_phase(), paper_params, index
            )
            assert t.bob_output is not Outcome.ABORT
            assert not t.detector_clicked  # signal consumed by the probe

    def test_fixed_phase_success(self, paper_params):
        batch = run_batch(
            honest_alice(), cheat_bob_fixed_phase(), paper_params, 30_000, 57
        )
        mu_b = 0.27 * 10.0 ** -0.6 * 0.1
        mu_leak = 0.005 * mu_b
        pd = 4.7e-5
        click_leak = 1 - (1 - pd) * math.exp(-mu_leak)
        click_mismatch = 1 - (1 - pd) * math.exp(-4 * mu_b - mu_leak)
        expected = 0.5 * (1 - click_leak) + 0.5 * click_mismatch
        sigma = math.sqrt(expected * (1 - expected) / batch.n_sessions)
        assert batch.estimate == pytest.approx(expected, abs=4 * sigma)
        assert batch.estimate <= bob_cheat_bound(0.27)

    def test_homodyne_bob_success(self, paper_params):
        batch = run_batch(
            honest_alice(), cheat_bob_homodyne(), paper_params, 30_000, 331
        )
        expected = homodyne_success(0.27)
        sigma = math.sqrt(expected * (1 - expected) / batch.n_sessions)
        assert batch.estimate == pytest.approx(expected, abs=4 * sigma)
        assert batch.estimate < bob_cheat_bound(0.27)

    def test_homodyne_vacuum_is_a_coin_flip(self):
        vacuum = ExperimentParams(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
        batch = run_batch(honest_alice(), cheat_bob_homodyne(), vacuum, 20_000, 5)
        sigma = math.sqrt(0.25 / batch.n_sessions)
        assert batch.estimate == pytest.approx(0.5, abs=4 * sigma)

    def test_fixed_phase_no_photons_is_a_coin_flip(self):
        dead = ExperimentParams(0.27, 0.0, 6.0, 0.0, 0.0, 0.0)
        batch = run_batch(honest_alice(), cheat_bob_fixed_phase(), dead, 20_000, 5)
        sigma = math.sqrt(0.25 / batch.n_sessions)
        assert batch.estimate == pytest.approx(0.5, abs=4 * sigma)

    def test_cheat_target_validation(self):
        with pytest.raises(ValueError):
            cheat_alice_fixed_plus(Outcome.ABORT)
        with pytest.raises(ValueError):
            cheat_bob_fixed_phase(Outcome.ABORT)
