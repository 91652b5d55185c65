import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entangled_otp.adversary import (
    BasisPolicy,
    Depolarizing,
    EveRecord,
    GeneralKraus,
    InterceptResend,
    NoAttack,
    attack_travel_qubit,
    eve_accuracy,
    eve_infer_bit,
)
from entangled_otp.protocol import Announcement, RunConfig, run_session
from entangled_otp.quantum import (
    DensityMatrix,
    KrausChannel,
    MeasurementBasis,
    apply_channel,
    haar_unitary,
    partial_trace,
    random_channel,
)
from entangled_otp.security import gamma_of, shared_state_after


def proj(vec):
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


Z_INTERCEPTED = 0.5 * proj([0, 1, 0, 0]) + 0.5 * proj([0, 0, 1, 0])


def within_3_sigma(hits, n, p):
    return abs(hits / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def random_message(n, seed):
    return tuple(np.random.default_rng(seed).integers(0, 2, n))


class TestAttackModels:
    def test_no_attack_is_identity(self, singlet_state, rng):
        out, record = attack_travel_qubit(NoAttack(), singlet_state, rng, round_id=3)
        assert out.allclose(singlet_state, atol=0)
        assert record == EveRecord(3)

    def test_z_intercept_branches(self, singlet_state, rng):
        outcomes = []
        for _ in range(2000):
            out, record = attack_travel_qubit(InterceptResend(), singlet_state, rng)
            assert record.measured_basis is MeasurementBasis.Z
            expected = proj([0, 1, 0, 0]) if record.measured_outcome == 0 else proj([0, 0, 1, 0])
            np.testing.assert_allclose(out.entries, expected, atol=1e-15)
            outcomes.append(record.measured_outcome)
        assert within_3_sigma(sum(outcomes), len(outcomes), 0.5)

    def test_z_intercept_average_state(self):
        np.testing.assert_allclose(shared_state_after(InterceptResend()).entries, Z_INTERCEPTED, atol=1e-15)

    def test_depolarizing_one_is_maximally_mixed(self, singlet_state, rng):
        out, _ = attack_travel_qubit(Depolarizing(1.0), singlet_state, rng)
        np.testing.assert_allclose(out.entries, np.eye(4) / 4, atol=1e-15)

    def test_depolarizing_kraus_form(self):
        ops = Depolarizing(0.3).channel().operators
        assert len(ops) == 4
        np.testing.assert_allclose(sum(k.conj().T @ k for k in ops), np.eye(2), atol=1e-15)

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_depolarizing_range(self, p):
        with pytest.raises(ValueError):
            Depolarizing(p)

    def test_general_kraus_needs_single_qubit(self):
        with pytest.raises(ValueError):
            GeneralKraus(KrausChannel.identity(4))

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_depolarizing_zero_is_no_attack(self, seed):
        rng = np.random.default_rng(seed)
        rho = apply_channel(random_channel(rng, 4), DensityMatrix.maximally_mixed(2))
        out, _ = attack_travel_qubit(Depolarizing(0.0), rho, rng)
        np.testing.assert_allclose(out.entries, rho.entries, atol=1e-12)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_unitary_attacks_leave_bob_marginal(self, seed):
        rng = np.random.default_rng(seed)
        fresh = shared_state_after(NoAttack())
        attack = GeneralKraus(KrausChannel((haar_unitary(2, rng),)))
        out, _ = attack_travel_qubit(attack, fresh, rng)
        np.testing.assert_allclose(partial_trace(out, [1]).entries, partial_trace(fresh, [1]).entries, atol=1e-12)

    @pytest.mark.parametrize(
        "attack",
        [
            NoAttack(),
            InterceptResend(BasisPolicy.ALWAYS_Z),
            InterceptResend(BasisPolicy.ALWAYS_X),
            InterceptResend(BasisPolicy.RANDOM_ZX),
            Depolarizing(0.4),
            GeneralKraus(random_channel(np.random.default_rng(5))),
        ],
        ids=lambda a: repr(a)[:30],
    )
    def test_outputs_are_valid_states(self, attack, singlet_state, rng):
        for _ in range(20):
            out, _ = attack_travel_qubit(attack, singlet_state, rng)
            out.validate()

    @pytest.mark.parametrize("policy", [BasisPolicy.ALWAYS_Z, BasisPolicy.ALWAYS_X])
    def test_intercept_resend_gamma_half(self, policy):
        assert gamma_of(shared_state_after(InterceptResend(policy))).gamma == pytest.approx(0.5, abs=1e-9)


class TestEveInference:
    @pytest.mark.parametrize(
        "outcome, announcement, guess",
        [(1, Announcement.YES, 0), (0, Announcement.YES, 1), (0, Announcement.NO, 0), (1, Announcement.NO, 1)],
    )
    def test_table(self, outcome, announcement, guess):
        record = EveRecord(0, MeasurementBasis.Z, outcome)
        assert eve_infer_bit(record, announcement) == guess

    def test_table_matches_encode_rule(self):
        from entangled_otp.protocol import encode_announcement

        for bit in (0, 1):
            for alice in (0, 1):
                record = EveRecord(0, MeasurementBasis.Z, alice)
                assert eve_infer_bit(record, encode_announcement(bit, alice)) == bit

    @pytest.mark.parametrize("record", [EveRecord(0), EveRecord(0, MeasurementBasis.X, 1)])
    def test_needs_z_record(self, record):
        with pytest.raises(ValueError):
            eve_infer_bit(record, Announcement.YES)

    def test_accuracy_needs_guesses(self):
        class Empty:
            sent_bits: list = []
            eve_guesses: list = []

        with pytest.raises(ValueError):
            eve_accuracy(Empty())


class TestEveAccuracy:
    def test_z_intercept_reads_every_bit(self):
        stats = run_session(RunConfig(random_message(2000, 1), 0.0, InterceptResend(), seed=11)).stats
        assert stats.eve_fallback_guesses == 0
        assert eve_accuracy(stats) == 1.0

    def test_no_attack_is_coin_flip(self):
        n = 10_000
        stats = run_session(RunConfig(random_message(n, 2), 0.0, NoAttack(), seed=12)).stats
        assert stats.eve_fallback_guesses == n
        assert within_3_sigma(round(eve_accuracy(stats) * n), n, 0.5)

    def test_x_intercept_is_coin_flip(self):
        n = 10_000
        stats = run_session(RunConfig(random_message(n, 3), 0.0, InterceptResend(BasisPolicy.ALWAYS_X), seed=13)).stats
        assert within_3_sigma(round(eve_accuracy(stats) * n), n, 0.5)
