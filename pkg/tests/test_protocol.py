import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from entangled_otp.adversary import InterceptResend, NoAttack
from entangled_otp.protocol import (
    TRACE_COLUMNS,
    Announcement,
    ConfigError,
    Mode,
    RunConfig,
    control_round,
    decode_bit,
    encode_announcement,
    message_round,
    run_session,
    write_trace_csv,
)
from entangled_otp.quantum import BellKind, DensityMatrix, MeasurementBasis, bell_state, density_from_pure


def bell_rho(kind):
    return density_from_pure(bell_state(kind))


def within_3_sigma(hits, n, p):
    return abs(hits / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def decode_table():
    """Build decode(announcement, bob) from the encode rule and bob = 1 - alice."""
    table = {}
    for bit, alice in itertools.product((0, 1), repeat=2):
        table[encode_announcement(bit, alice), 1 - alice] = bit
    return table


class TestAnnouncementRules:
    @pytest.mark.parametrize(
        "bit, outcome, expected",
        [(0, 1, Announcement.YES), (1, 0, Announcement.YES), (0, 0, Announcement.NO), (1, 1, Announcement.NO)],
    )
    def test_encode(self, bit, outcome, expected):
        assert encode_announcement(bit, outcome) is expected

    def test_derived_table_is_consistent(self):
        assert len(decode_table()) == 4

    @pytest.mark.parametrize(
        "announcement, bob, bit", [(Announcement.YES, 0, 0), (Announcement.YES, 1, 1), (Announcement.NO, 1, 0)]
    )
    def test_decode_examples(self, announcement, bob, bit):
        assert decode_table()[announcement, bob] == bit
        assert decode_bit(announcement, bob) == bit

    def test_decode_full_table(self):
        for (announcement, bob), bit in decode_table().items():
            assert decode_bit(announcement, bob) == bit

    @pytest.mark.parametrize("bit, alice", list(itertools.product((0, 1), repeat=2)))
    def test_round_trip(self, bit, alice):
        assert decode_bit(encode_announcement(bit, alice), 1 - alice) == bit

    @pytest.mark.parametrize("bit, alice", list(itertools.product((0, 1), repeat=2)))
    def test_one_time_pad(self, bit, alice):
        assert int(encode_announcement(bit, alice)) == bit ^ alice


class TestMessageRound:
    @pytest.mark.parametrize("bit", [0, 1])
    def test_singlet_decodes(self, bit, singlet_state):
        rng = np.random.default_rng(bit)
        for i in range(200):
            r = message_round(singlet_state, bit, rng, i)
            assert r.decoded_bit == bit
            assert r.announcement is encode_announcement(bit, r.alice_outcome)
            assert r.bob_outcome == 1 - r.alice_outcome
            assert r.mode is Mode.MESSAGE and r.alice_basis is r.bob_basis is MeasurementBasis.Z

    @pytest.mark.parametrize("bit", [0, 1])
    def test_z_intercepted_still_decodes(self, bit, rng):
        rho = DensityMatrix(np.diag([0, 0.5, 0.5, 0]))
        assert all(message_round(rho, bit, rng).decoded_bit == bit for _ in range(200))

    @pytest.mark.parametrize("bit", [0, 1])
    def test_phi_plus_flips(self, bit, rng):
        rho = bell_rho(BellKind.PHI_PLUS)
        assert all(message_round(rho, bit, rng).decoded_bit == 1 - bit for _ in range(200))


class TestControlRound:
    def test_singlet_never_detected(self, singlet_state, rng):
        records = [control_round(singlet_state, rng) for _ in range(2000)]
        assert {r.alice_basis for r in records} == set(MeasurementBasis)
        assert not any(r.detected for r in records)

    def test_phi_plus_always_detected(self, rng):
        rho = bell_rho(BellKind.PHI_PLUS)
        assert all(control_round(rho, rng).detected for _ in range(2000))

    def test_phi_minus_half(self, rng):
        rho = bell_rho(BellKind.PHI_MINUS)
        records = [control_round(rho, rng) for _ in range(20_000)]
        assert all(r.detected == (r.alice_basis is MeasurementBasis.Z) for r in records)
        assert within_3_sigma(sum(r.detected for r in records), len(records), 0.5)

    def test_record_shape(self, singlet_state, rng):
        r = control_round(singlet_state, rng, 9)
        assert r.round_id == 9 and r.mode is Mode.CONTROL
        assert r.alice_basis is r.bob_basis
        assert r.announcement is None and r.decoded_bit is None


class TestRunConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(message=(0, 2)),
            dict(message=(0, 1), control_probability=1.5),
            dict(message=(0, 1), control_probability=-0.1),
            dict(message=(0, 1, 1), max_rounds=2),
            dict(message=(), max_rounds=0),
            dict(message=(0,), seed=-1),
            dict(message=(0,), seed=2**64),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            RunConfig(**kwargs)

    def test_max_rounds_defaults_to_message_length(self):
        assert RunConfig((0, 1, 1)).max_rounds == 3


MESSAGE = tuple(int(c) for c in "10110010")


class TestRunSession:
    def test_noiseless_message(self):
        res = run_session(RunConfig(MESSAGE, 0.0, NoAttack(), seed=99))
        assert tuple(res.stats.decoded_bits) == MESSAGE
        assert res.stats.detections == 0
        assert res.stats.rounds_total == len(res.rounds) == 8

    def test_all_control(self):
        stats = run_session(RunConfig(MESSAGE, 1.0, NoAttack(), seed=1, max_rounds=50)).stats
        assert stats.message_rounds == 0
        assert stats.control_rounds == stats.rounds_total == 50

    def test_empty_message_runs_nothing(self):
        assert run_session(RunConfig((), 0.5, max_rounds=10)).stats.rounds_total == 0

    def test_abort_on_detection(self):
        cfg = RunConfig(MESSAGE * 100, 0.5, InterceptResend(), seed=4, max_rounds=5000, abort_on_detection=True)
        res = run_session(cfg)
        assert res.stats.aborted and res.stats.detections == 1
        assert res.rounds[-1].detected
        assert res.stats.message_rounds < len(cfg.message)

    def test_z_intercept_detection_frequency(self):
        rng = np.random.default_rng(77)
        message = tuple(rng.integers(0, 2, 101_000))
        cfg = RunConfig(message, 0.5, InterceptResend(), seed=77, max_rounds=10**6)
        stats = run_session(cfg).stats
        assert stats.control_rounds >= 100_000
        assert within_3_sigma(stats.detections, stats.control_rounds, 0.25)

    def test_mode_frequency(self):
        n = 100_000
        stats = run_session(RunConfig((0,) * n, 0.3, NoAttack(), seed=5, max_rounds=n)).stats
        assert stats.rounds_total == n
        assert within_3_sigma(stats.control_rounds, n, 0.3)

    def test_deterministic(self):
        cfg = RunConfig(MESSAGE * 20, 0.4, InterceptResend(), seed=2**63 + 5, max_rounds=400)
        a, b = run_session(cfg), run_session(cfg)
        assert a.rounds == b.rounds
        assert a.eve_records == b.eve_records
        assert a.stats == b.stats

    def test_seed_changes_trace(self):
        a = run_session(RunConfig(MESSAGE, 0.5, seed=1, max_rounds=100)).rounds
        b = run_session(RunConfig(MESSAGE, 0.5, seed=2, max_rounds=100)).rounds
        assert a != b

    def test_announcements_look_uniform(self):
        n = 10_000
        res = run_session(RunConfig((0, 1, 1) * (n // 3) + (0,), 0.0, NoAttack(), seed=8))
        yes = sum(int(r.announcement) for r in res.rounds)
        assert sps.chisquare([yes, n - yes]).pvalue > 0.01

    @given(
        seed=st.integers(0, 2**64 - 1),
        c=st.floats(0.0, 0.9),
        message=st.lists(st.integers(0, 1), min_size=1, max_size=64),
    )
    @settings(max_examples=60, deadline=None)
    def test_no_attack_soundness_and_record_invariants(self, seed, c, message):
        res = run_session(RunConfig(tuple(message), c, NoAttack(), seed=seed, max_rounds=40 * len(message)))
        s = res.stats
        assert s.detections == 0 and s.bit_error_count == 0
        assert s.rounds_total == s.message_rounds + s.control_rounds
        assert s.sent_bits == list(message[: s.message_rounds])
        for r in res.rounds:
            if r.mode is Mode.MESSAGE:
                assert r.alice_basis is r.bob_basis is MeasurementBasis.Z
                assert r.announcement is not None and not r.detected
            else:
                assert r.alice_basis is r.bob_basis and r.announcement is None
                assert r.detected == (r.alice_outcome == r.bob_outcome)

    def test_bit_error_count_is_hamming_distance(self):
        from entangled_otp.adversary import GeneralKraus
        from entangled_otp.quantum import KrausChannel

        flip = GeneralKraus(KrausChannel((np.array([[0, 1], [1, 0]]),)))
        s = run_session(RunConfig(MESSAGE, 0.0, flip, seed=3)).stats
        assert s.bit_error_count == sum(a != b for a, b in zip(s.sent_bits, s.decoded_bits)) == len(MESSAGE)


def test_trace_csv_header_and_rows():
    res = run_session(RunConfig(MESSAGE, 0.5, seed=3, max_rounds=40))
    buf = io.StringIO()
    write_trace_csv(res.rounds, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == len(res.rounds) + 1
    modes = {line.split(",")[1] for line in lines[1:]}
    assert modes <= {"message", "control"}
