"""Round-by-round execution of the singlet one-time-pad protocol.

Every round Bob prepares a fresh singlet, sends qubit A through the
(possibly attacked) quantum channel, and Alice either runs a message round
(both parties measure Z, Alice announces yes/no) or, with probability ``c``,
a control round (Alice measures a random basis and announces basis and
result, Bob measures the same basis and checks for coinciding outcomes).

Random draws per round, in order, all from one ``numpy`` generator seeded
with ``RunConfig.seed``:

1. the attack's own draws (see :func:`attack_travel_qubit`);
2. one uniform for the mode (control iff ``u < c``);
3. control rounds: one uniform for the basis (Z iff ``u < 0.5``);
4. one uniform each for Alice's and then Bob's Born sample;
5. message rounds without a usable Z record: one uniform for Eve's
   fallback guess.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import IO, NamedTuple, Optional, Sequence

import numpy as np

from .adversary import (
    AttackModel,
    EveRecord,
    NoAttack,
    attack_travel_qubit,
    eve_accuracy,
    eve_infer_bit,
    is_measuring,
)
from .quantum import DensityMatrix, MeasurementBasis, density_from_pure, measure_qubit, singlet

ALICE = 0
BOB = 1

TRACE_COLUMNS = (
    "round_id",
    "mode",
    "alice_basis",
    "bob_basis",
    "alice_outcome",
    "bob_outcome",
    "announcement",
    "decoded_bit",
    "detected",
)


class ConfigError(ValueError):
    """Invalid run configuration."""


class Mode(enum.Enum):
    MESSAGE = "message"
    CONTROL = "control"


class Announcement(enum.IntEnum):
    """Alice's public yes/no; as a bit, yes is 1."""

    NO = 0
    YES = 1


def encode_announcement(bit: int, alice_outcome: int) -> Announcement:
    # yes for (0, 1) and (1, 0), no otherwise
    return Announcement(bit ^ alice_outcome)


def decode_bit(announcement: Announcement, bob_outcome: int) -> int:
    return bob_outcome if announcement is Announcement.YES else 1 - bob_outcome


@dataclass(frozen=True)
class RoundRecord:
    round_id: int
    mode: Mode
    alice_basis: MeasurementBasis
    bob_basis: MeasurementBasis
    alice_outcome: int
    bob_outcome: int
    announcement: Optional[Announcement] = None
    decoded_bit: Optional[int] = None
    detected: bool = False

    def csv_row(self) -> list:
        return [
            self.round_id,
            self.mode.value,
            self.alice_basis.value,
            self.bob_basis.value,
            self.alice_outcome,
            self.bob_outcome,
            "" if self.announcement is None else self.announcement.name.lower(),
            "" if self.decoded_bit is None else self.decoded_bit,
            "true" if self.detected else "false",
        ]


@dataclass(frozen=True, eq=False)
class RunConfig:
    message: tuple[int, ...]
    control_probability: float = 0.0
    attack: AttackModel = field(default_factory=NoAttack)
    seed: int = 0
    max_rounds: Optional[int] = None
    abort_on_detection: bool = False

    def __post_init__(self):
        msg = tuple(int(b) for b in self.message)
        if any(b not in (0, 1) for b in msg):
            raise ConfigError("message must contain only bits 0 and 1")
        object.__setattr__(self, "message", msg)
        c = float(self.control_probability)
        if not 0.0 <= c <= 1.0:
            raise ConfigError(f"control_probability must lie in [0, 1], got {c}")
        object.__setattr__(self, "control_probability", c)
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        max_rounds = len(msg) if self.max_rounds is None else int(self.max_rounds)
        if max_rounds < 1 or max_rounds < len(msg):
            raise ConfigError(
                f"max_rounds must be positive and at least the message length ({len(msg)}), got {max_rounds}"
            )
        object.__setattr__(self, "max_rounds", max_rounds)


@dataclass
class SessionStats:
    rounds_total: int = 0
    message_rounds: int = 0
    control_rounds: int = 0
    detections: int = 0
    aborted: bool = False
    sent_bits: list[int] = field(default_factory=list)
    decoded_bits: list[int] = field(default_factory=list)
    bit_error_count: int = 0
    eve_guesses: Optional[list[int]] = field(default_factory=list)
    eve_fallback_guesses: int = 0

    @property
    def detection_frequency(self) -> Optional[float]:
        return self.detections / self.control_rounds if self.control_rounds else None

    @property
    def eve_accuracy(self) -> Optional[float]:
        return eve_accuracy(self) if self.eve_guesses else None


class SessionResult(NamedTuple):
    stats: SessionStats
    rounds: list[RoundRecord]
    eve_records: list[EveRecord]


def message_round(
    shared_state: DensityMatrix, bit: int, rng: np.random.Generator, round_id: int = 0
) -> RoundRecord:
    """Alice measures A in Z, announces, then Bob measures B in Z and decodes."""
    z = MeasurementBasis.Z
    a, post, _ = measure_qubit(shared_state, ALICE, z, rng)
    announcement = encode_announcement(bit, a)
    b, _, _ = measure_qubit(post, BOB, z, rng)
    return RoundRecord(round_id, Mode.MESSAGE, z, z, a, b, announcement, decode_bit(announcement, b))


def control_round(shared_state: DensityMatrix, rng: np.random.Generator, round_id: int = 0) -> RoundRecord:
    basis = MeasurementBasis.Z if rng.random() < 0.5 else MeasurementBasis.X
    a, post, _ = measure_qubit(shared_state, ALICE, basis, rng)
    b, _, _ = measure_qubit(post, BOB, basis, rng)
    return RoundRecord(round_id, Mode.CONTROL, basis, basis, a, b, detected=a == b)


def run_session(config: RunConfig) -> SessionResult:
    """Run rounds until the message is sent, ``max_rounds`` is hit, or an abort."""
    rng = np.random.default_rng(config.seed)
    attack = config.attack
    fresh = density_from_pure(singlet())
    # Nonmeasuring attacks are deterministic channels: one evaluation serves all rounds.
    fixed_state = None if is_measuring(attack) else attack_travel_qubit(attack, fresh, rng)[0]

    stats = SessionStats()
    rounds: list[RoundRecord] = []
    eve_records: list[EveRecord] = []
    message = config.message
    c = config.control_probability

    for round_id in range(config.max_rounds):
        if stats.message_rounds == len(message):
            break
        if fixed_state is None:
            shared, eve = attack_travel_qubit(attack, fresh, rng, round_id)
        else:
            shared, eve = fixed_state, EveRecord(round_id)

        if rng.random() < c:
            record = control_round(shared, rng, round_id)
            stats.control_rounds += 1
            if record.detected:
                stats.detections += 1
        else:
            bit = message[stats.message_rounds]
            record = message_round(shared, bit, rng, round_id)
            stats.message_rounds += 1
            stats.sent_bits.append(bit)
            stats.decoded_bits.append(record.decoded_bit)
            stats.bit_error_count += record.decoded_bit != bit
            if eve.measured_basis is MeasurementBasis.Z:
                guess = eve_infer_bit(eve, record.announcement)
            else:
                guess = int(rng.random() < 0.5)
                stats.eve_fallback_guesses += 1
            eve = EveRecord(round_id, eve.measured_basis, eve.measured_outcome, guess)
            stats.eve_guesses.append(guess)

        rounds.append(record)
        eve_records.append(eve)
        stats.rounds_total += 1
        if record.detected and config.abort_on_detection:
            stats.aborted = True
            break

    return SessionResult(stats, rounds, eve_records)


def write_trace_csv(rounds: Sequence[RoundRecord], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in rounds:
        writer.writerow(r.csv_row())
