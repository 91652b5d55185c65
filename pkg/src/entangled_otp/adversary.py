"""Attack models on the travel qubit and Eve's bit inference."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .quantum import (
    DensityMatrix,
    KrausChannel,
    MeasurementBasis,
    apply_channel,
    measure_qubit,
)

TRAVEL_QUBIT = 0

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class BasisPolicy(enum.Enum):
    ALWAYS_Z = "AlwaysZ"
    ALWAYS_X = "AlwaysX"
    RANDOM_ZX = "RandomZX"


@dataclass(frozen=True)
class EveRecord:
    round_id: int
    measured_basis: Optional[MeasurementBasis] = None
    measured_outcome: Optional[int] = None
    guessed_bit: Optional[int] = None


@dataclass(frozen=True)
class NoAttack:
    label = "NoAttack"

    def channel(self) -> KrausChannel:
        return KrausChannel.identity(2)


@dataclass(frozen=True)
class InterceptResend:
    """Eve measures the travel qubit and forwards the collapsed eigenstate."""

    basis_policy: BasisPolicy = BasisPolicy.ALWAYS_Z
    label = "InterceptResend"

    def channel(self) -> KrausChannel:
        """Nonselective (outcome-averaged) form of the attack."""
        if self.basis_policy is BasisPolicy.RANDOM_ZX:
            ops = [p / np.sqrt(2) for b in MeasurementBasis for p in b.projectors]
        else:
            ops = list(self.fixed_basis().projectors)
        return KrausChannel(tuple(ops), label=f"intercept-resend-{self.basis_policy.value}")

    def fixed_basis(self) -> MeasurementBasis:
        return {
            BasisPolicy.ALWAYS_Z: MeasurementBasis.Z,
            BasisPolicy.ALWAYS_X: MeasurementBasis.X,
        }[self.basis_policy]


@dataclass(frozen=True, eq=False)
class GeneralKraus:
    kraus: KrausChannel
    label = "GeneralKraus"

    def __post_init__(self):
        if self.kraus.dim != 2:
            raise ValueError("attacks act on the travel qubit only; Kraus operators must be 2x2")

    def channel(self) -> KrausChannel:
        return self.kraus


@dataclass(frozen=True)
class Depolarizing:
    p: float
    label = "Depolarizing"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"depolarizing probability must lie in [0, 1], got {self.p}")

    def channel(self) -> KrausChannel:
        p = self.p
        ops = (
            np.sqrt(1 - 3 * p / 4) * PAULI_I,
            np.sqrt(p / 4) * PAULI_X,
            np.sqrt(p / 4) * PAULI_Y,
            np.sqrt(p / 4) * PAULI_Z,
        )
        return KrausChannel(ops, label=f"depolarizing-{p:g}")


AttackModel = Union[NoAttack, InterceptResend, GeneralKraus, Depolarizing]


def is_measuring(model: AttackModel) -> bool:
    """True when the attack leaves a per-round measurement record."""
    return isinstance(model, InterceptResend)


def attack_travel_qubit(
    model: AttackModel,
    joint_state: DensityMatrix,
    rng: np.random.Generator,
    round_id: int = 0,
) -> tuple[DensityMatrix, EveRecord]:
    """Apply ``model`` to the travel qubit of a two-qubit state.

    Intercept-resend consumes randomness in this order: one uniform for the
    basis (``RandomZX`` only), then one uniform for Eve's Born sample. The
    other models draw nothing.
    """
    if isinstance(model, NoAttack):
        return joint_state, EveRecord(round_id)
    if isinstance(model, InterceptResend):
        if model.basis_policy is BasisPolicy.RANDOM_ZX:
            basis = MeasurementBasis.Z if rng.random() < 0.5 else MeasurementBasis.X
        else:
            basis = model.fixed_basis()
        outcome, post, _ = measure_qubit(joint_state, TRAVEL_QUBIT, basis, rng)
        return post, EveRecord(round_id, basis, outcome)
    if isinstance(model, (GeneralKraus, Depolarizing)):
        return apply_channel(model.channel(), joint_state, TRAVEL_QUBIT), EveRecord(round_id)
    raise TypeError(f"unknown attack model {model!r}")


def eve_infer_bit(record: EveRecord, announcement) -> int:
    """Eve's guess of the message bit from her Z record and the public yes/no.

    ``announcement`` is an ``Announcement`` (or any value whose ``int`` is 1
    for yes and 0 for no).

    Exact whenever her Z outcome equals Alice's later Z outcome, which holds
    after a Z intercept because the travel qubit was left in that eigenstate.
    """
    if record.measured_outcome is None or record.measured_basis is not MeasurementBasis.Z:
        raise ValueError(f"round {record.round_id}: no Z-basis measurement record to infer from")
    return record.measured_outcome ^ int(announcement)


def eve_accuracy(stats) -> float:
    """Fraction of message rounds where Eve's guess matches the sent bit.

    ``stats`` is any object with ``sent_bits`` and ``eve_guesses`` sequences,
    normally a :class:`~entangled_otp.protocol.SessionStats`.
    """
    guesses = stats.eve_guesses
    if not guesses:
        raise ValueError("no Eve guesses recorded")
    sent = stats.sent_bits
    if len(guesses) != len(sent):
        raise ValueError(f"{len(guesses)} guesses for {len(sent)} sent bits")
    return sum(int(g == b) for g, b in zip(guesses, sent)) / len(guesses)
