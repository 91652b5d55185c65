"""Fidelity, gamma, detection probability and entropy bounds for attacks.

The shared state after an attack is compared against the singlet: its
singlet weight is ``1 - gamma``. A control round detects Eve when Alice and
Bob get equal outcomes in a common random basis, which happens with
probability ``d = p_phi+ + p_phi-/2 + p_psi+/2`` in terms of the Bell-basis
weights, so ``d - gamma/2 = p_phi+/2 >= 0``. Eve's information per message
round is bounded by the entropy of the shared state, itself at most the
entropy of the Bell-diagonal state with weights ``(1-gamma, gamma/3,
gamma/3, gamma/3)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from typing import IO, Iterable, Optional, Sequence

import numpy as np
from scipy import optimize

from .adversary import AttackModel, attack_travel_qubit, is_measuring
from .protocol import control_round
from .quantum import (
    ATOL,
    BellKind,
    DensityMatrix,
    MeasurementBasis,
    apply_channel,
    bell_state,
    density_from_pure,
    fidelity_pure,
    joint_outcome_probabilities,
    singlet,
    von_neumann_entropy,
)

TRADEOFF_COLUMNS = ("gamma", "detection_bound", "entropy_cap_bits")
ENDPOINT_SNAP = 1e-12
BELL_ORDER = (BellKind.PHI_PLUS, BellKind.PHI_MINUS, BellKind.PSI_PLUS, BellKind.PSI_MINUS)


@dataclass(frozen=True)
class GammaReport:
    fidelity: float
    gamma: float
    detection_exact: float
    detection_bound: float
    entropy_cap: float
    bell_diagonal: tuple[float, float, float, float]

    def as_dict(self) -> dict:
        d = asdict(self)
        d["entropy_cap_bits"] = d.pop("entropy_cap")
        d["bell_diagonal"] = dict(zip(("phi_plus", "phi_minus", "psi_plus", "psi_minus"), self.bell_diagonal))
        return d


@dataclass(frozen=True)
class TradeoffPoint:
    gamma: float
    detection_bound: float
    entropy_cap: float


@dataclass(frozen=True)
class EfficiencyInput:
    secret_bits: float
    qubits: float
    classical_bits: float

    def __post_init__(self):
        if min(self.secret_bits, self.qubits, self.classical_bits) < 0:
            raise ValueError("efficiency inputs must be nonnegative")
        if self.qubits + self.classical_bits <= 0:
            raise ValueError("qubits + classical bits must be positive")


BB84_EFFICIENCY_INPUT = EfficiencyInput(0.5, 1, 1)
SINGLET_OTP_EFFICIENCY_INPUT = EfficiencyInput(1, 1, 1)


def shared_state_after(attack: AttackModel) -> DensityMatrix:
    """Outcome-averaged two-qubit state after ``attack`` hits a fresh singlet."""
    return apply_channel(attack.channel(), density_from_pure(singlet()), 0)


def bell_diagonal(rho: DensityMatrix) -> tuple[float, float, float, float]:
    """Weights <B|rho|B> in the order phi+, phi-, psi+, psi-."""
    _require_two_qubits(rho)
    weights = []
    for kind in BELL_ORDER:
        v = bell_state(kind).amplitudes
        weights.append(float(np.vdot(v, rho.entries @ v).real))
    return tuple(weights)  # type: ignore[return-value]


def coincidence_probability(rho: DensityMatrix, basis: MeasurementBasis) -> float:
    """P(Alice and Bob agree) when both measure ``basis``, from the basis projectors."""
    probs = joint_outcome_probabilities(rho, basis, basis)
    return float(probs[0, 0] + probs[1, 1])


def detection_probability_exact(rho: DensityMatrix) -> float:
    _require_two_qubits(rho)
    return 0.5 * (coincidence_probability(rho, MeasurementBasis.Z) + coincidence_probability(rho, MeasurementBasis.X))


def detection_from_bell_diagonal(weights: Sequence[float]) -> float:
    phi_p, phi_m, psi_p, _ = weights
    return phi_p + 0.5 * phi_m + 0.5 * psi_p


def gamma_of(rho: DensityMatrix) -> GammaReport:
    weights = bell_diagonal(rho)
    # gamma from the singlet weight directly; squaring F would add round-off
    gamma = _snap_unit(1.0 - weights[3])
    return GammaReport(
        fidelity=fidelity_pure(singlet(), rho),
        gamma=gamma,
        detection_exact=detection_probability_exact(rho),
        detection_bound=gamma / 2,
        entropy_cap=entropy_cap(gamma),
        bell_diagonal=weights,
    )


def entropy_cap(gamma: float) -> float:
    """Entropy in bits of diag(1-gamma, gamma/3, gamma/3, gamma/3)."""
    if not -ENDPOINT_SNAP <= gamma <= 1 + ENDPOINT_SNAP:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if gamma <= ENDPOINT_SNAP:
        return 0.0
    if gamma >= 1 - ENDPOINT_SNAP:
        return math.log2(3)
    return -(1 - gamma) * math.log2(1 - gamma) - gamma * math.log2(gamma / 3)


def gamma_at_entropy(bits: float, lo: float = 0.0, hi: float = 0.75) -> float:
    """Smallest gamma in [lo, hi] with entropy_cap(gamma) == bits, by bisection.

    entropy_cap is increasing on [0, 3/4], so the default bracket has a
    unique root for 0 <= bits <= 2.
    """
    return optimize.bisect(lambda g: entropy_cap(g) - bits, lo, hi, xtol=1e-14)


def tradeoff_curve(grid: Iterable[float]) -> list[TradeoffPoint]:
    points = []
    for g in grid:
        g = float(g)
        if not 0.0 <= g <= 1.0:
            raise ValueError(f"gamma grid value {g} outside [0, 1]")
        points.append(TradeoffPoint(g, g / 2, entropy_cap(g)))
    return points


def efficiency(e: EfficiencyInput) -> float:
    """Secret bits per transmitted qubit plus announced classical bit."""
    return e.secret_bits / (e.qubits + e.classical_bits)


@dataclass(frozen=True)
class HolevoCheck:
    state_entropy: float
    cap: float
    satisfied: bool


def holevo_check(rho: DensityMatrix, gamma: Optional[float] = None) -> HolevoCheck:
    """Compare S(rho) with entropy_cap(gamma); ``gamma`` must match rho's own."""
    actual = gamma_of(rho).gamma
    if gamma is None:
        gamma = actual
    elif abs(gamma - actual) >= ATOL:
        raise ValueError(f"gamma {gamma} inconsistent with the state (gamma = {actual})")
    s = von_neumann_entropy(rho)
    cap = entropy_cap(gamma)
    return HolevoCheck(s, cap, s <= cap + ATOL)


@dataclass(frozen=True)
class DetectionEstimate:
    rounds: int
    detections: int
    frequency: float
    stderr: float
    ci_low: float
    ci_high: float
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)


def estimate_detection(
    attack: AttackModel,
    rounds: int,
    seed: int = 0,
    chunk_size: int = 10_000,
    z: float = 3.0,
) -> DetectionEstimate:
    """Monte-Carlo detection frequency over ``rounds`` control rounds.

    Rounds run in chunks seeded by ``(seed, chunk_index)`` and are summed in
    chunk order, so the estimate does not depend on how chunks are scheduled.
    The interval is the normal approximation at ``z`` standard errors.
    """
    if rounds < 1:
        raise ValueError("rounds must be positive")
    fresh = density_from_pure(singlet())
    measuring = is_measuring(attack)
    fixed = None if measuring else shared_state_after(attack)
    detections = 0
    for index, start in enumerate(range(0, rounds, chunk_size)):
        rng = np.random.default_rng([seed, index])
        for _ in range(min(chunk_size, rounds - start)):
            state = attack_travel_qubit(attack, fresh, rng)[0] if measuring else fixed
            detections += control_round(state, rng).detected
    freq = detections / rounds
    stderr = math.sqrt(freq * (1 - freq) / rounds)
    return DetectionEstimate(
        rounds, detections, freq, stderr, max(freq - z * stderr, 0.0), min(freq + z * stderr, 1.0), seed
    )


def mutual_information(xs: Sequence[int], ys: Sequence[int]) -> float:
    """Plug-in estimate in bits of I(X; Y) for two binary sequences."""
    if len(xs) != len(ys) or not xs:
        raise ValueError("need two nonempty sequences of equal length")
    joint = np.zeros((2, 2))
    np.add.at(joint, (np.asarray(xs, dtype=int), np.asarray(ys, dtype=int)), 1)
    joint /= joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    return float(np.sum(joint[mask] * np.log2(joint[mask] / (px @ py)[mask])))


def write_tradeoff_csv(points: Sequence[TradeoffPoint], fh: IO[str], fmt=repr) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRADEOFF_COLUMNS)
    for p in points:
        writer.writerow([fmt(p.gamma), fmt(p.detection_bound), fmt(p.entropy_cap)])


def _snap_unit(x: float) -> float:
    if x <= ENDPOINT_SNAP:
        return 0.0
    if x >= 1 - ENDPOINT_SNAP:
        return 1.0
    return x


def _require_two_qubits(rho: DensityMatrix) -> None:
    if rho.n_qubits != 2:
        raise ValueError(f"expected a two-qubit state, got {rho.n_qubits} qubits")
