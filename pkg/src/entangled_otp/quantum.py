"""Exact small-dimension quantum states, channels and measurements.

Qubit 0 is always the most significant bit of a basis index, so for the
two-qubit states used throughout the package the travel qubit A is qubit 0
and Bob's home qubit B is qubit 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-9
EIG_CUTOFF = 1e-12
MAX_QUBITS = 3

SQRT_HALF = 1 / np.sqrt(2)


class InvalidStateError(ValueError):
    """Raised when an array does not describe a valid quantum state."""


class InvalidChannelError(ValueError):
    """Raised when a Kraus list is malformed or not trace preserving."""


def _n_qubits_for(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim or n > MAX_QUBITS:
        raise InvalidStateError(f"dimension {dim} is not 2**n for 1 <= n <= {MAX_QUBITS}")
    return n


class StateVector:
    """A normalized pure state of 1 to 3 qubits."""

    __slots__ = ("amplitudes", "n_qubits")

    def __init__(self, amplitudes: Iterable[complex]):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        self.n_qubits = _n_qubits_for(amps.size)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL:
            raise InvalidStateError(f"state vector has norm {norm:.12g}, expected 1")
        amps.flags.writeable = False
        self.amplitudes = amps

    def __repr__(self) -> str:
        return f"StateVector({np.array2string(self.amplitudes, precision=4)})"

    def __matmul__(self, other: StateVector) -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def kron(self, other: StateVector) -> StateVector:
        return StateVector(np.kron(self.amplitudes, other.amplitudes))


class DensityMatrix:
    """A density operator on 1 to 3 qubits.

    Construction validates hermiticity, unit trace and positivity at
    ``ATOL``. Internal code that already guarantees those properties passes
    ``check=False`` to skip the eigendecomposition.
    """

    __slots__ = ("entries", "n_qubits")

    def __init__(self, entries, *, check: bool = True):
        rho = np.array(entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
        self.n_qubits = _n_qubits_for(rho.shape[0])
        if check:
            _check_density(rho)
        rho.flags.writeable = False
        self.entries = rho

    @classmethod
    def _wrap(cls, rho: np.ndarray, n_qubits: int) -> DensityMatrix:
        # hot-path constructor: no copy, no validation
        obj = object.__new__(cls)
        obj.entries = rho
        obj.n_qubits = n_qubits
        return obj

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})\n{np.array2string(self.entries, precision=4)}"

    def allclose(self, other: DensityMatrix | np.ndarray, atol: float = ATOL) -> bool:
        other_entries = other.entries if isinstance(other, DensityMatrix) else np.asarray(other)
        return self.entries.shape == other_entries.shape and bool(
            np.allclose(self.entries, other_entries, atol=atol, rtol=0)
        )

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(_hermitize(self.entries))

    def validate(self) -> None:
        _check_density(self.entries)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> DensityMatrix:
        dim = 2**n_qubits
        return cls(np.eye(dim) / dim, check=False)


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _check_density(rho: np.ndarray) -> None:
    if not np.allclose(rho, rho.conj().T, atol=ATOL, rtol=0):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > ATOL:
        raise InvalidStateError(f"density matrix has trace {tr.real:.12g}, expected 1")
    smallest = np.linalg.eigvalsh(_hermitize(rho))[0]
    if smallest < -ATOL:
        raise InvalidStateError(f"density matrix has negative eigenvalue {smallest:.3e}")


class BellKind(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


_BELL_AMPLITUDES = {
    BellKind.PHI_PLUS: (SQRT_HALF, 0, 0, SQRT_HALF),
    BellKind.PHI_MINUS: (SQRT_HALF, 0, 0, -SQRT_HALF),
    BellKind.PSI_PLUS: (0, SQRT_HALF, SQRT_HALF, 0),
    BellKind.PSI_MINUS: (0, SQRT_HALF, -SQRT_HALF, 0),
}


def bell_state(kind: BellKind) -> StateVector:
    """Return one of the four Bell states over ordering (A, B), A most significant."""
    return StateVector(_BELL_AMPLITUDES[kind])


def singlet() -> StateVector:
    return bell_state(BellKind.PSI_MINUS)


class MeasurementBasis(enum.Enum):
    Z = "Z"
    X = "X"

    @property
    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Basis kets for outcome 0 and outcome 1."""
        if self is MeasurementBasis.Z:
            return np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
        return (
            np.array([SQRT_HALF, SQRT_HALF], dtype=complex),
            np.array([SQRT_HALF, -SQRT_HALF], dtype=complex),
        )

    @property
    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.outer(v, v.conj()) for v in self.vectors)  # type: ignore[return-value]


KET_0, KET_1 = (StateVector(v) for v in MeasurementBasis.Z.vectors)
KET_PLUS, KET_MINUS = (StateVector(v) for v in MeasurementBasis.X.vectors)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A CPTP map given by its Kraus operators.

    ``operators`` are square matrices of dimension 2 (a single-qubit channel
    that is identity-padded onto the target qubit) or 4 (acting on a whole
    two-qubit state).
    """

    operators: tuple[np.ndarray, ...]
    label: str = "channel"

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.operators)
        if not ops:
            raise InvalidChannelError("a Kraus channel needs at least one operator")
        dim = None
        for i, k in enumerate(ops):
            if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] not in (2, 4):
                raise InvalidChannelError(
                    f"Kraus operator {i} has shape {k.shape}; expected 2x2 or 4x4"
                )
            if dim is None:
                dim = k.shape[0]
            elif k.shape[0] != dim:
                raise InvalidChannelError(
                    f"Kraus operator {i} has dimension {k.shape[0]}, operator 0 has {dim}"
                )
        completeness = sum(k.conj().T @ k for k in ops)
        deviation = np.max(np.abs(completeness - np.eye(dim)))
        if deviation > ATOL:
            raise InvalidChannelError(
                f"Kraus operators of {self.label!r} violate completeness "
                f"(max |sum K^dag K - I| = {deviation:.3e})"
            )
        for k in ops:
            k.flags.writeable = False
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @classmethod
    def identity(cls, dim: int = 2) -> KrausChannel:
        return cls((np.eye(dim),), label="identity")

    @classmethod
    def from_isometry(cls, unitary: np.ndarray, ancilla: Sequence[complex], label: str = "dilation") -> KrausChannel:
        """Kraus form of ``rho -> tr_E[U (rho (x) |e><e|) U^dag]``.

        ``unitary`` acts on system (x) ancilla with the system as the more
        significant factor; ``ancilla`` is the pure initial ancilla state.
        """
        e = np.asarray(ancilla, dtype=complex)
        m = e.size
        u = np.asarray(unitary, dtype=complex)
        d = u.shape[0] // m
        blocks = u.reshape(d, m, d, m)
        ops = [blocks[:, k, :, :] @ e for k in range(m)]
        return cls(tuple(ops), label=label)


def density_from_pure(psi: StateVector) -> DensityMatrix:
    if not isinstance(psi, StateVector):
        psi = StateVector(psi)
    amps = psi.amplitudes
    return DensityMatrix(np.outer(amps, amps.conj()), check=False)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.kron(a.entries, b.entries), check=False)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the qubits in ``keep`` (returned in ascending order)."""
    n = rho.n_qubits
    keep = sorted(set(keep))
    if not keep or any(not 0 <= q < n for q in keep):
        raise ValueError(f"keep must be a nonempty subset of qubits 0..{n - 1}, got {keep}")
    t = rho.entries.reshape((2,) * (2 * n))
    traced = [q for q in range(n) if q not in keep]
    # Trace the highest qubit first so lower axis numbers stay valid.
    for q in reversed(traced):
        cur = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + cur)
    dim = 2 ** len(keep)
    return DensityMatrix(t.reshape(dim, dim), check=False)


@lru_cache(maxsize=None)
def _embed_cached(op_bytes: bytes, n_qubits: int, target: int) -> np.ndarray:
    op = np.frombuffer(op_bytes, dtype=complex).reshape(2, 2)
    return embed(op, n_qubits, target)


def embed(op: np.ndarray, n_qubits: int, target: int) -> np.ndarray:
    """Identity-pad a single-qubit operator onto ``target`` of ``n_qubits``."""
    if not 0 <= target < n_qubits:
        raise ValueError(f"qubit index {target} out of range for {n_qubits} qubits")
    left = np.eye(2**target)
    right = np.eye(2 ** (n_qubits - target - 1))
    return np.kron(np.kron(left, op), right)


def _channel_ops(ch: KrausChannel, n_qubits: int, target: int | None) -> list[np.ndarray]:
    if ch.dim == 2:
        if target is None:
            if n_qubits != 1:
                raise ValueError("a single-qubit channel needs a target qubit")
            target = 0
        return [_embed_cached(k.tobytes(), n_qubits, target) for k in ch.operators]
    if ch.dim != 2**n_qubits:
        raise ValueError(f"{ch.dim}x{ch.dim} channel cannot act on {n_qubits} qubits")
    if target not in (None, 0):
        raise ValueError("full-dimension channels act on the whole state; target must be None")
    return list(ch.operators)


def apply_channel(ch: KrausChannel, rho: DensityMatrix, target: int | None = None) -> DensityMatrix:
    """rho -> sum_k K_k rho K_k^dag, with 2x2 operators padded onto ``target``."""
    if not isinstance(ch, KrausChannel):
        ch = KrausChannel(tuple(ch))
    r = rho.entries
    out = sum(k @ r @ k.conj().T for k in _channel_ops(ch, rho.n_qubits, target))
    return DensityMatrix(_hermitize(out), check=False)


_PROJECTORS: dict[tuple[int, int, MeasurementBasis], tuple[np.ndarray, np.ndarray]] = {}


def _projectors(n_qubits: int, qubit: int, basis: MeasurementBasis) -> tuple[np.ndarray, np.ndarray]:
    key = (n_qubits, qubit, basis)
    pair = _PROJECTORS.get(key)
    if pair is None:
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"qubit index {qubit} out of range for {n_qubits} qubits")
        pair = tuple(embed(p, n_qubits, qubit) for p in basis.projectors)
        for p in pair:
            p.flags.writeable = False
        _PROJECTORS[key] = pair
    return pair


def outcome_probabilities(rho: DensityMatrix, qubit: int, basis: MeasurementBasis) -> tuple[float, float]:
    """Born probabilities of outcomes 0 and 1 for a single-qubit measurement."""
    proj0, proj1 = _projectors(rho.n_qubits, qubit, basis)
    r = rho.entries
    return float(np.vdot(proj0, r).real), float(np.vdot(proj1, r).real)


def measure_qubit(
    rho: DensityMatrix, qubit: int, basis: MeasurementBasis, rng: np.random.Generator
) -> tuple[int, DensityMatrix, float]:
    """Projectively measure one qubit; draws exactly one uniform from ``rng``.

    Outcome 0 corresponds to |0> in Z and |+> in X.
    """
    proj0, proj1 = _projectors(rho.n_qubits, qubit, basis)
    r = rho.entries
    p0 = np.vdot(proj0, r).real
    p1 = np.vdot(proj1, r).real
    if p0 < EIG_CUTOFF and p1 < EIG_CUTOFF:
        raise InvalidStateError("both measurement outcomes have vanishing probability")
    if rng.random() * (p0 + p1) < p0:
        outcome, prob, proj = 0, p0, proj0
    else:
        outcome, prob, proj = 1, p1, proj1
    post = proj @ r @ proj
    post /= prob
    return outcome, DensityMatrix._wrap(post, rho.n_qubits), float(prob)


def joint_outcome_probabilities(
    rho: DensityMatrix, basis_a: MeasurementBasis, basis_b: MeasurementBasis
) -> np.ndarray:
    """2x2 array P[a, b] of measuring qubit 0 in ``basis_a`` and qubit 1 in ``basis_b``."""
    if rho.n_qubits != 2:
        raise ValueError("joint outcome probabilities are defined for two-qubit states")
    probs = np.empty((2, 2))
    for a in (0, 1):
        for b in (0, 1):
            proj = np.kron(basis_a.projectors[a], basis_b.projectors[b])
            probs[a, b] = np.vdot(proj, rho.entries).real
    return probs


def fidelity_pure(psi: StateVector, rho: DensityMatrix) -> float:
    """F = sqrt(<psi|rho|psi>) for a pure reference state."""
    if psi.amplitudes.size != rho.dim:
        raise ValueError(f"dimension mismatch: |psi> has {psi.amplitudes.size}, rho has {rho.dim}")
    overlap = np.vdot(psi.amplitudes, rho.entries @ psi.amplitudes).real
    return float(np.sqrt(min(max(overlap, 0.0), 1.0)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits, with 0 log 0 = 0 below ``EIG_CUTOFF``."""
    lam = np.linalg.eigvalsh(_hermitize(rho.entries))
    lam = lam[lam > EIG_CUTOFF]
    s = float(-np.sum(lam * np.log2(lam)))
    return 0.0 if s < EIG_CUTOFF else s


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_channel(rng: np.random.Generator, dim: int = 2, n_kraus: int | None = None) -> KrausChannel:
    """Random CPTP map from a Haar unitary on system (x) ancilla, ancilla traced out."""
    if n_kraus is None:
        n_kraus = int(rng.integers(1, dim * dim + 1))
    u = haar_unitary(dim * n_kraus, rng)
    ancilla = np.zeros(n_kraus, dtype=complex)
    ancilla[0] = 1
    return KrausChannel.from_isometry(u, ancilla, label=f"random-{n_kraus}")
