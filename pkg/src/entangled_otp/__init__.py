"""Simulator and security analysis for singlet-based one-time-pad direct communication."""

from .adversary import (
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
from .protocol import (
    Announcement,
    ConfigError,
    Mode,
    RoundRecord,
    RunConfig,
    SessionStats,
    control_round,
    decode_bit,
    encode_announcement,
    message_round,
    run_session,
)
from .quantum import (
    BellKind,
    DensityMatrix,
    KrausChannel,
    MeasurementBasis,
    StateVector,
    apply_channel,
    bell_state,
    density_from_pure,
    fidelity_pure,
    measure_qubit,
    partial_trace,
    tensor,
    von_neumann_entropy,
)
from .security import (
    EfficiencyInput,
    GammaReport,
    TradeoffPoint,
    detection_probability_exact,
    efficiency,
    entropy_cap,
    gamma_of,
    holevo_check,
    shared_state_after,
    tradeoff_curve,
)

__version__ = "0.1.0"
