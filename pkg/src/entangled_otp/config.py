"""JSON run-configuration loading.

Example::

    {
      "message": "10110010",
      "control_probability": 0.25,
      "seed": 7,
      "max_rounds": 64,
      "abort_on_detection": false,
      "attack": {"type": "InterceptResend", "basis_policy": "AlwaysZ"}
    }

Attack types are ``NoAttack``, ``InterceptResend`` (``basis_policy`` one of
``AlwaysZ``, ``AlwaysX``, ``RandomZX``), ``Depolarizing`` (``p``) and
``GeneralKraus`` (``kraus``: list of 2x2 matrices, each a list of rows of
``[re, im]`` pairs).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .adversary import AttackModel, BasisPolicy, Depolarizing, GeneralKraus, InterceptResend, NoAttack
from .protocol import ConfigError, RunConfig
from .quantum import InvalidChannelError, KrausChannel

_RUN_KEYS = {"message", "control_probability", "seed", "max_rounds", "abort_on_detection", "attack"}


def read_json(path: str | Path) -> dict:
    """Read a config file. ``OSError`` propagates; bad JSON becomes ``ConfigError``."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return raw


def parse_bits(text: Any, what: str = "message") -> tuple[int, ...]:
    if not isinstance(text, str) or any(ch not in "01" for ch in text):
        raise ConfigError(f"{what} must be a string of 0/1 characters")
    return tuple(int(ch) for ch in text)


def _parse_matrix(raw: Any, index: int) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"attack.kraus[{index}]: not a numeric nested array ({exc})") from exc
    if arr.ndim != 3 or arr.shape[-1] != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError(
            f"attack.kraus[{index}]: expected a square matrix of [re, im] pairs, got array shape {arr.shape}"
        )
    if arr.shape[0] != 2:
        raise ConfigError(f"attack.kraus[{index}]: travel-qubit operators must be 2x2, got {arr.shape[0]}x{arr.shape[0]}")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_attack(raw: Any) -> AttackModel:
    if raw is None:
        return NoAttack()
    if not isinstance(raw, Mapping) or "type" not in raw:
        raise ConfigError("attack must be an object with a 'type' field")
    kind = raw["type"]
    if kind == "NoAttack":
        return NoAttack()
    if kind == "InterceptResend":
        policy = raw.get("basis_policy", "AlwaysZ")
        try:
            return InterceptResend(BasisPolicy(policy))
        except ValueError:
            names = ", ".join(p.value for p in BasisPolicy)
            raise ConfigError(f"attack.basis_policy must be one of {names}, got {policy!r}") from None
    if kind == "Depolarizing":
        p = raw.get("p")
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise ConfigError("attack.p must be a number")
        try:
            return Depolarizing(float(p))
        except ValueError as exc:
            raise ConfigError(f"attack.p: {exc}") from None
    if kind == "GeneralKraus":
        ops = raw.get("kraus")
        if not isinstance(ops, list) or not ops:
            raise ConfigError("attack.kraus must be a nonempty list of matrices")
        matrices = tuple(_parse_matrix(m, i) for i, m in enumerate(ops))
        try:
            return GeneralKraus(KrausChannel(matrices, label=str(raw.get("label", "config"))))
        except InvalidChannelError as exc:
            raise ConfigError(f"attack.kraus: {exc}") from None
    raise ConfigError(f"unknown attack type {kind!r}")


def attack_to_dict(model: AttackModel) -> dict:
    out: dict[str, Any] = {"type": model.label}
    if isinstance(model, InterceptResend):
        out["basis_policy"] = model.basis_policy.value
    elif isinstance(model, Depolarizing):
        out["p"] = model.p
    elif isinstance(model, GeneralKraus):
        out["kraus"] = [[[[z.real, z.imag] for z in row] for row in k] for k in model.kraus.operators]
    return out


def parse_run_config(raw: Mapping[str, Any]) -> RunConfig:
    unknown = set(raw) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")
    if "message" not in raw:
        raise ConfigError("config needs a 'message' field")
    c = raw.get("control_probability", 0.0)
    seed = raw.get("seed", 0)
    max_rounds = raw.get("max_rounds")
    abort = raw.get("abort_on_detection", False)
    if isinstance(c, bool) or not isinstance(c, (int, float)):
        raise ConfigError("control_probability must be a number")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    if max_rounds is not None and (isinstance(max_rounds, bool) or not isinstance(max_rounds, int)):
        raise ConfigError("max_rounds must be an integer")
    if not isinstance(abort, bool):
        raise ConfigError("abort_on_detection must be true or false")
    return RunConfig(
        message=parse_bits(raw["message"]),
        control_probability=c,
        attack=parse_attack(raw.get("attack")),
        seed=seed,
        max_rounds=max_rounds,
        abort_on_detection=abort,
    )


def load_run_config(path: str | Path) -> RunConfig:
    return parse_run_config(read_json(path))
