"""Command-line entry point: ``entangled-otp {run, attack-eval, tradeoff}``.

Exit status is 0 on success, 2 for configuration or validation errors and
3 for I/O errors. A session aborted by detection still exits 0.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .config import attack_to_dict, parse_attack, parse_bits, parse_run_config, read_json
from .protocol import ConfigError, SessionStats, run_session, write_trace_csv
from .security import (
    BB84_EFFICIENCY_INPUT,
    SINGLET_OTP_EFFICIENCY_INPUT,
    efficiency,
    estimate_detection,
    gamma_of,
    holevo_check,
    shared_state_after,
    tradeoff_curve,
    write_tradeoff_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

SIG_DIGITS = 12


def fmt_number(x: float) -> str:
    return format(x, f".{SIG_DIGITS}g")


def _rounded(value: Any) -> Any:
    """Round every float in a JSON-ready structure to 12 significant digits."""
    if isinstance(value, float):
        return float(fmt_number(value))
    if isinstance(value, dict):
        return {k: _rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(v) for v in value]
    return value


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_rounded(payload), indent=2) + "\n")


def _bits(bits: Optional[Sequence[int]]) -> Optional[str]:
    return None if bits is None else "".join(str(b) for b in bits)


def stats_payload(stats: SessionStats, config) -> dict:
    return {
        "attack": attack_to_dict(config.attack),
        "seed": config.seed,
        "control_probability": config.control_probability,
        "max_rounds": config.max_rounds,
        "abort_on_detection": config.abort_on_detection,
        "rounds_total": stats.rounds_total,
        "message_rounds": stats.message_rounds,
        "control_rounds": stats.control_rounds,
        "detections": stats.detections,
        "detection_frequency": stats.detection_frequency,
        "aborted": stats.aborted,
        "sent_bits": _bits(stats.sent_bits),
        "decoded_bits": _bits(stats.decoded_bits),
        "bit_error_count": stats.bit_error_count,
        "eve_guesses": _bits(stats.eve_guesses),
        "eve_accuracy": stats.eve_accuracy,
        "eve_fallback_guesses": stats.eve_fallback_guesses,
    }


def cmd_run(args: argparse.Namespace) -> int:
    raw = read_json(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.c is not None:
        raw["control_probability"] = args.c
    if args.message is not None:
        parse_bits(args.message)
        raw["message"] = args.message
    config = parse_run_config(raw)
    result = run_session(config)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trace.csv", "w", newline="") as fh:
        write_trace_csv(result.rounds, fh)
    stats = result.stats
    _write_json(out / "stats.json", stats_payload(stats, config))

    freq = stats.detection_frequency
    print(
        f"rounds={stats.rounds_total} message={stats.message_rounds} control={stats.control_rounds} "
        f"detections={stats.detections} detection_frequency={'n/a' if freq is None else fmt_number(freq)} "
        f"bit_errors={stats.bit_error_count} aborted={str(stats.aborted).lower()}"
    )
    return EXIT_OK


def cmd_attack_eval(args: argparse.Namespace) -> int:
    raw = read_json(args.config)
    attack = parse_attack(raw.get("attack"))
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    if args.trials < 1:
        raise ConfigError("--trials must be positive")

    rho = shared_state_after(attack)
    report = gamma_of(rho)
    check = holevo_check(rho, report.gamma)
    estimate = estimate_detection(attack, args.trials, seed=seed)
    payload = {"attack": attack_to_dict(attack), **report.as_dict()}
    payload["state_entropy_bits"] = check.state_entropy
    payload["entropy_cap_satisfied"] = check.satisfied
    payload["monte_carlo"] = estimate.as_dict()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "gamma_report.json", payload)
    print(
        f"gamma={fmt_number(report.gamma)} d_exact={fmt_number(report.detection_exact)} "
        f"d_bound={fmt_number(report.detection_bound)} entropy_cap={fmt_number(report.entropy_cap)} "
        f"d_mc={fmt_number(estimate.frequency)}+/-{fmt_number(estimate.stderr)}"
    )
    return EXIT_OK


def tradeoff_grid(gamma_min: float, gamma_max: float, steps: int) -> np.ndarray:
    if not 0.0 <= gamma_min <= gamma_max <= 1.0:
        raise ConfigError(f"need 0 <= gamma-min <= gamma-max <= 1, got {gamma_min}, {gamma_max}")
    if steps < 1:
        raise ConfigError("--steps must be at least 1")
    if steps == 1 and gamma_min != gamma_max:
        raise ConfigError("a single step needs gamma-min == gamma-max")
    return np.linspace(gamma_min, gamma_max, steps)


def efficiency_block() -> dict:
    ours = efficiency(SINGLET_OTP_EFFICIENCY_INPUT)
    bb84 = efficiency(BB84_EFFICIENCY_INPUT)
    return {
        "singlet_otp": {**dataclasses.asdict(SINGLET_OTP_EFFICIENCY_INPUT), "efficiency": ours},
        "bb84": {**dataclasses.asdict(BB84_EFFICIENCY_INPUT), "efficiency": bb84},
        "ratio": ours / bb84,
    }


def cmd_tradeoff(args: argparse.Namespace) -> int:
    points = tradeoff_curve(tradeoff_grid(args.gamma_min, args.gamma_max, args.steps))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "tradeoff.csv", "w", newline="") as fh:
        write_tradeoff_csv(points, fh, fmt=fmt_number)
    block = efficiency_block()
    _write_json(out / "efficiency.json", block)
    print(
        f"points={len(points)} efficiency singlet_otp={fmt_number(block['singlet_otp']['efficiency'])} "
        f"bb84={fmt_number(block['bb84']['efficiency'])} ratio={fmt_number(block['ratio'])}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entangled-otp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one protocol session")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--c", type=float, help="override control_probability")
    run.add_argument("--message", help="override the message bit string")
    run.add_argument("--out", default=".")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("attack-eval", help="exact and Monte-Carlo security figures for an attack")
    ev.add_argument("--config", required=True)
    ev.add_argument("--trials", type=int, default=10_000)
    ev.add_argument("--out", default=".")
    ev.set_defaults(func=cmd_attack_eval)

    tr = sub.add_parser("tradeoff", help="detection bound and entropy cap over a gamma grid")
    tr.add_argument("--gamma-min", type=float, required=True)
    tr.add_argument("--gamma-max", type=float, required=True)
    tr.add_argument("--steps", type=int, required=True)
    tr.add_argument("--out", default=".")
    tr.set_defaults(func=cmd_tradeoff)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
