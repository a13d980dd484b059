"""Command-line front end.

Subcommands: ``resolution`` (optimal-resolution curves as CSV), ``detect``
(run the decoder on sequence files), ``simulate`` (Monte Carlo sweeps as
CSV), ``divergence`` (direct divergence queries).  Every subcommand writes a
RunManifest next to its output so a run can be replayed and checked
byte-for-byte.

Exit codes: 0 success, 2 input error, 3 configuration error, 4 internal
assertion failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .detector import detect_report
from .divergence import chi2, gjs, kl, sym_chi2
from .errors import ConfigError, InputError
from .model import (
    CategoricalDistribution,
    ProblemConfig,
    ThresholdMode,
    load_distribution,
    load_sequence,
)
from .resolution import RegimeQuery, optimal_resolution_ld, optimal_resolution_md
from .simulator import TrialSpec, phase_transition_sweep

OUTPUT_DIR_ENV = "TYPECPD_OUTPUT_DIR"

_THRESHOLD_MODES = {
    "raw": ThresholdMode.RAW,
    "ld": ThresholdMode.LARGE_DEV_ACHIEVABILITY,
    "md": ThresholdMode.MODERATE_DEV,
}


@dataclass
class RunManifest:
    """Record of one CLI run: command, parameters, and output checksums."""

    command: str
    parameters: dict
    seed: int | None
    artifact_version: str
    outputs: dict

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    def write_next_to(self, output_path: Path) -> Path:
        manifest_path = output_path.with_name(output_path.name + ".manifest.json")
        manifest_path.write_text(self.to_json())
        return manifest_path


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _fmt(value: float) -> str:
    """CSV float format: 6 significant digits."""
    return format(value, ".6g")


def _parse_distribution(text: str) -> CategoricalDistribution:
    if text.startswith("bern:"):
        try:
            p = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"bad bernoulli shorthand {text!r}") from exc
        return CategoricalDistribution.bernoulli(p)
    return load_distribution(text)


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"{flag}: expected comma-separated floats, got {text!r}") from exc
    if not values:
        raise InputError(f"{flag}: empty list")
    return values


def _output_path(args: argparse.Namespace, default_name: str) -> Path:
    if args.output is not None:
        path = Path(args.output)
    else:
        path = Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _emit(
    command: str,
    parameters: dict,
    seed: int | None,
    output_path: Path,
    payload: str,
) -> None:
    data = payload.encode()
    output_path.write_bytes(data)
    manifest = RunManifest(
        command=command,
        parameters=parameters,
        seed=seed,
        artifact_version=__version__,
        outputs={output_path.name: _sha256(data)},
    )
    manifest.write_next_to(output_path)


def _csv(header: list[str], rows: list[list[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def cmd_resolution(args: argparse.Namespace) -> int:
    p1 = _parse_distribution(args.p1)
    p2 = _parse_distribution(args.p2)
    grid = sorted(_parse_float_list(args.lambda_grid, "--lambda-grid"))
    rows = []
    for lam in grid:
        query = RegimeQuery(
            p1=p1, p2=p2, r=args.r, theta=args.theta, lam=lam, t=args.t
        )
        if args.regime == "ld":
            result = optimal_resolution_ld(query)
        else:
            result = optimal_resolution_md(query)
        rows.append(
            [
                _fmt(lam),
                _fmt(result.normalized_resolution),
                result.regime.value,
                "true" if result.saturated else "false",
            ]
        )
    payload = _csv(["lambda", "delta_bar_star", "regime", "saturated"], rows)
    out = _output_path(args, "resolution.csv")
    _emit(
        "resolution",
        {
            "p1": args.p1,
            "p2": args.p2,
            "theta": args.theta,
            "r": args.r,
            "regime": args.regime,
            "t": args.t,
            "lambda_grid": grid,
        },
        None,
        out,
        payload,
    )
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    x = load_sequence(args.test_file)
    y1 = load_sequence(args.train1_file)
    y2 = load_sequence(args.train2_file)
    if len(y1) != len(y2):
        raise InputError("training sequences must have equal length")
    k = max(x.alphabet_size, y1.alphabet_size, y2.alphabet_size)
    x, y1, y2 = (
        dataclasses.replace(s, alphabet_size=k) for s in (x, y1, y2)
    )
    config = ProblemConfig(
        n=len(x),
        r=len(y1) / len(x),
        theta=args.theta,
        lam=args.lam,
        t=args.t,
        delta=args.delta,
        threshold_mode=_THRESHOLD_MODES[args.threshold_mode],
        seed=0,
    )
    report = detect_report(x, y1, y2, config)
    record = {
        "verdict": "erasure" if report.output.is_erasure else "change_point",
        "index": report.output.index,
        "i_star": report.i_star,
        "min_competing_l": report.min_competing,
        "threshold": report.threshold,
    }
    payload = json.dumps(record, indent=2) + "\n"
    out = _output_path(args, "detect.json")
    _emit(
        "detect",
        {
            "test_file": str(args.test_file),
            "train1_file": str(args.train1_file),
            "train2_file": str(args.train2_file),
            "theta": args.theta,
            "lambda": args.lam,
            "delta": args.delta,
            "threshold_mode": args.threshold_mode,
            "t": args.t,
        },
        None,
        out,
        payload,
    )
    print(payload, end="")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    p1 = _parse_distribution(args.p1)
    p2 = _parse_distribution(args.p2)
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    alpha: float | None
    alpha_grid = None
    if args.alpha == "grid":
        alpha = None
        if args.alpha_grid is not None:
            alpha_grid = tuple(_parse_float_list(args.alpha_grid, "--alpha-grid"))
    else:
        try:
            alpha = float(args.alpha)
        except ValueError as exc:
            raise InputError(
                f"--alpha must be a float or 'grid', got {args.alpha!r}"
            ) from exc
    spec = TrialSpec(
        p1=p1,
        p2=p2,
        n=args.n,
        r=args.r,
        theta=args.theta,
        alpha=alpha,
        trials=args.trials,
        seed=args.seed,
        alpha_grid=alpha_grid,
    )
    config = ProblemConfig(
        n=args.n,
        r=args.r,
        theta=args.theta,
        lam=args.lam,
        t=args.t,
        delta=0,
        threshold_mode=_THRESHOLD_MODES[args.threshold_mode],
        seed=args.seed,
    )
    grid = _parse_float_list(args.delta_bar_grid, "--delta-bar-grid")
    rows_data = phase_transition_sweep(spec, config, grid, workers=args.workers)
    if args.format == "csv":
        rows = [
            [
                _fmt(row.delta_bar),
                str(row.n),
                _fmt(row.lam),
                _fmt(row.undetected_rate),
                _fmt(row.erasure_rate),
                _fmt(row.wilson_halfwidth),
            ]
            for row in rows_data
        ]
        payload = _csv(
            [
                "delta_bar",
                "n",
                "lambda",
                "undetected_rate",
                "erasure_rate",
                "wilson_halfwidth",
            ],
            rows,
        )
        default_name = "simulate.csv"
    else:
        payload = json.dumps(
            [dataclasses.asdict(row) for row in rows_data], indent=2
        ) + "\n"
        default_name = "simulate.json"
    out = _output_path(args, default_name)
    _emit(
        "simulate",
        {
            "p1": args.p1,
            "p2": args.p2,
            "n": args.n,
            "r": args.r,
            "theta": args.theta,
            "alpha": args.alpha,
            "alpha_grid": args.alpha_grid,
            "trials": args.trials,
            "lambda": args.lam,
            "t": args.t,
            "threshold_mode": args.threshold_mode,
            "delta_bar_grid": grid,
            "workers": args.workers,
            "format": args.format,
        },
        args.seed,
        out,
        payload,
    )
    print(f"wrote {len(rows_data)} rows to {out}")
    return 0


def cmd_divergence(args: argparse.Namespace) -> int:
    p1 = _parse_distribution(args.dist1)
    p2 = _parse_distribution(args.dist2)
    lines = []

    def show(name: str, func) -> None:
        try:
            value = func()
            lines.append(f"{name} {value:.6f}" if math.isfinite(value) else f"{name} inf")
        except InputError as exc:
            lines.append(f"{name} error: {exc}")

    show("kl_forward", lambda: kl(p1, p2))
    show("kl_reverse", lambda: kl(p2, p1))
    show("gjs", lambda: gjs(p1, p2, args.a))
    show("chi2_forward", lambda: chi2(p1, p2))
    show("chi2_reverse", lambda: chi2(p2, p1))
    show("sym_chi2", lambda: sym_chi2(p1, p2))
    payload = "\n".join(lines) + "\n"
    out = _output_path(args, "divergence.txt")
    _emit(
        "divergence",
        {"dist1": args.dist1, "dist2": args.dist2, "a": args.a},
        None,
        out,
        payload,
    )
    print(payload, end="")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="typecpd",
        description=(
            "Offline single change-point detection with training sequences: "
            "resolution curves, type-based detection, Monte Carlo simulation, "
            "and divergence queries."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    res = sub.add_parser("resolution", help="optimal-resolution curves as CSV")
    res.add_argument("--p1", required=True, help="distribution file or bern:p")
    res.add_argument("--p2", required=True, help="distribution file or bern:p")
    res.add_argument("--theta", type=float, required=True)
    res.add_argument("--r", type=float, required=True)
    res.add_argument("--regime", choices=["ld", "md"], required=True)
    res.add_argument("--t", type=float, default=0.25)
    res.add_argument("--lambda-grid", required=True, help="comma-separated list")
    res.add_argument("--output", "-o", default=None)
    res.set_defaults(func=cmd_resolution)

    det = sub.add_parser("detect", help="run the decoder on sequence files")
    det.add_argument("--test-file", required=True)
    det.add_argument("--train1-file", required=True)
    det.add_argument("--train2-file", required=True)
    det.add_argument("--theta", type=float, required=True)
    det.add_argument("--lambda", dest="lam", type=float, required=True)
    det.add_argument("--delta", type=int, default=0)
    det.add_argument(
        "--threshold-mode", choices=sorted(_THRESHOLD_MODES), default="raw"
    )
    det.add_argument("--t", type=float, default=0.0)
    det.add_argument("--output", "-o", default=None)
    det.set_defaults(func=cmd_detect)

    sim = sub.add_parser("simulate", help="Monte Carlo sweeps as CSV")
    sim.add_argument("--p1", required=True)
    sim.add_argument("--p2", required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--r", type=float, required=True)
    sim.add_argument("--theta", type=float, required=True)
    sim.add_argument("--alpha", default="0.5", help="change fraction or 'grid'")
    sim.add_argument("--alpha-grid", default=None, help="comma-separated fractions")
    sim.add_argument("--trials", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--lambda", dest="lam", type=float, required=True)
    sim.add_argument(
        "--threshold-mode", choices=sorted(_THRESHOLD_MODES), default="ld"
    )
    sim.add_argument("--t", type=float, default=0.0)
    sim.add_argument("--delta-bar-grid", required=True)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--format", choices=["csv", "json"], default="csv")
    sim.add_argument("--output", "-o", default=None)
    sim.set_defaults(func=cmd_simulate)

    div = sub.add_parser("divergence", help="print divergence values")
    div.add_argument("dist1")
    div.add_argument("dist2")
    div.add_argument("--a", type=float, default=1.0, help="GJS mixing weight")
    div.add_argument("--output", "-o", default=None)
    div.set_defaults(func=cmd_divergence)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return 4


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
