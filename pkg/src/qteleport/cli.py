"""Command-line harness.

Exit codes: 0 success, 2 configuration error, 3 domain precondition error
(for example x below min_x).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import __version__
from .bellcheck import chsh_value, sample_chsh, singlet_correlation
from .errors import QTeleportError
from .povm import ChannelParams, build_povm, is_psd, min_x
from .protocol import InputState, exact_success_probability, resolve_x, run_teleportation

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN = 0, 2, 3

CONFIG_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ExperimentConfig",
    "type": "object",
    "properties": {
        "channel": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 4, "maxItems": 4},
        "input": {
            "oneOf": [
                {"const": "random"},
                {
                    "type": "array",
                    "minItems": 4,
                    "maxItems": 4,
                    "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                },
            ]
        },
        "x": {"oneOf": [{"const": "auto"}, {"type": "number", "exclusiveMinimum": 0}]},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "output_path": {"type": ["string", "null"]},
        "format": {"enum": ["json", "csv"]},
    },
    "required": ["channel", "input", "x", "trials", "seed", "format"],
    "additionalProperties": False,
}


class ConfigError(QTeleportError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _number(field: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(field, f"must be finite, got {value!r}")
    return float(value)


def _integer(field: str, value: Any, lo: int, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, f"expected an integer, got {value!r}")
    if value < lo or (hi is not None and value > hi):
        raise ConfigError(field, f"{value} out of range")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    channel: tuple
    input: Any  # "random" or a tuple of 4 complex numbers
    x: Any  # "auto" or a float
    trials: int = 1000
    seed: int = 0
    output_path: str | None = None
    format: str = "json"

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config", "expected a JSON object")
        unknown = set(doc) - set(CONFIG_SCHEMA["properties"])
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")

        raw = doc.get("channel", [0.5, 0.5, 0.5, 0.5])
        if not isinstance(raw, (list, tuple)) or len(raw) != 4:
            raise ConfigError("channel", "expected 4 numbers")
        channel = tuple(_number("channel", v) for v in raw)
        try:
            ChannelParams(*channel)
        except QTeleportError as exc:
            raise ConfigError("channel", str(exc)) from None

        raw = doc.get("input", "random")
        if raw == "random":
            inp: Any = "random"
        else:
            if not isinstance(raw, (list, tuple)) or len(raw) != 4:
                raise ConfigError("input", "expected 'random' or 4 [re, im] pairs")
            values = []
            for pair in raw:
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise ConfigError("input", f"expected [re, im], got {pair!r}")
                values.append(complex(_number("input", pair[0]), _number("input", pair[1])))
            inp = tuple(values)
            try:
                InputState(*inp)
            except QTeleportError as exc:
                raise ConfigError("input", str(exc)) from None

        raw = doc.get("x", "auto")
        if raw == "auto":
            x: Any = "auto"
        else:
            x = _number("x", raw)
            if x <= 0:
                raise ConfigError("x", f"must be positive, got {x}")

        fmt = doc.get("format", "json")
        if fmt not in ("json", "csv"):
            raise ConfigError("format", f"expected 'json' or 'csv', got {fmt!r}")
        out = doc.get("output_path")
        if out is not None and not isinstance(out, str):
            raise ConfigError("output_path", "expected a string")
        return cls(
            channel=channel,
            input=inp,
            x=x,
            trials=_integer("trials", doc.get("trials", 1000), 1),
            seed=_integer("seed", doc.get("seed", 0), 0, 2**64 - 1),
            output_path=out,
            format=fmt,
        )

    def to_dict(self) -> dict:
        return {
            "channel": list(self.channel),
            "input": "random" if self.input == "random" else [[z.real, z.imag] for z in self.input],
            "x": self.x,
            "trials": self.trials,
            "seed": self.seed,
            "output_path": self.output_path,
            "format": self.format,
        }

    def channel_params(self) -> ChannelParams:
        return ChannelParams(*self.channel)

    def input_state(self) -> InputState:
        if self.input == "random":
            # separate stream from the trial uniforms, still fixed by the seed
            return InputState.random(np.random.default_rng([1, self.seed]))
        return InputState(*self.input)


# ---------------------------------------------------------------------------
# formatting


def _num(v):
    """15 significant digits; NaN becomes None."""
    if v is None:
        return None
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        return None
    return float(f"{v:.15g}")


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _dump_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (f"{v:.15g}" if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None, quiet: bool) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        if not quiet:
            print(f"wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def _config_from_args(args) -> ExperimentConfig:
    doc: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config", "expected a JSON object")
    if args.channel is not None:
        doc["channel"] = args.channel
    if args.input is not None:
        doc["input"] = _parse_input_tokens(args.input)
    if args.x is not None:
        doc["x"] = "auto" if args.x == "auto" else _parse_float("x", args.x)
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None:
        doc["output_path"] = args.out
    if args.format is not None:
        doc["format"] = args.format
    return ExperimentConfig.from_dict(doc)


def _parse_float(field: str, token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ConfigError(field, f"not a number: {token!r}") from None


def _parse_input_tokens(tokens: list[str]):
    if tokens == ["random"]:
        return "random"
    if len(tokens) != 4:
        raise ConfigError("input", "expected 'random' or four re,im tokens")
    pairs = []
    for tok in tokens:
        parts = tok.split(",")
        if len(parts) not in (1, 2):
            raise ConfigError("input", f"bad complex token {tok!r}")
        re_ = _parse_float("input", parts[0])
        im = _parse_float("input", parts[1]) if len(parts) == 2 else 0.0
        pairs.append([re_, im])
    return pairs


def teleport_document(cfg: ExperimentConfig) -> dict:
    channel = cfg.channel_params()
    inp = cfg.input_state()
    stats = run_teleportation(inp, channel, cfg.x, cfg.trials, cfg.seed)
    return {
        "schema_version": SCHEMA_VERSION,
        "artifact": "qteleport",
        "version": __version__,
        "config": cfg.to_dict(),
        "input_state": [[_num(z.real), _num(z.imag)] for z in inp.coefficients],
        "result": {
            "trials": stats.trials,
            "conclusive_rate": _num(stats.conclusive_rate),
            "mean_conclusive_fidelity": _num(stats.mean_conclusive_fidelity),
            "exact_success_probability": _num(stats.exact_success_probability),
            "x_used": _num(stats.x_used),
            "seed": stats.seed,
        },
    }


def cmd_teleport(args) -> int:
    cfg = _config_from_args(args)
    doc = teleport_document(cfg)
    if cfg.format == "csv":
        res = doc["result"]
        text = _dump_csv(["version", *res], [[doc["version"], *res.values()]])
    else:
        text = _dump_json(doc)
    _emit(text, cfg.output_path, args.quiet)
    return EXIT_OK


def min_x_report(channel: ChannelParams) -> dict:
    x = min_x(channel)
    povm = build_povm(channel, x)
    return {"min_x": x, "min_eigenvalues": [is_psd(e)[1] for e in povm.elements]}


def cmd_min_x(args) -> int:
    try:
        channel = ChannelParams(*args.coefficients)
    except QTeleportError as exc:
        raise ConfigError("channel", str(exc)) from None
    rep = min_x_report(channel)
    if args.format == "json":
        text = _dump_json(
            {
                "schema_version": SCHEMA_VERSION,
                "channel": list(args.coefficients),
                "min_x": _num(rep["min_x"]),
                "min_eigenvalues": [_num(v) for v in rep["min_eigenvalues"]],
            }
        )
    else:
        lines = [f"min_x = {rep['min_x']:.12f}"]
        lines += [f"min_eig(P{i}) = {v: .6e}" for i, v in enumerate(rep["min_eigenvalues"], start=1)]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out, args.quiet)
    return EXIT_OK


SCAN_HEADER = ["param", "exact_success_prob", "min_x", "conclusive_rate", "mean_fidelity"]


def scan_rows(cfg: ExperimentConfig, param: str, start: float, stop: float, steps: int) -> list[list]:
    if param not in ("x", "skew"):
        raise ConfigError("param", f"expected 'x' or 'skew', got {param!r}")
    if steps < 1:
        raise ConfigError("steps", f"must be >= 1, got {steps}")
    inp = cfg.input_state()
    rows = []
    for value in np.linspace(start, stop, steps):
        value = float(value)
        if param == "x":
            channel, x = cfg.channel_params(), value
        else:
            try:
                channel = ChannelParams.skew(value)
            except QTeleportError as exc:
                raise ConfigError("start/stop", f"skew t={value!r} leaves (0, pi/2): {exc}") from None
            x = resolve_x(channel, cfg.x)
        stats = run_teleportation(inp, channel, x, cfg.trials, cfg.seed)
        rows.append([value, stats.exact_success_probability, min_x(channel), stats.conclusive_rate, stats.mean_conclusive_fidelity])
    return rows


def cmd_scan(args) -> int:
    if args.format is None:
        args.format = "csv"
    cfg = _config_from_args(args)
    rows = scan_rows(cfg, args.param, args.start, args.stop, args.steps)
    if cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "config": cfg.to_dict(),
            "scan": {"param": args.param, "start": args.start, "stop": args.stop, "steps": args.steps},
            "rows": [dict(zip(SCAN_HEADER, map(_num, r))) for r in rows],
        }
        text = _dump_json(doc)
    else:
        text = _dump_csv(SCAN_HEADER, rows)
    _emit(text, cfg.output_path, args.quiet)
    return EXIT_OK


def chsh_report(angles, trials: int | None = None, seed: int = 0) -> dict:
    a1, a2, b1, b2 = angles
    corr = {
        "E(a1,b1)": singlet_correlation(a1, b1),
        "E(a1,b2)": singlet_correlation(a1, b2),
        "E(a2,b1)": singlet_correlation(a2, b1),
        "E(a2,b2)": singlet_correlation(a2, b2),
    }
    rep: dict = {"angles": list(angles), "correlations": corr, "S": chsh_value(a1, a2, b1, b2)}
    if trials:
        rep["sampled"] = sample_chsh(a1, a2, b1, b2, trials, np.random.default_rng(seed))
        rep["trials"] = trials
        rep["seed"] = seed
    return rep


def cmd_chsh(args) -> int:
    seed = args.seed if args.seed is not None else 0
    rep = chsh_report(args.angles, args.trials, seed)
    if args.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "angles": rep["angles"],
            "correlations": {k: _num(v) for k, v in rep["correlations"].items()},
            "S": _num(rep["S"]),
        }
        if "sampled" in rep:
            s = rep["sampled"]
            doc["sampled"] = {
                "trials": rep["trials"],
                "seed": rep["seed"],
                "correlations": {k: {"mean": _num(m), "stderr": _num(e)} for k, (m, e) in s["correlations"].items()},
                "S": _num(s["S"]),
                "S_stderr": _num(s["S_stderr"]),
            }
        text = _dump_json(doc)
    else:
        lines = [f"{k} = {v: .15g}" for k, v in rep["correlations"].items()]
        lines.append(f"S = {rep['S']:.15g}")
        if "sampled" in rep:
            s = rep["sampled"]
            lines.append(f"sampled ({rep['trials']} trials per setting, seed {rep['seed']}):")
            lines += [f"  {k} = {m: .6f} +- {e:.6f}" for k, (m, e) in s["correlations"].items()]
            lines.append(f"  S = {s['S']:.6f} +- {s['S_stderr']:.6f}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out, args.quiet)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="RNG seed (unsigned 64-bit)")
    parser.add_argument("--out", default=default, help="write the result here instead of stdout")
    parser.add_argument("--format", choices=["json", "csv"], default=default)
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False)


def _experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON ExperimentConfig; flags override its fields")
    parser.add_argument("--channel", type=float, nargs=4, metavar=("ALPHA", "BETA", "GAMMA", "DELTA"))
    parser.add_argument("--input", nargs="+", metavar="RE,IM", help="'random' or four re,im tokens")
    parser.add_argument("--x", help="POVM scaling or 'auto'")
    parser.add_argument("--trials", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qteleport", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("teleport", help="Monte Carlo run of the two-qubit scheme")
    _experiment_flags(p)
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_teleport)

    p = sub.add_parser("min-x", help="minimal POVM scaling for a channel")
    p.add_argument("coefficients", type=float, nargs=4, metavar="COEF")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_min_x)

    p = sub.add_parser("scan", help="sweep x or the channel skew t")
    _experiment_flags(p)
    p.add_argument("--param", required=True, choices=["x", "skew"])
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("chsh", help="singlet correlations and the CHSH value")
    p.add_argument("angles", type=float, nargs=4, metavar="ANGLE", help="a1 a2 b1 b2 in radians")
    p.add_argument("--trials", type=int, help="also sample this many detections per setting pair")
    _global_flags(p, suppress=True)
    p.set_defaults(func=cmd_chsh)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QTeleportError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
