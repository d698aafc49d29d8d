"""Batch command-line front end.

Verbs: ``norm`` (one norm evaluation), ``verify`` (the claim suite),
``sweep`` (parameter sweeps to CSV), ``export-curve`` (control-curve CSV).
Configuration is a JSON document validated against the shipped schema; all
outputs are deterministic (no timestamps, sorted keys, ``repr`` floats) and
written atomically.

Exit codes: 0 success, 1 failed verification claims, 2 configuration errors,
3 divergent norm under ``--require-finite``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional

import jsonschema
import numpy as np

from . import __version__
from .amalgam import Window, amalgam_norm, control_curve
from .expressions import (
    FunctionExpr,
    MeasureSpace,
    Power,
    from_json_dict,
    to_json_dict,
    validate_on,
)
from .grandnorm import (
    GrandExponent,
    NormOutcome,
    SequenceData,
    grand_norm,
    grand_seq_norm,
    phi,
)
from .smalldual import dual_amalgam_upper, small_norm_upper
from .verify import (
    VerifyContext,
    acn_tail,
    reports_to_csv,
    reports_to_json,
    run_claims,
)

log = logging.getLogger("grandamalgam")

SCHEMA_VERSION = "1"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Validated experiment configuration (see data/experiment_config.schema.json)."""

    omega: MeasureSpace
    G1: GrandExponent
    G2: GrandExponent
    window: Window
    functions: Dict[str, FunctionExpr]
    sequences: Dict[str, SequenceData]
    eps_points: int = 200
    curve_points: int = 257
    acn_a: tuple = (0.1, 0.01, 0.001)
    vanishing_eps: tuple = (1.0, 0.5, 0.1, 0.01, 0.001, 0.0001)
    sweep_grids: Dict[str, tuple] = field(default_factory=dict)
    check_margin: float = 1e-6
    quad_rel_tol: float = 1e-9
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        validator = _config_validator()
        errors = sorted(validator.iter_errors(data), key=str)
        if errors:
            raise ConfigError(f"config rejected by schema: {errors[0].message}")
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {data.get('schema_version')!r}")
        ms = data["measure_space"]
        try:
            omega = MeasureSpace(float(ms["lower"]), float(ms["upper"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        ex = data["exponents"]
        try:
            G1 = GrandExponent(float(ex["p"]), float(ex["theta1"]))
            G2 = GrandExponent(float(ex["q"]), float(ex["theta2"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        win = data["window"]
        try:
            window = Window(float(win["start"]), float(win["width"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        functions: Dict[str, FunctionExpr] = {}
        sequences: Dict[str, SequenceData] = {}
        for name, node in data["functions"].items():
            if node.get("kind") == "sequence":
                sequences[name] = SequenceData(tuple(node["entries"]))
                continue
            try:
                expr = from_json_dict(node)
                validate_on(expr, omega)
            except ValueError as exc:
                raise ConfigError(f"function {name!r}: {exc}") from exc
            functions[name] = expr
        grids = data.get("grids", {})
        eps_points = int(grids.get("eps_points", 200))
        curve_points = int(grids.get("curve_points", 257))
        if curve_points % 2 == 0:
            raise ConfigError("grids.curve_points must be odd")
        acn_a = tuple(grids.get("acn_a", (0.1, 0.01, 0.001)))
        if any(not (0.0 < a < omega.mass) for a in acn_a):
            raise ConfigError("grids.acn_a values must lie inside the interval")
        vanishing = tuple(grids.get("vanishing_eps",
                                    (1.0, 0.5, 0.1, 0.01, 0.001, 0.0001)))
        eps_cap = min(G1.p, G2.p) - 1.0
        if any(not (0.0 < e <= eps_cap) for e in vanishing):
            raise ConfigError("grids.vanishing_eps must lie in (0, min(p,q)-1]")
        sweep_grids = {k: tuple(v) for k, v in grids.get("sweep", {}).items()}
        tols = data.get("tolerances", {})
        check_margin = float(tols.get("check_margin", 1e-6))
        quad_rel_tol = float(tols.get("quad_rel_tol", 1e-9))
        if check_margin <= 0 or not (0.0 < quad_rel_tol <= 1e-2):
            raise ConfigError("tolerances out of range")
        return cls(omega=omega, G1=G1, G2=G2, window=window,
                   functions=functions, sequences=sequences,
                   eps_points=eps_points, curve_points=curve_points,
                   acn_a=acn_a, vanishing_eps=vanishing,
                   sweep_grids=sweep_grids, check_margin=check_margin,
                   quad_rel_tol=quad_rel_tol, raw=data)

    def to_dict(self) -> dict:
        return self.raw

    def resolve(self, name: str) -> FunctionExpr:
        try:
            return self.functions[name]
        except KeyError:
            raise ConfigError(f"unknown function {name!r}") from None

    def resolve_sequence(self, name: str) -> SequenceData:
        try:
            return self.sequences[name]
        except KeyError:
            raise ConfigError(f"unknown sequence {name!r}") from None


def _config_validator():
    from referencing import Registry, Resource

    def _read(name: str) -> dict:
        return json.loads(
            resources.files("grandamalgam.data").joinpath(name).read_text())

    expr_schema = _read("function_expr.schema.json")
    config_schema = _read("experiment_config.schema.json")
    registry = Registry().with_resource(
        "grandamalgam/function_expr.schema.json",
        Resource.from_contents(expr_schema))
    return jsonschema.Draft202012Validator(config_schema, registry=registry)


def load_config(path: Optional[str]) -> ExperimentConfig:
    if path is None:
        text = resources.files("grandamalgam.data").joinpath(
            "default_config.json").read_text()
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------------------
# output helpers

def _float_json(x: float):
    if math.isinf(x):
        return "inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return x


def write_atomic(path: str, content: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _outcome_record(kind: str, name: str, outcome: NormOutcome) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "space": kind,
        "function": name,
        "value": _float_json(outcome.value),
        "argmax_eps": outcome.argmax_eps,
        "error_estimate": _float_json(outcome.error_estimate),
        "path": outcome.path,
        "flags": list(outcome.flags),
        "note": outcome.note,
    }


# ---------------------------------------------------------------------------
# subcommands

def cmd_norm(cfg: ExperimentConfig, args) -> int:
    name, space = args.fn, args.space
    omega, G1, G2, Q = cfg.omega, cfg.G1, cfg.G2, cfg.window
    full = (omega.lower, omega.upper)
    if space == "sequence":
        outcome = grand_seq_norm(cfg.resolve_sequence(name), G1)
    elif space == "grand":
        outcome = grand_norm(cfg.resolve(name), G1, full, omega,
                             rel_tol=cfg.quad_rel_tol, eps_points=cfg.eps_points)
    elif space == "amalgam":
        outcome = amalgam_norm(cfg.resolve(name), G1, G2, Q, omega,
                               M=cfg.curve_points, rel_tol=cfg.quad_rel_tol)
    elif space == "small-upper":
        value = small_norm_upper(cfg.resolve(name), G1, full, omega,
                                 rel_tol=cfg.quad_rel_tol)
        outcome = NormOutcome(value, None, value * 1e-9, "quadrature")
    elif space == "dual-upper":
        value = dual_amalgam_upper(cfg.resolve(name), G1, G2, Q, omega,
                                   M=cfg.curve_points, rel_tol=cfg.quad_rel_tol)
        outcome = NormOutcome(value, None, value * 1e-9, "sampled-curve")
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown space {space!r}")

    record = _outcome_record(space, name, outcome)
    print(f"{name} [{space}] = {outcome.value}"
          + (f"  (argmax eps {outcome.argmax_eps:.8g})"
             if outcome.argmax_eps is not None else "")
          + f"  [{outcome.path}]")
    out_path = os.path.join(args.out, f"norm_{name}_{space}.json")
    write_atomic(out_path, json.dumps(record, sort_keys=True, indent=2) + "\n")
    log.info("wrote %s", out_path)
    if args.require_finite and math.isinf(outcome.value):
        log.error("norm is divergent and --require-finite is set")
        return 3
    return 0


def cmd_verify(cfg: ExperimentConfig, args) -> int:
    ctx = VerifyContext(omega=cfg.omega, G1=cfg.G1, G2=cfg.G2, Q=cfg.window,
                        tolerance=cfg.check_margin,
                        curve_points=cfg.curve_points)
    claims = args.claims.split(",") if args.claims else None
    try:
        reports = run_claims(ctx, claims=claims, jobs=args.jobs)
    except KeyError as exc:
        log.error("%s", exc)
        return 2
    for rep in reports:
        print(f"{rep.claim_id:20s} {rep.verdict:13s} margin={rep.margin:+.6e}")
    write_atomic(os.path.join(args.out, "claims.json"), reports_to_json(reports))
    write_atomic(os.path.join(args.out, "summary.csv"), reports_to_csv(reports))
    failed = [r for r in reports if r.verdict == "fail"]
    if failed:
        log.warning("%d claim(s) failed: %s", len(failed),
                    ", ".join(r.claim_id for r in failed))
        return 1
    return 0


_SWEEP_AXES = ("p", "q", "theta", "a", "eps", "window-width")


def _sweep_row(cfg: ExperimentConfig, axis: str, value: float, f, name: str) -> dict:
    omega, Q = cfg.omega, cfg.window
    full = (omega.lower, omega.upper)
    row: dict = {"axis": axis, "value": value}
    if axis == "eps":
        row["phi"] = phi(f, cfg.G1, full, omega, value, rel_tol=cfg.quad_rel_tol)
    elif axis == "a":
        tails = acn_tail(f, cfg.G1, cfg.G2, omega, [value], M=cfg.curve_points)
        row["tail"] = tails[0][1]
    elif axis == "window-width":
        out = amalgam_norm(f, cfg.G1, cfg.G2, Window(Q.start, value), omega,
                           M=cfg.curve_points)
        row["amalgam_norm"] = out.value
        row["amalgam_err"] = out.error_estimate
    else:
        if axis == "p":
            G1 = GrandExponent(value, cfg.G1.theta)
            G2 = cfg.G2
        elif axis == "q":
            G1 = cfg.G1
            G2 = GrandExponent(value, cfg.G2.theta)
        else:  # theta
            G1 = GrandExponent(cfg.G1.p, value)
            G2 = GrandExponent(cfg.G2.p, value)
        g_out = grand_norm(f, G1, full, omega, rel_tol=cfg.quad_rel_tol,
                           eps_points=cfg.eps_points)
        row["grand_norm"] = g_out.value
        row["grand_err"] = g_out.error_estimate
        a_out = amalgam_norm(f, G1, G2, Q, omega, M=cfg.curve_points)
        row["amalgam_norm"] = a_out.value
        row["amalgam_err"] = a_out.error_estimate
    return row


_SWEEP_COLUMNS = ("axis", "value", "grand_norm", "grand_err", "amalgam_norm",
                  "amalgam_err", "phi", "tail", "error")


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    axis = args.axis
    grid = cfg.sweep_grids.get(axis, ())
    f = cfg.resolve(args.fn)
    lines = [",".join(_SWEEP_COLUMNS)]
    for value in grid:
        try:
            row = _sweep_row(cfg, axis, float(value), f, args.fn)
        except Exception as exc:  # noqa: BLE001 - per-row error column by contract
            row = {"axis": axis, "value": value, "error": f"{type(exc).__name__}: {exc}"}
        cells = []
        for col in _SWEEP_COLUMNS:
            v = row.get(col, "")
            cells.append(repr(v) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    content = "\n".join(lines) + "\n"
    out_path = os.path.join(args.out, f"sweep_{axis}_{args.fn}.csv")
    write_atomic(out_path, content)
    print(content, end="")
    return 0


def cmd_export_curve(cfg: ExperimentConfig, args) -> int:
    import io as _io

    f = cfg.resolve(args.fn)
    curve = control_curve(f, cfg.G1, cfg.window, cfg.omega, cfg.curve_points,
                          rel_tol=cfg.quad_rel_tol)
    buf = _io.StringIO()
    curve.write_csv(buf)
    out_path = os.path.join(args.out, f"curve_{args.fn}.csv")
    write_atomic(out_path, buf.getvalue())
    print(f"wrote {out_path} ({len(curve.xs)} samples)")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grandamalgam",
        description="Grand Lebesgue / grand amalgam norm evaluation and "
                    "inequality verification on finite intervals.")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="experiment config JSON (default: built-in)")
    common.add_argument("--out", metavar="DIR", default="out",
                        help="output directory (default: ./out)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_norm = sub.add_parser("norm", parents=[common], help="evaluate one norm")
    p_norm.add_argument("--fn", required=True, help="function name from the config")
    p_norm.add_argument("--space", required=True,
                        choices=("grand", "sequence", "amalgam", "small-upper",
                                 "dual-upper"))
    p_norm.add_argument("--require-finite", action="store_true",
                        help="exit 3 when the result is divergent")
    p_norm.set_defaults(func=cmd_norm)

    p_verify = sub.add_parser("verify", parents=[common],
                              help="run the verification claim suite")
    p_verify.add_argument("--claims", default=None,
                          help="comma-separated claim ids (default: all)")
    p_verify.add_argument("--jobs", type=int, default=1,
                          help="concurrent claim jobs")
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="sweep one axis, write CSV")
    p_sweep.add_argument("--axis", required=True, choices=_SWEEP_AXES)
    p_sweep.add_argument("--fn", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_curve = sub.add_parser("export-curve", parents=[common],
                             help="export a control curve as CSV")
    p_curve.add_argument("--fn", required=True)
    p_curve.set_defaults(func=cmd_export_curve)
    return parser


def _setup_logging() -> None:
    level_name = os.environ.get("GRANDAMALGAM_LOG", "error").lower()
    level = {"error": logging.ERROR, "info": logging.INFO,
             "debug": logging.DEBUG}.get(level_name, logging.ERROR)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        log.error("%s", exc)
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
