"""Command-line entry point: ``qrw2d {simulate,shape,compare,critical,check}``.

Exit codes: 0 success, 2 configuration error, 3 numerical check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import _kernels, asymptotics, checks, io, simulate
from .config import DEFAULT_TOLERANCES, Tolerances
from .model import CoinModel, load_model

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK = 3

COMMANDS = ("simulate", "shape", "compare", "critical", "check")
FORMATS = {
    "simulate": ("csv", "pgm", "json"),
    "shape": ("csv", "pgm"),
    "compare": ("json",),
    "critical": ("json",),
    "check": ("json",),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: str | dict = '{"family": "S", "t": 0.5}'
    n: int = 200
    start: list = field(default_factory=lambda: [1, 0, 0, 0])
    grid: int = 100
    out: str | None = None
    format: str | None = None
    scale: str = "log"
    tol: dict = field(default_factory=dict)
    threshold: float = io.LOG_FLOOR
    directions: list | None = None
    velocity: list | None = None
    all_starts: bool = False
    size: int = 400

    # resolved during validation
    coin: CoinModel | None = field(default=None, repr=False)
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)
    start_vec: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def keys(cls) -> set[str]:
        return {f.name for f in fields(cls)} - {"coin", "tolerances", "start_vec"}

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        allowed = FORMATS[self.command]
        if self.format is None:
            self.format = allowed[0]
        for f in self.format.split(","):
            if f not in allowed:
                raise ConfigError(f"format {f!r} not available for {self.command}; use {allowed}")
        if self.scale not in ("log", "linear"):
            raise ConfigError(f"scale must be log or linear, got {self.scale!r}")
        if int(self.n) < 0:
            raise ConfigError("n must be nonnegative")
        self.n = int(self.n)
        if int(self.grid) < 1 or int(self.size) < 1:
            raise ConfigError("grid and size must be positive")
        self.grid, self.size = int(self.grid), int(self.size)
        try:
            text = self.model if isinstance(self.model, str) else json.dumps(self.model)
            # the check suite must be able to report on non-unitary coins
            self.coin = load_model(text, check_unitary=self.command != "check")
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"model: {exc}") from exc
        try:
            self.tolerances = DEFAULT_TOLERANCES.with_overrides(self.tol)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"tol: {exc}") from exc
        self.start_vec = parse_start(self.start)
        if self.command == "compare" and not self.directions:
            raise ConfigError("compare needs --directions")
        if self.command == "critical" and not (self.velocity or self.directions):
            raise ConfigError("critical needs --v or --directions")
        if self.directions is not None:
            self.directions = parse_directions(self.directions)
        if self.velocity is not None:
            v = [float(x) for x in (self.velocity.split(",") if isinstance(self.velocity, str)
                                    else self.velocity)]
            if len(v) != 2 or not all(abs(x) < 1 for x in v):
                raise ConfigError("velocity must be two numbers in (-1, 1)")
            self.velocity = v
        return self


def _as_complex(item) -> complex:
    if isinstance(item, str):
        return complex(item.replace(" ", ""))
    if isinstance(item, (list, tuple)):
        return complex(*item)
    return complex(item)


def parse_start(start) -> np.ndarray:
    """Start vector from "a,b,c,d" (Python complex literals) or a list of numbers / [re, im] pairs."""
    if isinstance(start, str):
        start = start.split(",")
    try:
        vec = np.array([_as_complex(s) for s in start], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"start: {exc}") from exc
    if vec.shape != (4,):
        raise ConfigError("start must have four components")
    if abs(np.linalg.norm(vec) - 1) > simulate.NORM_TOL:
        raise ConfigError(f"start must have unit norm, got {np.linalg.norm(vec)!r}")
    return vec


def parse_directions(source) -> list[tuple[int, int, int]]:
    """``"r,s,n;r,s,n"``, a path to such a file (one per line), or a list of triples."""
    if isinstance(source, str):
        text = source
        if ";" not in source and Path(source).is_file():
            text = Path(source).read_text()
        items = [t for t in text.replace("\n", ";").split(";") if t.strip()]
        source = [t.split(",") for t in items]
    out = []
    try:
        for item in source:
            r, s, n = (int(str(x).strip()) for x in item)
            if n < 1:
                raise ConfigError("direction time n must be at least 1")
            out.append((r, s, n))
    except ValueError as exc:
        raise ConfigError(f"directions: {exc}") from exc
    return out


# --------------------------------------------------------------------------
# commands

def _emit(cfg: RunConfig, suffix: str, payload: bytes | str) -> None:
    data = payload.encode() if isinstance(payload, str) else payload
    multi = "," in cfg.format
    if cfg.out is None:
        if isinstance(payload, bytes):
            raise ConfigError("binary output needs --out")
        sys.stdout.write(payload)
        return
    path = Path(cfg.out)
    if multi or path.suffix == "":
        path = path.with_suffix("." + suffix) if path.suffix == "" else path.with_name(
            path.stem + "." + suffix)
    path.write_bytes(data)


def cmd_simulate(cfg: RunConfig) -> int:
    field_ = simulate.evolve(cfg.coin, cfg.start_vec, cfg.n)
    prob = simulate.probability_profile(field_)
    for fmt in cfg.format.split(","):
        if fmt == "csv":
            _emit(cfg, "csv", io.profile_csv(prob, cfg.threshold))
        elif fmt == "pgm":
            img = io.scale_image(io.lattice_to_image(prob), cfg.scale)
            _emit(cfg, "pgm", io.pgm_bytes(img))
        else:
            _emit(cfg, "json", io.dumps_json({
                "model": cfg.coin.to_descriptor(), "n": cfg.n,
                "total_probability": float(prob.sum()),
                "probability": prob,
            }))
    return EXIT_OK


def cmd_shape(cfg: RunConfig) -> int:
    cloud = asymptotics.feasible_region_image(cfg.coin, cfg.grid, cfg.tolerances)
    for fmt in cfg.format.split(","):
        if fmt == "csv":
            _emit(cfg, "csv", io.cloud_csv(cloud))
        else:
            counts = io.density_image(cloud.velocity, cfg.size, _kernels.bin_kernel())
            _emit(cfg, "pgm", io.pgm_bytes(io.density_gray(counts, cfg.scale)))
    return EXIT_OK


def _starts(cfg: RunConfig) -> list[tuple[str, np.ndarray]]:
    if cfg.all_starts:
        return [(f"e{j}", simulate.basis(j)) for j in range(1, 5)]
    return [("start", cfg.start_vec)]


def compare_directions(model: CoinModel, directions, start, tol: Tolerances) -> dict:
    """Exact vs predicted probability per direction, with the median relative error."""
    fields_: dict[int, np.ndarray] = {}
    rows = []
    rel = []
    for r, s, n in directions:
        if n not in fields_:
            fields_[n] = simulate.probability_profile(simulate.evolve(model, start, n))
        prob = fields_[n]
        exact = float(prob[r + n, s + n]) if abs(r) <= n and abs(s) <= n else 0.0
        rep = asymptotics.analyze(model, r, s, n, start, tol)
        rep.exact_probability = exact
        row = rep.to_dict()
        pred = rep.predicted_probability
        if pred is not None and exact > 0 and rep.status == asymptotics.INSIDE and rep.points:
            err = abs(pred - exact) / exact
            rel.append(err)
            row["relative_error"] = err
        rows.append(row)
    return {"directions": rows,
            "median_relative_error": float(np.median(rel)) if rel else None,
            "scored": len(rel)}


def cmd_compare(cfg: RunConfig) -> int:
    out = {"model": cfg.coin.to_descriptor(), "runs": {}}
    for label, start in _starts(cfg):
        out["runs"][label] = compare_directions(cfg.coin, cfg.directions, start, cfg.tolerances)
    _emit(cfg, "json", io.dumps_json(out))
    return EXIT_OK


def cmd_critical(cfg: RunConfig) -> int:
    reports = []
    if cfg.velocity is not None:
        pts = asymptotics.critical_points(cfg.coin, cfg.velocity, cfg.tolerances)
        status = asymptotics.classify_direction(cfg.coin, cfg.velocity, cfg.tolerances)
        reports.append({
            "v": cfg.velocity,
            "status": status,
            "points": [{"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "sheet": p.sheet,
                        "K": p.curvature} for p in pts],
        })
    for r, s, n in cfg.directions or []:
        rep = asymptotics.analyze(cfg.coin, r, s, n, cfg.start_vec, cfg.tolerances)
        reports.append(rep.to_dict())
    _emit(cfg, "json", io.dumps_json({"model": cfg.coin.to_descriptor(), "reports": reports}))
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    summary = checks.run_suite(cfg.coin, cfg.tolerances)
    for note in summary["notes"]:
        print(f"note: {note}", file=sys.stderr)
    for c in summary["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} value={io.fmt(c['value'])} "
              f"threshold={io.fmt(c['threshold'])}", file=sys.stderr)
    _emit(cfg, "json", io.dumps_json(summary))
    return EXIT_OK if summary["passed"] else EXIT_CHECK


HANDLERS = {
    "simulate": cmd_simulate,
    "shape": cmd_shape,
    "compare": cmd_compare,
    "critical": cmd_critical,
    "check": cmd_check,
}


# --------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qrw2d", description="Two-dimensional quantum walks: exact and asymptotic.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with RunConfig fields")
        sp.add_argument("--model", help="inline JSON descriptor or path to one")
        sp.add_argument("--n", type=int)
        sp.add_argument("--start", help="four comma-separated complex numbers, e.g. 1,0,0,0")
        sp.add_argument("--grid", type=int)
        sp.add_argument("--size", type=int, help="image side in pixels (shape)")
        sp.add_argument("--out")
        sp.add_argument("--format", help="comma-separated subset of " + "|".join(FORMATS[name]))
        sp.add_argument("--scale", choices=("log", "linear"))
        sp.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
        sp.add_argument("--threshold", type=float)
        sp.add_argument("--directions", help="r,s,n;r,s,n or a file with one triple per line")
        sp.add_argument("--v", dest="velocity", help="velocity v1,v2 (critical)")
        sp.add_argument("--all-starts", action="store_true", default=None)
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(values) - RunConfig.keys() - {"command"}
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        values.pop("command", None)
    tol = dict(values.get("tol", {}))
    for item in args.tol:
        if "=" not in item:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        try:
            tol[name.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--tol {item!r}: {exc}") from exc
    values["tol"] = tol
    for key in ("model", "n", "start", "grid", "size", "out", "format", "scale", "threshold",
                "directions", "velocity", "all_starts"):
        val = getattr(args, key)
        if val is not None:
            values[key] = val
    return RunConfig(command=args.command, **values).validate()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"qrw2d: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
