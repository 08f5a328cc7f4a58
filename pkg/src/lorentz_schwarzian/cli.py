"""Command-line front end: verification suites, profiles and normal forms.

Exit codes: 0 pass, 1 verification failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import collections
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields

import numpy as np

from .diffeo import CircleDiffeo, fixed_point_free, from_descriptor, random_diffeo
from .errors import DomainError, GenerationError
from .metric import CUSTOM_METRICS, QuadMetric, as_metric, normal_form, singular_mobius
from .schwarzian import count_zeros_periodic, match_distance, projective_schwarzian
from .worldline import (EXPLICIT_CURVES, admissible_samples, curvature_formula, explicit, graph,
                        graph_angle, identity_rhs, rho_prime_lhs, theorem_residual,
                        velocity_norm, vertices)

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2
MIN_GRID = 256
VERTEX_MATCH_TOL = 1e-6
# default metric: D = x - y, curvature 8
DEFAULT_METRIC = {"a": 0.0, "b": 1.0, "c": -1.0, "d": 0.0}

PROFILE_COLUMNS = ["tau", "x", "y", "g_vv", "rho", "lhs_eq7", "rhs_eq7", "residual"]
THEOREM_COLUMNS = ["member", "diffeo_seed", "tau", "lhs", "rhs", "residual"]
GHYS_COLUMNS = ["member", "diffeo_seed", "degenerate", "ps_count", "even", "oracle_count",
                "vertex_count", "match_distance", "locations"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    ensemble_size: int = 20
    tolerance: float = 1e-6
    grid: int = 4096
    metric: object = field(default_factory=lambda: dict(DEFAULT_METRIC))
    diffeo: object = "random"
    curve: str | None = None
    output_path: str | None = None
    format: str = "csv"
    expect_fail: bool = False
    fail_threshold: float = 1e-2
    samples: int = 64
    interval: tuple = (-1.0, 1.0)
    points: int = 101
    n_modes: int = 3
    amplitude: float = 0.3
    oracle_grid: int = 0

    def validate(self):
        if not isinstance(self.ensemble_size, int) or self.ensemble_size < 1:
            raise ConfigError(f"ensemble_size must be >= 1, got {self.ensemble_size!r}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be > 0, got {self.tolerance!r}")
        if not isinstance(self.grid, int) or self.grid < MIN_GRID:
            raise ConfigError(f"grid must be an integer >= {MIN_GRID}, got {self.grid!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.samples < 1 or self.points < 2:
            raise ConfigError("samples must be >= 1 and points >= 2")
        lo, hi = self.interval
        if not hi > lo:
            raise ConfigError(f"interval must be increasing, got {self.interval!r}")
        if self.curve is not None and self.curve not in EXPLICIT_CURVES:
            raise ConfigError(f"unknown curve {self.curve!r}; choose from {sorted(EXPLICIT_CURVES)}")
        if self.oracle_grid and self.oracle_grid < self.grid:
            raise ConfigError("oracle_grid must be 0 or at least grid")
        self.metric_obj()
        self.diffeos()
        return self

    def metric_obj(self):
        try:
            return as_metric(self.metric)
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"bad metric {self.metric!r}: {exc}") from None

    def diffeos(self) -> list[tuple[int | None, CircleDiffeo]]:
        """Ensemble members as ``(seed, diffeo)``; seed is None for fixed descriptors."""
        try:
            if self.diffeo == "random":
                seeds = [member_seed(self.seed, i) for i in range(self.ensemble_size)]
                return [(s, random_diffeo(s, self.n_modes, self.amplitude)) for s in seeds]
            if isinstance(self.diffeo, list):
                return [(None, from_descriptor(d)) for d in self.diffeo]
            if isinstance(self.diffeo, dict):
                f = from_descriptor(self.diffeo)
                return [(None, f)] * self.ensemble_size
        except (ValueError, KeyError, TypeError, GenerationError) as exc:
            raise ConfigError(f"bad diffeo {self.diffeo!r}: {exc}") from None
        raise ConfigError(f"diffeo must be 'random', a descriptor or a list, got {self.diffeo!r}")


def member_seed(seed: int, i: int) -> int:
    """Independent 32-bit seed for ensemble member ``i``."""
    return int(np.random.SeedSequence([seed, i]).generate_state(1)[0])


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    overrides = {
        "seed": args.seed, "ensemble_size": args.ensemble_size, "tolerance": args.tolerance,
        "grid": args.grid, "output_path": args.out, "format": args.format,
        "samples": args.samples, "points": args.points, "curve": args.curve,
        "oracle_grid": args.oracle_grid, "amplitude": args.amplitude,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.metric is not None:
        data["metric"] = parse_metric(args.metric)
    if args.diffeo is not None:
        data["diffeo"] = parse_json_or_name(args.diffeo)
    if args.interval is not None:
        data["interval"] = parse_floats(args.interval, 2)
    if args.expect_fail:
        data["expect_fail"] = True
    if "interval" in data:
        data["interval"] = tuple(data["interval"])
    try:
        cfg = RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


def parse_floats(text, n):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise ConfigError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def parse_json_or_name(text):
    text = text.strip()
    if text.startswith(("{", "[")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON {text!r}: {exc}") from None
    return text


def parse_metric(text):
    val = parse_json_or_name(text)
    if isinstance(val, str) and "," in val:
        a, b, c, d = parse_floats(val, 4)
        return {"a": a, "b": b, "c": c, "d": d}
    return val


# --- output --------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(x) for x in v)
    return "" if v is None else str(v)


def render(rows, columns, fmt) -> str:
    if fmt == "json":
        recs = [{c: _jsonable(r[c]) for c in columns} for r in rows]
        return json.dumps(recs, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def emit(text: str, path: str | None):
    """Write ``text`` atomically to ``path`` (or stdout)."""
    if path is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def log(msg):
    print(msg, file=sys.stderr)


# --- commands ------------------------------------------------------------

def _curve_for(cfg, f):
    return explicit(cfg.curve) if cfg.curve else graph(f)


def cmd_verify_theorem(cfg: RunConfig) -> int:
    gm = cfg.metric_obj()
    rows, worst, errors = [], 0.0, 0
    for i, (dseed, f) in enumerate(cfg.diffeos()):
        w = _curve_for(cfg, f)
        rng = np.random.default_rng([cfg.seed, i])
        try:
            taus = admissible_samples(w, gm, cfg.samples, rng, interval=cfg.interval)
            rep = theorem_residual(w, gm, taus)
        except DomainError as exc:
            log(f"member {i}: {exc}")
            errors += 1
            continue
        worst = max(worst, rep.max_abs)
        rows.extend({"member": i, "diffeo_seed": dseed, "tau": t, "lhs": a, "rhs": b,
                     "residual": r} for t, a, b, r in rep.details)
    emit(render(rows, THEOREM_COLUMNS, cfg.format), cfg.output_path)
    if cfg.expect_fail:
        ok = worst > cfg.fail_threshold
        log(f"max residual {worst:.3e}; expected > {cfg.fail_threshold:g}: "
            f"{'PASS' if ok else 'FAIL'}")
    else:
        ok = errors == 0 and worst < cfg.tolerance
        log(f"max residual {worst:.3e} over {cfg.ensemble_size} members "
            f"(tolerance {cfg.tolerance:g}, {errors} errors): {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def _vertex_metric(gm):
    """Angle-chart metric and singular map when closed graphs can avoid the singular set."""
    if not isinstance(gm, QuadMetric) or gm.quad.rank_one or gm.quad.det <= 0:
        return None, None
    return gm.angle_chart(), singular_mobius(gm.quad)


def ghys_row(i, dseed, f, cfg, angle_metric, sing):
    row = {c: None for c in GHYS_COLUMNS}
    row.update(member=i, diffeo_seed=dseed, degenerate=False)
    ps = count_zeros_periodic(lambda t: projective_schwarzian(f, t).value, cfg.grid)
    if f.is_mobius or ps.degenerate:
        row["degenerate"] = True
        return row
    row.update(ps_count=ps.count, even=ps.is_even, locations=ps.locations)
    if cfg.oracle_grid:
        dense = np.linspace(0, math.pi, cfg.oracle_grid, endpoint=False)
        vals = projective_schwarzian(f, dense).value
        row["oracle_count"] = int(np.count_nonzero((vals >= 0) != np.roll(vals >= 0, -1)))
    if angle_metric is not None and fixed_point_free(f, sing):
        vx = vertices(graph_angle(f), angle_metric, cfg.grid)
        row["vertex_count"] = vx.count
        row["match_distance"] = match_distance(vx.locations, ps.locations)
    return row


def ghys_ok(row) -> bool:
    if row["degenerate"]:
        return True
    ok = row["ps_count"] >= 4 and row["even"]
    if row["oracle_count"] is not None:
        ok &= row["oracle_count"] == row["ps_count"]
    if row["vertex_count"] is not None:
        ok &= row["vertex_count"] == row["ps_count"] and row["match_distance"] < VERTEX_MATCH_TOL
    return bool(ok)


def cmd_ghys(cfg: RunConfig) -> int:
    angle_metric, sing = _vertex_metric(cfg.metric_obj())
    rows = [ghys_row(i, s, f, cfg, angle_metric, sing) for i, (s, f) in enumerate(cfg.diffeos())]
    emit(render(rows, GHYS_COLUMNS, cfg.format), cfg.output_path)
    hist = collections.Counter(r["ps_count"] for r in rows if not r["degenerate"])
    n_deg = sum(r["degenerate"] for r in rows)
    n_vert = sum(r["vertex_count"] is not None for r in rows)
    failed = [r["member"] for r in rows if not ghys_ok(r)]
    log("zero-count histogram: " + json.dumps({str(k): hist[k] for k in sorted(hist)}))
    log(f"{n_deg} degenerate (S = 0) rows excluded; {n_vert} rows with vertex comparison")
    log(f"{'PASS' if not failed else 'FAIL members ' + str(failed)}")
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_profile(cfg: RunConfig) -> int:
    gm = cfg.metric_obj()
    f = cfg.diffeos()[0][1]
    w = _curve_for(cfg, f)
    taus = np.linspace(*cfg.interval, cfg.points)
    for t in taus:
        try:
            rho_prime_lhs(w, gm, float(t))
            identity_rhs(w, gm, float(t))
        except DomainError as exc:
            log(f"curve is inadmissible at tau = {float(t)!r}: {exc}")
            return EXIT_FAIL
    x, y = w.point(taus)
    lhs, rhs = rho_prime_lhs(w, gm, taus), identity_rhs(w, gm, taus)
    cols = [taus, x, y, velocity_norm(w, gm, taus), curvature_formula(w, gm, taus), lhs, rhs,
            lhs - rhs]
    rows = [dict(zip(PROFILE_COLUMNS, vals)) for vals in zip(*cols)]
    emit(render(rows, PROFILE_COLUMNS, cfg.format), cfg.output_path)
    log(f"{len(rows)} rows; max |residual| {np.max(np.abs(lhs - rhs)):.3e}")
    return EXIT_OK


def cmd_normal_form(cfg: RunConfig) -> int:
    gm = cfg.metric_obj()
    if not isinstance(gm, QuadMetric):
        raise ConfigError("normal-form needs a quadruple metric (a, b, c, d)")
    r = normal_form(gm.quad)
    report = {"R": r.R, "form": r.form,
              "pair": [r.pair.left.matrix.tolist(), r.pair.right.matrix.tolist()],
              "residual": r.residual, "matrix_error": r.matrix_error,
              "canonical": r.canonical.tolist()}
    text = json.dumps(report, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if cfg.output_path:
        emit(text, cfg.output_path)
    return EXIT_OK if max(r.residual, r.matrix_error) < cfg.tolerance else EXIT_FAIL


COMMANDS = {"verify-theorem": cmd_verify_theorem, "ghys": cmd_ghys, "profile": cmd_profile,
            "normal-form": cmd_normal_form}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--seed", type=int)
    common.add_argument("--tolerance", type=float)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--expect-fail", action="store_true",
                        help="pass iff some residual exceeds fail_threshold")
    common.add_argument("--ensemble-size", type=int)
    common.add_argument("--grid", type=int)
    common.add_argument("--oracle-grid", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--points", type=int)
    common.add_argument("--interval", help="lo,hi")
    common.add_argument("--amplitude", type=float)
    common.add_argument("--metric", help="'flat', a custom name (%s), 'a,b,c,d' or JSON"
                        % ", ".join(sorted(CUSTOM_METRICS)))
    common.add_argument("--diffeo", help="'random' or a JSON descriptor / list of descriptors")
    common.add_argument("--curve", help="explicit curve name (%s)" % ", ".join(sorted(EXPLICIT_CURVES)))
    p = argparse.ArgumentParser(prog="lorentz-schwarzian", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        log(f"invalid input: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
