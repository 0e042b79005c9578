"""Command-line front end.

Commands: ``synth`` (construct a curve), ``analyze`` (frames and ratio
statistics), ``verify`` (f-rectifying checks), ``classify`` (hierarchy
verdict), ``export`` (SVG projection).

Exit codes are stable across commands: 0 success/pass, 1 semantic failure
(verification or classification), 2 input validation, 3 numerical failure.
Validation and numerical errors print a machine-readable JSON object on
stderr. All outputs are deterministic: identical inputs give byte-identical
CSV/JSON/SVG.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys

import numpy as np

from . import exprlang, funcs, fvector, geometry, synthesis
from ._num import cumulative_quadrature
from .classify import DEFAULT_N_MAX, DEFAULT_TOL as CLASSIFY_TOL, classify as run_classify
from .errors import NumericalError, ValidationError

SCHEMA = "frectify/1"
_FLOAT_FMT = "%.17g"
_MIN_N = 64
_RANGE_FLAGS = ("--t-range", "--f-domain", "--anchor")
_RANGE_RE = re.compile(r"^-[0-9.].*:.*$")

FRAME_COLUMNS = (
    "t", "s", "x", "y", "z",
    "Tx", "Ty", "Tz", "Nx", "Ny", "Nz", "Bx", "By", "Bz",
    "kappa", "tau",
)


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def _parse_pair(text: str, what: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValidationError(f"{what} must be 'lo:hi', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ValidationError(f"{what} must be numeric 'lo:hi', got {text!r}")


def _glue_range_flags(argv: list[str]) -> list[str]:
    """Join range-valued flags with their argument when the value starts
    with '-' (argparse would mistake '-0.6:0.6' for an option)."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _RANGE_FLAGS and i + 1 < len(argv) and _RANGE_RE.match(argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def _emit_error(err: Exception, kind: str) -> None:
    payload = {
        "schema": SCHEMA,
        "error": type(err).__name__,
        "kind": kind,
        "message": str(err),
    }
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _dump_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _to_plain(value):
    if isinstance(value, (np.floating, np.integer)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_to_plain(v) for v in value]
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _to_plain(v) for k, v in value.items()}
    return value


# ---------------------------------------------------------------------------
# CSV ingestion / emission
# ---------------------------------------------------------------------------

def read_curve_csv(path: str) -> dict[str, np.ndarray]:
    """Read a curve CSV; header mandatory, t strictly increasing, finite."""
    if not os.path.exists(path):
        raise ValidationError(f"curve file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file (header row is mandatory)")
        header = [h.strip() for h in header]
        for col in ("t", "x", "y", "z"):
            if col not in header:
                raise ValidationError(f"{path}: missing required column {col!r}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: line {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValidationError(f"{path}: line {line_no}: non-numeric field")
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        bad = int(np.argwhere(~np.isfinite(data))[0][0])
        raise ValidationError(f"{path}: line {bad + 2}: non-finite value")
    columns = {name: data[:, k] for k, name in enumerate(header)}
    t = columns["t"]
    if np.any(np.diff(t) <= 0.0):
        bad = int(np.argmax(np.diff(t) <= 0.0))
        raise ValidationError(
            f"{path}: line {bad + 3}: t not strictly increasing"
        )
    return columns


def write_curve_csv(path: str, columns: dict[str, np.ndarray], order: tuple[str, ...]) -> None:
    names = [n for n in order if n in columns]
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(len(arrays[0])):
            writer.writerow([_FLOAT_FMT % a[i] for a in arrays])


def _curve_from_columns(columns: dict[str, np.ndarray]) -> geometry.SampledCurve:
    points = np.stack([columns["x"], columns["y"], columns["z"]], axis=1)
    return geometry.SampledCurve(columns["t"], points)


# ---------------------------------------------------------------------------
# shared pipeline pieces
# ---------------------------------------------------------------------------

def _resolve_tol(args, default: float) -> float:
    if getattr(args, "tol", None) is not None:
        return float(args.tol)
    env = os.environ.get("FRECTIFY_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            raise ValidationError(f"FRECTIFY_TOL is not numeric: {env!r}")
    return default


def _analysis_grid(args, columns) -> tuple[geometry.ArcLengthCurve, geometry.FrenetData]:
    curve = _curve_from_columns(columns)
    n = args.n if args.n is not None else len(curve.params) - 1
    s0 = float(columns["s"][0]) if "s" in columns else 0.0
    alc = geometry.resample_arclength(curve, n, s0=s0)
    fd = geometry.frenet(alc, kappa_min=args.kappa_min)
    return alc, fd


def _spec_for_curve(args, alc: geometry.ArcLengthCurve) -> funcs.FunctionSpec:
    f_expr = exprlang.parse(args.f)
    if args.f_domain is not None:
        domain = _parse_pair(args.f_domain, "--f-domain")
    else:
        domain = (float(alc.s[0]), float(alc.s[-1]))
    if args.anchor is not None:
        anchor = _parse_pair(args.anchor, "--anchor")
    else:
        anchor = (domain[0], 0.0)
    analytic = exprlang.parse(args.analytic_F) if args.analytic_F else None
    return funcs.make_function_spec(f_expr, domain, anchor, analytic_F=analytic)


def _auto_domain(f_expr, c: float, t0: float, t_range: tuple[float, float]):
    """Grow an arclength domain from s = 0 until the primitive anchored at
    F(0) = c tan(t0) covers c tan(t + t0) over the t-range."""
    F0 = c * float(np.tan(t0))
    u_lo = c * float(np.tan(t_range[0] + t0))
    u_hi = c * float(np.tan(t_range[1] + t0))
    margin = 1e-6 * (1.0 + abs(u_hi - u_lo))

    def f_vals(x):
        return exprlang.evaluate_many(f_expr, x)

    def extend(target: float, direction: float) -> float:
        s_edge, F_edge = 0.0, F0
        chunk = max(abs(t_range[1] - t_range[0]), 0.5)
        total_cap = 1e4 * (1.0 + chunk)
        while (F_edge - target) * direction < margin:
            if abs(s_edge) > total_cap:
                raise NumericalError(
                    f"could not cover primitive value {target:.9g}: "
                    f"marched to s = {s_edge:.9g} without reaching it"
                )
            a = s_edge if direction > 0 else s_edge - chunk
            b = s_edge + chunk if direction > 0 else s_edge
            try:
                table = cumulative_quadrature(f_vals, a, b, 256, tol=1e-12)
            except NumericalError:
                chunk *= 0.5
                if chunk < 1e-6:
                    raise NumericalError(
                        "f stops being integrable before the requested "
                        "primitive range is covered; pass --f-domain explicitly"
                    )
                continue
            vals = F_edge + (table.values - (table.values[-1] if direction < 0 else 0.0))
            hit = (vals - target) * direction >= margin
            if np.any(hit):
                idx = int(np.argmax(hit)) if direction > 0 else int(np.argmax(hit))
                return float(table.x[idx]) if direction < 0 else float(table.x[idx])
            F_edge = float(vals[-1] if direction > 0 else vals[0])
            s_edge = b if direction > 0 else a
        return s_edge

    s_hi = extend(u_hi, +1.0) if u_hi > F0 else 0.0
    s_lo = extend(u_lo, -1.0) if u_lo < F0 else 0.0
    if s_hi == s_lo:
        s_hi = s_lo + 1.0
    return (s_lo, s_hi), (0.0, F0)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    if args.n < _MIN_N:
        raise ValidationError(f"n below minimum: n = {args.n} < {_MIN_N}")
    if args.c <= 0.0:
        raise ValidationError(f"c must be strictly positive, got {args.c}")
    t_range = _parse_pair(args.t_range, "--t-range")
    f_expr = exprlang.parse(args.f)
    if args.f_domain is not None:
        domain = _parse_pair(args.f_domain, "--f-domain")
        if args.anchor is not None:
            anchor = _parse_pair(args.anchor, "--anchor")
        elif domain[0] <= 0.0 <= domain[1]:
            anchor = (0.0, args.c * float(np.tan(args.t0)))
        else:
            anchor = (domain[0], 0.0)
    else:
        domain, anchor = _auto_domain(f_expr, args.c, args.t0, t_range)
        if args.anchor is not None:
            anchor = _parse_pair(args.anchor, "--anchor")
    analytic = exprlang.parse(args.analytic_F) if args.analytic_F else None
    spec = funcs.make_function_spec(f_expr, domain, anchor, analytic_F=analytic)
    y_exprs = [exprlang.parse(text) for text in args.y]
    Y = synthesis.SphericalCurve(y_exprs[0], y_exprs[1], y_exprs[2], t_range)
    cfg = synthesis.SynthesisConfig(
        spec=spec, c=args.c, t0=args.t0, t_range=t_range, n=args.n,
        guard_eps=args.guard_eps,
    )
    curve = synthesis.synthesize(cfg, Y)
    write_curve_csv(
        args.out,
        {
            "t": curve.t,
            "s": curve.s,
            "x": curve.points[:, 0],
            "y": curve.points[:, 1],
            "z": curve.points[:, 2],
        },
        ("t", "s", "x", "y", "z"),
    )
    return 0


def cmd_analyze(args) -> int:
    columns = read_curve_csv(args.curve)
    alc, fd = _analysis_grid(args, columns)
    ratio = geometry.ratio_series(fd, kappa_min=args.kappa_min)
    out_cols = {
        "t": alc.params,
        "s": alc.s,
        "x": alc.points[:, 0],
        "y": alc.points[:, 1],
        "z": alc.points[:, 2],
        "Tx": fd.T[:, 0], "Ty": fd.T[:, 1], "Tz": fd.T[:, 2],
        "Nx": fd.N[:, 0], "Ny": fd.N[:, 1], "Nz": fd.N[:, 2],
        "Bx": fd.B[:, 0], "By": fd.B[:, 1], "Bz": fd.B[:, 2],
        "kappa": fd.kappa,
        "tau": fd.tau,
    }
    if args.out_csv:
        write_curve_csv(args.out_csv, out_cols, FRAME_COLUMNS)
    kappa_scale = 1.0 + abs(float(np.median(fd.kappa)))
    planar = bool(float(np.max(np.abs(fd.tau))) <= 1e-6 * kappa_scale)
    summary = {
        "schema": SCHEMA,
        "command": "analyze",
        "nodes": int(len(alc.s)),
        "arclength": float(alc.length),
        "kappa": {"min": float(fd.kappa.min()), "max": float(fd.kappa.max())},
        "tau": {"min": float(fd.tau.min()), "max": float(fd.tau.max())},
        "ratio": {
            "min": float(ratio.min()),
            "max": float(ratio.max()),
            "mean": float(ratio.mean()),
            "rms": float(np.sqrt(np.mean(ratio ** 2))),
            "planar": planar,
        },
    }
    _dump_json(_to_plain(summary), args.out_json)
    return 0


def cmd_verify(args) -> int:
    columns = read_curve_csv(args.curve)
    alc, fd = _analysis_grid(args, columns)
    spec = _spec_for_curve(args, alc)
    tol = _resolve_tol(args, fvector.DEFAULT_TOL)
    fp = fvector.compute_f_position(fd, alc, spec)
    report = fvector.verify_f_rectifying(fp, spec, tol=tol)
    payload = {"schema": SCHEMA, "command": "verify", "tolerance": tol}
    payload.update(report.to_dict())
    _dump_json(_to_plain(payload), args.out)
    return 0 if report.passed else 1


def cmd_classify(args) -> int:
    columns = read_curve_csv(args.curve)
    alc, fd = _analysis_grid(args, columns)
    candidate = _spec_for_curve(args, alc) if args.f else None
    tol = _resolve_tol(args, CLASSIFY_TOL)
    report = run_classify(
        fd, candidate_F=candidate, tol=tol, n_max=args.n_max,
        kappa_min=args.kappa_min,
    )
    payload = {"schema": SCHEMA, "command": "classify", "tolerance": tol}
    payload.update(report.to_dict())
    _dump_json(_to_plain(payload), args.out)
    return 0 if report.verdict != "undetermined" else 1


def cmd_export(args) -> int:
    columns = read_curve_csv(args.curve)
    if len(columns["x"]) < 2:
        raise ValidationError("export needs at least 2 data points")
    axes = {"xy": ("x", "y"), "xz": ("x", "z"), "yz": ("y", "z")}[args.plane]
    u = columns[axes[0]]
    v = -columns[axes[1]]  # SVG y axis points down
    u_lo, u_hi = float(u.min()), float(u.max())
    v_lo, v_hi = float(v.min()), float(v.max())
    du = (u_hi - u_lo) or 1.0
    dv = (v_hi - v_lo) or 1.0
    mu, mv = 0.05 * du, 0.05 * dv
    viewbox = (u_lo - mu, v_lo - mv, du + 2 * mu, dv + 2 * mv)
    stroke = 0.004 * max(du, dv)
    points = " ".join("%.9g,%.9g" % (ui, vi) for ui, vi in zip(u, v))
    svg = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" '
        'viewBox="%.9g %.9g %.9g %.9g" preserveAspectRatio="xMidYMid meet">\n'
        '  <polyline fill="none" stroke="black" stroke-width="%.9g" points="%s"/>\n'
        "</svg>\n"
    ) % (*viewbox, stroke, points)
    with open(args.out, "w") as fh:
        fh.write(svg)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_analysis_args(p, with_f: bool, f_required: bool = False):
    p.add_argument("curve", help="curve CSV (columns t,x,y,z; s and frames optional)")
    p.add_argument("--n", type=int, default=None, help="resampling node count (default: input rows - 1)")
    p.add_argument("--kappa-min", type=float, default=geometry.DEFAULT_KAPPA_MIN,
                   help="curvature floor below which frames are undefined")
    if with_f:
        p.add_argument("--f", required=f_required, default=None,
                       help="weight function f of arclength, e.g. 'sec(t)^2'")
        p.add_argument("--f-domain", default=None, help="arclength domain lo:hi (default: the curve's range)")
        p.add_argument("--anchor", default=None, help="primitive anchor s:F (default: domain lo, 0)")
        p.add_argument("--analytic-F", default=None, help="optional analytic primitive expression")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frectify",
        description="Construct, verify and classify f-rectifying space curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="construct a curve from (f, c, t0, Y)")
    p.add_argument("--f", required=True, help="weight function of arclength")
    p.add_argument("--c", type=float, default=1.0, help="positive constant (normal length)")
    p.add_argument("--t0", type=float, default=0.0, help="phase; must satisfy F(0) = c tan(t0) when 0 is in the domain")
    p.add_argument("--y", nargs=3, required=True, metavar=("Y1", "Y2", "Y3"),
                   help="components of the unit-speed spherical curve")
    p.add_argument("--t-range", required=True, help="parameter range lo:hi")
    p.add_argument("--n", type=int, default=256, help="output sample count (>= 64)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--f-domain", default=None, help="arclength domain lo:hi (default: grown automatically)")
    p.add_argument("--anchor", default=None, help="primitive anchor s:F")
    p.add_argument("--analytic-F", default=None, help="optional analytic primitive")
    p.add_argument("--guard-eps", type=float, default=synthesis.DEFAULT_GUARD_EPS,
                   help="secant singularity guard band")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("analyze", help="frames, curvature/torsion and ratio statistics")
    _add_analysis_args(p, with_f=False)
    p.add_argument("--out-csv", default=None, help="augmented CSV path")
    p.add_argument("--out-json", default=None, help="summary JSON path (default: stdout)")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("verify", help="run the f-rectifying verification checks")
    _add_analysis_args(p, with_f=True, f_required=True)
    p.add_argument("--tol", type=float, default=None,
                   help="check tolerance (default: FRECTIFY_TOL or 1e-4)")
    p.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("classify", help="helix / rectifying / f-rectifying verdict")
    _add_analysis_args(p, with_f=True, f_required=False)
    p.add_argument("--tol", type=float, default=None,
                   help="model residual tolerance (default: FRECTIFY_TOL or 1e-3)")
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX,
                   help="highest ratio polynomial degree tried")
    p.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("export", help="SVG projection of a curve CSV")
    p.add_argument("curve", help="curve CSV")
    p.add_argument("--plane", choices=("xy", "xz", "yz"), default="xy")
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(handler=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _glue_range_flags(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.handler(args)
    except ValidationError as err:
        _emit_error(err, "validation")
        return 2
    except NumericalError as err:
        _emit_error(err, "numerical")
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
