"""Command-line front end.

Exit codes: 0 success, 1 I/O error, 2 invalid parameters, 3 numerical
failure.  Option values resolve as flags > ``--config`` JSON file >
built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basin import rasterize_basin
from .core import (
    TWO_PI,
    CouplingParams,
    Window,
    fixed_points,
    iterate,
    nullclines,
)
from .errors import ClockError, InvalidParameters, NumericalFailure
from .manifolds import build_separatrix
from .render import CURVE_COLORS, MARKER_COLORS, SvgCanvas, basin_rgb, csv_text, ppm_bytes
from .simulate import per_cycle_deviations, phases_from_differences, simulate
from .symmetry import (
    EQUIVARIANT_PARTS,
    S10,
    S10_ROTATION,
    SymmetryTransform,
    check_equivariance,
    generators,
)

log = logging.getLogger("aligned_clocks")

EQUIVARIANCE_TOL = 1e-12

COMMON_DEFAULTS = {
    "a": 0.1,
    "seed": 0,
    "output": None,
    "format": None,
    "window": None,
    "resolution": None,
}
# Converted from degrees when --degrees is given; config files are radians.
ANGLE_OPTIONS = ("x0", "y0", "window", "phases")

DEFAULTS = {
    "iterate": {"x0": math.pi, "y0": math.pi / 2, "n": 100, "format": "csv"},
    "fixed-points": {"l_range": [0, 0], "k_range": [0, 0], "format": "json"},
    "nullclines": {"window": [0.0, TWO_PI, 0.0, TWO_PI], "resolution": 512, "format": "csv"},
    "separatrix": {"format": "csv", "svg": None, "delta": 1e-4, "step": 1e-3},
    "basin": {"window": [0.0, TWO_PI, 0.0, TWO_PI], "resolution": 256, "nx": None, "ny": None,
              "eps": 1e-6, "n_max": 100_000, "workers": 1, "csv": None, "format": "ppm"},
    "simulate": {"x0": None, "y0": None, "phases": None, "cycles": 100,
                 "kick_rule": "sine", "format": "csv"},
    "check-symmetry": {"samples": 10_000, "max_shift": 3, "format": "json"},
}
FORMATS = {
    "iterate": ("csv", "json"),
    "fixed-points": ("json",),
    "nullclines": ("csv", "json", "svg"),
    "separatrix": ("csv", "svg"),
    "basin": ("ppm",),
    "simulate": ("csv",),
    "check-symmetry": ("json",),
}


def _common(p):
    g = p.add_argument_group("common options")
    g.add_argument("--a", type=float, default=None, help="coupling strength, 0 < a < 1/6")
    g.add_argument("--alpha", type=float, default=None, help="physical coupling force (with --mu, --h)")
    g.add_argument("--mu", type=float, default=None, help="dry friction coefficient")
    g.add_argument("--h", type=float, default=None, help="kick speed; a = alpha mu / (8 h^2)")
    g.add_argument("--config", type=Path, default=None, help="JSON file of option values")
    g.add_argument("--seed", type=int, default=None, help="random seed")
    g.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    g.add_argument("--format", default=None, choices=("csv", "json", "svg", "ppm"))
    g.add_argument("--window", type=float, nargs=4, default=None,
                   metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    g.add_argument("--resolution", type=int, default=None)
    g.add_argument("--degrees", action="store_true", default=None,
                   help="read angle inputs in degrees")
    g.add_argument("--json-meta", action="store_true", default=False,
                   help="write the resolved configuration next to the output (or to stderr)")
    g.add_argument("-v", "--verbose", action="store_true", default=False)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="aligned-clocks",
        description="Phase-difference dynamics of three impact-coupled clocks in a line.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("iterate", help="orbit of the line map")
    _common(p)
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--y0", type=float, default=None)
    p.add_argument("--n", type=int, default=None, help="number of iterates")

    p = sub.add_parser("fixed-points", help="fixed-point catalogue with eigenvalues")
    _common(p)
    p.add_argument("--l-range", type=int, nargs=2, default=None, metavar=("LO", "HI"))
    p.add_argument("--k-range", type=int, nargs=2, default=None, metavar=("LO", "HI"))

    p = sub.add_parser("nullclines", help="zero sets of the perturbation field")
    _common(p)

    p = sub.add_parser("separatrix", help="heteroclinic separatrix of S_10")
    _common(p)
    p.add_argument("--svg", default=None, help="also write an SVG overlay here")
    p.add_argument("--delta", type=float, default=None, help="seed offset from the saddle")
    p.add_argument("--step", type=float, default=None, help="vertex spacing bound")

    p = sub.add_parser("basin", help="basin-of-attraction raster")
    _common(p)
    p.add_argument("--nx", type=int, default=None)
    p.add_argument("--ny", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--csv", default=None, help="companion CSV (default: output with .csv suffix)")

    p = sub.add_parser("simulate", help="event-driven pulse-coupled clocks")
    _common(p)
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--y0", type=float, default=None)
    p.add_argument("--phases", type=float, nargs=3, default=None, metavar=("B", "A", "C"))
    p.add_argument("--cycles", type=int, default=None)
    p.add_argument("--kick-rule", default=None, choices=("sine", "none"))

    p = sub.add_parser("check-symmetry", help="equivariance deviations of the symmetry generators")
    _common(p)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--max-shift", type=int, default=None)
    return ap


def resolve_config(args) -> dict:
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(DEFAULTS[args.command])
    if args.config is not None:
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except json.JSONDecodeError as exc:
            raise InvalidParameters(f"config file {args.config}: {exc}") from None
    for key, val in vars(args).items():
        if key in ("config", "command", "json_meta", "verbose", "degrees"):
            continue
        if val is not None:
            if args.degrees and key in ANGLE_OPTIONS:
                val = [math.radians(v) for v in val] if isinstance(val, list) else math.radians(val)
            cfg[key] = val
    cfg["command"] = args.command

    if args.alpha is not None or args.mu is not None or args.h is not None:
        if None in (args.alpha, args.mu, args.h):
            raise InvalidParameters("--alpha, --mu and --h must be given together")
        cfg["a"] = CouplingParams.from_physical(args.alpha, args.mu, args.h).a
    CouplingParams(cfg["a"])

    if cfg.get("window") is not None:
        Window(*cfg["window"])
    if cfg["format"] not in FORMATS[args.command]:
        raise InvalidParameters(
            f"format {cfg['format']!r} not available for {args.command}; use one of {FORMATS[args.command]}"
        )
    return cfg


def _emit(cfg, payload, binary=False):
    out = cfg.get("output")
    if out in (None, "-"):
        if binary:
            sys.stdout.buffer.write(payload)
            sys.stdout.buffer.flush()
        else:
            sys.stdout.write(payload)
        return
    path = Path(out)
    if binary:
        path.write_bytes(payload)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# -- subcommands -----------------------------------------------------------

def cmd_iterate(cfg):
    if cfg["n"] < 0:
        raise InvalidParameters("--n must be non-negative")
    orbit = iterate(np.array([cfg["x0"], cfg["y0"]], dtype=float), cfg["a"], cfg["n"])
    if cfg["format"] == "json":
        _emit(cfg, _json([{"step": i, "x": float(x), "y": float(y)} for i, (x, y) in enumerate(orbit)]))
    else:
        _emit(cfg, csv_text(("step", "x", "y"), ((i, x, y) for i, (x, y) in enumerate(orbit))))


def fixed_point_catalog(a, l_range, k_range):
    return [
        {
            "family": fp.family,
            "l": fp.l,
            "k": fp.k,
            "x": fp.location.x,
            "y": fp.location.y,
            "eigenvalues": list(fp.eigenvalues),
            "class": fp.stability,
        }
        for fp in fixed_points(a, tuple(l_range), tuple(k_range))
    ]


def cmd_fixed_points(cfg):
    lr, kr = cfg["l_range"], cfg["k_range"]
    if lr[0] > lr[1] or kr[0] > kr[1]:
        raise InvalidParameters("index ranges must satisfy LO <= HI")
    _emit(cfg, _json(fixed_point_catalog(cfg["a"], lr, kr)))


def cmd_nullclines(cfg):
    window = Window(*cfg["window"])
    curves = nullclines(cfg["a"], window, cfg["resolution"])
    if cfg["format"] == "svg":
        canvas = SvgCanvas(window)
        for c in curves:
            canvas.path(c.vertices, CURVE_COLORS[c.tag], cls=c.tag)
        for fp in fixed_points(cfg["a"], (-1, 1), (-1, 1)):
            x, y = fp.location
            if window.xmin <= x <= window.xmax and window.ymin <= y <= window.ymax:
                canvas.marker(x, y, MARKER_COLORS[fp.stability], title=f"{fp.family} {fp.stability}")
        _emit(cfg, canvas.render())
    elif cfg["format"] == "json":
        _emit(cfg, _json([{"tag": c.tag, "vertices": c.vertices.tolist()} for c in curves]))
    else:
        rows = ((ci, c.tag, i, x, y) for ci, c in enumerate(curves) for i, (x, y) in enumerate(c.vertices))
        _emit(cfg, csv_text(("curve", "tag", "index", "x", "y"), rows))


def separatrix_svg(sep, a) -> str:
    window = Window(-0.25, TWO_PI + 0.25, -math.pi - 0.25, math.pi + 0.25)
    canvas = SvgCanvas(window)
    canvas.polygon(S10.vertices, cls="S10")
    left = np.vstack([[0.0, 0.0], sep.left.vertices[::-1], [math.pi, 0.0]])
    right = np.vstack([[math.pi, 0.0], sep.right.vertices, [TWO_PI, 0.0]])
    canvas.path(left, CURVE_COLORS["manifold"], cls="gamma-left")
    canvas.path(right, CURVE_COLORS["manifold"], cls="gamma-right")
    for fp in fixed_points(a, (-1, 1), (-1, 1)):
        x, y = fp.location
        if S10.contains(np.array([x, y])):
            canvas.marker(x, y, MARKER_COLORS[fp.stability], title=f"{fp.family} {fp.stability}")
    return canvas.render()


def cmd_separatrix(cfg):
    sep = build_separatrix(cfg["a"], delta=cfg["delta"], step=cfg["step"])
    svg = separatrix_svg(sep, cfg["a"])
    if cfg["format"] == "svg":
        _emit(cfg, svg)
    else:
        _emit(cfg, csv_text(("index", "x", "y"), ((i, x, y) for i, (x, y) in enumerate(sep.eta.vertices))))
    if cfg.get("svg"):
        _write_text(cfg["svg"], svg)


def cmd_basin(cfg):
    window = Window(*cfg["window"])
    nx = cfg["nx"] or cfg["resolution"]
    ny = cfg["ny"] or cfg["resolution"]
    if nx < 2 or ny < 2:
        raise InvalidParameters("raster needs at least 2 cells per axis")
    raster = rasterize_basin(window, nx, ny, cfg["a"], cfg["eps"], cfg["n_max"], cfg["workers"])
    log.info("basin: %d of %d cells decided", int(raster.decided.sum()), nx * ny)
    # Colour by window-relative sink index so translated windows render alike;
    # the CSV keeps absolute indices.
    _emit(cfg, ppm_bytes(basin_rgb(raster.relative_labels(), raster.decided)), binary=True)

    csv_path = cfg.get("csv")
    if csv_path is None and cfg.get("output") not in (None, "-"):
        csv_path = str(Path(cfg["output"]).with_suffix(".csv"))
    if csv_path:
        centers = raster.cell_centers()

        def rows():
            for j in range(ny):
                for i in range(nx):
                    if raster.decided[j, i]:
                        l, k = raster.labels[j, i]
                        label = f"{l}:{k}"
                    else:
                        label = "undecided"
                    x, y = centers[j, i]
                    yield (i, j, x, y, label, raster.iterations[j, i])

        _write_text(csv_path, csv_text(("i", "j", "x", "y", "label", "iterations"), rows()))


def cmd_simulate(cfg):
    if cfg["cycles"] < 1:
        raise InvalidParameters("--cycles must be >= 1")
    start = None
    if cfg.get("phases") is not None:
        phases = tuple(cfg["phases"])
    elif cfg.get("x0") is not None or cfg.get("y0") is not None:
        if cfg.get("x0") is None or cfg.get("y0") is None:
            raise InvalidParameters("--x0 and --y0 must be given together")
        start = (cfg["x0"], cfg["y0"])
        phases = phases_from_differences(*start)
    else:
        rng = np.random.default_rng(cfg["seed"])
        phases = tuple(float(v) for v in rng.uniform(0.0, TWO_PI, 3))
    recs = simulate(phases, cfg["a"], cfg["cycles"], cfg["kick_rule"], start=start)
    dev = per_cycle_deviations(recs, cfg["a"])
    _emit(cfg, csv_text(("cycle", "x", "y", "deviation_from_map"),
                        ((r.cycle, r.x, r.y, d) for r, d in zip(recs, dev))))


def cmd_check_symmetry(cfg):
    a, samples, seed = cfg["a"], cfg["samples"], cfg["seed"]
    transforms = generators(cfg["max_shift"]) + [S10_ROTATION]
    rng = np.random.default_rng(seed)
    for _ in range(10):
        t = SymmetryTransform(str(rng.choice(EQUIVARIANT_PARTS)), *rng.integers(-3, 4, 2))
        transforms.append(t.compose(SymmetryTransform(str(rng.choice(EQUIVARIANT_PARTS)),
                                                      *rng.integers(-3, 4, 2))))
    report = []
    for t in transforms:
        dev = check_equivariance(t, a, samples, seed)
        report.append({"transform": t.to_dict(), "deviation": dev, "ok": dev < EQUIVARIANCE_TOL})
    _emit(cfg, _json(report))
    if not all(r["ok"] for r in report):
        raise NumericalFailure("equivariance deviation above 1e-12")


COMMANDS = {
    "iterate": cmd_iterate,
    "fixed-points": cmd_fixed_points,
    "nullclines": cmd_nullclines,
    "separatrix": cmd_separatrix,
    "basin": cmd_basin,
    "simulate": cmd_simulate,
    "check-symmetry": cmd_check_symmetry,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.json_meta:
            meta = _json({k: v for k, v in sorted(cfg.items())})
            if cfg.get("output") not in (None, "-"):
                _write_text(str(cfg["output"]) + ".meta.json", meta)
            else:
                sys.stderr.write(meta)
        COMMANDS[args.command](cfg)
    except InvalidParameters as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ClockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
