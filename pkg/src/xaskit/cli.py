"""Command-line front end: process, compare, e0, export, serve.

Exit codes: 0 success, 1 any file failed, 2 bad invocation.
"""
from __future__ import annotations

import argparse
import json
import pathlib
import sys
from dataclasses import replace

import numpy as np

from .core import interpolate_linear
from .errors import XasKitError
from .ingest import DEFAULT_LABEL_TABLE, parse_columnar
from .pipeline import (PipelineConfig, export_chi, export_normalized,
                       export_rspace, process_file, process_text)
from .signal import E0Method, SavGolParams, find_e0


def _add_config_flags(parser):
    parser.add_argument("--config", help="pipeline config file (key=value sections)")
    parser.add_argument("--engine", choices=["spline", "poly"])
    parser.add_argument("--e0-method", choices=[m.value for m in E0Method])
    parser.add_argument("--r-bkg", type=float)
    parser.add_argument("--no-refine", action="store_true",
                        help="skip automatic knot refinement")
    parser.add_argument("--k-weight", type=int, choices=[0, 1, 2, 3])
    parser.add_argument("--window", choices=["hanning", "kaiser"])
    parser.add_argument("--k-min", type=float)
    parser.add_argument("--k-max", type=float)
    parser.add_argument("--dk", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--r-max", type=float)
    parser.add_argument("--format", choices=["xdi", "columnar"], dest="fmt")
    parser.add_argument("--column-map",
                        help="JSON file overriding the role label table")


def _build_config(args):
    if args.config:
        config = PipelineConfig.from_ini(pathlib.Path(args.config).read_text())
    else:
        config = PipelineConfig()
    overrides = {}
    for attr, name in [("engine", "engine"), ("e0_method", "e0_method"),
                       ("r_bkg", "r_bkg"), ("kw", "k_weight"),
                       ("window", "window"), ("k_min", "k_min"),
                       ("k_max", "k_max"), ("dk", "dk"), ("alpha", "alpha"),
                       ("r_max", "r_max"), ("export_format", "fmt")]:
        value = getattr(args, name.replace("-", "_"), None)
        if value is not None:
            overrides[attr] = value
    if getattr(args, "no_refine", False):
        overrides["refine"] = False
    return replace(config, **overrides) if overrides else config


def _load_label_table(args):
    if not getattr(args, "column_map", None):
        return None
    raw = json.loads(pathlib.Path(args.column_map).read_text())
    table = {role: (set(exact), tuple(prefixes))
             for role, (exact, prefixes) in
             ((r, (v.get("exact", []), v.get("prefix", []))) for r, v in raw.items())}
    merged = dict(DEFAULT_LABEL_TABLE)
    merged.update(table)
    return merged


def cmd_process(args):
    config = _build_config(args)
    table = _load_label_table(args)
    failures = 0
    for path in args.paths:
        try:
            report = process_file(path, config, out_dir=args.out_dir,
                                  label_table=table)
            print(f"ok   {path}  e0={report['e0']:.3f}  "
                  f"edge_step={report['edge_step']:.5g}  "
                  f"bqs={report['bqs']['score']:.5g}")
        except (XasKitError, OSError) as exc:
            failures += 1
            print(f"FAIL {path}: {exc}", file=sys.stderr)
    print(f"{len(args.paths)} files, {failures} failed")
    return 1 if failures else 0


_STAGE_COLUMNS = {"chi": ("k", "chi"), "rspace": ("r", "magnitude")}


def _read_stage(path, stage):
    x_label, y_label = _STAGE_COLUMNS[stage]
    scan = parse_columnar(pathlib.Path(path).read_text(errors="replace"))
    folded = [lbl.strip().casefold() for lbl in scan.labels]
    try:
        xi = folded.index(x_label)
        yi = folded.index(y_label)
    except ValueError:
        raise XasKitError(
            f"{path}: stage '{stage}' needs columns {x_label}/{y_label}, "
            f"found {scan.labels}")
    return scan.column(xi), scan.column(yi)


def cmd_compare(args):
    xa, ya = _read_stage(args.file_a, args.stage)
    xb, yb = _read_stage(args.file_b, args.stage)
    lo, hi = max(xa[0], xb[0]), min(xa[-1], xb[-1])
    mask = (xa >= lo) & (xa <= hi)
    if np.count_nonzero(mask) < 2:
        raise XasKitError("no overlapping range to compare")
    yb_on_a = interpolate_linear(xb, yb, xa[mask])
    diff = ya[mask] - yb_on_a
    rms = float(np.sqrt(np.mean(diff ** 2)))
    max_diff = float(np.max(np.abs(diff)))
    peak_a = float(xa[np.argmax(np.abs(ya))])
    peak_b = float(xb[np.argmax(np.abs(yb))])
    peak_diff = abs(peak_a - peak_b)
    print(f"stage={args.stage}  rms={rms:.6g}  max={max_diff:.6g}  "
          f"peak_a={peak_a:.6g}  peak_b={peak_b:.6g}  peak_diff={peak_diff:.6g}")
    return 0 if rms <= args.tolerance else 1


def cmd_e0(args):
    text = pathlib.Path(args.path).read_text(errors="replace")
    from .pipeline import load_any
    spectrum, _ = load_any(text)
    params = SavGolParams()
    methods = list(E0Method) if args.method == "all" else [E0Method(args.method)]
    status = 0
    for method in methods:
        try:
            print(f"{method.value}: {find_e0(spectrum, method, params=params):.4f}")
        except XasKitError as exc:
            print(f"{method.value}: error: {exc}", file=sys.stderr)
            status = 1
    return status


def cmd_export(args):
    path = pathlib.Path(args.path)
    text = path.read_text(errors="replace")
    if args.fmt == "original":
        out = text
    else:
        config = _build_config(args)
        result, _ = process_text(text, config)
        if args.stage == "norm":
            out = export_normalized(result, args.fmt or "xdi")
        elif args.stage == "chi":
            out = export_chi(result)
        else:
            out = export_rspace(result)
    if args.output:
        pathlib.Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return 0


def cmd_serve(args):
    import uvicorn

    from .server import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xaskit", description="XAS data reduction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="run the full pipeline over files")
    p.add_argument("paths", nargs="*")
    p.add_argument("--out-dir", help="artifact directory (default: beside inputs)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("compare", help="compare two exported stage files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--stage", choices=["chi", "rspace"], default="chi")
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("e0", help="report the edge energy of a file")
    p.add_argument("path")
    p.add_argument("--method", default="all",
                   choices=["all"] + [m.value for m in E0Method])
    p.set_defaults(func=cmd_e0)

    p = sub.add_parser("export", help="export a processed stage of one file")
    p.add_argument("path")
    p.add_argument("--stage", choices=["norm", "chi", "rspace"], default="norm")
    p.add_argument("-o", "--output")
    _add_config_flags(p)
    p.add_argument("--original", dest="fmt", action="store_const",
                   const="original", help="byte-preserving pass-through")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="run the HTTP API for the browser UI")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8800)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except XasKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
