"""Command-line front end.

Exit codes: 0 success, 1 a characterization or self-check failed,
2 usage or malformed input, 3 a precondition failed (no vanishing
certificate, gate not met, inexact resolution).
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .affine import AFFINE, QUASI_AFFINE, bessel_ratio_estimate, frame_bounds_estimate, gramian_stack
from .cells import dilation_sum, integer_cover
from .checks import FAIL_TOL, PASS_TOL, calderon_cells, classify, t_function, ts_region
from .errors import FormatError, LFWaveletError, ParameterError
from .families import annulus_control, haar_wavelets
from .field import FieldParams
from .functions import TestFunction, Window, WaveletFamily, fourier_fast, fourier_forward, fourier_inverse
from .mra import construct_scaling, dimension_map, is_mra_wavelet

OUT_ENV = "LFWAVELET_OUT"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONTRACT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _out_dir(args) -> Path:
    path = Path(args.out or os.environ.get(OUT_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _params(args) -> FieldParams:
    red = None
    if args.reduction:
        try:
            red = tuple(int(x) for x in args.reduction.split(","))
        except ValueError as exc:
            raise UsageError(f"--reduction expects comma-separated integers, got {args.reduction!r}") from exc
    return FieldParams(args.p if args.p is not None else 2, args.c if args.c is not None else 1, red)


def _load_family(args) -> WaveletFamily:
    if not args.files:
        raise UsageError("no family files given")
    members = [io.read_function(path)[0] for path in args.files]
    params = members[0].params
    if (args.p is not None and args.p != params.p) or (args.c is not None and args.c != params.c):
        raise UsageError(f"--p/--c do not match the field recorded in {args.files[0]}")
    return WaveletFamily(tuple(members))


def _tols(args) -> tuple[float, float]:
    if args.tol is None:
        return PASS_TOL, FAIL_TOL
    return args.tol, max(FAIL_TOL, args.tol)


def _header(params: FieldParams, command: str) -> dict:
    return {"format_version": io.FORMAT_VERSION, "command": command, "field": params.to_dict()}


# --- commands ------------------------------------------------------------------------------------


def cmd_family(args) -> int:
    params = _params(args)
    out = _out_dir(args)
    written = []
    if args.kind == "haar":
        phi = TestFunction(params, "point", Window(0, 0), np.ones(1))
        written.append(io.write_function(out / "phi.json", phi, {"role": "scaling", "kind": "haar"}))
        for l, psi in enumerate(haar_wavelets(params), start=1):
            written.append(io.write_function(out / f"psi_{l}.json", psi, {"role": "wavelet", "kind": "haar", "member": l}))
    elif args.kind == "annulus":
        psi = annulus_control(params).members[0]
        written.append(
            io.write_function(out / "psi_1.json", psi, {"role": "wavelet", "kind": "annulus", "member": 1, "tight": False})
        )
    else:
        fam = _load_family(args)
        for l, m in enumerate(fam.members, start=1):
            meta = {"role": "wavelet", "kind": "file", "member": l, "zero_vanish_level": fam.zero_vanish_level}
            written.append(io.write_function(out / f"psi_{l}.json", m, meta))
    for p in written:
        print(p)
    return EXIT_OK


def cmd_transform(args) -> int:
    f, meta = io.read_function(args.input)
    if f.side == "point":
        g = fourier_forward(f) if args.naive else fourier_fast(f)
    else:
        g = fourier_inverse(f, fast=not args.naive)
    target = Path(args.output) if args.output else _out_dir(args) / f"{Path(args.input).stem}_{g.side}.json"
    io.write_function(target, g, meta or None)
    print(target)
    return EXIT_OK


def cmd_verify(args) -> int:
    fam = _load_family(args)
    pass_tol, fail_tol = _tols(args)
    report = classify(fam, args.jmax, args.smax, pass_tol, fail_tol)
    out = _out_dir(args)
    io.write_json(out / "verdict.json", {**_header(fam.params, "verify"), **report.to_dict()})
    if args.format == "csv":
        cells = calderon_cells(fam)
        vals = dilation_sum(fam, cells)
        rows = [{**cells.describe(i), "value": vals[i], "residual": abs(vals[i] - 1.0)} for i in range(len(cells))]
        io.write_csv(out / "calderon.csv", rows, ["res", "index", "point", "value", "residual"])
        region = ts_region(fam)
        smax = report.checks["ts_vanishing"].truncation["Smax"]
        ts_rows = []
        for s in range(1, smax):
            if s % fam.q:
                t = t_function(fam, s, region)
                ts_rows += [{"s": s, **region.describe(i), "abs_value": abs(t[i])} for i in range(len(region))]
        io.write_csv(out / "ts.csv", ts_rows, ["s", "res", "index", "point", "abs_value"])
    for name, rec in report.checks.items():
        print(f"{name:16s} {rec.status:12s} max_residual={rec.max_residual:.3e}")
    print(f"orthonormal_basis={report.flags['orthonormal_basis']} routes_agree={report.routes_agree}")
    return EXIT_OK if report.flags["orthonormal_basis"] else EXIT_FAIL


def cmd_dimension(args) -> int:
    fam = _load_family(args)
    dmap = dimension_map(fam, args.rel)
    out = _out_dir(args)
    if args.format != "csv":
        io.write_json(
            out / "dimension.json",
            {**_header(fam.params, "dimension"), "periodicity_residual": dmap.periodicity_residual, "cells": dmap.rows()},
        )
    else:
        io.write_csv(out / "dimension.csv", dmap.rows(), ["res", "index", "point", "value"])
    print(f"min={dmap.values.min():.12g} max={dmap.values.max():.12g} cells={len(dmap.values)}")
    return EXIT_OK


def cmd_gramian(args) -> int:
    fam = _load_family(args)
    cells = integer_cover(fam)
    if args.cell is not None:
        if not 0 <= args.cell < len(cells):
            raise UsageError(f"--cell must lie in [0, {len(cells)})")
        cells = cells.subset(np.arange(len(cells)) == args.cell)
    stack = gramian_stack(fam, cells, args.S)
    slices = [
        {"cell": cells.describe(i), "entries": [[io.complex_to_pair(z) for z in row] for row in stack[i]]}
        for i in range(len(cells))
    ]
    io.write_json(
        _out_dir(args) / "gramian.json",
        {**_header(fam.params, "gramian"), "S": args.S, "truncated": True, "slices": slices},
    )
    dev = float(np.max(np.abs(stack - np.eye(stack.shape[1])[None])))
    print(f"slices={len(slices)} size={stack.shape[1]} max|G - I|={dev:.3e}")
    return EXIT_OK


def cmd_frame_bounds(args) -> int:
    fam = _load_family(args)
    fb = frame_bounds_estimate(fam, args.S)
    result = {
        **_header(fam.params, "frame-bounds"),
        "S": args.S,
        "truncated": True,
        "lower": fb.lower,
        "upper": fb.upper,
        "lower_cell": fb.lower_cell,
        "upper_cell": fb.upper_cell,
        "periodicity_residual": fb.periodicity_residual,
    }
    if args.trials:
        est = {
            flavor: bessel_ratio_estimate(fam, flavor, args.trials, args.J, seed=args.seed)
            for flavor in (AFFINE, QUASI_AFFINE)
        }
        result["bessel_estimate"] = {"approximate": True, "trials": args.trials, "J": args.J, "seed": args.seed, **est}
    io.write_json(_out_dir(args) / "frame_bounds.json", result)
    print(f"A={fb.lower:.12g} B={fb.upper:.12g}")
    return EXIT_OK


def cmd_mra(args) -> int:
    fam = _load_family(args)
    report = classify(fam)
    out = _out_dir(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ok, dmap = is_mra_wavelet(fam, report)
    result = {**_header(fam.params, "mra"), "is_mra_wavelet": ok, "dimension": dmap.rows()}
    if not ok:
        io.write_json(out / "mra_report.json", result)
        print("is_mra_wavelet=False")
        return EXIT_FAIL
    rec = construct_scaling(fam, report)
    io.write_function(out / "phi_hat.json", rec.phi_hat, {"role": "scaling", "recovered": True})
    result.update(
        {
            "recovery_ok": rec.ok,
            "checks": {k: v.to_dict() for k, v in rec.checks.items()},
            "provenance": rec.provenance,
            "modulation_gaps": rec.modulation.gaps,
        }
    )
    io.write_json(out / "mra_report.json", result)
    print(f"is_mra_wavelet=True recovery_ok={rec.ok}")
    return EXIT_OK if rec.ok else EXIT_FAIL


# --- parser -----------------------------------------------------------------------------------------


def _common_options(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags with suppressed defaults so that
    # a flag given before the subcommand is not overwritten
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=d(None), help="field characteristic (default 2)")
    common.add_argument("--c", type=int, default=d(None), help="extension degree (default 1)")
    common.add_argument("--reduction", default=d(None), help="reduction polynomial r_0,...,r_c")
    common.add_argument("--tol", type=float, default=d(None), help="pass threshold for residuals")
    common.add_argument("--seed", type=int, default=d(0), help="seed for randomized estimates")
    common.add_argument("--out", default=d(None), help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--format", choices=["json", "csv"], default=d(None))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options(suppress=True)
    parser = argparse.ArgumentParser(
        prog="lfwavelet", description=__doc__.splitlines()[0], parents=[_common_options(suppress=False)]
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", parents=[common], help="write a built-in or file-based family")
    p.add_argument("--kind", choices=["haar", "annulus", "file"], required=True)
    p.add_argument("files", nargs="*")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("transform", parents=[common], help="Fourier transform a function file")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--fast", dest="naive", action="store_false")
    mode.add_argument("--naive", dest="naive", action="store_true")
    p.set_defaults(func=cmd_transform, naive=False)

    p = sub.add_parser("verify", parents=[common], help="run the characterization battery")
    p.add_argument("files", nargs="+")
    p.add_argument("--jmax", type=int, default=None)
    p.add_argument("--smax", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dimension", parents=[common], help="dimension function on a cover of O")
    p.add_argument("files", nargs="+")
    p.add_argument("--rel", type=int, default=None)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("gramian", parents=[common], help="truncated dual Gramian slices")
    p.add_argument("files", nargs="+")
    p.add_argument("--S", type=int, default=3)
    p.add_argument("--cell", type=int, default=None)
    p.set_defaults(func=cmd_gramian)

    p = sub.add_parser("mra", parents=[common], help="MRA criterion and scaling-function recovery")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_mra)

    p = sub.add_parser("frame-bounds", parents=[common], help="frame bounds from Gramian spectra")
    p.add_argument("files", nargs="+")
    p.add_argument("--S", type=int, default=3)
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials for the Bessel estimate (0 = skip)")
    p.add_argument("--J", type=int, default=4)
    p.set_defaults(func=cmd_frame_bounds)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FormatError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc.strerror}: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except LFWaveletError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
