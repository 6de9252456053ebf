"""Command-line front end: run | predict | fit | sweep | serve.

The CLI is a thin client of the HTTP API: math happens behind the service
(hosted in-process by default, or remotely via --server), while this module
owns flag parsing, CSV persistence, and exit codes:

    0  clean halt          4  I/O failure
    2  bad flags           5  extraction undefined (trace not collapsing)
    3  blow-up before any sample is recorded
    6  sweep with every row failed

The default output root is $SLOWBLOW_OUT (falling back to ./slowblow-out),
with one subdirectory per command; --out overrides it.  A manifest.csv is
written last in each run directory, so its presence marks a complete set of
artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .client import ServiceClient, ServiceError
from .csvio import read_columns, read_csv, write_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BLOWUP_EARLY = 3
EXIT_IO = 4
EXIT_EXTRACTION = 5
EXIT_SWEEP_EMPTY = 6

MANIFEST_COLUMNS = [
    "tool_version", "created_at", "command", "halt_reason", "steps",
    "f0", "v0", "dr", "dt", "r_max", "corrector_iters", "stop_height",
    "max_steps", "sample_every", "slice_times", "backend", "server",
]


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _out_dir(args, command: str) -> Path:
    if args.out:
        return Path(args.out)
    root = os.environ.get("SLOWBLOW_OUT", "slowblow-out")
    return Path(root) / command


def _write_manifest(out: Path, command: str, *, halt_reason="", steps="",
                    cfg: dict | None = None, backend="", server="") -> None:
    cfg = cfg or {}
    row = [
        __version__,
        datetime.now(timezone.utc).isoformat(),
        command,
        halt_reason,
        steps,
        cfg.get("f0", ""),
        cfg.get("v0", ""),
        cfg.get("dr", ""),
        cfg.get("dt", ""),
        cfg.get("r_max", ""),
        cfg.get("corrector_iters", ""),
        cfg.get("stop_height", ""),
        cfg.get("max_steps", ""),
        cfg.get("sample_every", ""),
        ";".join(format(t, ".17g") for t in cfg.get("slice_times", [])),
        backend,
        server or "in-process",
    ]
    write_csv(out / "manifest.csv", MANIFEST_COLUMNS, [row])


def _read_manifest_value(path: Path, column: str) -> str | None:
    manifest = path / "manifest.csv"
    if not manifest.exists():
        return None
    header, rows = read_csv(manifest)
    if column not in header or not rows:
        return None
    value = rows[0][header.index(column)]
    return value if value != "" else None


def _write_trace_csv(out: Path, trace: dict) -> None:
    write_csv(out / "trace.csv", ["t", "f_origin"],
              zip(trace["t"], trace["f_origin"]))


def _write_slices_csv(out: Path, slices: list[dict], dr: float) -> None:
    rows = []
    for sl in slices:
        for j, value in enumerate(sl["values"]):
            rows.append((sl["t"], j * dr, value))
    write_csv(out / "slices.csv", ["t", "r", "f"], rows)


def _write_fit_csv(out: Path, ex: dict) -> None:
    write_csv(out / "fit.csv",
              ["m", "b", "rms", "c", "R", "window_lo", "window_hi"],
              [(ex["slope"], ex["intercept"], ex["rms_residual"],
                ex["c"], ex["cutoff"], ex["window_lo"], ex["window_hi"])])


def _read_trace_csv(path: Path) -> dict:
    t, f = read_columns(path, ["t", "f_origin"])
    return {"t": t, "f_origin": f}


# ---------------------------------------------------------------------------
# subcommands

def cmd_run(args) -> int:
    payload = dict(
        f0=args.f0, v0=args.v0, dr=args.dr, dt=args.dt, r_max=args.rmax,
        corrector_iters=args.iters, stop_height=args.stop_height,
        max_steps=args.max_steps, sample_every=args.sample_every,
        slice_times=_parse_floats(args.slice_times) if args.slice_times else [],
        backend=args.backend,
    )
    with ServiceClient(args.server) as client:
        body = client.run(payload)
    out = _out_dir(args, "run")
    _write_trace_csv(out, body["trace"])
    _write_slices_csv(out, body["slices"], body["grid"]["dr"])
    _write_manifest(out, "run", halt_reason=body["halt_reason"],
                    steps=body["steps"],
                    cfg={**payload, "stop_height": body["stop_height"]},
                    backend=args.backend, server=args.server)
    trace = body["trace"]
    print(f"halted: {body['halt_reason']} after {body['steps']} steps; "
          f"f(0) = {trace['f_origin'][-1]:.6g} at t = {trace['t'][-1]:.6g}; "
          f"wrote {out}/trace.csv")
    if body["halt_reason"] == "blow_up_passed" and len(trace["t"]) <= 1:
        print("blow-up crossed before any sample was recorded", file=sys.stderr)
        return EXIT_BLOWUP_EARLY
    return EXIT_OK


def cmd_predict(args) -> int:
    if args.from_fit:
        fit_path = Path(args.from_fit)
        (c_vals, r_vals) = read_columns(fit_path, ["c", "R"])
        c, cutoff = c_vals[0], r_vals[0]
        f0 = args.f0
        if f0 is None:
            text = _read_manifest_value(fit_path.parent, "f0")
            if text is None:
                print("predict: --f0 required (no manifest.csv beside the fit file)",
                      file=sys.stderr)
                return EXIT_USAGE
            f0 = float(text)
    else:
        if args.c is None or args.R is None or args.f0 is None:
            print("predict: provide --c, --R and --f0 (or --from-fit)",
                  file=sys.stderr)
            return EXIT_USAGE
        c, cutoff, f0 = args.c, args.R, args.f0

    payload = dict(c=c, cutoff=cutoff, f0=f0)
    if args.times:
        payload["times"] = _parse_floats(args.times)
    else:
        payload["num_points"] = args.num_points
        if args.t_max is not None:
            payload["t_max"] = args.t_max
    compare_trace = None
    if args.compare:
        compare_trace = _read_trace_csv(Path(args.compare))
        payload["compare"] = compare_trace
        payload["compare_points"] = args.compare_points

    with ServiceClient(args.server) as client:
        body = client.predict(payload)

    out = _out_dir(args, "predict")
    ok_points = [p for p in body["points"] if p.get("f") is not None]
    for p in body["points"]:
        if p.get("error"):
            print(f"t = {p['t']:g}: {p['error']}", file=sys.stderr)
    if body.get("overlay"):
        ov = body["overlay"]
        rows = [(t, fp, fs, abs(fp - fs))
                for t, fp, fs in zip(ov["t"], ov["f_predicted"], ov["f_simulated"])]
        write_csv(out / "predicted.csv",
                  ["t", "f_predicted", "f_sim", "abs_gap"], rows)
        print(f"predicted {len(ok_points)} points; horizon t_max = "
              f"{body['horizon']:.6g}; max |f_pred - f_sim| = {ov['max_abs_gap']:.6g}")
    else:
        write_csv(out / "predicted.csv", ["t", "f_predicted"],
                  [(p["t"], p["f"]) for p in ok_points])
        print(f"predicted {len(ok_points)} points; horizon t_max = "
              f"{body['horizon']:.6g}")
    print(f"wrote {out}/predicted.csv")
    return EXIT_OK


def cmd_fit(args) -> int:
    if not args.trace and not args.slices:
        print("fit: provide --trace and/or --slices", file=sys.stderr)
        return EXIT_USAGE
    out = _out_dir(args, "fit")
    code = EXIT_OK
    with ServiceClient(args.server) as client:
        if args.trace:
            trace_path = Path(args.trace)
            trace = _read_trace_csv(trace_path)
            payload = dict(trace=trace)
            if args.t_lo is not None and args.t_hi is not None:
                payload.update(t_lo=args.t_lo, t_hi=args.t_hi)
            stop_height = args.stop_height
            if stop_height is None:
                text = _read_manifest_value(trace_path.parent, "stop_height")
                stop_height = float(text) if text is not None else None
            if stop_height is not None:
                payload["stop_height"] = stop_height
            try:
                ex = client.extract(payload)
                _write_fit_csv(out, ex)
                print(f"extracted c = {ex['c']:.6g}, R = {ex['cutoff']:.6g} "
                      f"(m = {ex['slope']:.6g}, b = {ex['intercept']:.6g}, "
                      f"rms = {ex['rms_residual']:.6g}, n = {ex['n_points']}, "
                      f"window = [{ex['window_lo']:.6g}, {ex['window_hi']:.6g}])")
            except ServiceError as exc:
                if exc.code == "extraction_undefined":
                    print(f"extraction undefined: {exc.message} "
                          f"(window = {args.t_lo}..{args.t_hi})", file=sys.stderr)
                    code = EXIT_EXTRACTION
                else:
                    raise
        if args.slices:
            header, rows = read_csv(Path(args.slices))
            it, ir, iv = header.index("t"), header.index("r"), header.index("f")
            by_t: dict[float, list[tuple[float, float]]] = {}
            for row in rows:
                by_t.setdefault(float(row[it]), []).append(
                    (float(row[ir]), float(row[iv])))
            slices = []
            dr = None
            for t in sorted(by_t):
                pts = sorted(by_t[t])
                if dr is None and len(pts) > 1:
                    dr = pts[1][0] - pts[0][0]
                slices.append(dict(t=t, values=[v for _, v in pts]))
            if dr is None:
                print("fit: slices file holds no usable profiles", file=sys.stderr)
                return EXIT_USAGE
            payload = dict(dr=dr, slices=slices)
            if args.window_r is not None:
                payload["window_r"] = args.window_r
            else:
                text = _read_manifest_value(Path(args.slices).parent, "f0")
                if text is None:
                    print("fit: --window-r required (no manifest.csv beside the "
                          "slices file to infer f0)", file=sys.stderr)
                    return EXIT_USAGE
                payload["f0"] = float(text)
            body = client.hyperbola(payload)
            write_csv(out / "hyperbola.csv",
                      ["T", "a", "b", "k", "minus_b_over_a", "rms"],
                      [(r["t"], r["a"], r["b"], r["k"], r["minus_b_over_a"],
                        r["rms_residual"]) for r in body["rows"]])
            for r in body["rows"]:
                if r.get("error"):
                    print(f"T = {r['t']:g}: fit failed: {r['error']}",
                          file=sys.stderr)
                else:
                    print(f"T = {r['t']:g}: a = {r['a']:.6g}, b = {r['b']:.6g}, "
                          f"k = {r['k']:.6g}, -b/a = {r['minus_b_over_a']:.6g}, "
                          f"rms = {r['rms_residual']:.6g}")
            if body.get("trend"):
                tr = body["trend"]
                print(f"-b/a trend: slope = {tr['slope']:.6g}, intercept = "
                      f"{tr['intercept']:.6g}, rms = {tr['rms_residual']:.6g}")
    return code


def cmd_sweep(args) -> int:
    values = _parse_floats(args.values)
    payload = dict(
        vary=args.vary, values=values, dr=args.dr, dt=args.dt, r_max=args.rmax,
        corrector_iters=args.iters, stop_height=args.stop_height,
        max_steps=args.max_steps, sample_every=args.sample_every,
        jobs=args.jobs, rmax_scale=args.rmax_scale, backend=args.backend,
    )
    if args.vary == "v0":
        if args.f0 is None:
            print("sweep: --vary v0 requires --f0", file=sys.stderr)
            return EXIT_USAGE
        payload["f0"] = args.f0
    else:
        if args.v0 is None:
            print("sweep: --vary f0 requires --v0", file=sys.stderr)
            return EXIT_USAGE
        payload["v0"] = args.v0

    with ServiceClient(args.server) as client:
        body = client.sweep(payload)

    out = _out_dir(args, "sweep")
    rows = body["rows"]
    n_ok = 0
    sweep_rows = []
    for value, row in zip(values, rows):
        row_dir = out / f"{args.vary}_{value:g}"
        if row.get("trace"):
            _write_trace_csv(row_dir, row["trace"])
        if row.get("c") is not None:
            n_ok += 1
            _write_fit_csv(row_dir, dict(
                slope=row["fit_slope"], intercept=row["fit_intercept"],
                rms_residual=row["fit_rms"], c=row["c"], cutoff=row["cutoff"],
                window_lo=row["window_lo"], window_hi=row["window_hi"]))
        else:
            print(f"{args.vary} = {value:g}: {row.get('error') or 'no extraction'}",
                  file=sys.stderr)
        _write_manifest(row_dir, "sweep-row",
                        halt_reason=row.get("halt_reason") or "",
                        steps="",
                        cfg=dict(f0=row["f0"], v0=row["v0"], dr=row["dr"],
                                 dt=row["dt"], r_max=row["r_max"],
                                 corrector_iters=args.iters,
                                 stop_height=row["stop_height"],
                                 max_steps=args.max_steps,
                                 sample_every=args.sample_every,
                                 slice_times=[]),
                        backend=args.backend, server=args.server)
        sweep_rows.append((row["v0"], row["f0"], row["dr"], row["dt"],
                           row["r_max"], row.get("c"), row.get("cutoff"),
                           row.get("fit_rms"), row.get("window_lo"),
                           row.get("window_hi")))
    write_csv(out / "sweep.csv",
              ["v0", "f0", "dr", "dt", "r_max", "c", "R", "fit_rms",
               "window_lo", "window_hi"],
              sweep_rows)
    if body.get("rinv"):
        rinv = body["rinv"]
        write_csv(out / "rinv.csv", ["inv_abs_v0", "R"],
                  zip(rinv["inv_abs_v0"], rinv["cutoff"]))
        fit = rinv["fit"]
        write_csv(out / "rinv_fit.csv", ["m", "b", "rms", "n_points"],
                  [(fit["slope"], fit["intercept"], fit["rms_residual"],
                    fit["n_points"])])
        print(f"R vs 1/|v0|: slope = {fit['slope']:.6g}, intercept = "
              f"{fit['intercept']:.6g}")
    print(f"sweep complete: {n_ok}/{len(rows)} rows extracted; wrote {out}/sweep.csv")
    return EXIT_OK if n_ok > 0 else EXIT_SWEEP_EMPTY


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slowblow",
        description="Soliton collapse runs, cutoff-Lagrangian predictions and fits.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--server", default=None,
                       help="base URL of a running service (default: in-process)")
        p.add_argument("--out", default=None, help="output directory")

    def add_grid(p):
        p.add_argument("--dr", type=float, default=0.01)
        p.add_argument("--dt", type=float, default=0.001)
        p.add_argument("--rmax", type=float, default=100.0)
        p.add_argument("--iters", type=int, default=4,
                       help="corrector passes per step")
        p.add_argument("--stop-height", type=float, default=None,
                       help="halt when f(0) falls to this (default 0.05 f0)")
        p.add_argument("--max-steps", type=int, default=2_000_000)
        p.add_argument("--sample-every", type=int, default=1)
        p.add_argument("--backend", choices=["auto", "numba", "numpy"],
                       default="auto")

    p = sub.add_parser("run", help="evolve one collapse and persist its artifacts")
    p.add_argument("--f0", type=float, required=True)
    p.add_argument("--v0", type=float, required=True)
    add_grid(p)
    p.add_argument("--slice-times", default=None,
                   help="comma-separated times at which to snapshot f(r, .)")
    add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("predict", help="trajectory predicted by the speed law")
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--R", type=float, default=None, dest="R")
    p.add_argument("--f0", type=float, default=None)
    p.add_argument("--from-fit", default=None,
                   help="read c and R from a fit.csv")
    p.add_argument("--times", default=None, help="comma-separated times")
    p.add_argument("--num-points", type=int, default=50)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--compare", default=None,
                   help="trace.csv to overlay against the prediction")
    p.add_argument("--compare-points", type=int, default=201)
    add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("fit", help="extract (c, R) and/or fit slice hyperbolas")
    p.add_argument("--trace", default=None, help="trace.csv to extract from")
    p.add_argument("--t-lo", type=float, default=None)
    p.add_argument("--t-hi", type=float, default=None)
    p.add_argument("--stop-height", type=float, default=None)
    p.add_argument("--slices", default=None, help="slices.csv for hyperbola fits")
    p.add_argument("--window-r", type=float, default=None)
    add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="run and extract across several v0 or f0")
    p.add_argument("--vary", choices=["v0", "f0"], required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated values; use --values=-0.01,... when "
                        "the first one is negative")
    p.add_argument("--f0", type=float, default=None)
    p.add_argument("--v0", type=float, default=None)
    add_grid(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--rmax-scale", choices=["fixed", "sqrt_f0"], default="fixed")
    add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="host the HTTP API with uvicorn")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ServiceError as exc:
        if exc.code == "extraction_undefined":
            print(f"extraction undefined: {exc.message}", file=sys.stderr)
            return EXIT_EXTRACTION
        if exc.code in ("invalid_config", "insufficient_data") or exc.status_code == 422:
            print(f"invalid request: {exc.message or exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"service error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        name = getattr(exc, "filename", None) or "output"
        print(f"I/O failure on {name}: {exc}", file=sys.stderr)
        return EXIT_IO
    except KeyError as exc:
        print(f"malformed input file: missing {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
