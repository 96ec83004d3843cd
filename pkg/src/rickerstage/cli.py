"""Command-line entry point: ``ricker <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 domain/precondition, 4 numeric overflow,
5 I/O.  Failures print one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import bifurcate as bif
from . import lineig, semiconj, simulate
from .core import DomainError, NumericOverflow, PeriodicSeq, ReducedParams, RickerSystem
from .io import atomic_writer, fmt

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_OVERFLOW, EXIT_IO = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    def _get_help_string(self, action):
        if action.default is None or action.required:
            return action.help
        return super()._get_help_string(action)


@dataclass
class RunConfig:
    subcommand: str
    args: argparse.Namespace
    system_file: Optional[str] = None
    out_path: Optional[str] = None
    format: str = "json"


def _floats(text: str):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ricker", description="Stage-structured Ricker model toolkit.")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)

    s = sub.add_parser("simulate", help="iterate the planar system or the scalar form to CSV",
                       formatter_class=_HelpFormatter)
    s.add_argument("--system", help="JSON file with alpha, beta, sigma1, sigma2, c1, c2 "
                   "(dimensionless rates; scalar or list per key)")
    s.add_argument("--x0", type=float, default=1.0, help="initial stage-1 density")
    s.add_argument("--y0", type=float, default=1.0, help="initial stage-2 density")
    s.add_argument("--reduced", action="store_true",
                   help="iterate r[n+1] = r[n-1] exp(d[n] - r[n-1] - r[n]) instead")
    s.add_argument("--d", type=_floats, help="exponent d (comma list for periodic d)")
    s.add_argument("--rm1", type=float, default=None, help="r_{-1} for --reduced")
    s.add_argument("--r0", type=float, default=None, help="r_0 for --reduced")
    s.add_argument("--steps", type=int, default=100, help="number of iterations")
    s.add_argument("--out", required=True, help="output CSV path")

    e = sub.add_parser("eigenseq", help="eigensequence of u[n+1] = a_n u[n] + b_n u[n-1]",
                       formatter_class=_HelpFormatter)
    e.add_argument("--a", type=_floats, required=True, help="a_1..a_p1, comma separated")
    e.add_argument("--b", type=_floats, required=True, help="b_1..b_p2, comma separated")
    e.add_argument("--report", action="store_true",
                   help="full JSON: delta, theta, quadratic, eigensequence, criteria")

    a = sub.add_parser("analyze", help="factorization analyses of the autonomous scalar form",
                       formatter_class=_HelpFormatter)
    a.add_argument("--d", type=float, required=True, help="constant exponent d")
    a.add_argument("--rm1", type=float, default=None, help="r_{-1} (default d/2)")
    a.add_argument("--r0", type=float, default=None, help="r_0 (default r_{-1} exp(-r_{-1}))")
    a.add_argument("--mode", choices=("factorize", "cycle", "twocycle", "period3", "embed"),
                   default="factorize", help="which analysis to run")
    a.add_argument("--steps", type=int, default=1000, help="iterations for orbit checks")
    a.add_argument("--transient", type=int, default=semiconj.TRANSIENT,
                   help="iterations discarded before cycle detection")
    a.add_argument("--max-period", type=int, default=semiconj.MAX_PERIOD,
                   help="longest period searched for")
    a.add_argument("--tol", type=float, default=semiconj.CYCLE_TOL,
                   help="relative tolerance for cycle detection")
    a.add_argument("--c0", type=float, default=None,
                   help="embed mode: first coefficient of the period-2 equation (default d/2)")
    a.add_argument("--json", dest="out", default=None, help="write JSON here instead of stdout")

    b = sub.add_parser("bifurcate", help="r_0 scan of the autonomous scalar form to CSV",
                       formatter_class=_HelpFormatter)
    b.add_argument("--d", type=float, required=True, help="constant exponent d")
    b.add_argument("--rm1", type=float, required=True, help="fixed r_{-1}")
    b.add_argument("--r0-lo", type=float, required=True, help="lower end of the r_0 grid")
    b.add_argument("--r0-hi", type=float, required=True, help="upper end of the r_0 grid")
    b.add_argument("--grid", type=int, default=400, help="number of r_0 values")
    b.add_argument("--transient", type=int, default=2000, help="discarded iterations")
    b.add_argument("--keep", type=int, default=300, help="kept iterates per r_0")
    b.add_argument("--max-period", type=int, default=semiconj.MAX_PERIOD,
                   help="longest period before a row is labelled aperiodic")
    b.add_argument("--workers", type=int, default=None,
                   help="process count (default: $RICKER_THREADS or 1)")
    b.add_argument("--out", default="scan.csv", help="output CSV path")

    x = sub.add_parser("extinct", help="combined extinction verdict for a system file",
                       formatter_class=_HelpFormatter)
    x.add_argument("--system", required=True, help="JSON system file")
    x.add_argument("--json", dest="out", default=None, help="write JSON here instead of stdout")
    return p


def parse_args(argv) -> RunConfig:
    parser = build_parser()
    if not argv:
        raise UsageError(parser.format_usage().strip())
    ns = parser.parse_args(argv)
    if ns.subcommand is None:
        raise UsageError(parser.format_usage().strip())
    cfg = RunConfig(ns.subcommand, ns, getattr(ns, "system", None), getattr(ns, "out", None))
    if ns.subcommand in ("simulate", "bifurcate"):
        cfg.format = "csv"
    if ns.subcommand == "simulate":
        if ns.steps < 0:
            raise UsageError("--steps must be non-negative")
        if ns.reduced:
            if ns.d is None or ns.rm1 is None or ns.r0 is None:
                raise UsageError("--reduced needs --d, --rm1 and --r0")
        elif ns.system is None:
            raise UsageError("simulate needs --system (or --reduced)")
    if cfg.system_file is not None:
        try:
            with open(cfg.system_file):
                pass
        except OSError as exc:
            raise UsageError(f"cannot read {cfg.system_file}: {exc.strerror}")
    return cfg


def _emit_json(obj, out):
    text = json.dumps(obj, indent=2, default=_json_default)
    if out:
        with atomic_writer(out) as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _run_simulate(ns):
    if ns.reduced:
        orbit = simulate.iterate_reduced(ns.rm1, ns.r0, ReducedParams(PeriodicSeq(tuple(ns.d))),
                                         ns.steps)
        header, rows = ("n", "r"), ([n, fmt(v)] for n, v in zip(orbit.indices, orbit.values))
    else:
        sys_ = RickerSystem.from_json(ns.system)
        orbit = simulate.iterate_planar(ns.x0, ns.y0, sys_, ns.steps)
        header = ("n", "x", "y")
        rows = ([n, fmt(x), fmt(y)] for n, (x, y) in zip(orbit.indices, orbit.values))
    with atomic_writer(ns.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    meta = {"subcommand": "simulate", "out": ns.out, "rows": len(orbit),
            "exp_cap": simulate.EXP_CAP, "reduced": ns.reduced}
    print(json.dumps(meta))


def _run_eigenseq(ns):
    lc = lineig.LinearCoeffs(PeriodicSeq(tuple(ns.a)), PeriodicSeq(tuple(ns.b)))
    ed = lineig.delta_theta(lc)
    out = {"p": lc.p, "meta": {"periodicity_rtol": lineig.PERIODICITY_RTOL}}
    try:
        ed = lineig.eigensequence(lc)
        out.update(r=ed.r.tolist(), product=ed.product)
    except lineig.NoRealEigensequence as exc:
        out.update(r=None, product=None, eigensequence_error=str(exc))
    if ns.report:
        out.update(ed.to_dict())
        out["criteria"] = {"alb": lineig.criterion_alb(ed)}
        if lc.p == 2:
            (a1, a2), (b1, b2) = lc.a.tabulate(2), lc.b.tabulate(2)
            out["criteria"]["p2"] = lineig.criterion_p2(a1, a2, b1, b2)
    _emit_json(out, None)


def _run_analyze(ns):
    d = ns.d
    rm1 = ns.rm1 if ns.rm1 is not None else d / 2
    r0 = ns.r0 if ns.r0 is not None else rm1 * math.exp(-rm1)
    meta = {"transient": ns.transient, "max_period": ns.max_period, "tol": ns.tol,
            "steps": ns.steps}
    if ns.mode == "factorize":
        out = semiconj.verify_factorization(rm1, r0, d, ns.steps)
    elif ns.mode == "cycle":
        t0 = semiconj.compute_t0(rm1, r0)
        cr = semiconj.detect_cycle(semiconj.MapConfig(d, t0), rm1, ns.transient,
                                   ns.max_period, ns.tol)
        out = {"d": d, "r_m1": rm1, "r0": r0, "t0": t0, "cycle": cr.to_dict()}
        if cr.converged:
            out["shadow"] = semiconj.shadow_cycle(cr, d, t0).to_dict()
            lifted = semiconj.lift_cycle(cr, d, t0)
            out["lifted"] = {"points": lifted,
                             "period": semiconj.minimal_period(lifted * 2, ns.tol, len(lifted))}
    elif ns.mode == "twocycle":
        out = semiconj.two_cycle_rmsa(d, rm1, r0).to_dict()
    elif ns.mode == "period3":
        t0 = semiconj.compute_t0(rm1, r0)
        g = semiconj.period3_witness(d)
        f = semiconj.period3_witness(d, t0)
        out = {"d": d, "t0": t0, "g": g.__dict__, "f_t0": f.__dict__,
               "grid": semiconj.PERIOD3_GRID}
    else:
        c0 = ns.c0 if ns.c0 is not None else d / 2
        out = semiconj.embed_first_order(c0, d - c0, rm1, ns.steps)
        out.pop("first_order")
        out.pop("second_order")
    out["meta"] = meta
    out["mode"] = ns.mode
    _emit_json(out, ns.out)


def _run_bifurcate(ns):
    spec = bif.ScanSpec(ns.d, ns.rm1, ns.r0_lo, ns.r0_hi, ns.grid, ns.transient, ns.keep,
                        ns.max_period)
    rows = bif.run_scan(spec, ns.workers)
    bif.emit_csv(rows, ns.out)
    meta = {"subcommand": "bifurcate", "out": ns.out, "rows": len(rows),
            "spec": spec.__dict__, "periods": bif.period_summary(rows)}
    print(json.dumps(meta))


def extinction_verdict(sys_: RickerSystem) -> dict:
    c0 = simulate.check_c0(sys_)
    bext = lineig.check_bext(sys_)
    criterion = "c0" if c0.holds else ("alb" if bext.extinct else None)
    return {"extinct": bool(c0.holds or bext.extinct), "criterion": criterion,
            "mean_sigma2": bext.mean_sigma2,
            "c0": {"holds": c0.holds, "limsup": c0.limsup},
            "bext": bext.to_dict()}


def _run_extinct(ns):
    _emit_json(extinction_verdict(RickerSystem.from_json(ns.system)), ns.out)


_HANDLERS = {"simulate": _run_simulate, "eigenseq": _run_eigenseq, "analyze": _run_analyze,
             "bifurcate": _run_bifurcate, "extinct": _run_extinct}


def _fail(code, kind, message, subcommand=None):
    print(json.dumps({"error": kind, "message": message, "subcommand": subcommand,
                      "exit_code": code}), file=sys.stderr)
    return code


def run(config: RunConfig) -> int:
    try:
        _HANDLERS[config.subcommand](config.args)
    except NumericOverflow as exc:
        return _fail(EXIT_OVERFLOW, "overflow", str(exc), config.subcommand)
    except (DomainError, ArithmeticError, json.JSONDecodeError) as exc:
        return _fail(EXIT_DOMAIN, "domain", str(exc), config.subcommand)
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc), config.subcommand)
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
