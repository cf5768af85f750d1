"""Experiment driver.

Exit codes: 0 on success, 1 on usage or domain errors, 2 when a check is
violated (a Blum-Hanson premise without its conclusion, or a rake bound that
fails inside its valid regime).
"""
from __future__ import annotations

import argparse
import io
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis, dynamics
from .config import (
    params_from_mapping,
    parse_levels,
    parse_rake,
    parse_set,
    parse_windows,
    read_config,
)
from .construction import ExplicitList, StageTable, build_stage_table, validate
from .errors import SpecSyntaxError, StaircaseError
from .intervals import fmt, parse_rational
from .parallel import default_jobs
from .svg import render_profile

DEFAULT_TOL = Fraction(1, 2**20)
DEFAULT_DEPTH = 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("construction")
    g.add_argument("--config", help="key = value file (h1, cuts, spacers, base_width, ...)")
    g.add_argument("--h1")
    g.add_argument("--cuts", help="list:2,3,4 | affine:a,b | equal-height")
    g.add_argument("--spacers", help="staircase | const:k | file:<path>")
    g.add_argument("--base-width", dest="base_width")
    g.add_argument("--stages", type=int, help="stages to build before running")
    p.add_argument("--mode", choices=["probability", "infinite"])
    p.add_argument("--mu-ref", dest="mu_ref")
    p.add_argument("--tol")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="staircase", description="Staircase cutting-and-stacking experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stages", help="print the stage table")
    _common(p)

    p = sub.add_parser("measure", help="enclosure of mu(T^m A & B)")
    _common(p)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--via", choices=["image", "preimage"], default="image")

    p = sub.add_parser("sweep", help="mixing sweep over seeded windows (CSV)")
    _common(p)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--windows", required=True, help="stage indices and/or lo..hi ranges of m")
    p.add_argument("--samples", type=int, default=64)

    p = sub.add_parser("delays", help="delay decomposition and case ratios (CSV)")
    _common(p)
    p.add_argument("--ms", help="m values, e.g. 50,100..120")
    p.add_argument("--windows")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--zero-below", dest="zero_below", default="1/10")
    p.add_argument("--inf-above", dest="inf_above", default="10")

    p = sub.add_parser("profile", help="delay profile of T^m on stage j (CSV + SVG)")
    _common(p)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--svg", help="SVG path (default: next to --out)")

    p = sub.add_parser("rake-check", help="rake-conditioned discrepancy vs Cesaro bound")
    _common(p)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--rake", required=True, help="j=<j>;s=<s>;L=<L>;step=<q>;levels=<lo>..<hi>")
    p.add_argument("--delta", required=True)

    p = sub.add_parser("bh-check", help="Blum-Hanson inequality on certified correlations")
    _common(p)
    p.add_argument("--B", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--eps", required=True)

    p = sub.add_parser("good-density", help="fraction of eps-good delays")
    _common(p)
    p.add_argument("--B", required=True)
    p.add_argument("--d-range", dest="d_range", required=True, help="lo..hi")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--eps", required=True)

    p = sub.add_parser("find-q", help="multiplier q with q*d in [h_p, 2h_p]")
    _common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--stage-p", dest="stage_p", type=int)
    return parser


# ------------------------------------------------------------------ setup


def _settings(args) -> dict:
    cfg: dict = {}
    base_dir = None
    if args.config:
        cfg = read_config(args.config)
        base_dir = Path(args.config).parent
    for key in ("h1", "cuts", "spacers", "base_width"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    for key in ("mode", "mu_ref", "tol", "seed", "out", "jobs", "stages"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["_base_dir"] = base_dir
    return cfg


def _table(cfg: dict) -> StageTable:
    params = params_from_mapping(cfg, cfg.get("_base_dir"))
    if "stages" in cfg:
        depth = int(cfg["stages"])
    elif isinstance(params.cuts, ExplicitList):
        depth = len(params.cuts.values) + 1
    else:
        depth = DEFAULT_DEPTH
    return build_stage_table(params, depth)


def _mode(cfg: dict):
    kind = str(cfg.get("mode", "probability")).lower()
    if kind == "infinite":
        return dynamics.Infinite()
    if kind != "probability":
        raise SpecSyntaxError(f"mode must be probability or infinite, got {kind!r}")
    mu = cfg.get("mu_ref")
    return dynamics.Probability(parse_rational(mu) if mu is not None else None)


def _tol(cfg: dict) -> Fraction:
    tol = parse_rational(cfg["tol"]) if "tol" in cfg else DEFAULT_TOL
    if tol <= 0:
        raise SpecSyntaxError("tolerance must be positive")
    return tol


def _jobs(cfg: dict) -> int:
    return int(cfg["jobs"]) if "jobs" in cfg else default_jobs()


def _set(table: StageTable, text: str):
    return validate(table, parse_set(text))


def _range(text: str) -> tuple:
    vals = str(text).split("..")
    if len(vals) != 2:
        raise SpecSyntaxError(f"expected lo..hi, got {text!r}")
    try:
        return int(vals[0]), int(vals[1])
    except ValueError as exc:
        raise SpecSyntaxError(f"expected lo..hi, got {text!r}") from exc


def _bool(x: bool) -> str:
    return "true" if x else "false"


# --------------------------------------------------------------- commands


def cmd_stages(args, cfg, out):
    table = _table(cfg)
    out.write("j,h,r,w,total\n")
    for st in table.stages:
        r = "" if st.r is None else str(st.r)
        out.write(f"{st.j},{st.h},{r},{fmt(st.w)},{fmt(st.total)}\n")
    return 0


def cmd_measure(args, cfg, out):
    table = _table(cfg)
    A, B = _set(table, args.A), _set(table, args.B)
    iv = dynamics.measure_intersection(table, A, B, args.m, _tol(cfg), via=args.via)
    out.write(f"{iv}\n")
    return 0


def _prepare_windows(table: StageTable, windows: list) -> None:
    # writer phase: every stage a window refers to, plus the one above it
    for w in windows:
        if isinstance(w, int):
            table.ensure(w + 1)


def cmd_sweep(args, cfg, out):
    table = _table(cfg)
    A, B = _set(table, args.A), _set(table, args.B)
    windows = parse_windows(args.windows)
    _prepare_windows(table, windows)
    mode = dynamics.resolve_mode(table, _mode(cfg))
    recs = analysis.mixing_sweep(table, A, B, windows, args.samples, int(cfg.get("seed", 0)), mode,
                                 _tol(cfg), jobs=_jobs(cfg))
    out.write("m,lo,hi,target,residual_hi\n")
    for rec in recs:
        out.write(f"{rec.m},{fmt(rec.interval.lo)},{fmt(rec.interval.hi)},{fmt(rec.target)},"
                  f"{fmt(rec.residual_to_target)}\n")
    return 0


def cmd_delays(args, cfg, out):
    table = _table(cfg)
    ms: set = set()
    if args.ms:
        ms.update(parse_levels(args.ms))
    if args.windows:
        windows = parse_windows(args.windows)
        _prepare_windows(table, windows)
        for w in windows:
            lo, hi = analysis.window_range(table, w)
            ms.update(analysis.sample_window(lo, hi, args.samples, int(cfg.get("seed", 0))))
    if not ms:
        raise UsageError("delays needs --ms or --windows")
    thresholds = (parse_rational(args.zero_below), parse_rational(args.inf_above))
    recs = analysis.classify_case(table, sorted(ms), thresholds)
    out.write("m,j,h,d,t,ratio,tag\n")
    for rec in recs:
        out.write(f"{rec.m},{rec.j},{table.stage(rec.j).h},{rec.d},{rec.t},{fmt(rec.ratio)},{rec.tag}\n")
    return 0


def cmd_profile(args, cfg, out):
    table = _table(cfg)
    prof = analysis.delay_profile(table, args.j, args.m)
    out.write("col_from,col_to,landing,delay\n")
    for seg in prof.segments:
        land = str(seg.landing) if seg.kind == analysis.TOWER else seg.kind
        delay = str(seg.delay) if seg.kind == analysis.TOWER else "boundary"
        out.write(f"{seg.first_column},{seg.last_column},{land},{delay}\n")
    svg_path = args.svg
    if svg_path is None and cfg.get("out"):
        svg_path = str(Path(cfg["out"]).with_suffix(".svg"))
    if svg_path:
        Path(svg_path).write_text(render_profile(prof))
    return 0


def cmd_rake_check(args, cfg, out):
    table = _table(cfg)
    A, B = _set(table, args.A), _set(table, args.B)
    rake = analysis.build_rake(table, **parse_rake(args.rake))
    mode = dynamics.resolve_mode(table, _mode(cfg))
    rep = analysis.rake_bound_check(table, A, B, args.m, rake, parse_rational(args.delta), mode, _tol(cfg))
    out.write(f"rake,{rake.to_spec()}\n")
    out.write(f"lhs,{rep.lhs}\nrhs,{rep.rhs}\n")
    out.write(f"d,{rep.d}\nshift,{rep.shift}\nmeasure_rake,{fmt(rep.measure_rake)}\n")
    out.write(f"band_ok,{_bool(rep.band_ok)}\nin_single_domain,{_bool(rep.in_single_domain)}\n")
    out.write(f"valid_regime,{_bool(rep.valid_regime)}\nholds,{_bool(rep.holds)}\n")
    if isinstance(mode, dynamics.Probability):
        out.write(f"mu_ref,{fmt(mode.mu_ref)}\n")
    return 2 if rep.valid_regime and not rep.holds else 0


def cmd_bh_check(args, cfg, out):
    table = _table(cfg)
    B = _set(table, args.B)
    mode = dynamics.resolve_mode(table, _mode(cfg))
    rep = dynamics.blum_hanson_check(table, B, args.d, args.L, parse_rational(args.eps), mode, _tol(cfg))
    out.write(f"max_cross,{rep.max_cross}\nnorm_sq,{rep.norm_sq}\n")
    out.write(f"bound,{fmt(rep.bound)}\nsharp_bound,{fmt(rep.sharp_bound)}\n")
    out.write(f"premise_holds,{_bool(rep.premise_holds)}\nconclusion_holds,{_bool(rep.conclusion_holds)}\n")
    out.write(f"sharp_conclusion_holds,{_bool(rep.sharp_conclusion_holds)}\n")
    if rep.mu_ref is not None:
        out.write(f"mu_ref,{fmt(rep.mu_ref)}\n")
    return 2 if rep.premise_holds and not (rep.conclusion_holds and rep.sharp_conclusion_holds) else 0


def cmd_good_density(args, cfg, out):
    table = _table(cfg)
    B = _set(table, args.B)
    lo, hi = _range(args.d_range)
    mode = dynamics.resolve_mode(table, _mode(cfg))
    rep = analysis.good_delay_density(table, B, lo, hi, args.L, parse_rational(args.eps), mode, _tol(cfg),
                                      jobs=_jobs(cfg))
    out.write("fraction,good,total\n")
    out.write(f"{fmt(rep.fraction)},{rep.good},{rep.total}\n")
    return 0


def cmd_find_q(args, cfg, out):
    table = _table(cfg)
    res = analysis.find_multiplier(table, args.d, args.stage_p)
    out.write("p,q,h_p\n")
    out.write(f"{res.p},{res.q},{res.h}\n")
    return 0


COMMANDS = {
    "stages": cmd_stages,
    "measure": cmd_measure,
    "sweep": cmd_sweep,
    "delays": cmd_delays,
    "profile": cmd_profile,
    "rake-check": cmd_rake_check,
    "bh-check": cmd_bh_check,
    "good-density": cmd_good_density,
    "find-q": cmd_find_q,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _settings(args)
        buf = io.StringIO()
        code = COMMANDS[args.command](args, cfg, buf)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (StaircaseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if cfg.get("out"):
        Path(cfg["out"]).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


def main() -> None:
    sys.exit(run())
