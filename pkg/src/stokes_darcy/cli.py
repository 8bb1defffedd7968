"""Command-line driver.

Subcommands::

    converge   errors at T for a list of mesh sizes with dt = h**theta
    longtime   error/energy series of one long run, with CSV and SVG output
    steady     steady coupled solve on a list of meshes (time-independent cases)
    selftest   quick structural checks

A configuration file holds flat ``key = value`` lines; ``#`` starts a
comment.  Command-line flags override file values.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from . import harness
from .assembly import Discretization
from .mms import get_case
from .params import PhysicalParams

log = logging.getLogger("stokes_darcy")

DEFAULTS = {
    "case": "example1",
    "scheme": "bdf2",
    "alpha": "0.8",
    "h": "1/16,1/32,1/64",
    "dt": "",
    "theta": "1",
    "T": "1",
    "gamma_f": "1",
    "gamma_p": "1",
    "nu": "1",
    "g": "1",
    "S": "1",
    "K": "1",
    "alpha_bj": "1",
    "output_dir": "out",
    "sample_every": "1",
}

LONGTIME_DEFAULTS = {"case": "example3", "h": "1/32", "dt": "1/64", "T": "25"}


def read_config(path) -> dict:
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       delimiters=("=",))
    parser.optionxform = str
    with open(path) as fh:
        parser.read_string("[run]\n" + fh.read())
    values = dict(parser["run"])
    unknown = set(values) - set(DEFAULTS)
    if unknown:
        raise SystemExit(f"{path}: unknown keys {sorted(unknown)}")
    return values


def _num(text) -> float:
    return float(Fraction(text.strip()))


def _h_list(text):
    return [harness.to_subdivisions(_num(tok)) for tok in str(text).split(",") if tok.strip()]


def resolve(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.command == "longtime":
        cfg.update(LONGTIME_DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in ("case", "scheme", "h", "dt", "theta", "T", "alpha", "sample_every"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = str(val)
    if args.out is not None:
        cfg["output_dir"] = args.out
    return cfg


def params_from(cfg) -> PhysicalParams:
    return PhysicalParams(
        nu=_num(cfg["nu"]), g=_num(cfg["g"]), S=_num(cfg["S"]), K=_num(cfg["K"]),
        alpha_bj=_num(cfg["alpha_bj"]), gamma_f=_num(cfg["gamma_f"]),
        gamma_p=_num(cfg["gamma_p"]),
    )


def write_meta(cfg, out_dir, extra=()):
    with open(os.path.join(out_dir, "run.meta"), "w") as fh:
        for key in sorted(cfg):
            fh.write(f"{key} = {cfg[key]}\n")
        for key, val in extra:
            fh.write(f"{key} = {val}\n")


def cmd_converge(cfg):
    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    T = _num(cfg["T"])
    report = harness.run_convergence(
        cfg["case"], cfg["scheme"], _h_list(cfg["h"]), theta=_num(cfg["theta"]), T=T,
        params=params_from(cfg), alpha=_num(cfg["alpha"]),
    )
    harness.emit_csv(report, os.path.join(out, "report.csv"))
    print(f"{'h':>8} {'dt':>12} {'e_phi':>11} {'e_u':>11} {'e_p':>11}")
    for lv in report.levels:
        print(f"1/{lv.n:<6d} {lv.dt:12.6g} {lv.e_phi:11.3e} {lv.e_u:11.3e} {lv.e_p:11.3e}")
    r = report.r_avg
    print(f"{'r_avg':>21} {r[0]:11.2f} {r[1]:11.2f} {r[2]:11.2f}")
    extra = [("snapped_dt", ",".join(repr(lv.dt) for lv in report.levels)),
             ("r_avg", ",".join(f"{v:.6f}" for v in r))]
    write_meta(cfg, out, extra)
    return 0


def cmd_longtime(cfg):
    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    ns = _h_list(cfg["h"])
    if len(ns) != 1:
        raise SystemExit("longtime takes a single h")
    T = _num(cfg["T"])
    dt = _num(cfg["dt"]) if cfg["dt"] else harness.snap_dt(1.0 / ns[0], _num(cfg["theta"]), T)
    res = harness.run_longtime(cfg["case"], cfg["scheme"], ns[0], dt, T,
                               sample_every=int(cfg["sample_every"]),
                               params=params_from(cfg), alpha=_num(cfg["alpha"]))
    harness.emit_csv(res.series, os.path.join(out, "series.csv"))
    if res.series:
        harness.emit_plot(res.series, os.path.join(out, "errors.svg"),
                          title=f"{cfg['case']} {cfg['scheme']} relative error")
    extra = [("dt_used", repr(dt)), ("aborted_step", res.aborted_step)]
    write_meta(cfg, out, extra)
    if res.aborted_step is not None:
        print(f"run aborted at step {res.aborted_step}: non-finite solution", file=sys.stderr)
        return 2
    last = res.series[-1]
    print(f"t={last.t:g} e_phi={last.e_phi:.3e} e_u={last.e_u:.3e} e_p={last.e_p:.3e} "
          f"rows={len(res.series)}")
    return 0


def cmd_steady(cfg):
    from .timestepper import interpolate_level, relative_l2, solve_steady

    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    case = get_case(cfg["case"])
    params = params_from(cfg)
    report = harness.ConvergenceReport(case.name, "steady", float("nan"), 0.0)
    t = _num(cfg["T"])
    for n in _h_list(cfg["h"]):
        disc = Discretization.build(n, params)
        sol = solve_steady(disc, case, t)
        ex = interpolate_level(disc, case, t)
        report.levels.append(harness.LevelResult(
            n, 0.0, relative_l2(sol.phi, ex.phi), relative_l2(sol.u, ex.u),
            relative_l2(sol.p, ex.p)))
        print(f"1/{n:<6d} e_phi={report.levels[-1].e_phi:.3e} e_u={report.levels[-1].e_u:.3e} "
              f"e_p={report.levels[-1].e_p:.3e}")
    harness.emit_csv(report, os.path.join(out, "report.csv"))
    write_meta(cfg, out)
    return 0


def cmd_selftest(cfg):
    from . import selftest

    return 0 if selftest.run(print) else 1


COMMANDS = {
    "converge": cmd_converge,
    "longtime": cmd_longtime,
    "steady": cmd_steady,
    "selftest": cmd_selftest,
}


def build_parser():
    p = argparse.ArgumentParser(prog="stokes-darcy", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp_ = sub.add_parser(name)
        sp_.add_argument("--config", help="flat key = value file")
        sp_.add_argument("--case")
        sp_.add_argument("--scheme", choices=["bdf2", "amb2"])
        sp_.add_argument("--alpha")
        sp_.add_argument("--h", help="mesh size(s), e.g. 1/16,1/32")
        sp_.add_argument("--dt")
        sp_.add_argument("--theta")
        sp_.add_argument("--T")
        sp_.add_argument("--sample-every", dest="sample_every")
        sp_.add_argument("--out")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = resolve(args)
    np.seterr(all="ignore")
    return COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
