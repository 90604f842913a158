"""Command-line front end.

    satrelay coverage --scenario ni
    satrelay validate coverage-ni --trials 100000
    satrelay sweep --metric coverage --axis channel.Omega_R --grid 0 40 9 --unit dB
    satrelay optimize --set optimizer.T_total=0.5

Exit codes: 0 ok, 2 configuration error, 3 infeasible deadline, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import analytic as an
from . import montecarlo as mc
from .config import ConfigError, ScenarioConfig, apply_override, dump_tree, load_tree
from .optimizer import InfeasibleError, min_time, optimize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_VALIDATION = 4

Z_LIMIT = 3.0


# -- output ------------------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _flatten(record, prefix=""):
    out = {}
    for k, v in record.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = ";".join(_cell(x) for x in v)
        else:
            out[key] = v
    return out


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_json(record) -> str:
    return json.dumps(_jsonable(record), indent=2) + "\n"


def to_csv(rows) -> str:
    rows = [_flatten(_jsonable(r)) for r in rows]
    header = list(rows[0]) if rows else []
    for r in rows[1:]:
        header += [k for k in r if k not in header]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in header])
    return buf.getvalue()


def emit(args, rows, default="json"):
    fmt = args.format or default
    if fmt == "csv":
        text = to_csv(rows)
    else:
        text = to_json(rows[0] if len(rows) == 1 else rows)
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(to_csv(rows) if args.out.endswith(".csv") else to_json(rows[0] if len(rows) == 1 else rows))


# -- record builders --------------------------------------------------------------------------


def _orders_dict(orders):
    if orders is None:
        return None
    return {"G": orders.G, "H": orders.H, "J": orders.J, "Q": orders.Q}


def _result_record(command, scenario, res: an.ProbabilityResult):
    return {
        "command": command,
        "scenario": scenario,
        "method": res.method,
        "threshold": res.threshold,
        "value": res.value,
        "raw": res.raw,
        "orders": _orders_dict(res.orders),
        "refinement_delta": res.refinement_delta,
    }


def coverage_result(cfg: ScenarioConfig, scenario, method="exact", refine=False):
    geom = cfg.geometry_params()
    gth = cfg.thresholds["gamma_th"]
    n2 = cfg.channel["n2"]
    if scenario == "ni":
        if method == "exact":
            return an.coverage_ni_exact(geom, cfg.rician(), gth, n2=n2)
        return an.coverage_ni_approx(geom, cfg.rician(), gth, n2=n2)
    return an.coverage_interference(geom, cfg.interference(), gth, cfg.orders(), n2=n2, refine=refine)


def _check_n1(cfg):
    if cfg.channel["n1"] != 2:
        raise an.UnsupportedConfiguration("satellite outage supports path-loss exponent 2 only")


def outage_result(cfg: ScenarioConfig, refine=False, d0=None):
    _check_n1(cfg)
    gout = cfg.thresholds["gamma_out"]
    if d0 is not None:
        v = an.outage_sr_conditional(d0, cfg.shadowed_rician(), gout)
        return an.ProbabilityResult(v, "closed-form", gout, raw=v)
    return an.outage_sr(cfg.geometry_params(), cfg.shadowed_rician(), gout, cfg.orders(), refine)


def e2e_result(cfg: ScenarioConfig, scenario, method="approx"):
    _check_n1(cfg)
    if scenario == "is":
        an._check_n2(cfg.channel["n2"])
    return an.e2e_outage(
        cfg.geometry_params(),
        cfg.shadowed_rician(),
        scenario,
        cfg.thresholds["gamma_th"],
        cfg.thresholds["gamma_out"],
        rician=cfg.rician(),
        ip=cfg.interference(),
        orders=cfg.orders(),
        ni_method=method,
    )


def analytic_for(cfg: ScenarioConfig, target, method="exact", d0=None) -> float:
    """Analytic counterpart of a Monte-Carlo scenario."""
    if target == "coverage-ni":
        return coverage_result(cfg, "ni", method).value
    if target == "coverage-is":
        return coverage_result(cfg, "is").value
    if target == "outage-sr":
        return outage_result(cfg).value
    if target == "outage-sr-fixed":
        return outage_result(cfg, d0=d0).value
    if target == "e2e-ni":
        return e2e_result(cfg, "ni", method).value
    if target == "e2e-is":
        return e2e_result(cfg, "is").value
    if target == "cdf-z":
        return an.cdf_z(cfg.thresholds["z"], cfg.interference())
    raise ValueError(f"unknown target {target!r}")


def validate_record(cfg: ScenarioConfig, target, method="exact", d0=None):
    # the simulator uses square-law path loss on both hops
    an._check_n2(cfg.channel["n2"])
    _check_n1(cfg)
    analytic = analytic_for(cfg, target, method, d0)
    config = mc.McConfig(target, cfg.mc["trials"], cfg.mc["seed"])
    chans = mc.ChannelSet(cfg.rician(), cfg.interference(), cfg.shadowed_rician())
    thr = mc.Thresholds(
        cfg.thresholds["gamma_th"], cfg.thresholds["gamma_out"], cfg.thresholds["z"], d0
    )
    est = mc.mc_estimate(config, cfg.geometry_params(), chans, thr)
    z = est.z_score(analytic)
    return {
        "command": "validate",
        "target": target,
        "analytic": analytic,
        "mc_mean": est.mean,
        "std_error": est.std_error,
        "z": z,
        "trials": est.trials,
        "seed": est.seed,
        "pass": bool(abs(z) <= Z_LIMIT),
    }


def optimize_record(cfg: ScenarioConfig, scenario):
    b = cfg.link_budget(scenario)
    alloc = optimize(b, step=cfg.optimizer["step"])
    return {
        "command": "optimize",
        "scenario": scenario,
        "budget": {
            "D_SD": b.D_SD,
            "B_S": b.B_S,
            "B_R": b.B_R,
            "T_total": b.T_total,
            "P_S_max": b.P_S_max,
            "P_R_max": b.P_R_max,
            "gamma_SR": b.gamma_SR,
            "gamma_RD": b.gamma_RD,
        },
        "T_S_min": min_time(b.D_SD, b.B_S, b.P_S_max, b.gamma_SR),
        "T_R_min": min_time(b.D_SD, b.B_R, b.P_R_max, b.gamma_RD),
        "T_S": alloc.T_S,
        "T_R": alloc.T_R,
        "P_S": alloc.P_S,
        "P_R": alloc.P_R,
        "eta": alloc.eta,
        "lambda": alloc.lambda_,
        "iterations": alloc.iterations,
        "converged": alloc.converged,
        "lambda_trace": list(alloc.lambda_trace),
        "eta_trace": list(alloc.eta_trace),
    }


# -- commands ------------------------------------------------------------------------------


def cmd_coverage(args, cfg):
    res = coverage_result(cfg, args.scenario, args.method, args.refine)
    emit(args, [_result_record("coverage", args.scenario, res)])
    return EXIT_OK


def cmd_outage(args, cfg):
    res = outage_result(cfg, args.refine, args.d0)
    emit(args, [_result_record("outage", "sr", res)])
    return EXIT_OK


def cmd_e2e(args, cfg):
    res = e2e_result(cfg, args.scenario, args.method)
    emit(args, [_result_record("e2e", args.scenario, res)])
    return EXIT_OK


def cmd_validate(args, cfg):
    if args.target == "outage-sr-fixed" and args.d0 is None:
        raise ConfigError("--d0", "outage-sr-fixed needs a fixed distance")
    rec = validate_record(cfg, args.target, args.method, args.d0)
    emit(args, [rec])
    return EXIT_OK if rec["pass"] else EXIT_VALIDATION


def _metric_row(cfg, args):
    if args.metric == "coverage":
        return {"coverage": coverage_result(cfg, args.scenario, args.method).value}
    if args.metric == "outage":
        return {"outage": outage_result(cfg).value}
    if args.metric == "e2e":
        return {"e2e": e2e_result(cfg, args.scenario, args.method).value}
    rec = optimize_record(cfg, args.scenario)
    return {k: rec[k] for k in ("eta", "T_S", "T_R", "P_S", "P_R", "iterations")}


def sweep_values(args):
    if args.values:
        return list(args.values)
    if args.grid:
        start, stop, num = args.grid
        num = int(num)
        if num < 1:
            raise ConfigError("--grid", "need at least one point")
        pts = np.linspace(float(start), float(stop), num)
        return [f"{p!r} {args.unit}" if args.unit else repr(float(p)) for p in pts.tolist()]
    raise ConfigError("--axis", "give --values or --grid")


def cmd_sweep(args, cfg_tree):
    section, _, field = args.axis.partition(".")
    if section not in cfg_tree or field not in cfg_tree[section]:
        raise ConfigError(args.axis, "unknown field")
    rows = []
    for raw in sweep_values(args):
        tree = apply_override(cfg_tree, f"{args.axis}={raw}")
        cfg = ScenarioConfig.from_tree(tree)
        row = {args.axis: raw, "linear": getattr(cfg, section)[field]}
        row.update(_metric_row(cfg, args))
        rows.append(row)
    emit(args, rows, default="csv")
    return EXIT_OK


def cmd_optimize(args, cfg):
    rec = optimize_record(cfg, args.scenario)
    emit(args, [rec])
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML scenario file")
    common.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override one field, e.g. channel.K='-5 dB' (repeatable)",
    )
    common.add_argument("--print-config", action="store_true", help="dump the effective config and exit")
    common.add_argument("--seed", type=int, help="Monte-Carlo seed")
    common.add_argument("--trials", type=int, help="Monte-Carlo trials")
    common.add_argument("--orders", help="quadrature orders: N or G,H,J,Q")
    common.add_argument("--format", choices=("json", "csv"), help="stdout format")
    common.add_argument("--out", help="also write the result here (.csv or .json)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="satrelay", description=__doc__.split("\n")[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("coverage", parents=[common], help="relay->receiver coverage probability")
    s.add_argument("--scenario", choices=("ni", "is"), default="ni")
    s.add_argument("--method", choices=("exact", "approx"), default="exact")
    s.add_argument("--refine", action="store_true", help="also report the order-doubling delta")
    s.set_defaults(func=cmd_coverage)

    s = sub.add_parser("outage", parents=[common], help="satellite->relay outage probability")
    s.add_argument("--refine", action="store_true")
    s.add_argument("--d0", type=float, help="fixed satellite distance in km")
    s.set_defaults(func=cmd_outage)

    s = sub.add_parser("e2e", parents=[common], help="end-to-end outage probability")
    s.add_argument("--scenario", choices=("ni", "is"), default="ni")
    s.add_argument("--method", choices=("exact", "approx"), default="approx")
    s.set_defaults(func=cmd_e2e)

    s = sub.add_parser("validate", parents=[common], help="analytic vs Monte-Carlo z-score")
    s.add_argument("target", choices=mc.SCENARIOS)
    s.add_argument("--method", choices=("exact", "approx"), default="exact")
    s.add_argument("--d0", type=float, help="fixed distance for outage-sr-fixed (km)")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("sweep", parents=[common], help="one metric over a grid of one field")
    s.add_argument("--metric", choices=("coverage", "outage", "e2e", "eta"), required=True)
    s.add_argument("--axis", required=True, help="section.field to vary")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--values", nargs="+", help="explicit values, e.g. '0 dB' '10 dB'")
    g.add_argument("--grid", nargs=3, metavar=("START", "STOP", "NUM"))
    s.add_argument("--unit", help="unit tag appended to --grid points")
    s.add_argument("--scenario", choices=("ni", "is"), default="ni")
    s.add_argument("--method", choices=("exact", "approx"), default="exact")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("optimize", parents=[common], help="energy-efficient time/power allocation")
    s.add_argument("--scenario", choices=("ni", "is"), default="ni")
    s.set_defaults(func=cmd_optimize)
    return p


def _flag_overrides(args):
    out = []
    if args.seed is not None:
        out.append(f"mc.seed={args.seed}")
    if args.trials is not None:
        out.append(f"mc.trials={args.trials}")
    if args.orders:
        parts = [x.strip() for x in args.orders.split(",")]
        if len(parts) == 1:
            parts *= 4
        if len(parts) != 4:
            raise ConfigError("--orders", "give N or G,H,J,Q")
        out += [f"quadrature.{k}={v}" for k, v in zip("GHJQ", parts)]
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        tree = load_tree(args.config, list(args.set) + _flag_overrides(args))
        if args.print_config:
            ScenarioConfig.from_tree(tree)
            sys.stdout.write(dump_tree(tree))
            return EXIT_OK
        if args.command == "sweep":
            ScenarioConfig.from_tree(tree)
            return args.func(args, tree)
        return args.func(args, ScenarioConfig.from_tree(tree))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        print(f"T_S_min={exc.t_min_s!r} T_R_min={exc.t_min_r!r} T_total={exc.deadline!r}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (an.UnsupportedConfiguration, mc.McConfigurationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
