"""``curvforge`` command line: verify, sweep, scan, torus, compress.

Exit status: 0 all checks pass, 1 some check fails, 2 config or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, from_dict, load_config, load_dict, set_path
from .report import dumps, records_csv, report_passed, table_csv, write_outputs, _clean
from .rng import XorShift64Star
from .runner import run

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _emit(args, files, stdout_name):
    """Write files to --out, or print the main artifact to stdout."""
    if args.out:
        write_outputs(args.out, files)
    else:
        sys.stdout.write(files[stdout_name])


def _timing(start):
    return json.dumps({"started_unix": round(start, 3), "elapsed_s": round(time.time() - start, 3)}) + "\n"


def _summary_line(report):
    s = report["summary"]
    return f"{s['passed']}/{s['total']} passed, {s['failed']} failed, {len(report['errors'])} errors"


# subcommands ------------------------------------------------------------------------------------

def cmd_verify(args):
    start = time.time()
    cfg = load_config(args.config, seed=args.seed)
    report = run(cfg, args.tolerance_scale)
    _emit(args, {"report.json": dumps(report), "timing.json": _timing(start)}, "report.json")
    if args.out:
        for r in report["records"]:
            print(f"{'PASS' if r['pass'] else 'FAIL'}  {r['check']:<26} {r['location']:<36} {r['measured']}")
        print(_summary_line(report))
    return EXIT_OK if report_passed(report) else EXIT_FAIL


def _parse_values(text):
    text = text.strip()
    if not text:
        return []
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(int(tok) if tok.lstrip("-").isdigit() else float(tok))
        except ValueError:
            out.append(tok)
    return out


def cmd_sweep(args):
    start = time.time()
    raw = load_dict(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    from_dict(raw)  # validate the base config before sweeping
    values = _parse_values(args.values)
    rows, reports, ok = [], [], True
    for v in values:
        cfg = from_dict(set_path(raw, args.param, v))
        rep = run(cfg, args.tolerance_scale)
        reports.append({"value": v, "report": rep})
        ok = ok and report_passed(rep)
        for r in rep["records"]:
            rows.append({"param": args.param, "value": v, **r})
    csv_text = records_csv(rows, extra=["param", "value"])
    _emit(args, {"sweep.csv": csv_text, "sweep.json": dumps(_clean(reports)), "timing.json": _timing(start)},
          "sweep.csv")
    return EXIT_OK if ok else EXIT_FAIL


def _fixture_metric(name):
    from .. import fixtures
    from ..submersion import SUBMERSIONS, submersion
    if name in SUBMERSIONS:
        return submersion(name).total
    if name in fixtures.CATALOG:
        return fixtures.metric(name)
    raise ConfigError(f"unknown fixture {name!r}")


def cmd_scan(args):
    from ..planes import find_zero_planes, min_sectional

    start = time.time()
    g = _fixture_metric(args.fixture)
    rng = XorShift64Star(args.seed or 0)
    pts = g.chart.sample(rng, args.grid)
    rows, summary = [], []
    for i, p in enumerate(pts):
        zs = find_zero_planes(g, [p], threshold=args.threshold)
        summary.append({"index": i, "point": p.tolist(), "zero_planes": len(zs), "min_sec": min_sectional(g, p)})
        for z in zs:
            u, v = z.plane.u.components, z.plane.v.components
            rows.append([i, *p.tolist(), z.curv, z.grad_norm, *u.tolist(), *v.tolist()])
    d = g.dimension
    cols = (["point"] + [f"x{k}" for k in range(d)] + ["curv", "grad_norm"] + [f"u{k}" for k in range(d)]
            + [f"v{k}" for k in range(d)])
    report = _clean({"fixture": args.fixture, "grid": args.grid, "threshold": args.threshold, "points": summary,
                     "zero_planes": len(rows)})
    _emit(args, {"zero_planes.csv": table_csv(cols, rows), "scan.json": dumps(report), "timing.json": _timing(start)},
          "zero_planes.csv")
    return EXIT_OK


def _load_profile(spec, s):
    from .. import profiles
    if spec in profiles.NAMED:
        return profiles.named(spec, s=s)
    path = Path(spec)
    if path.suffix.lower() == ".csv" and path.exists():
        data = np.genfromtxt(path, delimiter=",", names=True)
        names = data.dtype.names
        if "t" not in names or "psi" not in names:
            raise ConfigError("profile CSV needs columns t, psi")
        if not (np.isfinite(data["t"]).all() and np.isfinite(data["psi"]).all()):
            raise ConfigError(f"profile CSV {path} has non-numeric or non-finite entries")
        return profiles.from_samples(data["t"], data["psi"], s=s, name=path.stem)
    raise ConfigError(f"unknown profile {spec!r} (named: {sorted(profiles.NAMED)} or a CSV path)")


def cmd_torus(args):
    from .. import torus
    from ..errors import InfeasibleError
    from .checks import Record

    start = time.time()
    p = _load_profile(args.profile, args.s)
    ip = torus.integral_positivity(p)
    ids = torus.integral_identities(p)
    recs = [Record("pos_int", "residual", ip.residual, 0.0, 1e-10 * args.tolerance_scale),
            Record("integral_identities", "first", ids.first, 0.0, 1e-8 * args.tolerance_scale),
            Record("integral_identities", "second", ids.second, 0.0, 1e-8 * args.tolerance_scale)]
    cert, I = None, None
    try:
        I = torus.synthesize_Ipp(p, margin=args.margin)
        c = I.meta["certificate"]
        cert = {"margin": c.margin, "min_grid": c.min_grid, "min_shifted": c.min_shifted,
                "integral_Ipp": c.integral_Ipp, "level": c.level}
        recs += [Record("ipp_synthesis", "min grid", c.min_grid, args.margin, 0.0, "ge"),
                 Record("ipp_synthesis", "min shifted grid", c.min_shifted, args.margin, 0.0, "ge"),
                 Record("ipp_synthesis", "integral", abs(c.integral_Ipp), 0.0, 1e-10 * args.tolerance_scale)]
    except InfeasibleError as e:
        cert = {"infeasible": str(e), "best_margin": e.best}
        recs.append(Record("ipp_synthesis", "feasible", 0.0, 0.0, 0.0, "ge"))
    a, b = p.interval
    t = np.linspace(a, b, 1025)
    v, d1, d2 = p.d(t)
    zero = torus.zero_correction((a, b))
    ipp = I(t) if I is not None else np.zeros_like(t)
    comb = torus.combined_curv(p, I, t) if I is not None else np.full_like(t, np.nan)
    rows = zip(t, v, d1, d2, torus.fiber_scaled_curv(p, t), torus.combined_curv(p, zero, t), ipp, comb)
    cols = ["t", "psi", "dpsi", "ddpsi", "fiber_scaled_curv", "combined_I0", "Ipp", "combined"]
    report = _clean({"profile": p.name, "s": p.s, "margin": args.margin, "flags": ip.flags,
                     "integral_curv": ip.integral_curv, "integral_a2": ip.integral_a2,
                     "identities": ids.integrals, "certificate": cert,
                     "records": [r.as_dict() for r in recs]})
    _emit(args, {"torus_curve.csv": table_csv(cols, rows), "certificate.json": dumps(report),
                 "timing.json": _timing(start)}, "certificate.json")
    return EXIT_OK if all(r.passed for r in recs) else EXIT_FAIL


def cmd_compress(args):
    from .. import compression as C
    from .checks import Record

    start = time.time()
    raw = load_dict(args.config)
    sec = raw.get("compression", raw)
    allowed = {"rho", "nu", "l", "beta", "C1", "slack", "nus", "grid"}
    bad = set(sec) - allowed - {"name", "seed"}
    if bad:
        raise ConfigError(f"unknown compression keys {sorted(bad)}")
    try:
        cfg = C.CompressionConfig(rho=float(sec.get("rho", 1.0)), nu=float(sec.get("nu", 1e-3)),
                                  l=None if sec.get("l") is None else float(sec["l"]),
                                  beta=float(sec.get("beta", 0.5)),
                                  C1=None if sec.get("C1") is None else float(sec["C1"]),
                                  slack=float(sec.get("slack", 0.1)))
        nus = tuple(float(x) for x in sec.get("nus", (1e-2, 1e-3, 1e-4)))
        n = int(sec.get("grid", 1024))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad compression config: {e}") from None
    if not (cfg.nu > 0 and cfg.rho > 0 and 0 < cfg.beta < 7 / 9):
        raise ConfigError("need nu > 0, rho > 0 and 0 < beta < 7/9")
    ts = args.tolerance_scale
    b = C.compression_bounds(cfg, nus, n)
    pm, prow = C.peters_grid(cfg, n)
    sign = C.second_derivative_report(cfg, n)
    recs = []
    if b.lower_margin is not None:
        recs.append(Record("compression_lower", f"nu={cfg.nu:g}", b.lower_min, b.lower_threshold, 0.0, "ge"))
    if b.exponent_fit is not None:
        recs.append(Record("compression_exponent", f"beta={cfg.beta:g}", b.exponent_fit, b.exponent_expected,
                           0.2 * ts))
    recs.append(Record("peters_estimate", f"nu={cfg.nu:g}", pm, 0.0, 1e-8 * ts, "ge"))
    if sign.asserted:
        recs.append(Record("second_derivative_sign", f"t>={sign.threshold:.6g}", sign.min_above, 0.0, 0.0, "ge"))
    rows = []
    thr = b.lower_threshold
    for nu in sorted(set(nus) | {cfg.nu}, reverse=True):
        c = cfg.with_nu(nu)
        t = np.unique(np.concatenate([np.linspace(0.0, nu, 65), np.geomspace(nu, np.pi / 4, 64)]))
        d1, _ = C.psi_derivatives_grid(c, t)
        for tt, dd in zip(t, d1 * d1):
            rows.append([nu, tt, dd, thr if tt <= nu else np.nan, dd - thr if tt <= nu else np.nan])
    report = _clean({"config": {"rho": cfg.rho, "nu": cfg.nu, "l": cfg.l_value, "beta": cfg.beta, "nus": list(nus)},
                     "bounds": {"lower_min": b.lower_min, "lower_threshold": b.lower_threshold,
                                "lower_argmin": b.lower_argmin, "exponent_fit": b.exponent_fit,
                                "exponent_expected": b.exponent_expected, "fit_constant": b.fit_constant,
                                "sweep": b.sweep, "skipped": b.skipped},
                     "peters_min_margin": pm, "peters_skipped": sum(r.skipped for r in prow),
                     "sign": {"threshold": sign.threshold, "min_above": sign.min_above,
                              "argmin_above": sign.argmin_above, "c1_bound": sign.c1_bound},
                     "records": [r.as_dict() for r in recs]})
    _emit(args, {"compress.csv": table_csv(["nu", "t", "dpsi2", "bound", "margin"], rows),
                 "compress.json": dumps(report), "timing.json": _timing(start)}, "compress.json")
    return EXIT_OK if all(r.passed for r in recs) else EXIT_FAIL


# entry point ------------------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: main artifact to stdout)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every check tolerance")
    ap = argparse.ArgumentParser(prog="curvforge", parents=[common], description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify", parents=[common], help="run the checks of a config")
    p.add_argument("config")
    p.set_defaults(fn=cmd_verify)
    p = sub.add_parser("sweep", parents=[common], help="rerun a config over values of one parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="dotted path, e.g. pipeline.0.s")
    p.add_argument("--values", required=True, help="comma-separated list (may be empty)")
    p.set_defaults(fn=cmd_sweep)
    p = sub.add_parser("scan", parents=[common], help="search zero-curvature planes on a fixture")
    p.add_argument("fixture")
    p.add_argument("--grid", type=int, default=4, help="number of sample points")
    p.add_argument("--threshold", type=float, default=1e-9)
    p.set_defaults(fn=cmd_scan)
    p = sub.add_parser("torus", parents=[common], help="single-torus positivity on a profile")
    p.add_argument("profile", help="named profile (sin2, poly4) or CSV with t, psi columns")
    p.add_argument("--s", type=float, default=0.1)
    p.add_argument("--margin", type=float, default=0.01)
    p.set_defaults(fn=cmd_torus)
    p = sub.add_parser("compress", parents=[common], help="compression bounds for a ψ_{ν,l} config")
    p.add_argument("config")
    p.set_defaults(fn=cmd_compress)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    if args.tolerance_scale <= 0:
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyError as e:
        print(f"config error: {e.args[0] if e.args else e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
