"""Command-line entry point: classify, table, simulate, verify, growth.

Exit codes: 0 success, 1 verification failure, 2 config error,
3 numeric failure, 4 mode overflow.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import coefficients as ce
from .coefficients import Kind, classify, coefficient_table
from .config import load_config
from .errors import DegenerateBeta, InvalidConfig, ModeOverflow
from .estimates import smoothing_rate_scan
from .evolution import predicted_rate_diagonal
from .parallel import ordered_map
from .state import energy_E, evolve_state, project, select_N, sobolev_norm, l2_norm
from .suites import (
    ESTIMATES,
    VERIFY_NAMES,
    default_specs,
    estimate_suite,
    lemma31_suite,
    reference_examples,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OVERFLOW = 0, 1, 2, 3, 4

SIM_COLUMNS = ["t", "l2", "h_half", "h_half_plus", "h_half_minus", "E_value"]
GROWTH_COLUMNS = ["xi", "rate_plus", "rate_minus", "predicted_diagonal_rate"]

DEFAULT_TRIALS = {
    "remark21": 1000,
    "lemma22": 1000,
    "lemma23": 500,
    "prop21": 100,
    "lemma21": 100,
    "prop22": 100,
    "lemma31": 100,
}


def _fmt(x):
    return f"{float(x):.17g}"


def _dump_json(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(header, rows, out=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    if out:
        Path(out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _require_config(args):
    if not args.config:
        raise InvalidConfig(f"'{args.command}' needs --config")
    return load_config(args.config)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_classify(args):
    cfg = _require_config(args)
    spec = cfg.spec()
    cls = classify(spec, cfg.tolerance())
    out = {
        "kind": cls.kind.value,
        "jstar": cls.jstar,
        "sign": cls.sign,
        "lambda": [x + 0.0 for x in ce.lambda_sequence(spec)],
        "smoothing": cls.smoothing,
    }
    _dump_json(out, args.out)
    return EXIT_OK


def cmd_table(args):
    cfg = _require_config(args)
    table = coefficient_table(cfg.spec(), cfg.tolerance())
    _dump_json(table.to_dict(), args.out)
    return EXIT_OK


def _sim_row(spec, table, N, state, t):
    u = evolve_state(spec, state, t)
    rep = energy_E(spec, u, N, table)
    return (
        t,
        l2_norm(u),
        sobolev_norm(u, 0.5),
        sobolev_norm(project(u, "Pplus"), 0.5),
        sobolev_norm(project(u, "Pminus"), 0.5),
        rep.E_value,
    ), u


def cmd_simulate(args):
    cfg = _require_config(args)
    if args.dump_modes and not args.out:
        raise InvalidConfig("--dump-modes needs --out")
    spec = cfg.spec()
    table = coefficient_table(spec, cfg.tolerance())
    state = cfg.initial_state()
    N = select_N(spec, cfg.K, table)
    # every row is computed before anything is written: an overflow aborts cleanly
    results = ordered_map(lambda t: _sim_row(spec, table, N, state, t), cfg.times)
    _write_csv(SIM_COLUMNS, [r for r, _ in results], args.out)
    if args.dump_modes:
        base = Path(args.out)
        for i, (_, u) in enumerate(results):
            path = base.with_name(f"{base.stem}_modes_{i}.csv")
            rows = [(t_xi, abs(z)) for t_xi, z in zip(u.xi, u.coeffs)]
            _write_csv(["xi", "modulus"], rows, path)
    return EXIT_OK


def _verify_specs(args, need_kind=None):
    """Config spec when given, else the reference examples plus ``trials`` random specs."""
    if args.config:
        cfg = load_config(args.config)
        return {cfg.name or "config": cfg.spec()}
    trials = args.trials if args.trials is not None else DEFAULT_TRIALS[args.which]
    return default_specs(trials, args.seed, elliptic=need_kind is Kind.ELLIPTIC)


def cmd_verify(args):
    which = args.which
    trials = args.trials if args.trials is not None else DEFAULT_TRIALS[which]
    if which in ("remark21", "lemma22"):
        m_values = [args.m] if args.m else range(1, 7)
        fn = ce.remark21_check if which == "remark21" else ce.lemma22_check
        reports = [fn(m_values, trials, args.seed)]
        payload = [r.to_dict() for r in reports]
    elif which == "lemma23":
        if args.m:
            pairs = [(args.m, j) for j in ([args.jstar] if args.jstar else range(1, args.m))]
        else:
            pairs = [(m, j) for m in range(2, 7) for j in range(1, m)]
        reports = ordered_map(lambda p: ce.lemma23_check(p[0], p[1], trials, args.seed), pairs)
        payload = [r.to_dict() for r in reports]
    elif which in ESTIMATES:
        if args.config and which == "prop22":
            cfg = load_config(args.config)
            kind = classify(cfg.spec(), cfg.tolerance()).kind
            if kind is not Kind.ELLIPTIC:
                raise InvalidConfig(f"prop22 needs an Elliptic spec, config is {kind.value}")
        specs = _verify_specs(args, Kind.ELLIPTIC if which == "prop22" else None)
        reports = estimate_suite(which, specs, ablate=args.ablate_correction)
        payload = [
            {k: v for k, v in r.to_dict().items() if k != "xi_grid"} for r in reports
        ]
    else:  # lemma31
        if args.config:
            cfg = load_config(args.config)
            specs = {cfg.name or "config": cfg.spec()}
            K = cfg.K
        else:
            specs = {
                k: v for k, v in reference_examples().items() if any(coefficient_table(v).gamma)
            }
            K = 256
        reports = lemma31_suite(specs, K, trials, args.seed)
        payload = [r.to_dict() for r in reports]
    passed = bool(reports) and all(r.passed for r in reports)
    out = {"which": which, "passed": passed, "count": len(reports), "reports": payload}
    if which in ESTIMATES:
        out["ablate_correction"] = bool(args.ablate_correction)
        fits = [r.growth_fit for r in reports]
        out["max_growth_fit"] = max(fits) if fits else None
        out["min_growth_fit"] = min(fits) if fits else None
    _dump_json(out, args.out)
    if not passed:
        worst = _worst_line(which, reports)
        print(f"verify {which}: FAILED ({worst})", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _worst_line(which, reports):
    if not reports:
        return "no applicable cases"
    if which in ESTIMATES:
        r = max(reports, key=lambda r: r.growth_fit)
        return f"growth exponent {r.growth_fit:.4g} for {r.notes.get('spec')}"
    r = max(reports, key=lambda r: r.max_residual)
    return f"residual {r.max_residual:.3e} > {r.tolerance:.1e} in {r.name}"


def cmd_growth(args):
    cfg = _require_config(args)
    if args.xi_max < 4:
        raise InvalidConfig("--xi-max must be >= 4")
    spec = cfg.spec()
    scan = smoothing_rate_scan(spec, args.xi_max, cfg.tolerance())
    rows = [(xi, p, q, predicted_rate_diagonal(spec, xi)) for xi, p, q in scan.rows]
    _write_csv(GROWTH_COLUMNS, rows, args.out)
    if scan.ties:
        print(f"growth: eigenvector ties at xi = {scan.ties[:10]}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="dispersive-lab",
        description="Coefficient tables, classification and spectral simulation for "
        "constant-coefficient linear Schrodinger-type equations on the torus.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="config path or bundled name")
        sp.add_argument("--out", help="output file (default: stdout)")

    sp = sub.add_parser("classify", help="print the equation type as JSON")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("table", help="print every coefficient sequence as JSON")
    common(sp)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("simulate", help="evolve the initial state, write norms as CSV")
    common(sp)
    sp.add_argument("--dump-modes", action="store_true", help="also write per-mode moduli")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("which", choices=VERIFY_NAMES)
    common(sp, config_required=False)
    sp.add_argument("--trials", type=int, help="random trials (suite-dependent default)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--m", type=int, help="restrict to one m (remark21, lemma22, lemma23)")
    sp.add_argument("--jstar", type=int, help="restrict lemma23 to one jstar")
    sp.add_argument(
        "--ablate-correction",
        action="store_true",
        help="zero the correction terms (prop21, lemma21, prop22)",
    )
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("growth", help="scan eigen-exponent rates, write CSV")
    common(sp)
    sp.add_argument("--xi-max", type=int, default=64)
    sp.set_defaults(func=cmd_growth)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the config-error code
        return int(exc.code or 0)
    if getattr(args, "trials", None) is not None and args.trials < 1:
        print("error: --trials must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModeOverflow as exc:
        print(f"overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except (DegenerateBeta, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
