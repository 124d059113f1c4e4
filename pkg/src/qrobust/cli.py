"""Command-line interface: JSON reports on stdout, diagnostics on stderr.

Exit codes: 0 success, 2 validation error, 3 resource-cap error, 64 unknown
subcommand, 74 unwritable output.  Every randomized subcommand takes
--seed (default 0) and embeds the seed and tolerances in its report, so
re-runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bloch import from_bloch, psd_via_s, s_poly_all
from .channels import channel_robustness, channel_witness_sweep, instrument_robustness
from .errors import DegenerateShiftError, ResourceCapError, ValidationError
from .measures import robustness_convex, robustness_union, weight_convex, weight_union
from .opio import emit_csv, load_scenario, read_operator_file, write_operator_file
from .operators import eigvals_hermitian, operator_norm
from .tasks import discrimination_advantage, exclusion_advantage, worst_case_discrimination, worst_case_exclusion
from .witness import (
    build_family,
    build_qubit_witness,
    build_witness_exact,
    build_witness_monomial,
    build_witness_symmetric,
    estimate_measure_via_witness,
    fit_s_polynomial,
    shift_family,
    verify_family,
)

USAGE = """usage: qrobust <command> [options]

commands:
  psd-check              S_m positivity test of an operator file
  robustness             generalized robustness of a state scenario
  weight                 weight of resource of a state scenario
  witness-build          build one witness member and export it
  witness-verify         check the witness sign pattern at the scenario s
  witness-sweep          bisect the witness verdict to estimate the measure
  discriminate           multicopy channel-discrimination advantage
  exclude                multicopy channel-exclusion advantage
  worst-case             random-game dominance audit + singleton achievability
  channel-robustness     generalized robustness of a channel scenario
  instrument-robustness  two-path instrument robustness
  demo-appendix-d        qubit three-axis worked example

Run 'qrobust <command> --help' for options.  Reports are JSON on stdout;
--csv PATH additionally writes a flat table.
"""


def _parser(name: str, description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=f"qrobust {name}", description=description)
    p.add_argument("--csv", help="also write the report as a flat CSV table")
    return p


def _finish(report: dict, args) -> tuple[dict, str | None]:
    return report, args.csv


def cmd_psd_check(argv):
    p = _parser("psd-check", "S_m positivity test (no eigensolve) with the eigenvalue cross-check")
    p.add_argument("--operator", required=True, help="operator file (kind 'state' or 'hermitian')")
    p.add_argument("--tol", type=float, default=1e-9)
    args = p.parse_args(argv)
    kind, value = read_operator_file(args.operator)
    if kind == "choi":
        matrix = value.matrix
    else:
        matrix = value
    s_values = s_poly_all(matrix)
    report = {
        "command": "psd-check",
        "kind": kind,
        "psd": psd_via_s(matrix, args.tol),
        "psd_eigen": bool(eigvals_hermitian(matrix)[0] >= -args.tol),
        "s_values": [float(v) for v in s_values[1:]],
        "min_eigenvalue": float(eigvals_hermitian(matrix)[0]),
        "tolerance": args.tol,
    }
    return _finish(report, args)


def _measure_command(name, union_fn, convex_fn, argv):
    p = _parser(name, f"{name} over the scenario free-set union")
    p.add_argument("--scenario", required=True)
    p.add_argument("--method", choices=["auto", "closed", "bisect"], default="auto")
    args = p.parse_args(argv)
    sc = load_scenario(args.scenario)
    rho = sc.state()
    union = sc.free_union()
    rows = []
    for fs in union:
        res = convex_fn(rho, fs, sc.tol, args.method)
        rows.append({"subset": fs.label, "value": None if res.is_infinite else res.value, "method": res.method})
    best = union_fn(rho, union, sc.tol, args.method)
    report = {
        "command": name,
        "seed": sc.seed,
        "tolerance": sc.tol,
        "method": args.method,
        "rows": rows,
        "union": best.to_dict(),
    }
    return _finish(report, args)


def cmd_robustness(argv):
    return _measure_command("robustness", robustness_union, robustness_convex, argv)


def cmd_weight(argv):
    return _measure_command("weight", weight_union, weight_convex, argv)


def _require_s(sc):
    if sc.s is None:
        raise ValidationError("scenario must set 's' for witness commands")
    return float(sc.s)


def cmd_witness_build(argv):
    p = _parser("witness-build", "build one witness member and export it as an operator file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--builder", choices=["exact", "monomial", "symmetric", "qubit"], default="exact")
    p.add_argument("--out", help="destination operator file (kind 'hermitian')")
    p.add_argument("--scan", type=int, default=0, help="N: also scan S_2 on an N x N Bloch-plane grid (qubits)")
    p.add_argument("--scan-x3", type=float, default=0.0, help="third Bloch coordinate of the scan plane")
    args = p.parse_args(argv)
    sc = load_scenario(args.scenario)
    rho = sc.state()
    s = _require_s(sc)
    d = rho.shape[0]
    fit_residual = None
    if args.builder == "exact":
        member = build_witness_exact(rho, s, args.m, sc.mode)
    elif args.builder == "qubit":
        if sc.mode != "robustness" or args.m != 2:
            raise ValidationError("the closed-form qubit builder covers robustness mode with m = 2 only")
        member = build_qubit_witness(rho, s)
    else:
        form = fit_s_polynomial(rho, s, args.m, sc.mode, seed=sc.seed)
        fit_residual = form.fit_residual
        member = build_witness_monomial(form) if args.builder == "monomial" else build_witness_symmetric(form)
    report = {
        "command": "witness-build",
        "seed": sc.seed,
        "tolerance": sc.tol,
        "mode": sc.mode,
        "s": s,
        "m": args.m,
        "builder": args.builder,
        "dim": d,
        "member_dim": int(member.shape[0]),
        "operator_norm": operator_norm(member),
        "fit_residual": fit_residual,
        "out": args.out,
    }
    if args.scan:
        if d != 2:
            raise ValidationError("--scan is only defined for qubit scenarios")
        rows = []
        alpha, beta = (1.0 + s) / s, -1.0 / s
        if sc.mode == "weight":
            alpha, beta = -(1.0 - s) / s, 1.0 / s
        for x1 in np.linspace(-1.0, 1.0, args.scan):
            for x2 in np.linspace(-1.0, 1.0, args.scan):
                eta = from_bloch([x1, x2, args.scan_x3])
                value = float(s_poly_all(alpha * eta + beta * rho)[2])
                rows.append(
                    {
                        "x1": round(float(x1), 12),
                        "x2": round(float(x2), 12),
                        "x3": args.scan_x3,
                        "s2": value,
                        "sign": "+" if value >= 0 else "-",
                    }
                )
        report["rows"] = rows
    if args.out:
        write_operator_file(args.out, member, "hermitian")
    return _finish(report, args)


def cmd_witness_verify(argv):
    p = _parser("witness-verify", "witness sign pattern at the scenario parameter s")
    p.add_argument("--scenario", required=True)
    p.add_argument("--shifted", action="store_true", help="verify the shifted (conventional) family")
    args = p.parse_args(argv)
    sc = load_scenario(args.scenario)
    rho = sc.state()
    union = sc.free_union()
    s = _require_s(sc)
    family = build_family(rho, s, sc.mode, m_values=sc.m_values)
    if args.shifted:
        family = shift_family(family, union, sc.sample_budget, sc.seed)
    rep = verify_family(family, rho, union, sc.sample_budget, seed=sc.seed)
    report = {"command": "witness-verify", "seed": sc.seed, "tolerance": sc.tol}
    report.update(rep.to_dict())
    return _finish(report, args)


def cmd_witness_sweep(argv):
    p = _parser("witness-sweep", "estimate the measure from the witness verdict flip point")
    p.add_argument("--scenario", required=True)
    p.add_argument("--sweep-tol", type=float, default=1e-3)
    args = p.parse_args(argv)
    sc = load_scenario(args.scenario)
    rho = sc.state()
    union = sc.free_union()
    sweep = estimate_measure_via_witness(
        rho, union, kind=sc.mode, tol=args.sweep_tol, sample_budget=sc.sample_budget, seed=sc.seed, m_values=sc.m_values
    )
    engine = robustness_union(rho, union, sc.tol) if sc.mode == "robustness" else weight_union(rho, union, sc.tol)
    report = {
        "command": "witness-sweep",
        "seed": sc.seed,
        "tolerance": sc.tol,
        "sweep_tol": args.sweep_tol,
        "engine_value": None if engine.is_infinite else engine.value,
    }
    report.update(sweep.to_dict())
    if not engine.is_infinite and not report["infinite"]:
        report["difference"] = abs(sweep.estimate - engine.value)
    return _finish(report, args)


def cmd_discriminate(argv):
    p = _parser("discriminate", "multicopy channel-discrimination advantage of the scenario state")
    p.add_argument("--scenario", required=True)
    args = p.parse_args(argv)
    sc = load_scenario(args.scenario)
    rep = discrimination_advantage(
        sc.state(), sc.free_union(), sc.tol, sc.sample_budget, sc.seed,
        s=None if sc.s is None else float(sc.s), m_values=sc.m_values,
    )
    report = {"command": "discriminate", "seed": sc.seed, "tolerance": sc.tol}
    report.update(rep.to_dict())
    return _finish(report, args)


def cmd_exclude(argv):
    p = _parser("exclude", "multicopy channel-exclusion advantage of the scenario state")
    p.add_argument("--scenario", required=True)
    args = p.parse_args(argv)
    sc = load_scenario(args.scenario)
    rep = exclusion_advantage(
        sc.state(), sc.free_union(), sc.tol, sc.sample_budget, sc.seed,
        s=None if sc.s is None else float(sc.s), m_values=sc.m_values,
    )
    report = {"command": "exclude", "seed": sc.seed, "tolerance": sc.tol}
    report.update(rep.to_dict())
    return _finish(report, args)


def cmd_worst_case(argv):
    p = _parser("worst-case", "random-game dominance audit plus singleton achievability")
    p.add_argument("--scenario", required=True)
    p.add_argument("--task", choices=["discrimination", "exclusion"], default="discrimination")
    p.add_argument("--trials", type=int, default=1000)
    args = p.parse_args(argv)
    sc = load_scenario(args.scenario)
    fn = worst_case_discrimination if args.task == "discrimination" else worst_case_exclusion
    rep = fn(sc.state(), sc.free_union(), trials=args.trials, seed=sc.seed, tol=sc.tol)
    report = {"command": "worst-case", "tolerance": sc.tol}
    report.update(rep.to_dict())
    report["rows"] = report.pop("per_subset")
    return _finish(report, args)


def cmd_channel_robustness(argv):
    p = _parser("channel-robustness", "generalized robustness of a channel over free channels")
    p.add_argument("--scenario", required=True)
    p.add_argument("--sweep", action="store_true", help="also estimate the value from the channel witness sweep")
    p.add_argument("--sweep-tol", type=float, default=1e-3)
    args = p.parse_args(argv)
    sc = load_scenario(args.scenario)
    choi = sc.channel()
    union = sc.choi_union()
    res = channel_robustness(choi, union, sc.tol)
    report = {
        "command": "channel-robustness",
        "seed": sc.seed,
        "tolerance": sc.tol,
        "d1": choi.d1,
        "d2": choi.d2,
        "union": res.to_dict(),
    }
    if args.sweep:
        sweep = channel_witness_sweep(choi, union, tol=args.sweep_tol, sample_budget=sc.sample_budget, seed=sc.seed)
        report["sweep"] = sweep.to_dict()
    return _finish(report, args)


def cmd_instrument_robustness(argv):
    p = _parser("instrument-robustness", "two-path instrument robustness (direct vs embedding)")
    p.add_argument("--scenario", required=True)
    args = p.parse_args(argv)
    sc = load_scenario(args.scenario)
    direct, embedded = instrument_robustness(sc.instrument(), sc.instrument_subsets(), sc.tol)
    report = {
        "command": "instrument-robustness",
        "seed": sc.seed,
        "tolerance": sc.tol,
        "direct": direct.to_dict(),
        "embedded": embedded.to_dict(),
    }
    if not direct.is_infinite and not embedded.is_infinite:
        report["difference"] = abs(direct.value - embedded.value)
    return _finish(report, args)


def cmd_demo_appendix_d(argv):
    p = _parser("demo-appendix-d", "three-axis qubit coherence example: closed forms vs the engine")
    p.add_argument("--bloch", default="0.3,0.4,0.5", help="comma-separated Bloch coordinates r1,r2,r3")
    p.add_argument("--tol", type=float, default=1e-7)
    args = p.parse_args(argv)
    try:
        r = [float(x) for x in args.bloch.split(",")]
    except ValueError as exc:
        raise ValidationError(f"--bloch must be three comma-separated reals: {exc}") from exc
    if len(r) != 3:
        raise ValidationError("--bloch must have exactly three components")
    if sum(x * x for x in r) > 1.0 + 1e-12:
        raise ValidationError("Bloch vector lies outside the ball")
    from .freesets import qubit_axis_union

    rho = from_bloch(r)
    union = qubit_axis_union("xyz")
    rows = []
    for fs in union:
        closed = robustness_convex(rho, fs, args.tol, method="closed")
        bisected = robustness_convex(rho, fs, args.tol, method="bisect")
        rows.append(
            {
                "axis": fs.label,
                "closed": closed.value,
                "bisection": bisected.value,
                "difference": abs(closed.value - bisected.value),
            }
        )
    best = robustness_union(rho, union, args.tol)
    report = {
        "command": "demo-appendix-d",
        "bloch": r,
        "tolerance": args.tol,
        "rows": rows,
        "union": best.to_dict(),
    }
    return _finish(report, args)


COMMANDS = {
    "psd-check": cmd_psd_check,
    "robustness": cmd_robustness,
    "weight": cmd_weight,
    "witness-build": cmd_witness_build,
    "witness-verify": cmd_witness_verify,
    "witness-sweep": cmd_witness_sweep,
    "discriminate": cmd_discriminate,
    "exclude": cmd_exclude,
    "worst-case": cmd_worst_case,
    "channel-robustness": cmd_channel_robustness,
    "instrument-robustness": cmd_instrument_robustness,
    "demo-appendix-d": cmd_demo_appendix_d,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE)
        return 0
    command = argv[0]
    if command not in COMMANDS:
        print(f"qrobust: unknown command {command!r}", file=sys.stderr)
        print(USAGE, file=sys.stderr)
        return 64
    try:
        report, csv_path = COMMANDS[command](argv[1:])
    except SystemExit as exc:  # argparse --help or usage errors
        return int(exc.code) if exc.code else 0
    except (ValidationError, DegenerateShiftError) as exc:
        print(f"qrobust {command}: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"qrobust {command}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"qrobust {command}: {exc}", file=sys.stderr)
        return 74
    print(json.dumps(report, indent=2, sort_keys=True))
    if csv_path:
        try:
            emit_csv(report, csv_path)
        except OSError as exc:
            print(f"qrobust {command}: cannot write CSV: {exc}", file=sys.stderr)
            return 74
    return 0


if __name__ == "__main__":
    sys.exit(main())
