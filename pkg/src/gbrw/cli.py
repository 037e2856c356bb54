"""Command-line surface: rule inspection, analyses, simulations, reports.

Exit codes: 0 on success, 2 when an analysis reaches a failing verdict,
1 on usage or I/O errors (including capacity limits).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .algebra import CapacityError, beta_to_truth, truth_to_beta
from .dyadic import Dyadic
from .ergodic import (
    ergodic_repair,
    is_ergodic_up_to,
    orbit_decompose,
    sgn_beta_array,
)
from .moments import (
    DEFAULT_B_HORIZON,
    DEFAULT_TOLERANCE,
    analyze_set_sequence,
    closed_form_disjoint,
    condition_B_partial,
    intersection_diagnostic,
    sign_flip_rho,
    window_rho,
)
from .reports import format_value, write_beta_pixmap, write_csv
from .rules import (
    BUILTIN_DOC,
    ExtendedBrwRule,
    SignFlipRule,
    WindowMaxRule,
)
from .rulespec import RuleSpecError, load_rule
from .simulate import (
    SeedSpec,
    arcsine_test,
    covariation,
    mc_covariation,
    reference_arcsine_cdf,
    sample_path,
)
from . import selftest

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED_VERDICT = 2


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _load_rule(args):
    return load_rule(args.rule, sgn0=args.sgn0)


def _emit_rho_csv(args, report) -> str:
    path = _out_path(args, "rho_seq.csv")
    rows = [
        (k + 1, str(report.rho[k]), float(report.rho[k]), float(report.cesaro[k]))
        for k in range(report.horizon)
    ]
    write_csv(path, ("k", "rho_exact", "rho", "cesaro"), rows)
    return path


def cmd_rules(args) -> int:
    if args.rule:
        rule = _load_rule(args)
        print(f"rule: {rule.describe()}")
        for n in range(1, min(args.horizon, 6) + 1):
            family = rule.step_family(n + 1)
            body = ", ".join(str(m) for m in family.sorted_members()) or "(empty)"
            print(f"  multiplier {n}: beta members {body}")
        return EXIT_OK
    print("builtin rules (use as builtin:NAME, parameters colon-separated):")
    for name, doc in BUILTIN_DOC.items():
        print(f"  {name:32s} {doc}")
    return EXIT_OK


def cmd_convert(args) -> int:
    # --step addresses the multiplier index n: the sign function of the
    # first n increments, applied to increment n+1
    rule = _load_rule(args)
    n = args.step
    table = rule.step_table(n + 1)
    family = rule.step_family(n + 1)
    roundtrip = beta_to_truth(truth_to_beta(table)) == table
    members = ", ".join(str(m) for m in family.sorted_members()) or "(empty)"
    print(f"rule {rule.name}, multiplier {n} (a function of {n} increments)")
    print(f"beta members: {members}")
    signs = "".join("+" if s > 0 else "-" for s in table.signs)
    if len(signs) <= 64:
        print(f"truth table:  {signs}")
    print(f"round-trip exact: {roundtrip}")
    write_csv(
        _out_path(args, "beta_members.csv"),
        ("multiplier", "member"),
        [(n, str(m)) for m in family.sorted_members()],
    )
    write_csv(
        _out_path(args, "truth_table.csv"),
        ("mask", "sign"),
        [(mask, int(s)) for mask, s in enumerate(table.signs)],
    )
    return EXIT_OK if roundtrip else EXIT_FAILED_VERDICT


def _emit_set_diag(args, rule) -> None:
    if not isinstance(rule, ExtendedBrwRule):
        return
    horizon = args.horizon
    report = analyze_set_sequence(rule.seq, horizon, tolerance=args.tolerance)
    try:
        inter = intersection_diagnostic(rule.seq, horizon)
        d_seq = inter.mean_intersection
    except ValueError:
        d_seq = [None] * horizon
    rows = []
    for i in range(horizon):
        d_val = float(d_seq[i]) if d_seq[i] is not None else ""
        rows.append(
            (i + 1, float(report.n_ratio[i]), float(report.match_fraction[i]), d_val)
        )
    write_csv(
        _out_path(args, "set_diag.csv"),
        ("n", "first_match_ratio", "match_fraction", "mean_intersection"),
        rows,
    )
    print(
        f"set sequence {rule.seq.name}: nested={report.nested}, "
        f"independent-limit flag={report.independent_limit}"
    )


def cmd_moments(args) -> int:
    rule = _load_rule(args)
    report = condition_B_partial(
        rule, horizon=args.horizon, tolerance=args.tolerance, keep_grid=True
    )
    path_a = _emit_rho_csv(args, report)
    path_b = _out_path(args, "theta_grid.csv")
    write_csv(
        path_b,
        ("k", "l", "theta_exact", "theta"),
        [(k, l, str(v), float(v)) for k, l, v in report.theta_rows],
    )
    _emit_set_diag(args, rule)
    print(f"first-moment cesaro -> {float(report.cesaro[-1]):.6g}")
    print(f"double cesaro -> {float(report.double_cesaro[-1]):.6g}")
    print(f"verdict: {report.verdict} (tolerance {report.tolerance:g})")
    print(f"wrote {path_a}, {path_b}")
    return EXIT_OK if report.verdict == "converged" else EXIT_FAILED_VERDICT


def _closed_form_for(rule):
    if isinstance(rule, WindowMaxRule):
        return window_rho(rule.width)
    if isinstance(rule, ExtendedBrwRule):
        return closed_form_disjoint(1, None)
    if isinstance(rule, SignFlipRule) and rule.density is not None:
        return sign_flip_rho(rule.density)
    if rule.name == "identity":
        return Dyadic(1)
    if rule.name == "negation":
        return Dyadic(-1)
    if rule.name == "brw":
        return Dyadic(0)
    return None


def cmd_gaussian_check(args) -> int:
    rule = _load_rule(args)
    report = condition_B_partial(rule, horizon=args.horizon, tolerance=args.tolerance)
    _emit_rho_csv(args, report)
    rho = report.rho_estimate
    print(f"condition (A) cesaro -> {rho:.6g}"
          + (f", per-step value stabilized at {report.stabilized}"
             if report.stabilized is not None else ""))
    print(f"condition (B) double cesaro -> {float(report.double_cesaro[-1]):.6g} "
          f"(target rho^2 = {rho * rho:.6g})")
    closed = _closed_form_for(rule)
    if closed is not None:
        print(f"closed-form correlation for {rule.name}: "
              f"{format_value(closed)} = {float(closed):.6g}")
    print(f"verdict: {report.verdict} (tolerance {report.tolerance:g})")
    return EXIT_OK if report.verdict == "converged" else EXIT_FAILED_VERDICT


def cmd_simulate(args) -> int:
    rule = _load_rule(args)
    seed = SeedSpec(args.seed)
    if args.reps == 1:
        path = sample_path(rule, args.length, seed)
        write_csv(
            _out_path(args, "paths.csv"),
            ("k", "x", "y"),
            [(k, int(path.x[k]), int(path.y[k])) for k in range(path.n + 1)],
        )
        series = covariation(path, grid=None if args.grid is None
                             else [i / (args.grid - 1) for i in range(args.grid)])
        final = float(series.values[-1])
        print(f"single path of length {path.n}: final covariation {final:.6g}")
        print(f"wrote {_out_path(args, 'paths.csv')}")
        return EXIT_OK
    summary = mc_covariation(rule, args.length, args.reps, seed)
    write_csv(
        _out_path(args, "cov_summary.csv"),
        ("replicate", "final_covariation"),
        [(r, float(v)) for r, v in enumerate(summary.finals)],
    )
    print(
        f"{summary.replicates} replicates at n={summary.n}: "
        f"mean {summary.mean:.6g}, variance {summary.variance:.3g}, "
        f"stderr {summary.stderr:.3g}"
    )
    print(f"wrote {_out_path(args, 'cov_summary.csv')}")
    return EXIT_OK


def cmd_arcsine(args) -> int:
    seed = SeedSpec(args.seed)
    report = arcsine_test(
        args.length, args.reps, seed, sgn0=args.sgn0,
        threshold=args.tolerance if args.tolerance_set else None,
    )
    finals = np.sort(report.summary.finals)
    grid = np.linspace(-1.0, 1.0, args.grid or 201)
    empirical = np.searchsorted(finals, grid, side="right") / finals.size
    write_csv(
        _out_path(args, "ks_report.csv"),
        ("x", "empirical_cdf", "reference_cdf"),
        [
            (float(x), float(e), float(r))
            for x, e, r in zip(grid, empirical, reference_arcsine_cdf(grid))
        ],
    )
    print(
        f"KS distance {report.ks_stat:.4f} over {args.reps} replicates "
        f"(threshold {report.threshold:.4f}, p-value {report.ks_pvalue:.3g})"
    )
    print(f"wrote {_out_path(args, 'ks_report.csv')}")
    return EXIT_OK if report.passed else EXIT_FAILED_VERDICT


def cmd_ergodic_check(args) -> int:
    rule = _load_rule(args)
    verdict = is_ergodic_up_to(rule, args.horizon)
    orbit_n = min(args.horizon, 10)
    decomposition = orbit_decompose(rule, orbit_n)
    write_csv(
        _out_path(args, "orbits.csv"),
        ("cycle", "length"),
        [(i, length) for i, length in enumerate(decomposition.cycles)],
    )
    if verdict.ergodic_so_far:
        suffix = " (closed form for all steps)" if verdict.closed_form else ""
        print(f"rule {rule.name}: single-orbit criterion holds for "
              f"n <= {verdict.checked_up_to}{suffix}")
    else:
        where = ("psi0" if verdict.first_failure == 0
                 else f"step {verdict.first_failure}")
        print(f"rule {rule.name}: NOT ergodic, first failure at {where} "
              f"(value {verdict.failure_value:+d})")
        if args.repair:
            repaired = ergodic_repair(rule, horizon=min(args.horizon, 12))
            fixed = is_ergodic_up_to(repaired, min(args.horizon, 12))
            print(f"repaired rule {repaired.name}: ergodic up to "
                  f"{fixed.checked_up_to} = {fixed.ergodic_so_far}")
    print(
        f"tau_{orbit_n} cycle lengths: {list(decomposition.cycles[:8])}"
        + ("..." if len(decomposition.cycles) > 8 else "")
    )
    print(f"wrote {_out_path(args, 'orbits.csv')}")
    return EXIT_OK if verdict.ergodic_so_far else EXIT_FAILED_VERDICT


def cmd_beta_array(args) -> int:
    array = sgn_beta_array(args.horizon)
    write_csv(
        _out_path(args, "beta_array.csv"),
        ("n", "k", "beta"),
        array.cells(),
    )
    write_beta_pixmap(_out_path(args, "beta_array.ppm"), array.rows, array.size)
    print(f"wrote beta_array.csv and beta_array.ppm for n <= {array.size}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = selftest.run_all(seed=args.seed)
    failed = 0
    for name, ok, detail in results:
        status = "ok" if ok else "FAIL"
        print(f"{name:24s} {status:4s} {detail}")
        if not ok:
            failed += 1
    if failed:
        print(f"{failed} suite(s) failed")
        return EXIT_FAILED_VERDICT
    print(f"all {len(results)} suites passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbrw",
        description="Bootstrap random walks: rules, moments, simulation, ergodicity",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, rule=False, rule_required=True):
        p.add_argument("--out", default=".", help="output directory for reports")
        p.add_argument("--seed", type=int, default=20260809,
                       help="master seed for any randomized work")
        p.add_argument("--tolerance", type=float, default=None,
                       help="verdict tolerance (command-specific default)")
        p.add_argument("--sgn0", type=int, choices=(-1, 1), default=-1,
                       help="value assigned to sgn(0) in sign-based rules")
        if rule:
            p.add_argument("--rule", required=rule_required,
                           help="builtin:NAME[:params] or a rule document path")

    p = sub.add_parser("rules", help="list builtin rules or describe one")
    add_common(p, rule=True, rule_required=False)
    p.add_argument("--horizon", type=int, default=4)
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("convert", help="dump truth table and beta family at a step")
    add_common(p, rule=True)
    p.add_argument("--step", type=int, required=True,
                   help="multiplier index n (the sign function of the first "
                        "n increments)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("moments", help="condition (A)/(B) reports with CSV output")
    add_common(p, rule=True)
    p.add_argument("--horizon", type=int, default=256)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("gaussian-check",
                       help="combined condition (A)/(B) verdict and closed forms")
    add_common(p, rule=True)
    p.add_argument("--horizon", type=int, default=DEFAULT_B_HORIZON)
    p.set_defaults(func=cmd_gaussian_check)

    p = sub.add_parser("simulate", help="Monte Carlo covariation (or one path dump)")
    add_common(p, rule=True)
    p.add_argument("--length", type=int, default=100000)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--grid", type=int, default=None,
                   help="grid points for series output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("arcsine", help="KS test of the sign rule against its limit law")
    add_common(p)
    p.add_argument("--length", type=int, default=100000)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--grid", type=int, default=201)
    p.set_defaults(func=cmd_arcsine)

    p = sub.add_parser("ergodic-check", help="single-orbit criterion scan and orbits")
    add_common(p, rule=True)
    p.add_argument("--horizon", type=int, default=12)
    p.add_argument("--repair", action="store_true",
                   help="also report the minimally repaired rule")
    p.set_defaults(func=cmd_ergodic_check)

    p = sub.add_parser("beta-array", help="sign-rule coefficient array CSV and pixmap")
    add_common(p)
    p.add_argument("--horizon", type=int, default=800)
    p.set_defaults(func=cmd_beta_array)

    p = sub.add_parser("selftest", help="run all oracle-equality suites")
    add_common(p)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tolerance is None:
        args.tolerance_set = False
        args.tolerance = DEFAULT_TOLERANCE
    else:
        args.tolerance_set = True
    try:
        return args.func(args)
    except RuleSpecError as exc:
        print(f"rule specification error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity limit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
