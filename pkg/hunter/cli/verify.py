"""verify - consolidated checks on a profile CSV."""
from pathlib import Path

from hunter.analysis import VerificationReport, verify_profile
from hunter.cli.context import common_options, load_run_config
from hunter.io.export import write_json
from hunter.io.ingest import load_profile
from hunter.schemas import VerificationReportRead

CSV_RESIDUAL_TOL = 1e-5


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", parents=[common_options()], help="verify a profile CSV (y,rho,u)")
    parser.add_argument("profile", help="CSV with header y,rho,u")
    parser.add_argument("--expect-intersections", type=int, help="required intersection count")
    parser.add_argument("--expect-sonic", type=int, help="required number of sonic points")
    parser.add_argument("--residual-tol", type=float, default=CSV_RESIDUAL_TOL,
                        help="relative residual tolerance (spline derivatives)")
    parser.add_argument("--report", help="report path (default: <output-dir>/<stem>_report.json)")
    parser.set_defaults(handler=run)


def print_report(report: VerificationReport) -> None:
    print(f"{'residual_max':<22}{report.residual_max:.3e}")
    print(f"{'intersections':<22}{report.intersection_count} (tail certified: {report.tail_certified})")
    for point in report.sonic_points:
        flag = " degenerate" if point.degenerate else ""
        print(f"{'sonic point':<22}y={point.y:.12g} {point.branch.value}{flag}")
    for name, ok in sorted(report.checks.items()):
        print(f"{name:<22}{'pass' if ok else 'FAIL'}")


def run(args) -> int:
    config = load_run_config(args, "verify")
    path = Path(args.profile)
    profile = load_profile(path)
    report = verify_profile(profile, args.expect_intersections, args.expect_sonic, residual_tol=args.residual_tol)
    target = Path(args.report) if args.report else Path(config.output_dir) / f"{path.stem}_report.json"
    write_json(VerificationReportRead.model_validate(report), target)
    print_report(report)
    return 0 if report.passed else 2
