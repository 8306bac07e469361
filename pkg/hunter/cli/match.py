"""match - find lambda_k for a range of k and write the glued profiles."""
import logging
from pathlib import Path

from hunter.cli.context import common_options, load_run_config, match_context, parse_k_range
from hunter.errors import NoRootError
from hunter.io.export import write_json, write_profile, write_traces
from hunter.physics.matcher import (
    KOutcome,
    MatchResult,
    choose_y0,
    exterior_solve,
    glue,
    match_epsilon,
    match_family,
)
from hunter.schemas import MatchRow, MatchSummary, ProfileSidecar

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("match", parents=[common_options()], help="matched Hunter family lambda_k")
    parser.add_argument("--k-range", type=parse_k_range, help="inclusive range a..b (default 1..4)")
    parser.add_argument("--y0", type=float, help="matching radius (default: chosen by the wiggle condition)")
    parser.add_argument("--target-y0", type=float, help="scale near which y0 is chosen (default 0.02)")
    parser.add_argument("--ymax", type=float, help="isothermal tables extent (default 1e6)")
    parser.add_argument("--lambda", dest="lam", type=float, help="glue at this lambda instead of searching")
    parser.add_argument("--epsilon", type=float, help="with --lambda: use this epsilon instead of matching it")
    parser.set_defaults(handler=run)


def _row(outcome: KOutcome) -> MatchRow:
    if outcome.result is None:
        return MatchRow(k=outcome.k, failure=outcome.reason, message=str(outcome.error))
    r: MatchResult = outcome.result
    return MatchRow(
        k=r.k,
        lambda_k=r.lam,
        epsilon_k=r.epsilon,
        y_star=r.y_star,
        intersections=r.intersection_count,
        intersection_offset=r.intersection_offset,
        sonic_count=r.sonic_count,
        residual_max=r.residual_max,
        predicted_epsilon=r.predicted_epsilon,
        inflated=r.inflated,
    )


def _write_result(result: MatchResult, out: Path) -> None:
    write_profile(result.profile, out / f"profile_{result.k}.csv")
    write_traces(result.profile, out / f"traces_{result.k}.csv")
    sidecar = ProfileSidecar(
        kind="hunter", y_star=result.y_star, y0=result.y0, epsilon=result.epsilon, lam=result.lam, k=result.k,
        intersections=result.intersection_count, sonic_count=result.sonic_count, residual_max=result.residual_max,
    )
    write_json(sidecar, out / f"profile_{result.k}.json")


def _override(config, context, y0: float, out: Path) -> int:
    lam = config.lambda_override
    match = match_epsilon(lam, y0, context)
    epsilon = config.epsilon_override if config.epsilon_override is not None else match.epsilon
    profile = glue(exterior_solve(epsilon, y0, config=config.match), match.interior)
    write_profile(profile, out / "profile_override.csv")
    write_traces(profile, out / "traces_override.csv")
    write_json(ProfileSidecar(kind="hunter", y_star=1.0 + epsilon, y0=y0, epsilon=epsilon, lam=lam),
               out / "profile_override.json")
    return 0


def run(args) -> int:
    config = load_run_config(args, "match")
    out = Path(config.output_dir)
    context = match_context(config)
    if config.y0 is not None:
        y0, deviation = config.y0, None
    else:
        choice = choose_y0(context.constants, config.match.target_y0)
        y0, deviation = choice.y0, choice.deviation
    logger.info(f"matching at y0={y0:.10g}")

    if config.lambda_override is not None:
        return _override(config, context, y0, out)

    a, b = config.k_range
    outcomes = match_family(range(a, b + 1), y0, context)
    for outcome in outcomes:
        if outcome.result is not None:
            _write_result(outcome.result, out)
    rows = [_row(o) for o in outcomes]
    summary = MatchSummary(y0=y0, y0_deviation=deviation, rows=rows,
                           found=sum(1 for o in outcomes if o.result is not None))
    write_json(summary, out / "match_summary.json")

    for row in rows:
        if row.failure:
            print(f"k={row.k}: {row.failure}")
        else:
            print(f"k={row.k}: lambda={row.lambda_k:.10e} epsilon={row.epsilon_k:.10e} "
                  f"intersections={row.intersections} sonic={row.sonic_count} residual={row.residual_max:.2e}")
    if summary.found == 0:
        raise NoRootError(f"no lambda_k found for k in {a}..{b}")
    return 0
