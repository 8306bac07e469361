"""sweep - tabulate G on a log-lambda grid."""
import logging
import math
from pathlib import Path

import numpy as np

from hunter.analysis import frequency_check
from hunter.cli.context import common_options, load_run_config, match_context
from hunter.errors import IllConditioned
from hunter.io.export import write_columns, write_json
from hunter.physics.matcher import choose_y0, sweep_G
from hunter.schemas import SweepSummary

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", parents=[common_options()], help="G on a log-lambda grid")
    parser.add_argument("--y0", type=float, help="matching radius (default: wiggle condition)")
    parser.add_argument("--target-y0", type=float, help="scale near which y0 is chosen")
    parser.add_argument("--ymax", type=float, help="isothermal tables extent (default 1e6)")
    parser.add_argument("--lambda-min", type=float, default=1e-9)
    parser.add_argument("--lambda-max", type=float, help="default y0/10")
    parser.add_argument("--points", type=int, default=120)
    parser.set_defaults(handler=run)


def run(args) -> int:
    config = load_run_config(args, "sweep")
    out = Path(config.output_dir)
    context = match_context(config)
    y0 = config.y0 if config.y0 is not None else choose_y0(context.constants, config.match.target_y0).y0
    lam_max = args.lambda_max or y0 / 10
    lambdas = np.geomspace(args.lambda_min, lam_max, args.points)
    rows = sweep_G(y0, lambdas, context)

    columns = {"lambda": [r[0] for r in rows], "G": [r[1] for r in rows], "epsilon": [r[2] for r in rows]}
    write_columns(columns, out / "sweep_G.csv")
    period = uncertainty = None
    try:
        fit = frequency_check(columns["lambda"], columns["G"], min_periods=1.0, corrections=False)
        period = 2 * math.pi / fit.omega
        uncertainty = period * fit.uncertainty / fit.omega
    except IllConditioned as exc:
        logger.warning(f"period not measured: {exc}")
    write_json(SweepSummary(y0=y0, points=len(rows), skipped=len(lambdas) - len(rows), period=period,
                            period_uncertainty=uncertainty), out / "sweep_G.json")
    print(f"{len(rows)} points, period in log lambda: {period}")
    return 0
