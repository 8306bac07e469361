"""constants - hypergeometric connection constants with the closed-form vs ODE cross-check."""
from pathlib import Path

from hunter.cli.context import common_options, constants_with_check, load_run_config
from hunter.io.export import write_json
from hunter.schemas import ConstantsRead


def register(subparsers) -> None:
    parser = subparsers.add_parser("constants", parents=[common_options()], help="theta0, mu3..mu6, c1, d1")
    parser.set_defaults(handler=run)


def run(args) -> int:
    config = load_run_config(args, "constants")
    constants, delta, fit_deltas = constants_with_check()
    record = ConstantsRead(cross_check_delta=delta, mu_fit_deltas=fit_deltas, **constants.as_dict())
    write_json(record, Path(config.output_dir) / "hypergeom.json")
    print(f"c1={constants.c1:.15g} d1={constants.d1:.15g} theta0={constants.theta0:.15g}")
    return 0
