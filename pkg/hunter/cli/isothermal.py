"""isothermal - tabulate Q, u*, v1, v2 and fit the interior constants."""
import logging
from pathlib import Path

from hunter.cli.context import common_options, load_run_config
from hunter.io.export import write_columns, write_json
from hunter.physics.isothermal import build_tables, kernel_amplitude_relation
from hunter.schemas import IsothermalFitsRead

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("isothermal", parents=[common_options()],
                                   help="isothermal sphere tables and fitted constants")
    parser.add_argument("--ymax", type=float, help="outer end of the tables (default 1e6)")
    parser.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"), help="fit window in y")
    parser.add_argument("--rows", type=int, default=2000, help="rows in isothermal.csv")
    parser.set_defaults(handler=run)


def run(args) -> int:
    config = load_run_config(args, "isothermal")
    tables = build_tables(config.y_max, tuple(args.window) if args.window else None)
    out = Path(config.output_dir)
    write_columns(tables.samples(args.rows), out / "isothermal.csv")
    fits = tables.fits
    record = IsothermalFitsRead(
        c2=fits.c2, d2=fits.d2, c3=fits.c3, d3=fits.d3, c4=fits.c4, d4=fits.d4,
        fit_residuals=fits.fit_residuals,
        window=fits.window,
        y_max=tables.y_max,
        kernel_relation=kernel_amplitude_relation(fits),
        wronskian_error=tables.kernel.wronskian_error,
    )
    write_json(record, out / "isothermal.json")
    print(f"c2={fits.c2:.10g} d2={fits.d2:.10g} (window {fits.window[0]:.3g}..{fits.window[1]:.3g})")
    return 0
