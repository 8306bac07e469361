"""Shared setup for subcommands: run config resolution and on-demand artifacts."""
import argparse
import json
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

from pydantic import ValidationError

from hunter.config import RunConfig
from hunter.errors import NumericalError, UsageError
from hunter.numerics.hypergeom import (
    HomogeneousODE,
    HypergeomConstants,
    build_constants,
    cross_check_delta,
    fit_connection_constants,
)
from hunter.physics.isothermal import IsothermalTables, build_tables
from hunter.physics.matcher import MatchContext

logger = logging.getLogger(__name__)

CROSS_CHECK_TOL = 1e-6


def load_run_config(args, subcommand: str) -> RunConfig:
    """Config file (if any) with command-line flags applied on top."""
    path = getattr(args, "config", None)
    try:
        config = RunConfig.from_file(Path(path)) if path else RunConfig()
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    updates = {"subcommand": subcommand}
    if getattr(args, "output_dir", None):
        updates["output_dir"] = Path(args.output_dir)
    if getattr(args, "y0", None) is not None:
        updates["y0"] = args.y0
    if getattr(args, "ymax", None) is not None:
        updates["y_max"] = args.ymax
    if getattr(args, "k_range", None) is not None:
        updates["k_range"] = args.k_range
    if getattr(args, "lam", None) is not None:
        updates["lambda_override"] = args.lam
    if getattr(args, "epsilon", None) is not None:
        updates["epsilon_override"] = args.epsilon
    config = config.model_copy(update=updates)
    if getattr(args, "target_y0", None) is not None:
        config = config.model_copy(update={"match": config.match.model_copy(update={"target_y0": args.target_y0})})
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    return config


def parse_k_range(text: str) -> Tuple[int, int]:
    """'a..b' (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = (int(part) for part in text.split("..", 1))
        else:
            a = b = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad k range {text!r}, expected a..b") from exc
    if a < 0 or b < a:
        raise argparse.ArgumentTypeError(f"bad k range {text!r}")
    return a, b


def constants_with_check() -> Tuple[HypergeomConstants, float, Dict[str, float]]:
    """Closed-form constants, the closed-form vs ODE discrepancy and |fitted - closed| per mu."""
    constants = build_constants()
    ode = HomogeneousODE()
    delta = cross_check_delta(ode)
    fitted = fit_connection_constants(ode)
    fit_deltas = {name: abs(value - getattr(constants, name)) for name, value in fitted.items()}
    logger.info(f"fitted vs closed-form mu: {', '.join(f'{k} {v:.2e}' for k, v in fit_deltas.items())}")
    logger.info(f"hypergeometric cross-check delta {delta:.3e}")
    if delta > CROSS_CHECK_TOL:
        raise NumericalError(f"closed-form vs ODE discrepancy {delta:.3e} exceeds {CROSS_CHECK_TOL}")
    return constants, delta, fit_deltas


def match_context(config: RunConfig, tables: Optional[IsothermalTables] = None) -> MatchContext:
    tables = tables or build_tables(config.y_max)
    return MatchContext(constants=build_constants(), fits=tables.fits, tables=tables, config=config.match)


def common_options() -> argparse.ArgumentParser:
    """Options every subcommand accepts (argparse parent parser)."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--output-dir", help="directory for output files (default: HUNTER_OUTPUT_DIR or ./output)")
    parent.add_argument("--config", help="JSON run config; flags override its values")
    parent.add_argument("-v", "--verbose", action="store_true", help="debug logging to standard error")
    return parent
