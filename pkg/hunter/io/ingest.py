"""Ingest - Load profile CSVs into RadialProfile objects."""
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.interpolate import make_interp_spline

from hunter.errors import DataFormatError
from hunter.models import ProfileSegment, RadialProfile

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ["y", "rho", "u"]
MIN_ROWS = 8


def load_csv(file_path: Path, encoding: str = "utf-8") -> pd.DataFrame:
    """Load a CSV file into a DataFrame."""
    file_path = Path(file_path)
    logger.info(f"Loading CSV: {file_path}")
    try:
        df = pd.read_csv(file_path, encoding=encoding)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"{file_path.name}: unreadable CSV ({exc})") from exc
    logger.info(f"Loaded {len(df)} rows from {file_path.name}")
    return df


def validate_columns(df: pd.DataFrame, required_columns: list, file_name: str) -> bool:
    """Validate that required columns exist in the DataFrame."""
    missing = set(required_columns) - set(df.columns)
    if missing:
        logger.error(f"Missing columns in {file_name}: {missing}")
        return False
    return True


def validate_profile_frame(df: pd.DataFrame, file_name: str) -> pd.DataFrame:
    """Numeric, strictly increasing positive y, positive rho, enough rows."""
    if not validate_columns(df, PROFILE_COLUMNS, file_name):
        raise DataFormatError(f"{file_name}: expected columns {PROFILE_COLUMNS}, got {list(df.columns)}")
    frame = df[PROFILE_COLUMNS].apply(pd.to_numeric, errors="coerce")
    if frame.isna().any().any():
        bad = int(frame.isna().any(axis=1).sum())
        raise DataFormatError(f"{file_name}: {bad} row(s) with missing or non-numeric values")
    if len(frame) < MIN_ROWS:
        raise DataFormatError(f"{file_name}: {len(frame)} rows, need at least {MIN_ROWS}")
    y = frame["y"].to_numpy()
    if np.any(y <= 0):
        raise DataFormatError(f"{file_name}: y must be positive")
    if np.any(np.diff(y) <= 0):
        raise DataFormatError(f"{file_name}: y must be strictly increasing")
    if np.any(frame["rho"].to_numpy() <= 0):
        raise DataFormatError(f"{file_name}: rho must be positive")
    return frame


def profile_from_frame(frame: pd.DataFrame, label: str = "csv") -> RadialProfile:
    """Quintic splines of log rho and u in log y."""
    y = frame["y"].to_numpy(dtype=float)
    t = np.log(y)
    degree = min(5, len(y) - 1)
    log_rho = make_interp_spline(t, np.log(frame["rho"].to_numpy(dtype=float)), k=degree)
    u = make_interp_spline(t, frame["u"].to_numpy(dtype=float), k=degree)
    d_log_rho = log_rho.derivative()
    du = u.derivative()

    def evaluate(ys):
        s = np.log(np.asarray(ys, dtype=float))
        return np.exp(log_rho(s)), u(s)

    def derivative(ys):
        ys = np.asarray(ys, dtype=float)
        s = np.log(ys)
        return np.exp(log_rho(s)) * d_log_rho(s) / ys, du(s) / ys

    segment = ProfileSegment(float(y[0]), float(y[-1]), evaluate, derivative, label=label)
    return RadialProfile([segment], {"kind": label})


def load_profile(file_path: Path) -> RadialProfile:
    """Load and validate a profile CSV with header y,rho,u."""
    file_path = Path(file_path)
    df = load_csv(file_path)
    frame = validate_profile_frame(df, file_path.name)
    return profile_from_frame(frame, label=file_path.stem)
