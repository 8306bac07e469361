"""Export - CSV tables with 17 significant digits and JSON artifacts with sorted keys."""
import json
import logging
from pathlib import Path
from typing import Dict, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from hunter.analysis import profile_grid
from hunter.models import RadialProfile

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_frame(df: pd.DataFrame, file_path: Path) -> Path:
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(file_path, float_format=FLOAT_FORMAT, index=False)
    logger.info(f"Wrote {len(df)} rows to {file_path}")
    return file_path


def write_json(model: BaseModel, file_path: Path) -> Path:
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    file_path.write_text(json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2) + "\n",
                         encoding="utf-8")
    logger.info(f"Wrote {file_path}")
    return file_path


def export_grid(profile: RadialProfile, per_decade: int = 400) -> np.ndarray:
    """Profile grid; starts at the first seam when the profile reaches the origin."""
    ys = profile_grid(profile, per_decade)
    if profile.y_min == 0 and profile.breakpoints:
        ys = ys[ys >= profile.breakpoints[0]]
    return ys


def profile_frame(profile: RadialProfile, per_decade: int = 400) -> pd.DataFrame:
    ys = export_grid(profile, per_decade)
    rho, u = profile.evaluate(ys)
    return pd.DataFrame({"y": ys, "rho": rho, "u": u})


def traces_frame(profile: RadialProfile, per_decade: int = 400) -> pd.DataFrame:
    """Plot-ready columns y, p_minus_1, sonic, omega."""
    ys = export_grid(profile, per_decade)
    rho, u = profile.evaluate(ys)
    return pd.DataFrame({
        "y": ys,
        "p_minus_1": ys ** 2 * rho - 1.0,
        "sonic": (u + ys) ** 2 - 1.0,
        "omega": u / ys + 1.0,
    })


def write_profile(profile: RadialProfile, file_path: Path, per_decade: int = 400) -> Path:
    return write_frame(profile_frame(profile, per_decade), file_path)


def write_traces(profile: RadialProfile, file_path: Path, per_decade: int = 400) -> Path:
    return write_frame(traces_frame(profile, per_decade), file_path)


def write_columns(columns: Dict[str, Sequence[float]], file_path: Path) -> Path:
    return write_frame(pd.DataFrame({name: np.asarray(values) for name, values in columns.items()}), file_path)
