import json

import numpy as np
import pandas as pd
import pytest

from hunter.errors import DataFormatError
from hunter.io.export import export_grid, write_json, write_profile
from hunter.io.ingest import load_profile
from hunter.physics.selfsim import far_field
from hunter.schemas import SweepSummary


def write_rows(path, rows, header="y,rho,u"):
    path.write_text(header + "\n" + "\n".join(",".join(str(v) for v in row) for row in rows) + "\n")
    return path


def good_rows(n=10):
    return [(y, y ** -2, 0.0) for y in np.geomspace(0.5, 5.0, n)]


def test_profile_round_trip(tmp_path):
    path = write_profile(far_field().profile(0.1, 10.0), tmp_path / "far.csv", per_decade=50)
    df = pd.read_csv(path)
    assert list(df.columns) == ["y", "rho", "u"]
    profile = load_profile(path)
    assert profile.y_min == pytest.approx(0.1) and profile.y_max == pytest.approx(10.0)
    ys = np.geomspace(0.2, 8.0, 30)
    rho, u = profile.evaluate(ys)
    np.testing.assert_allclose(rho, ys ** -2, rtol=1e-10)
    np.testing.assert_allclose(u, 0.0, atol=1e-12)


def test_csv_keeps_full_precision(tmp_path):
    profile = far_field().profile(0.1, 10.0)
    path = write_profile(profile, tmp_path / "far.csv", per_decade=5)
    df = pd.read_csv(path, float_precision="round_trip")
    np.testing.assert_array_equal(df["y"].to_numpy(), export_grid(profile, 5))


def test_load_profile_rejects_bad_files(tmp_path):
    rows = good_rows()
    cases = {
        "columns.csv": write_rows(tmp_path / "columns.csv", rows, header="y,rho,v"),
        "short.csv": write_rows(tmp_path / "short.csv", rows[:5]),
        "negative.csv": write_rows(tmp_path / "negative.csv", [(-1.0, 1.0, 0.0)] + rows[1:]),
        "order.csv": write_rows(tmp_path / "order.csv", rows[::-1]),
        "density.csv": write_rows(tmp_path / "density.csv", rows[:-1] + [(6.0, 0.0, 0.0)]),
        "text.csv": write_rows(tmp_path / "text.csv", rows[:-1] + [(6.0, "abc", 0.0)]),
    }
    (tmp_path / "empty.csv").write_text("")
    cases["empty.csv"] = tmp_path / "empty.csv"
    for name, path in cases.items():
        with pytest.raises(DataFormatError):
            load_profile(path)


def test_json_is_sorted_and_terminated(tmp_path):
    path = write_json(SweepSummary(y0=0.02, points=3, skipped=1), tmp_path / "sub" / "sweep.json")
    text = path.read_text()
    assert text.endswith("\n")
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert data["period"] is None
