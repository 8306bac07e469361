import argparse
import json

import pytest

from hunter.cli.context import parse_k_range
from hunter.io.export import write_profile
from hunter.main import main
from hunter.physics.selfsim import far_field


def test_parse_k_range():
    assert parse_k_range("2..5") == (2, 5)
    assert parse_k_range("3") == (3, 3)
    for text in ("5..2", "x", "-1..2"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_k_range(text)


def test_usage_errors_exit_64(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["match", "--k-range", "x"])
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 64

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["constants", "--config", str(bad), "--output-dir", str(tmp_path)]) == 64


def test_constants_are_reproducible(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["constants", "--output-dir", str(first)]) == 0
    assert main(["constants", "--output-dir", str(second)]) == 0
    text = (first / "hypergeom.json").read_text()
    assert text == (second / "hypergeom.json").read_text()
    data = json.loads(text)
    assert data["cross_check_delta"] <= 1e-6
    assert set(data) >= {"theta0", "mu3", "mu4", "mu5", "mu6", "c1", "d1"}
    assert set(data["mu_fit_deltas"]) == {"mu3", "mu4", "mu5", "mu6"}
    for name, delta in data["mu_fit_deltas"].items():
        assert delta <= 1e-6 * max(1.0, abs(data[name]))


def test_verify_far_field_csv(tmp_path):
    path = write_profile(far_field().profile(0.1, 10.0), tmp_path / "far.csv", per_decade=100)
    code = main(["verify", str(path), "--output-dir", str(tmp_path),
                 "--expect-intersections", "0", "--expect-sonic", "1"])
    assert code == 0
    report = json.loads((tmp_path / "far_report.json").read_text())
    assert report["passed"] is True
    assert report["intersection_count"] == 0

    assert main(["verify", str(path), "--output-dir", str(tmp_path), "--expect-intersections", "3"]) == 2


def test_verify_rejects_truncated_csv(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("y,rho,u\n1.0,1.0,0.0\n2.0,0.25,0.0\n")
    assert main(["verify", str(path), "--output-dir", str(tmp_path)]) == 65
