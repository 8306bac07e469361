import pytest
from pydantic import ValidationError

from hunter.config import IntegratorConfig, MatchConfig, RunConfig, Settings


def test_run_config_file_round_trip(tmp_path):
    config = RunConfig(subcommand="match", y0=0.0173, k_range=(2, 5), lambda_override=1e-6,
                       output_dir=tmp_path / "out", match=MatchConfig(series_order=12))
    path = tmp_path / "run.json"
    config.to_file(path)
    loaded = RunConfig.from_file(path)
    assert loaded == config
    assert loaded.match.series_order == 12
    assert loaded.k_range == (2, 5)


def test_integrator_config_rejects_bad_values():
    with pytest.raises(ValidationError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValidationError):
        IntegratorConfig(method="Euler")
    with pytest.raises(ValidationError):
        IntegratorConfig(max_step_factor=2.0)


def test_match_config_bounds():
    with pytest.raises(ValidationError):
        MatchConfig(series_order=2)
    with pytest.raises(ValidationError):
        MatchConfig(target_y0=0.5)


def test_settings_read_output_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("HUNTER_OUTPUT_DIR", str(tmp_path))
    assert Settings().output_dir == tmp_path
