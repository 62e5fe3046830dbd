import pytest
from pydantic import ValidationError

from app.config.settings import Settings, get_settings
from app.config.workspace import WorkspaceInitializer, workspace_initializer
from app.schemas.base import ExperimentConfig, GridResult, NoiseGrid, NoiseSpec, TripletMargins
from app.utils.constants import CalibrationMode, ClusterMethod, GridPairing, LossType
from app.utils.exceptions import ConfigError


def test_default_config():
    config = ExperimentConfig()
    assert config.losses == [LossType.TRIPLET1, LossType.TRIPLET2, LossType.TRIPLET3]
    assert config.calibration_for(LossType.TRIPLET1) == CalibrationMode.REGRESSION
    assert config.calibration_for(LossType.TRIPLET3) == CalibrationMode.ANALYTIC
    assert config.margins.alpha == 0.8 and config.margins.beta == 0.4
    assert config.seeds == [1, 2, 3, 4, 5]
    assert config.methods == [ClusterMethod.MULTICUT]
    assert config.k is None


def test_calibration_token_applies_to_all_losses():
    config = ExperimentConfig(calibration="regression")
    assert {config.calibration_for(loss) for loss in LossType} == {CalibrationMode.REGRESSION}


@pytest.mark.parametrize(
    "overrides",
    [
        {"calibration": "analytic"},
        {"seeds": []},
        {"losses": []},
        {"methods": ["kmeans"]},
        {"methods": ["multicut", "kmeans"], "k": None},
        {"k": 0},
        {"embedding_dims": []},
        {"epochs": -1},
    ],
)
def test_invalid_configs(overrides):
    with pytest.raises(ValidationError):
        ExperimentConfig(**overrides)


def test_analytic_without_triplet1_is_accepted():
    config = ExperimentConfig(calibration="analytic", losses=[LossType.TRIPLET2, LossType.TRIPLET3])
    assert config.calibration_for(LossType.TRIPLET2) == CalibrationMode.ANALYTIC


def test_k_only_needed_for_kmeans():
    config = ExperimentConfig(k=None, methods=[ClusterMethod.MULTICUT])
    assert config.k is None


def test_margins_order():
    with pytest.raises(ValidationError):
        TripletMargins(alpha=0.4, beta=0.8)
    with pytest.raises(ValidationError):
        TripletMargins(alpha=0.8, beta=0.0)


def test_grid_specs():
    specs = NoiseGrid().specs()
    assert len(specs) == 20
    assert sum(spec.neg_random for spec in specs) == 4
    assert specs[-1].neg_random and specs[-1].neg_label == "random"
    assert NoiseSpec(pos_noise=0.1, neg_noise=0.05) in specs


def test_diagonal_specs():
    grid = NoiseGrid(pos_rates=[0.0, 0.1], neg_rates=[0.0, 0.1], neg_random=False, pairing=GridPairing.DIAGONAL)
    assert [(s.pos_noise, s.neg_noise) for s in grid.specs()] == [(0.0, 0.0), (0.1, 0.1)]
    with pytest.raises(ValidationError):
        NoiseGrid(pos_rates=[0.0], neg_rates=[0.0, 0.1], pairing=GridPairing.DIAGONAL)


def test_noise_rates_outside_unit_interval():
    with pytest.raises(ValidationError):
        NoiseGrid(pos_rates=[1.5])
    with pytest.raises(ValidationError):
        NoiseSpec(neg_noise=-0.1)


def test_grid_result_json_round_trip():
    result = GridResult(config=ExperimentConfig(calibration="regression"))
    assert GridResult.model_validate_json(result.model_dump_json()) == result


def test_settings_defaults(monkeypatch):
    monkeypatch.delenv("MAX_WORKERS", raising=False)
    settings = Settings(_env_file=None)
    assert settings.MAX_WORKERS == 1
    assert settings.BRUTE_FORCE_MAX_NODES == 12
    assert 0 < settings.PROBABILITY_EPSILON < 0.5
    assert get_settings() is get_settings()


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("MAX_WORKERS", "4")
    assert Settings(_env_file=None).MAX_WORKERS == 4


def test_workspace_singleton(tmp_path):
    assert WorkspaceInitializer() is workspace_initializer
    target = workspace_initializer.initialize_output(str(tmp_path / "nested" / "out"))
    assert target.is_dir()
    assert str(target.resolve()) in workspace_initializer.directories()


def test_workspace_rejects_file_as_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ConfigError):
        workspace_initializer.initialize_output(str(blocker / "out"))


def test_cifar10_dir_resolution(tmp_path):
    assert workspace_initializer.resolve_cifar10_dir(str(tmp_path)) == tmp_path
    with pytest.raises(ConfigError):
        workspace_initializer.resolve_cifar10_dir(str(tmp_path / "missing"))
