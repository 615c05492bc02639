"""Test experiment configurations."""
import json
from pathlib import Path

import pytest

from koopman_mp import Experiment, experiment_class
from koopman_mp.config import DEFAULT_OUTPUT, ExperimentConfig
from koopman_mp.exceptions import ConfigError, UnsupportedExperimentError

__author__ = "Koen Vervloesem"
__copyright__ = "Koen Vervloesem"
__license__ = "MIT"


def test_from_dict_defaults() -> None:
    """Test whether only the experiment name is required."""
    config = ExperimentConfig.from_dict({"experiment": "shift-warning"})
    assert config.system == {}
    assert config.dictionary is None
    assert config.seeds is None
    assert config.output == DEFAULT_OUTPUT
    assert config.workers == 1


def test_from_dict_full() -> None:
    """Test whether a complete configuration is accepted."""
    config = ExperimentConfig.from_dict(
        {
            "experiment": "lorenz-w1-vs-M",
            "system": {"dt": 0.05, "x0": [0.0, 1.0, 2.0]},
            "dictionary": {"type": "delay", "observable": "lorenz-x", "N": 8},
            "sweep": {"M": [64, 128], "M_ref": 512},
            "seeds": [3],
            "output": "out",
            "workers": 2,
        },
    )
    assert config.sweep["M"] == [64, 128]
    assert config.to_dict()["dictionary"]["N"] == 8


def test_scalar_for_sweep_list() -> None:
    """Test whether a single value may replace a sweep list."""
    config = ExperimentConfig.from_dict({"experiment": "pendulum-noise", "sweep": {"tau": 0.05}})
    assert Experiment.create(config).sweep_values("tau") == [0.05]


@pytest.mark.parametrize(
    "data",
    [
        [1, 2],
        {},
        {"experiment": 3},
        {"experiment": "shift-warning", "colour": "red"},
        {"experiment": "shift-warning", "system": {"K": 2}},
        {"experiment": "shift-warning", "system": {"N": "six"}},
        {"experiment": "shift-warning", "system": {"N": True}},
        {"experiment": "shift-warning", "system": []},
        {"experiment": "pendulum-noise", "sweep": {"tau": ["a"]}},
        {"experiment": "shift-warning", "seeds": []},
        {"experiment": "shift-warning", "seeds": [-1]},
        {"experiment": "shift-warning", "seeds": 1},
        {"experiment": "shift-warning", "workers": 0},
        {"experiment": "shift-warning", "workers": 1.5},
        {"experiment": "shift-warning", "output": ""},
        {"experiment": "rotation-exact", "dictionary": {"type": "wavelet"}},
    ],
)
def test_invalid_config(data: object) -> None:
    """Test whether invalid configurations are rejected."""
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(data)


def test_unknown_experiment() -> None:
    """Test whether an unknown experiment is rejected."""
    with pytest.raises(UnsupportedExperimentError):
        ExperimentConfig.from_dict({"experiment": "unknown"})


def test_from_file(tmp_path: Path) -> None:
    """Test whether a configuration is read from a JSON file."""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"experiment": "rotation-exact", "system": {"M": 32}}))
    assert ExperimentConfig.from_file(path).system == {"M": 32}


@pytest.mark.parametrize("content", [None, "{not json"])
def test_from_file_invalid(tmp_path: Path, content: object) -> None:
    """Test whether missing or unparsable files are rejected."""
    path = tmp_path / "config.json"
    if content is not None:
        path.write_text(content)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(path)


def test_with_overrides() -> None:
    """Test whether command-line overrides replace output, seeds and workers."""
    config = ExperimentConfig.from_dict({"experiment": "pendulum-noise", "seeds": [0, 1]})
    overridden = config.with_overrides(output="elsewhere", seed=7, workers=-1)
    assert overridden.output == "elsewhere"
    assert overridden.seeds == [7]
    assert overridden.workers == -1
    assert config.seeds == [0, 1]
    assert config.with_overrides() == config


def test_with_overrides_invalid() -> None:
    """Test whether an invalid override is rejected."""
    config = ExperimentConfig.from_dict({"experiment": "shift-warning"})
    with pytest.raises(ConfigError):
        config.with_overrides(seed=-3)


def test_schema_is_valid_config() -> None:
    """Test whether the schema of every experiment is an accepted configuration."""
    from koopman_mp import supported_experiments

    for name in supported_experiments():
        schema = experiment_class(name).schema()
        assert schema["experiment"] == name
        config = ExperimentConfig.from_dict(json.loads(json.dumps(schema)))
        assert config.output == f"results/{name}"
