"""Experiment configuration.

An experiment is configured by a JSON document such as::

    {
        "experiment": "lorenz-w1-vs-M",
        "system": {"dt": 0.1},
        "dictionary": {"type": "delay", "observable": "lorenz-x", "N": 50},
        "sweep": {"M": [512, 1024, 2048]},
        "seeds": [0],
        "output": "results/lorenz-w1-vs-M",
        "workers": 2
    }

Only ``experiment`` is required. The keys of ``system`` and ``sweep`` must be
among the defaults the experiment publishes, see ``koopman-mp schema <name>``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from numbers import Real
from pathlib import Path
from typing import Any

from koopman_mp.exceptions import ConfigError, DictionaryError

_logger = logging.getLogger(__name__)

DEFAULT_OUTPUT = "results"


@dataclass(frozen=True)
class ExperimentConfig:
    """The configuration of an experiment run.

    Attributes:
        experiment (str): The experiment name.
        system (dict[str, Any]): System parameters overriding the defaults.
        dictionary (dict[str, Any] | None): Dictionary descriptor, or ``None``
          for the experiment's default.
        sweep (dict[str, Any]): Sweep values overriding the defaults.
        seeds (list[int] | None): Seeds, one sweep point per seed where applicable,
          or ``None`` for the experiment's default seeds.
        output (str): The output directory.
        workers (int): The number of sweep points computed in parallel.
    """

    experiment: str
    system: dict[str, Any] = field(default_factory=dict)
    dictionary: dict[str, Any] | None = None
    sweep: dict[str, Any] = field(default_factory=dict)
    seeds: list[int] | None = None
    output: str = DEFAULT_OUTPUT
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Create and validate a configuration from a parsed JSON document.

        Args:
            data (dict[str, Any]): The document.

        Raises:
            ConfigError: If keys are unknown, values have the wrong type, or the
              dictionary descriptor is invalid.
            UnsupportedExperimentError: If the experiment doesn't exist.

        Returns:
            ExperimentConfig: The validated configuration.

        Example:
            >>> from koopman_mp.config import ExperimentConfig
            >>> ExperimentConfig.from_dict({"experiment": "shift-warning"}).workers
            1
        """
        if not isinstance(data, dict):
            msg = f"configuration must be a JSON object, got {type(data).__name__}"
            raise ConfigError(msg)
        known = {config_field.name for config_field in fields(cls)}
        unknown = set(data) - known
        if unknown:
            msg = f"unknown configuration keys {sorted(unknown)}"
            raise ConfigError(msg)
        if not isinstance(data.get("experiment"), str):
            msg = "configuration needs an 'experiment' name"
            raise ConfigError(msg)
        config = cls(**data)
        config.validate()
        return config

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        """Read and validate a JSON configuration file.

        Raises:
            ConfigError: If the file can't be read or parsed, or is invalid.
        """
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exception:
            msg = f"can't read configuration {path}: {exception}"
            raise ConfigError(msg) from exception
        return cls.from_dict(data)

    def with_overrides(
        self,
        output: str | None = None,
        seed: int | None = None,
        workers: int | None = None,
    ) -> ExperimentConfig:
        """Return a copy with command-line overrides applied."""
        config = self
        if output is not None:
            config = replace(config, output=output)
        if seed is not None:
            config = replace(config, seeds=[seed])
        if workers is not None:
            config = replace(config, workers=workers)
        config.validate()
        return config

    def to_dict(self) -> dict[str, Any]:
        """Return the configuration as a JSON-compatible dictionary."""
        return asdict(self)

    def validate(self) -> None:
        """Check types and keys against the experiment's published defaults.

        Raises:
            ConfigError: If the configuration is invalid.
            UnsupportedExperimentError: If the experiment doesn't exist.
        """
        from koopman_mp import experiment_class
        from koopman_mp.dictionary import Dictionary

        experiment = experiment_class(self.experiment)
        _check_section("system", self.system, experiment.SYSTEM_DEFAULTS)
        _check_section("sweep", self.sweep, experiment.SWEEP_DEFAULTS)
        if self.seeds is not None and not _valid_seeds(self.seeds):
            msg = f"seeds must be a nonempty list of nonnegative integers, got {self.seeds!r}"
            raise ConfigError(msg)
        if not isinstance(self.output, str) or not self.output:
            msg = f"output must be a directory name, got {self.output!r}"
            raise ConfigError(msg)
        if not isinstance(self.workers, int) or isinstance(self.workers, bool) or self.workers == 0:
            msg = f"workers must be a nonzero integer, got {self.workers!r}"
            raise ConfigError(msg)
        if self.dictionary is not None:
            try:
                Dictionary.create_from_descriptor(self.dictionary)
            except DictionaryError as exception:
                raise ConfigError(str(exception)) from exception


def _valid_seeds(seeds: Any) -> bool:  # noqa: ANN401
    return (
        isinstance(seeds, list)
        and len(seeds) > 0
        and all(
            isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0
            for seed in seeds
        )
    )


def _same_kind(value: Any, default: Any) -> bool:  # noqa: ANN401
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, Real):
        return isinstance(value, Real) and not isinstance(value, bool)
    if isinstance(default, list):
        return isinstance(value, list) and all(
            _same_kind(item, default[0]) for item in value
        ) if default else isinstance(value, list)
    if isinstance(default, dict):
        return isinstance(value, dict)
    return isinstance(value, type(default))


def _check_section(name: str, values: Any, defaults: dict[str, Any]) -> None:  # noqa: ANN401
    if not isinstance(values, dict):
        msg = f"'{name}' must be a JSON object, got {type(values).__name__}"
        raise ConfigError(msg)
    unknown = set(values) - set(defaults)
    if unknown:
        msg = f"unknown {name} keys {sorted(unknown)}, expected some of {sorted(defaults)}"
        raise ConfigError(msg)
    for key, value in values.items():
        default = defaults[key]
        # A scalar may stand in for a one-element sweep list.
        if isinstance(default, list) and not isinstance(value, list) and default and _same_kind(value, default[0]):
            continue
        if not _same_kind(value, default):
            msg = f"{name} key {key!r} expects a value like {default!r}, got {value!r}"
            raise ConfigError(msg)
