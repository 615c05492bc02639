"""Measure-preserving extended dynamic mode decomposition.

This project approximates the Koopman operator of a measure-preserving dynamical
system from snapshot data with a Galerkin method that keeps the isometry of the
operator. It computes spectral measures, projection-valued functional calculus,
residuals and Koopman mode forecasts, and ships experiments reproducing the
method's convergence and robustness properties on benchmark systems.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from importlib import import_module
from importlib.metadata import PackageNotFoundError, version  # pragma: no cover
from inspect import isclass
from pathlib import Path
from pkgutil import iter_modules
from typing import TYPE_CHECKING, Any, ClassVar

from koopman_mp.exceptions import UnsupportedExperimentError

if TYPE_CHECKING:
    from koopman_mp.config import ExperimentConfig
    from koopman_mp.dictionary import Dictionary

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = "koopman-mp"
    __version__ = version(dist_name)
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

_logger = logging.getLogger(__name__)


_supported_experiments: list[type[Experiment]] = []
"""Registry of all :class:`Experiment` subclasses."""


def supported_experiments() -> list[str]:
    """Get a list of names of supported experiments.

    Returns:
        list[str]: The names of the experiments this library can run.

    Example:
        >>> from koopman_mp import supported_experiments
        >>> "shift-warning" in supported_experiments()
        True
    """
    return [experiment.EXPERIMENT_NAME for experiment in _supported_experiments]


def experiment_class(name: str) -> type[Experiment]:
    """Look up the experiment class with the given name.

    Raises:
        UnsupportedExperimentError: If there's no experiment with this name.
    """
    for experiment in _supported_experiments:
        if experiment.EXPERIMENT_NAME == name:
            return experiment
    msg = f"unsupported experiment {name!r}, choose from {supported_experiments()}"
    raise UnsupportedExperimentError(msg)


@dataclass(frozen=True)
class Check:
    """An acceptance check of an experiment.

    Attributes:
        value (float): The measured value.
        lower (float | None): The smallest accepted value.
        upper (float | None): The largest accepted value.
    """

    value: float
    lower: float | None = None
    upper: float | None = None

    @property
    def passed(self) -> bool:
        """Whether the value lies within the bounds."""
        if self.lower is not None and not self.value >= self.lower:
            return False
        return self.upper is None or self.value <= self.upper

    def to_dict(self) -> dict[str, Any]:
        """Return the check as a JSON-compatible dictionary."""
        return {
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "passed": self.passed,
        }


@dataclass
class PointResult:
    """The result of one sweep point.

    Attributes:
        point (dict[str, Any]): The sweep point.
        metrics (dict[str, Any]): Scalar results.
        tables (dict[str, list[dict[str, Any]]]): Rows of CSV tables by name.
    """

    point: dict[str, Any]
    metrics: dict[str, Any] = field(default_factory=dict)
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)


@dataclass
class Summary:
    """The aggregated result of an experiment.

    Attributes:
        metrics (dict[str, Any]): Aggregated scalar results, such as fitted slopes.
        checks (dict[str, Check]): Acceptance checks by name.
        tables (dict[str, list[dict[str, Any]]]): Aggregated CSV tables by name.
    """

    metrics: dict[str, Any] = field(default_factory=dict)
    checks: dict[str, Check] = field(default_factory=dict)
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """Whether all checks passed."""
        return all(check.passed for check in self.checks.values())


class Experiment(ABC):
    """Abstract class that represents an experiment.

    Every experiment is implemented as a separate subclass in the
    :mod:`koopman_mp.experiments` package by giving the class variables a value
    and implementing the abstract methods. An experiment is a sweep over
    independent points followed by a summary.

    Attributes:
        config (ExperimentConfig): The configuration of this run.
        system (dict[str, Any]): System parameters, defaults merged with the
          configuration.
        sweep (dict[str, Any]): Sweep values, defaults merged with the
          configuration.
        dictionary_descriptor (dict[str, Any] | None): The dictionary descriptor.
        seeds (list[int]): The seeds of this run.
    """

    EXPERIMENT_NAME: ClassVar[str]
    """The name of the experiment on the command line and in configurations."""

    DESCRIPTION: ClassVar[str] = ""
    """A one-line description of the experiment."""

    SYSTEM_DEFAULTS: ClassVar[dict[str, Any]] = {}
    """Default system parameters."""

    SWEEP_DEFAULTS: ClassVar[dict[str, Any]] = {}
    """Default sweep values."""

    DICTIONARY_DEFAULT: ClassVar[dict[str, Any] | None] = None
    """The default dictionary descriptor, if the experiment takes one."""

    SEEDS_DEFAULT: ClassVar[list[int]] = [0]
    """The default seeds."""

    def __init__(self, config: ExperimentConfig) -> None:
        """Create the experiment for a configuration."""
        self.config = config
        self.system = {**self.SYSTEM_DEFAULTS, **config.system}
        self.sweep = {**self.SWEEP_DEFAULTS, **config.sweep}
        self.dictionary_descriptor = config.dictionary or self.DICTIONARY_DEFAULT
        self.seeds = list(config.seeds or self.SEEDS_DEFAULT)

    @classmethod
    def create(cls, config: ExperimentConfig) -> Experiment:
        """Create the experiment named in `config`.

        This is a factory method that picks the subclass by name.

        Raises:
            UnsupportedExperimentError: If the experiment doesn't exist.
        """
        return experiment_class(config.experiment)(config)

    @classmethod
    def schema(cls) -> dict[str, Any]:
        """Return a complete configuration with all defaults of this experiment."""
        return {
            "experiment": cls.EXPERIMENT_NAME,
            "system": dict(cls.SYSTEM_DEFAULTS),
            "dictionary": cls.DICTIONARY_DEFAULT,
            "sweep": dict(cls.SWEEP_DEFAULTS),
            "seeds": list(cls.SEEDS_DEFAULT),
            "output": f"results/{cls.EXPERIMENT_NAME}",
            "workers": 1,
        }

    def sweep_values(self, key: str) -> list[Any]:
        """Return a sweep entry as a list, wrapping a single value."""
        value = self.sweep[key]
        return list(value) if isinstance(value, list) else [value]

    def dictionary(self) -> Dictionary:
        """Create the configured dictionary."""
        from koopman_mp.dictionary import Dictionary

        return Dictionary.create_from_descriptor(self.dictionary_descriptor)

    def prepare(self) -> None:  # noqa: B027
        """Compute data shared by all sweep points, before the sweep runs."""

    @abstractmethod
    def sweep_points(self) -> list[dict[str, Any]]:
        """Return the independent sweep points of this run."""

    @abstractmethod
    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Compute one sweep point."""

    @abstractmethod
    def summarize(self, results: list[PointResult]) -> Summary:
        """Aggregate the results of all sweep points and evaluate the checks."""


# Find all experiment classes in the experiments subpackage
package_dir = Path(__file__).resolve().parent / "experiments"
for _, module_name, _ in iter_modules([str(package_dir)]):  # type: ignore[assignment]
    # Import the module and iterate through its attributes
    module = import_module(f"{__name__}.experiments.{module_name}")
    for attribute_name in dir(module):
        attribute = getattr(module, attribute_name)

        if (
            isclass(attribute)
            and hasattr(attribute, "EXPERIMENT_NAME")
            and attribute not in _supported_experiments
        ):
            _supported_experiments.append(attribute)
