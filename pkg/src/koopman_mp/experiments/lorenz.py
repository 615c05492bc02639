"""Spectral measures of the Lorenz system from time-delay dictionaries.

The Lorenz system is sampled along one trajectory after a burn-in, so the
snapshots follow the physical measure on the attractor. Delay embedding of an
observable gives a Krylov dictionary on which mpEDMD converges to the spectral
measure of the observable.
"""
from __future__ import annotations

import logging
from typing import Any

import numpy as np

from koopman_mp import Check, Experiment, PointResult, Summary
from koopman_mp.decomp import KoopmanModel, mpedmd
from koopman_mp.dictionary import DelayEmbedding, delay_matrices, gram
from koopman_mp.exceptions import ConfigError
from koopman_mp.experiments import loglog_slope
from koopman_mp.numkit import CMatrix
from koopman_mp.sampling import (
    LORENZ_BETA,
    LORENZ_RHO,
    LORENZ_SIGMA,
    Trajectory,
    lorenz_trajectory,
)
from koopman_mp.spectral import (
    SpectralMeasure,
    apply_test_function,
    cdf,
    exp_sine,
    scalar_measure,
    w1,
)

_logger = logging.getLogger(__name__)

LORENZ_SYSTEM_DEFAULTS = {
    "dt": 0.1,
    "sigma": LORENZ_SIGMA,
    "rho": LORENZ_RHO,
    "beta": LORENZ_BETA,
    "x0": [1.0, 1.0, 1.0],
    "burn_in": 1000,
}


class LorenzExperiment(Experiment):
    """Base class of the Lorenz experiments, with shared data generation.

    Attributes:
        trajectory (Trajectory | None): The trajectory after burn-in, set by
          :meth:`prepare`.
    """

    SYSTEM_DEFAULTS = LORENZ_SYSTEM_DEFAULTS
    DICTIONARY_DEFAULT = {  # noqa: RUF012
        "type": "delay",
        "observable": "lorenz-x",
        "N": 50,
        "normalize": True,
    }

    trajectory: Trajectory | None = None

    def delay_dictionary(self) -> DelayEmbedding:
        """Create the configured delay dictionary.

        Raises:
            ConfigError: If the dictionary isn't a delay embedding.
        """
        dictionary = self.dictionary()
        if not isinstance(dictionary, DelayEmbedding):
            msg = f"{self.EXPERIMENT_NAME} needs a delay dictionary"
            raise ConfigError(msg)
        return dictionary

    def generate(self, length: int) -> Trajectory:
        """Integrate a trajectory of `length` states after the burn-in."""
        burn_in = int(self.system["burn_in"])
        _logger.info(
            "Integrating Lorenz trajectory of {length} states",
            extra={"length": length},
        )
        full = lorenz_trajectory(
            self.system["x0"],
            dt=float(self.system["dt"]),
            M=burn_in + length - 1,
            sigma=float(self.system["sigma"]),
            rho=float(self.system["rho"]),
            beta=float(self.system["beta"]),
        )
        return Trajectory(states=full.states[burn_in:], dt=full.dt)

    def fit(self, depth: int, count: int) -> tuple[KoopmanModel, CMatrix]:
        """Fit mpEDMD on the delay dictionary of depth `depth` with `count` snapshots.

        Returns:
            tuple: The model and ``Ψ_X``.
        """
        dictionary = self.delay_dictionary()
        psi_x, psi_y, weights = delay_matrices(
            self.trajectory,
            dictionary.observables,
            depth,
            count,
            normalize=dictionary.normalize,
        )
        return mpedmd(gram(psi_x, psi_y, weights)), psi_x

    def measure(self, depth: int, count: int) -> SpectralMeasure:
        """Compute the spectral measure of the first observable."""
        model, _ = self.fit(depth, count)
        ghat = np.zeros(model.size, dtype=np.complex128)
        ghat[0] = 1.0
        return scalar_measure(model, ghat)


class LorenzW1VsM(LorenzExperiment):
    """Convergence of the spectral measure in the number of snapshots ``M``."""

    EXPERIMENT_NAME = "lorenz-w1-vs-M"
    DESCRIPTION = "W1 distance to a reference measure as M grows"
    SWEEP_DEFAULTS = {  # noqa: RUF012
        "M": [2**9, 2**10, 2**11, 2**12, 2**13, 2**14],
        "M_ref": 2**16,
    }

    reference: SpectralMeasure | None = None

    def prepare(self) -> None:
        """Integrate the trajectory and compute the reference measure."""
        depth = self.delay_dictionary().depth
        reference_count = int(self.sweep["M_ref"])
        self.trajectory = self.generate(reference_count + depth)
        self.reference = self.measure(depth, reference_count)

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return one point per number of snapshots."""
        return [{"M": int(count)} for count in self.sweep_values("M")]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Compute the distance to the reference measure."""
        distance = w1(self.reference, self.measure(self.delay_dictionary().depth, point["M"]))
        return PointResult(
            point=point,
            metrics={"w1": distance},
            tables={"w1": [{"M": point["M"], "w1": distance}]},
        )

    def summarize(self, results: list[PointResult]) -> Summary:
        """Fit the log-log slope of the distances."""
        slope = loglog_slope(
            [result.point["M"] for result in results],
            [result.metrics["w1"] for result in results],
        )
        return Summary(
            metrics={"slope": slope},
            checks={"monte_carlo_rate": Check(slope, lower=-0.75, upper=-0.30)},
        )


class LorenzW1VsN(LorenzExperiment):
    """Convergence of the spectral measure in the dictionary size ``N``."""

    EXPERIMENT_NAME = "lorenz-w1-vs-N"
    DESCRIPTION = "W1 distance to a reference measure as N grows"
    SWEEP_DEFAULTS = {"N": [16, 32, 64, 128, 256], "N_ref": 512, "M": 100_000}  # noqa: RUF012

    reference: SpectralMeasure | None = None

    def prepare(self) -> None:
        """Integrate the trajectory and compute the reference measure."""
        count = int(self.sweep["M"])
        reference_depth = int(self.sweep["N_ref"])
        self.trajectory = self.generate(count + reference_depth)
        self.reference = self.measure(reference_depth, count)

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return one point per dictionary size."""
        return [{"N": int(depth)} for depth in self.sweep_values("N")]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Compute the distance to the reference measure."""
        distance = w1(self.reference, self.measure(point["N"], int(self.sweep["M"])))
        return PointResult(
            point=point,
            metrics={"w1": distance},
            tables={"w1": [{"N": point["N"], "w1": distance}]},
        )

    def summarize(self, results: list[PointResult]) -> Summary:
        """Fit the log-log slope of the distances."""
        slope = loglog_slope(
            [result.point["N"] for result in results],
            [result.metrics["w1"] for result in results],
        )
        return Summary(
            metrics={"slope": slope},
            checks={"dictionary_rate": Check(slope, upper=-0.7)},
        )


class LorenzCdf(LorenzExperiment):
    """Cumulative distribution functions of spectral measures for several ``N``."""

    EXPERIMENT_NAME = "lorenz-cdf"
    DESCRIPTION = "Spectral measure cdfs of the Lorenz system for several N"
    SWEEP_DEFAULTS = {"N": [8, 32, 128], "M": 20_000, "grid": 1001}  # noqa: RUF012

    def prepare(self) -> None:
        """Integrate the trajectory."""
        depth = max(int(depth) for depth in self.sweep_values("N"))
        self.trajectory = self.generate(int(self.sweep["M"]) + depth)

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return one point per dictionary size."""
        return [{"N": int(depth)} for depth in self.sweep_values("N")]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Compute the measure and its cdf on a grid."""
        measure = self.measure(point["N"], int(self.sweep["M"]))
        grid = np.linspace(-np.pi, np.pi, int(self.sweep["grid"]))
        values = cdf(measure, grid)
        return PointResult(
            point=point,
            metrics={"mass_defect": abs(float(values[-1]) - 1.0)},
            tables={
                "cdf": [
                    {"N": point["N"], "theta": float(phase), "F": float(value)}
                    for phase, value in zip(grid, values)
                ],
                "measure": [
                    {"N": point["N"], "theta": float(phase), "mass": float(mass)}
                    for phase, mass in zip(measure.phases, measure.masses)
                ],
            },
        )

    def summarize(self, results: list[PointResult]) -> Summary:
        """Check that every measure is a probability measure."""
        defect = max(result.metrics["mass_defect"] for result in results)
        return Summary(
            metrics={"mass_defect": defect},
            checks={"probability_measures": Check(defect, upper=1e-10)},
        )


class LorenzProjectionValued(LorenzExperiment):
    """Convergence of the functional calculus ``∫ φ dE g_j`` in ``N`` and ``M``.

    The dictionary interleaves delays of the three coordinates, and ``φ`` is
    ``exp((λ - λ̄) / 2i)``. Results are compared with a reference dictionary
    of depth ``N_ref`` fitted on the largest ``M``, in the norm of the data on
    the snapshots both fits share.
    """

    EXPERIMENT_NAME = "lorenz-projection-valued"
    DESCRIPTION = "Projection-valued functional calculus of the Lorenz coordinates"
    DICTIONARY_DEFAULT = {  # noqa: RUF012
        "type": "delay",
        "observables": ["lorenz-x", "lorenz-y", "lorenz-z"],
        "N": 32,
        "normalize": True,
    }
    SWEEP_DEFAULTS = {"N": [2, 4, 8, 16], "N_ref": 32, "M": [20_000]}  # noqa: RUF012

    reference: CMatrix | None = None
    reference_observables: CMatrix | None = None

    def apply(self, depth: int, count: int) -> tuple[CMatrix, CMatrix]:
        """Evaluate ``∫ φ dE g_j`` on the data for every observable ``g_j``.

        Returns:
            tuple: The values, one column per observable, and the normalized
            observables themselves on the same snapshots.
        """
        observables = len(self.delay_dictionary().observables)
        model, psi_x = self.fit(depth, count)
        coefficients = apply_test_function(model, exp_sine, np.eye(model.size)[:, :observables])
        return psi_x @ coefficients, psi_x[:, :observables]

    def counts(self) -> list[int]:
        """Return the swept numbers of snapshots."""
        return [int(count) for count in self.sweep_values("M")]

    def prepare(self) -> None:
        """Integrate the trajectory and compute the reference."""
        count = max(self.counts())
        reference_depth = int(self.sweep["N_ref"])
        self.trajectory = self.generate(count + reference_depth)
        self.reference, self.reference_observables = self.apply(reference_depth, count)

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return one point per delay depth and number of snapshots."""
        return [
            {"N": int(depth), "M": count}
            for count in self.counts()
            for depth in self.sweep_values("N")
        ]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Compute the relative errors against the reference.

        Observables are normalized over the ``M`` snapshots of each fit, so the
        values are first rescaled to the normalization of the reference.
        """
        count = point["M"]
        values, observables = self.apply(point["N"], count)
        reference = self.reference[:count]
        shared = self.reference_observables[:count]
        scales = np.sum(observables.conj() * shared, axis=0) / np.sum(np.abs(observables) ** 2, axis=0)
        errors = np.linalg.norm(values * scales - reference, axis=0) / np.linalg.norm(reference, axis=0)
        names = self.delay_dictionary().observables
        return PointResult(
            point=point,
            metrics={"errors": [float(error) for error in errors]},
            tables={
                "errors": [
                    {"N": point["N"], "M": count, "observable": name, "error": float(error)}
                    for name, error in zip(names, errors)
                ],
            },
        )

    def summarize(self, results: list[PointResult]) -> Summary:
        """Check that the errors decrease from the smallest to the largest depth at the largest ``M``."""
        largest = max(self.counts())
        ordered = sorted(
            (result for result in results if result.point["M"] == largest),
            key=lambda result: result.point["N"],
        )
        first = np.array(ordered[0].metrics["errors"])
        last = np.array(ordered[-1].metrics["errors"])
        ratio = float(np.max(last / first))
        return Summary(
            metrics={"error_ratio": ratio},
            checks={"errors_decrease": Check(ratio, upper=1.0)},
        )
