"""Spectral pollution and noise robustness on the nonlinear pendulum.

The pendulum is sampled on a tensor grid with trapezoidal weights, and the
dictionary consists of time delays of ``g(x1, x2) = exp(i x1) x2 exp(-x2^2 / 2)``
evaluated through the flow map.
"""
from __future__ import annotations

import logging
from itertools import product
from typing import Any

import numpy as np

from koopman_mp import Check, Experiment, PointResult, Summary
from koopman_mp.decomp import KoopmanModel, edmd, mpedmd
from koopman_mp.dictionary import DelayEmbedding, GramPair, gram
from koopman_mp.exceptions import ConfigError
from koopman_mp.experiments import eigenvalue_rows, seed_pair
from koopman_mp.numkit import CMatrix
from koopman_mp.sampling import (
    PENDULUM_X2_BOUND,
    SnapshotSet,
    pendulum_flow,
    perturb,
    tensor_trapezoid_snapshots,
)
from koopman_mp.spectral import residuals

_logger = logging.getLogger(__name__)

INSIDE_MODULUS = 0.99
"""EDMD eigenvalues below this modulus count as pollution inside the disc."""


class PendulumExperiment(Experiment):
    """Base class of the pendulum experiments, with the shared grid data.

    Attributes:
        snapshots (SnapshotSet | None): The grid snapshots.
        psi_x (numpy.ndarray | None): The clean ``Ψ_X``.
        psi_y (numpy.ndarray | None): The clean ``Ψ_Y``.
        clean (GramPair | None): The clean Gram pair residuals are measured with.
    """

    SYSTEM_DEFAULTS = {"dt": 0.5, "M1": 50, "M2": 50, "x2_bound": PENDULUM_X2_BOUND}  # noqa: RUF012
    DICTIONARY_DEFAULT = {"type": "delay", "observable": "pendulum", "N": 100}  # noqa: RUF012

    snapshots: SnapshotSet | None = None
    psi_x: CMatrix | None = None
    psi_y: CMatrix | None = None
    clean: GramPair | None = None

    def prepare(self) -> None:
        """Sample the grid and evaluate the delay dictionary through the flow."""
        descriptor = self.dictionary()
        if not isinstance(descriptor, DelayEmbedding):
            msg = f"{self.EXPERIMENT_NAME} needs a delay dictionary"
            raise ConfigError(msg)
        flow = pendulum_flow(float(self.system["dt"]))
        self.snapshots = tensor_trapezoid_snapshots(
            int(self.system["M1"]),
            int(self.system["M2"]),
            float(self.system["x2_bound"]),
            flow,
        )
        dictionary = DelayEmbedding(descriptor.observables, descriptor.depth, flow=flow)
        _logger.info(
            "Evaluating {depth} delays on {count} grid points",
            extra={"depth": descriptor.depth, "count": self.snapshots.size},
        )
        self.psi_x, self.psi_y = dictionary.evaluate_snapshots(self.snapshots)
        self.clean = gram(self.psi_x, self.psi_y, self.snapshots.weights)

    def noisy_pair(self, tau: float, seed: int) -> GramPair:
        """Assemble the Gram pair of ``Ψ_X`` and ``Ψ_Y`` with independent noise."""
        seed_x, seed_y = seed_pair(seed)
        return gram(
            perturb(self.psi_x, tau, seed_x),
            perturb(self.psi_y, tau, seed_y),
            self.snapshots.weights,
        )

    def fit_both(self, tau: float, seed: int) -> dict[str, KoopmanModel]:
        """Fit EDMD and mpEDMD on noisy data."""
        pair = self.noisy_pair(tau, seed)
        return {"edmd": edmd(pair), "mpedmd": mpedmd(pair)}

    def clean_residuals(self, model: KoopmanModel) -> np.ndarray:
        """Compute residuals of the model's eigenpairs against the clean data."""
        return residuals(self.clean, model.eigvals, model.eigvecs)


def _modulus_defect(model: KoopmanModel) -> float:
    return float(np.abs(np.abs(model.eigvals) - 1).max())


class PendulumEigs(PendulumExperiment):
    """Eigenvalues of EDMD and mpEDMD, clean and with noise.

    EDMD eigenvalues pollute the inside of the unit disc, while mpEDMD keeps
    them on the circle.
    """

    EXPERIMENT_NAME = "pendulum-eigs"
    DESCRIPTION = "EDMD and mpEDMD eigenvalues of the pendulum for several noise levels"
    SWEEP_DEFAULTS = {"tau": [0.0, 0.1]}  # noqa: RUF012

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return one point per noise level and seed."""
        return [
            {"tau": float(tau), "seed": seed}
            for tau, seed in product(self.sweep_values("tau"), self.seeds)
        ]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Fit both methods and record eigenvalues with clean residuals."""
        models = self.fit_both(point["tau"], point["seed"])
        rows = []
        metrics: dict[str, Any] = {}
        for method, model in models.items():
            model_residuals = self.clean_residuals(model)
            rows += eigenvalue_rows(model.eigvals, model_residuals, method=method, **point)
            metrics[f"{method}_mean_residual"] = float(model_residuals.mean())
        metrics["mpedmd_modulus_defect"] = _modulus_defect(models["mpedmd"])
        metrics["edmd_inside_fraction"] = float(
            np.mean(np.abs(models["edmd"].eigvals) < INSIDE_MODULUS),
        )
        return PointResult(point=point, metrics=metrics, tables={"eigenvalues": rows})

    def summarize(self, results: list[PointResult]) -> Summary:
        """Check the unit modulus of mpEDMD and the pollution of clean EDMD."""
        checks = {
            "mpedmd_on_circle": Check(
                max(result.metrics["mpedmd_modulus_defect"] for result in results),
                upper=1e-12,
            ),
        }
        clean = [result for result in results if result.point["tau"] == 0]
        if clean:
            checks["edmd_pollutes_disc"] = Check(
                min(result.metrics["edmd_inside_fraction"] for result in clean),
                lower=0.2,
            )
        return Summary(
            metrics={
                "points": [{**result.point, **result.metrics} for result in results],
            },
            checks=checks,
        )


class PendulumEigenfunctions(PendulumExperiment):
    """Eigenfunctions of mpEDMD with the smallest residuals, on the grid."""

    EXPERIMENT_NAME = "pendulum-eigenfunctions"
    DESCRIPTION = "mpEDMD eigenfunctions of the pendulum with small residuals"
    SWEEP_DEFAULTS = {"count": 6}  # noqa: RUF012

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return the single sweep point."""
        return [{"count": int(self.sweep["count"])}]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Fit mpEDMD and evaluate the selected eigenfunctions on the grid."""
        model = mpedmd(self.clean)
        model_residuals = self.clean_residuals(model)
        selected = np.argsort(model_residuals, kind="stable")[: point["count"]]
        values = self.psi_x @ model.eigvecs[:, selected]
        grid = self.snapshots.X
        rows = [
            {
                "index": int(index),
                "x1": float(grid[row, 0]),
                "x2": float(grid[row, 1]),
                "re": float(values[row, column].real),
                "im": float(values[row, column].imag),
            }
            for column, index in enumerate(selected)
            for row in range(len(grid))
        ]
        return PointResult(
            point=point,
            metrics={
                "selected_residuals": [float(model_residuals[index]) for index in selected],
                "mpedmd_modulus_defect": _modulus_defect(model),
            },
            tables={
                "eigenvalues": eigenvalue_rows(model.eigvals, model_residuals),
                "eigenfunctions": rows,
            },
        )

    def summarize(self, results: list[PointResult]) -> Summary:
        """Check the unit modulus of the eigenvalues."""
        metrics = results[0].metrics
        return Summary(
            metrics=dict(metrics),
            checks={"mpedmd_on_circle": Check(metrics["mpedmd_modulus_defect"], upper=1e-12)},
        )


class PendulumNoise(PendulumExperiment):
    """Mean residuals of EDMD and mpEDMD eigenpairs as the noise level grows.

    Residuals are measured against the clean data, so they show how well the
    eigenpairs fitted on noisy data describe the true dynamics.
    """

    EXPERIMENT_NAME = "pendulum-noise"
    DESCRIPTION = "Mean clean residuals of EDMD and mpEDMD under measurement noise"
    SWEEP_DEFAULTS = {"tau": [0.0, 0.02, 0.05, 0.1]}  # noqa: RUF012
    SEEDS_DEFAULT = [0, 1, 2, 3, 4]  # noqa: RUF012

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return one point per noise level and seed."""
        return [
            {"tau": float(tau), "seed": seed}
            for tau, seed in product(self.sweep_values("tau"), self.seeds)
        ]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Fit both methods and compute their mean clean residuals."""
        models = self.fit_both(point["tau"], point["seed"])
        metrics = {
            f"{method}_mean_residual": float(self.clean_residuals(model).mean())
            for method, model in models.items()
        }
        metrics["mpedmd_modulus_defect"] = _modulus_defect(models["mpedmd"])
        return PointResult(point=point, metrics=metrics)

    def summarize(self, results: list[PointResult]) -> Summary:
        """Average over seeds and compare the methods at the largest noise level."""
        rows = []
        for tau in sorted({result.point["tau"] for result in results}):
            at_tau = [result for result in results if result.point["tau"] == tau]
            for method in ("edmd", "mpedmd"):
                rows.append(
                    {
                        "tau": tau,
                        "method": method,
                        "mean_residual": float(
                            np.mean([result.metrics[f"{method}_mean_residual"] for result in at_tau]),
                        ),
                    },
                )
        largest = max(result.point["tau"] for result in results)
        noisiest = [result for result in results if result.point["tau"] == largest]
        wins = np.mean(
            [
                result.metrics["mpedmd_mean_residual"] < result.metrics["edmd_mean_residual"]
                for result in noisiest
            ],
        )
        return Summary(
            metrics={"mean_residuals": rows, "mpedmd_win_fraction": float(wins)},
            checks={
                "mpedmd_smaller_residual_every_seed": Check(float(wins), lower=1.0),
                "mpedmd_on_circle": Check(
                    max(result.metrics["mpedmd_modulus_defect"] for result in results),
                    upper=1e-12,
                ),
            },
            tables={
                "mean_residuals": rows,
                "residuals": [{**result.point, **result.metrics} for result in results],
            },
        )
