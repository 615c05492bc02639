"""The circle rotation, where a Fourier dictionary spans an invariant subspace."""
from __future__ import annotations

import logging
from typing import Any

import numpy as np

from koopman_mp import Check, Experiment, PointResult, Summary
from koopman_mp.decomp import mpedmd
from koopman_mp.dictionary import FourierModes, gram
from koopman_mp.exceptions import ConfigError
from koopman_mp.experiments import eigenvalue_rows, multiset_error
from koopman_mp.forecast import (
    build_kmd,
    eigenfunction_row,
    predict_series,
    project_observable,
)
from koopman_mp.sampling import periodic_trapezoid_snapshots, rotation_map
from koopman_mp.spectral import residuals, scalar_measure

_logger = logging.getLogger(__name__)


class RotationExact(Experiment):
    """Check that mpEDMD is exact for the rotation ``θ -> θ + α``.

    The Fourier modes ``e^{ikθ}`` are eigenfunctions with eigenvalues
    ``e^{ikα}``, so the fitted eigenvalues, the spectral measure of ``e^{iθ}``
    and its forecasts must all be exact up to roundoff.
    """

    EXPERIMENT_NAME = "rotation-exact"
    DESCRIPTION = "Exact eigenvalues, measure and forecast of the circle rotation"
    SYSTEM_DEFAULTS = {"alpha": 1.0, "M": 256, "theta0": 0.5, "steps": 100}  # noqa: RUF012
    DICTIONARY_DEFAULT = {"type": "fourier", "kmax": 5}  # noqa: RUF012

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return the single sweep point."""
        return [{"alpha": float(self.system["alpha"]), "M": int(self.system["M"])}]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Fit mpEDMD and compare with the exact spectral data."""
        dictionary = self.dictionary()
        if not isinstance(dictionary, FourierModes):
            msg = "the rotation experiment needs a Fourier dictionary"
            raise ConfigError(msg)
        alpha = point["alpha"]
        snapshots = periodic_trapezoid_snapshots(point["M"], rotation_map(alpha))
        psi_x, psi_y = dictionary.evaluate_snapshots(snapshots)
        pair = gram(psi_x, psi_y, snapshots.weights)
        model = mpedmd(pair, dictionary.to_descriptor())
        expected = np.exp(1j * dictionary.wavenumbers * alpha)

        samples = np.exp(1j * snapshots.X[:, 0])
        ghat = project_observable(pair, psi_x, snapshots.weights, samples)
        measure = scalar_measure(model, ghat)
        atom = np.abs(np.angle(np.exp(1j * (measure.phases - alpha)))) <= 1e-6  # noqa: PLR2004
        mass_error = abs(1.0 - float(measure.masses[atom].sum()))

        kmd = build_kmd(model, pair, psi_x, snapshots.weights, samples)
        theta0 = float(self.system["theta0"])
        steps = int(self.system["steps"])
        row = eigenfunction_row(kmd, dictionary.evaluate([[theta0]])[0])
        series = predict_series(kmd, row, steps)[:, 0]
        exact = np.exp(1j * (theta0 + alpha * np.arange(steps + 1)))

        return PointResult(
            point=point,
            metrics={
                "eigenvalue_error": multiset_error(model.eigvals, expected),
                "atom_mass_error": mass_error,
                "prediction_error": float(np.abs(series - exact).max()),
                "max_residual": float(residuals(pair, model.eigvals, model.eigvecs).max()),
            },
            tables={
                "eigenvalues": eigenvalue_rows(
                    model.eigvals,
                    residuals(pair, model.eigvals, model.eigvecs),
                ),
                "measure": [
                    {"theta": float(phase), "mass": float(mass)}
                    for phase, mass in zip(measure.phases, measure.masses)
                ],
                "prediction": [
                    {
                        "n": step,
                        "re": float(value.real),
                        "im": float(value.imag),
                        "exact_re": float(target.real),
                        "exact_im": float(target.imag),
                    }
                    for step, (value, target) in enumerate(zip(series, exact))
                ],
            },
        )

    def summarize(self, results: list[PointResult]) -> Summary:
        """Check eigenvalues, measure and forecast against the exact values."""
        metrics = results[0].metrics
        return Summary(
            metrics=dict(metrics),
            checks={
                "eigenvalues_exact": Check(metrics["eigenvalue_error"], upper=1e-8),
                "single_atom_at_alpha": Check(metrics["atom_mass_error"], upper=1e-8),
                "prediction_exact": Check(metrics["prediction_error"], upper=1e-7),
            },
        )
