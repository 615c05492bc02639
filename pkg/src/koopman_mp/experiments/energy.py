"""Conservation of the energy ``a_n* G a_n`` over long forecasts."""
from __future__ import annotations

import logging
from typing import Any

import numpy as np

from koopman_mp import Check, PointResult, Summary
from koopman_mp.decomp import edmd, mpedmd
from koopman_mp.experiments.pendulum import PendulumExperiment
from koopman_mp.forecast import energy_series
from koopman_mp.sampling import PENDULUM_X2_BOUND

_logger = logging.getLogger(__name__)


def relative_deviation(energies: np.ndarray) -> np.ndarray:
    """Return ``|E_n - E_0| / E_0``, with ``inf`` where the energy blew up."""
    with np.errstate(over="ignore", invalid="ignore"):
        deviation = np.abs(energies - energies[0]) / energies[0]
    return np.where(np.isfinite(deviation), deviation, np.inf)


class EnergyConservation(PendulumExperiment):
    """Iterate random coefficient vectors with EDMD and mpEDMD on noisy data.

    mpEDMD is an isometry in the ``G`` inner product, so the energy stays
    constant for every step count. The EDMD energy drifts.
    """

    EXPERIMENT_NAME = "energy-conservation"
    DESCRIPTION = "Energy of iterated coefficient vectors for EDMD and mpEDMD"
    SYSTEM_DEFAULTS = {  # noqa: RUF012
        "dt": 0.5,
        "M1": 30,
        "M2": 30,
        "x2_bound": PENDULUM_X2_BOUND,
        "tau": 0.1,
    }
    DICTIONARY_DEFAULT = {"type": "delay", "observable": "pendulum", "N": 20}  # noqa: RUF012
    SWEEP_DEFAULTS = {"steps_mpedmd": 10_000, "steps_edmd": 1_000}  # noqa: RUF012

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return one point per seed."""
        return [{"seed": seed} for seed in self.seeds]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Fit both methods on noisy data and follow the energy of a random vector."""
        seed = point["seed"]
        pair = self.noisy_pair(float(self.system["tau"]), seed)
        rng = np.random.default_rng(seed)
        a0 = rng.standard_normal(pair.size) + 1j * rng.standard_normal(pair.size)

        steps_mp = int(self.sweep["steps_mpedmd"])
        steps_edmd = int(self.sweep["steps_edmd"])
        with np.errstate(over="ignore", invalid="ignore"):
            mp_deviation = relative_deviation(energy_series(mpedmd(pair), a0, steps_mp))
            edmd_deviation = relative_deviation(energy_series(edmd(pair), a0, steps_edmd))
        _logger.debug(
            "Seed {seed}: final energy deviations {mp:.3e} and {edmd:.3e}",
            extra={"seed": seed, "mp": mp_deviation[-1], "edmd": edmd_deviation[-1]},
        )

        rows = [
            {
                "seed": seed,
                "n": step,
                "mpedmd": float(mp_deviation[step]) if step <= steps_mp else None,
                "edmd": float(edmd_deviation[step]) if step <= steps_edmd else None,
            }
            for step in range(max(steps_mp, steps_edmd) + 1)
        ]
        return PointResult(
            point=point,
            metrics={
                "mpedmd_max_deviation": float(mp_deviation.max()),
                "edmd_max_deviation": float(edmd_deviation[: steps_edmd + 1].max()),
            },
            tables={"energy": rows},
        )

    def summarize(self, results: list[PointResult]) -> Summary:
        """Check that mpEDMD conserves the energy and EDMD doesn't."""
        mp = max(result.metrics["mpedmd_max_deviation"] for result in results)
        drift = min(result.metrics["edmd_max_deviation"] for result in results)
        return Summary(
            metrics={"mpedmd_max_deviation": mp, "edmd_min_max_deviation": drift},
            checks={
                "mpedmd_conserves_energy": Check(mp, upper=1e-9),
                "edmd_drifts": Check(drift, lower=0.01),
            },
        )
