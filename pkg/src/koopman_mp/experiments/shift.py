"""The one-sided shift, where EDMD isn't diagonalizable."""
from __future__ import annotations

import logging
from typing import Any

import numpy as np

from koopman_mp import Check, Experiment, PointResult, Summary
from koopman_mp.decomp import edmd, mpedmd
from koopman_mp.dictionary import IndicatorFunctions, gram_from_snapshots
from koopman_mp.exceptions import ConfigError
from koopman_mp.experiments import matrix_rows
from koopman_mp.sampling import shift_snapshots

_logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-12


def lower_shift(size: int) -> np.ndarray:
    """Return the nilpotent lower shift matrix."""
    return np.eye(size, k=-1)


def cyclic_shift(size: int) -> np.ndarray:
    """Return the lower shift with a one in the upper right corner."""
    matrix = lower_shift(size)
    matrix[0, -1] = 1.0
    return matrix


class ShiftWarning(Experiment):
    """Compare EDMD and mpEDMD on the shift with the counting measure.

    The dictionary consists of the indicator functions of the first ``N``
    integers. EDMD gives the nilpotent lower shift, which has only the
    eigenvalue zero and isn't diagonalizable; mpEDMD gives a cyclic shift.
    """

    EXPERIMENT_NAME = "shift-warning"
    DESCRIPTION = "EDMD and mpEDMD matrices of the one-sided shift"
    SYSTEM_DEFAULTS = {"N": 6, "M": 10}  # noqa: RUF012

    def sweep_points(self) -> list[dict[str, Any]]:
        """Return the single sweep point."""
        size, count = int(self.system["N"]), int(self.system["M"])
        if count < size:
            msg = f"the shift example needs M >= N, got M={count}, N={size}"
            raise ConfigError(msg)
        return [{"N": size, "M": count}]

    def run_point(self, point: dict[str, Any]) -> PointResult:
        """Fit both models and compare them with the exact matrices."""
        size = point["N"]
        dictionary = IndicatorFunctions(size)
        pair = gram_from_snapshots(dictionary, shift_snapshots(point["M"]))
        model_edmd = edmd(pair, dictionary.to_descriptor())
        model_mp = mpedmd(pair, dictionary.to_descriptor())
        return PointResult(
            point=point,
            metrics={
                "edmd_error": float(np.abs(model_edmd.K - lower_shift(size)).max()),
                "mpedmd_error": float(np.abs(model_mp.K - cyclic_shift(size)).max()),
                "edmd_diagonalizable": model_edmd.diagonalizable,
                "mpedmd_modulus_defect": float(np.abs(np.abs(model_mp.eigvals) - 1).max()),
            },
            tables={
                "k_edmd": matrix_rows(model_edmd.K),
                "k_mpedmd": matrix_rows(model_mp.K),
            },
        )

    def summarize(self, results: list[PointResult]) -> Summary:
        """Check the two matrices entrywise."""
        metrics = results[0].metrics
        return Summary(
            metrics=dict(metrics),
            checks={
                "edmd_is_lower_shift": Check(metrics["edmd_error"], upper=EXACT_TOLERANCE),
                "mpedmd_is_cyclic_shift": Check(metrics["mpedmd_error"], upper=EXACT_TOLERANCE),
                "edmd_not_diagonalizable": Check(
                    float(not metrics["edmd_diagonalizable"]),
                    lower=1.0,
                ),
            },
        )
