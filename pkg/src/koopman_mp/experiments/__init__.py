"""Experiments reproducing the properties of measure-preserving EDMD.

Every module in this package defines one or more :class:`koopman_mp.Experiment`
subclasses, which are registered automatically by their ``EXPERIMENT_NAME``.
"""
from __future__ import annotations

from typing import Any

import numpy as np
import numpy.typing as npt
from scipy.optimize import linear_sum_assignment

from koopman_mp.numkit import circle_phase


def matrix_rows(matrix: npt.ArrayLike, **extra: Any) -> list[dict[str, Any]]:  # noqa: ANN401
    """Return the entries of a matrix as table rows ``row,col,re,im``."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    return [
        {**extra, "row": row, "col": col, "re": float(value.real), "im": float(value.imag)}
        for (row, col), value in np.ndenumerate(matrix)
    ]


def eigenvalue_rows(
    eigvals: npt.ArrayLike,
    residuals: npt.ArrayLike | None = None,
    **extra: Any,  # noqa: ANN401
) -> list[dict[str, Any]]:
    """Return eigenvalues as table rows with phase, modulus and optional residual."""
    values = np.asarray(eigvals, dtype=np.complex128)
    rows = []
    for index, value in enumerate(values):
        row = {
            **extra,
            "index": index,
            "re": float(value.real),
            "im": float(value.imag),
            "phase": float(circle_phase(value)),
            "modulus": float(abs(value)),
        }
        if residuals is not None:
            row["residual"] = float(np.asarray(residuals)[index])
        rows.append(row)
    return rows


def loglog_slope(sizes: npt.ArrayLike, errors: npt.ArrayLike) -> float:
    """Fit the slope of ``log(error)`` against ``log(size)`` by least squares.

    Example:
        >>> from koopman_mp.experiments import loglog_slope
        >>> round(loglog_slope([1, 10, 100], [1, 0.1, 0.01]), 12)
        -1.0
    """
    slope, _ = np.polyfit(np.log(np.asarray(sizes, dtype=np.float64)), np.log(errors), 1)
    return float(slope)


def multiset_error(computed: npt.ArrayLike, expected: npt.ArrayLike) -> float:
    """Return the largest distance of an optimal matching between two point sets."""
    computed = np.asarray(computed, dtype=np.complex128)
    expected = np.asarray(expected, dtype=np.complex128)
    if computed.shape != expected.shape:
        return float("inf")
    distances = np.abs(computed[:, None] - expected[None, :])
    rows, cols = linear_sum_assignment(distances)
    return float(distances[rows, cols].max())


def seed_pair(seed: int) -> tuple[int, int]:
    """Derive two independent integer seeds from one seed."""
    children = np.random.SeedSequence(seed).spawn(2)
    return int(children[0].generate_state(1)[0]), int(children[1].generate_state(1)[0])
