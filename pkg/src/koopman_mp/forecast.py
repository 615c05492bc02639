"""Koopman mode decomposition and time-advancement of observables."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt
import scipy.linalg

from koopman_mp.decomp import require_diagonalizable
from koopman_mp.exceptions import NonDiagonalizableError, SnapshotFormatError
from koopman_mp.numkit import CMatrix, adjoint, circle_phase, spd_solve

if TYPE_CHECKING:
    from koopman_mp.decomp import KoopmanModel
    from koopman_mp.dictionary import GramPair

_logger = logging.getLogger(__name__)

UNIT_MODULUS_METHODS = ("mpedmd", "pidmd")


def project_observable(
    pair: GramPair,
    psi_x: npt.ArrayLike,
    weights: npt.ArrayLike,
    samples: npt.ArrayLike,
) -> CMatrix:
    """Compute the weighted least-squares coefficients of an observable.

    The coefficients are ``ĝ = G^{-1} Ψ_X* W (g(x^(1)), ..., g(x^(M)))^T``.

    Args:
        pair (GramPair): The Gram pair of the dictionary.
        psi_x (ArrayLike): ``Ψ_X`` of shape ``(M, N)``.
        weights (ArrayLike): The quadrature weights.
        samples (ArrayLike): Values ``g(x^(m))``, shape ``(M,)`` or ``(M, p)``
          for ``p`` observables.

    Raises:
        IllConditionedGramError: If ``G`` is numerically singular.
        SnapshotFormatError: If the shapes aren't conformal.

    Returns:
        numpy.ndarray: The coefficients, shape ``(N,)`` or ``(N, p)``.
    """
    psi_x = np.asarray(psi_x)
    values = np.asarray(samples, dtype=np.complex128)
    weights = np.asarray(weights, dtype=np.float64)
    if len(values) != len(psi_x) or len(weights) != len(psi_x):
        msg = f"{len(values)} samples and {len(weights)} weights for {len(psi_x)} snapshots"
        raise SnapshotFormatError(msg)
    weighted = values * (weights if values.ndim == 1 else weights[:, None])
    return spd_solve(pair.G, adjoint(psi_x) @ weighted)


@dataclass(frozen=True)
class KMD:
    """A Koopman mode decomposition.

    Attributes:
        eigvals (numpy.ndarray): The eigenvalues ``Λ``.
        eigvecs (numpy.ndarray): The eigenvectors ``V``.
        modes (numpy.ndarray): The Koopman modes, one column per target.
        unit_modulus (bool): Whether powers of ``Λ`` are taken as phases.
    """

    eigvals: npt.NDArray[np.complex128]
    eigvecs: CMatrix
    modes: CMatrix
    unit_modulus: bool = False

    def powers(self, step: int) -> npt.NDArray[np.complex128]:
        """Return ``Λ^n`` as a vector."""
        if self.unit_modulus:
            return np.exp(1j * step * circle_phase(self.eigvals))
        return self.eigvals**step


def inverse_eigvecs(model: KoopmanModel) -> CMatrix:
    """Return ``V^{-1}``.

    For a measure-preserving model this is ``V̂* G^{1/2}``, for unitary piDMD it
    is ``V̂*``.

    Raises:
        NonDiagonalizableError: If the eigenvector matrix isn't invertible.
    """
    if model.method == "mpedmd" and model.vhat is not None and model.Ghalf is not None:
        return adjoint(model.vhat) @ model.Ghalf
    if model.method == "pidmd" and model.vhat is not None:
        return adjoint(model.vhat)
    require_diagonalizable(model)
    try:
        return scipy.linalg.inv(model.eigvecs)
    except np.linalg.LinAlgError as exception:
        raise NonDiagonalizableError(str(exception)) from exception


def build_kmd(
    model: KoopmanModel,
    pair: GramPair,
    psi_x: npt.ArrayLike,
    weights: npt.ArrayLike,
    targets: npt.ArrayLike,
) -> KMD:
    """Build the Koopman mode decomposition of target observables.

    The modes are ``V^{-1} ĝ`` with ``ĝ`` the projections of the targets.

    Args:
        model (KoopmanModel): The fitted model.
        pair (GramPair): The Gram pair of the dictionary.
        psi_x (ArrayLike): ``Ψ_X`` of shape ``(M, N)``.
        weights (ArrayLike): The quadrature weights.
        targets (ArrayLike): Target values at the snapshots, shape ``(M,)`` or
          ``(M, p)``.

    Raises:
        NonDiagonalizableError: If ``V`` isn't invertible.

    Returns:
        KMD: The decomposition, with one mode column per target.
    """
    coefficients = project_observable(pair, psi_x, weights, targets)
    if coefficients.ndim == 1:
        coefficients = coefficients[:, None]
    modes = inverse_eigvecs(model) @ coefficients
    _logger.debug(
        "Built Koopman modes for {count} targets",
        extra={"count": modes.shape[1]},
    )
    return KMD(
        eigvals=model.eigvals,
        eigvecs=model.eigvecs,
        modes=modes,
        unit_modulus=model.method in UNIT_MODULUS_METHODS,
    )


def eigenfunction_row(kmd: KMD, psi_x0: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """Evaluate the eigenfunctions at an initial state, the row ``Ψ(x_0) V``."""
    return np.asarray(psi_x0, dtype=np.complex128).reshape(-1) @ kmd.eigvecs


def predict(kmd: KMD, row: npt.ArrayLike, step: int) -> npt.NDArray[np.complex128]:
    """Predict the targets after `step` steps as ``Ψ(x_0) V Λ^n modes``.

    Args:
        kmd (KMD): The mode decomposition.
        row (ArrayLike): The eigenfunction row ``Ψ(x_0) V``.
        step (int): The number of steps ``n``, nonnegative.

    Returns:
        numpy.ndarray: One predicted value per target.
    """
    if step < 0:
        msg = f"prediction step must be nonnegative, got {step}"
        raise ValueError(msg)
    return (np.asarray(row, dtype=np.complex128) * kmd.powers(step)) @ kmd.modes


def predict_series(kmd: KMD, row: npt.ArrayLike, steps: int) -> CMatrix:
    """Predict the targets for ``n = 0, ..., steps``.

    Returns:
        numpy.ndarray: Array of shape ``(steps + 1, p)``.
    """
    return np.array([predict(kmd, row, step) for step in range(steps + 1)])


def _has_unitary_factors(model: KoopmanModel) -> bool:
    return (
        model.method == "mpedmd"
        and model.vhat is not None
        and model.Ghalf is not None
        and model.Gneghalf is not None
    )


def _advanced_coefficients(
    model: KoopmanModel,
    coefficients: npt.NDArray[np.complex128],
    steps: int,
) -> CMatrix:
    if _has_unitary_factors(model):
        rotated = adjoint(model.vhat) @ (model.Ghalf @ coefficients)
        phases = np.exp(1j * np.outer(circle_phase(model.eigvals), np.arange(steps + 1)))
        return model.Gneghalf @ (model.vhat @ (phases * rotated[:, None]))
    columns = [coefficients]
    for _ in range(steps):
        columns.append(model.K @ columns[-1])
    return np.column_stack(columns)


def energy_series(model: KoopmanModel, a0: npt.ArrayLike, steps: int) -> npt.NDArray[np.float64]:
    """Compute the energies ``a_n* G a_n`` of ``a_n = K^n a_0``, ``n = 0, ..., steps``.

    A measure-preserving model advances ``a_0`` through its eigenvalue phases.
    """
    coefficients = np.asarray(a0, dtype=np.complex128).reshape(-1)
    advanced = _advanced_coefficients(model, coefficients, steps)
    return np.real(np.sum(advanced.conj() * (model.G @ advanced), axis=0))


def coeff_energy(model: KoopmanModel, a0: npt.ArrayLike, step: int) -> float:
    """Compute the energy ``a_n* G a_n`` of ``a_n = K^n a_0``.

    Example:
        >>> import numpy as np
        >>> from koopman_mp.decomp import mpedmd
        >>> from koopman_mp.dictionary import GramPair
        >>> from koopman_mp.forecast import coeff_energy
        >>> model = mpedmd(GramPair(G=np.eye(2), A=np.array([[0.0, 1.0], [1.0, 0.0]])))
        >>> round(coeff_energy(model, [1.0, 2.0], 1000), 9)
        5.0
    """
    if step < 0:
        msg = f"energy step must be nonnegative, got {step}"
        raise ValueError(msg)
    coefficients = np.asarray(a0, dtype=np.complex128).reshape(-1)
    if _has_unitary_factors(model):
        rotated = adjoint(model.vhat) @ (model.Ghalf @ coefficients)
        phases = np.exp(1j * step * circle_phase(model.eigvals))
        advanced = model.Gneghalf @ (model.vhat @ (phases * rotated))
    else:
        advanced = np.linalg.matrix_power(model.K, step) @ coefficients
    return float(np.real(np.vdot(advanced, model.G @ advanced)))


def write_prediction(values: npt.ArrayLike, path: str | Path) -> None:
    """Write a predicted series of one target as CSV with the columns ``n,re,im``."""
    series = np.asarray(values, dtype=np.complex128).reshape(-1)
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n", "re", "im"])
        for step, value in enumerate(series):
            writer.writerow([step, repr(float(value.real)), repr(float(value.imag))])
