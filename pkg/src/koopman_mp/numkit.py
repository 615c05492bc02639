"""Dense complex linear-algebra kernels with explicit numerical contracts.

Every other module of :mod:`koopman_mp` builds on these functions. All arithmetic
is done in ``complex128``; real input is embedded. The functions are pure: they
never modify their arguments.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg

from koopman_mp.exceptions import (
    IllConditionedGramError,
    NonFiniteError,
    NotHermitianError,
    NotSquareError,
    NotUnitaryError,
)

_logger = logging.getLogger(__name__)

CMatrix = npt.NDArray[np.complex128]
"""A two-dimensional complex array."""

HERMITIAN_TOLERANCE = 1e-8
"""Relative Frobenius distance to the adjoint accepted by :func:`hermitian_eig`."""

UNITARY_TOLERANCE = 1e-8
"""Frobenius distance of ``Q*Q`` to ``I`` (per √N) accepted by :func:`unitary_eig`."""

SPD_RTOL = 1e-12
"""Default smallest-to-largest eigenvalue ratio accepted by :func:`spd_sqrt`."""


@dataclass(frozen=True)
class EigPair:
    """Eigenvalues with matching eigenvectors.

    Attributes:
        values (numpy.ndarray): The eigenvalues.
        vectors (numpy.ndarray): Matrix whose ``j``-th column pairs with
          ``values[j]``.
    """

    values: npt.NDArray[np.generic]
    vectors: CMatrix

    def __post_init__(self) -> None:
        """Check that there is one eigenvector for every eigenvalue."""
        if self.vectors.ndim != 2 or self.vectors.shape[1] != len(self.values):
            msg = (
                f"{len(self.values)} eigenvalues don't match eigenvector matrix "
                f"of shape {self.vectors.shape}"
            )
            raise ValueError(msg)


def as_cmatrix(data: npt.ArrayLike, name: str = "matrix") -> CMatrix:
    """Convert array-like data to a finite complex matrix.

    Args:
        data (ArrayLike): Anything :func:`numpy.asarray` accepts, with two
          dimensions.
        name (str): Name of the matrix used in error messages.

    Raises:
        NonFiniteError: If an entry is NaN or infinite.
        ValueError: If the data isn't two-dimensional.

    Returns:
        numpy.ndarray: The data as a ``complex128`` matrix.
    """
    matrix = np.asarray(data, dtype=np.complex128)
    if matrix.ndim != 2:  # noqa: PLR2004
        msg = f"{name} must be two-dimensional, got {matrix.ndim} dimensions"
        raise ValueError(msg)
    if not np.all(np.isfinite(matrix)):
        msg = f"{name} has non-finite entries"
        raise NonFiniteError(msg)
    return matrix


def _as_square(data: npt.ArrayLike, name: str) -> CMatrix:
    matrix = as_cmatrix(data, name)
    if matrix.shape[0] != matrix.shape[1]:
        msg = f"{name} must be square, got shape {matrix.shape}"
        raise NotSquareError(msg)
    return matrix


def adjoint(matrix: CMatrix) -> CMatrix:
    """Return the conjugate transpose of `matrix`."""
    return matrix.conj().T


def symmetrize(matrix: CMatrix) -> CMatrix:
    """Return the Hermitian part ``(H + H*) / 2`` of `matrix`."""
    return (matrix + adjoint(matrix)) / 2


def circle_phase(values: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Return the phases of complex numbers in the interval (-π, π].

    Example:
        >>> import numpy as np
        >>> from koopman_mp.numkit import circle_phase
        >>> float(circle_phase(complex(-1.0, -0.0))[()])
        3.141592653589793
    """
    phases = np.angle(np.asarray(values, dtype=np.complex128))
    return np.where(phases <= -np.pi, np.pi, phases)


def hermitian_eig(matrix: npt.ArrayLike) -> EigPair:
    """Compute the eigendecomposition of a Hermitian matrix.

    The matrix is symmetrized to ``(H + H*) / 2`` before factoring, which absorbs
    the roundoff asymmetry quadrature sums leave behind.

    Args:
        matrix (ArrayLike): A square Hermitian matrix.

    Raises:
        NonFiniteError: If `matrix` has non-finite entries.
        NotSquareError: If `matrix` isn't square.
        NotHermitianError: If ``‖H - H*‖_F > 1e-8 ‖H‖_F``.

    Returns:
        EigPair: Real eigenvalues in ascending order with unitary eigenvectors.

    Example:
        >>> from koopman_mp.numkit import hermitian_eig
        >>> hermitian_eig([[2, 1], [1, 2]]).values.round(12).tolist()
        [1.0, 3.0]
    """
    hermitian = _as_square(matrix, "Hermitian matrix")
    scale = np.linalg.norm(hermitian)
    asymmetry = np.linalg.norm(hermitian - adjoint(hermitian))
    if asymmetry > HERMITIAN_TOLERANCE * scale:
        msg = f"matrix is not Hermitian (‖H - H*‖_F = {asymmetry:.3e})"
        raise NotHermitianError(msg)
    values, vectors = scipy.linalg.eigh(symmetrize(hermitian))
    return EigPair(values=values, vectors=vectors)


def _unit_phase(entries: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    magnitude = np.abs(entries)
    return np.where(magnitude > 0, entries / np.where(magnitude > 0, magnitude, 1), 1)


def svd(
    matrix: npt.ArrayLike,
) -> tuple[CMatrix, npt.NDArray[np.float64], CMatrix]:
    """Compute a thin singular value decomposition ``B = U diag(sigma) Vt``.

    The singular vectors follow a deterministic phase convention: the
    largest-magnitude entry of every left singular vector is real and positive
    (the paired right singular vector is rotated along), and right singular
    vectors of numerically zero singular values are normalized the same way on
    their own. Zero singular values leave the pairing free, so this fixes the
    choice.

    Args:
        matrix (ArrayLike): The matrix ``B``.

    Raises:
        NonFiniteError: If `matrix` has non-finite entries.

    Returns:
        tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]: ``U`` with
        orthonormal columns, singular values in descending order, and ``Vt``
        with orthonormal rows.

    Example:
        >>> from koopman_mp.numkit import svd
        >>> svd([[3, 0], [0, 2]])[1].tolist()
        [3.0, 2.0]
    """
    dense = as_cmatrix(matrix)
    try:
        left, sigma, right_h = scipy.linalg.svd(dense, full_matrices=False)
    except np.linalg.LinAlgError:
        _logger.debug("SVD with gesdd didn't converge, retrying with gesvd")
        left, sigma, right_h = scipy.linalg.svd(
            dense,
            full_matrices=False,
            lapack_driver="gesvd",
        )
    if sigma.size == 0:
        return left, sigma, right_h

    columns = np.arange(left.shape[1])
    phase = _unit_phase(left[np.argmax(np.abs(left), axis=0), columns])
    left = left * phase.conj()
    right_h = right_h * phase[:, None]

    tolerance = max(dense.shape) * np.finfo(np.float64).eps * sigma[0]
    for index in np.flatnonzero(sigma <= tolerance):
        row = right_h[index]
        pivot = row[np.argmax(np.abs(row))].conj()
        right_h[index] = row * _unit_phase(np.asarray(pivot))
    return left, sigma, right_h


def cond2(matrix: npt.ArrayLike) -> float:
    """Compute the 2-norm condition number.

    Args:
        matrix (ArrayLike): Any finite matrix.

    Raises:
        NonFiniteError: If `matrix` has non-finite entries.

    Returns:
        float: The ratio of the largest to the smallest singular value, or
        ``inf`` if the smallest singular value is zero.

    Example:
        >>> from koopman_mp.numkit import cond2
        >>> round(cond2([[10, 0], [0, 0.1]]), 10)
        100.0
    """
    sigma = scipy.linalg.svdvals(as_cmatrix(matrix))
    if sigma[-1] == 0:
        return float("inf")
    return float(sigma[0] / sigma[-1])


def _check_spd(eigenvalues: npt.NDArray[np.float64], rtol: float) -> None:
    smallest, largest = eigenvalues[0], eigenvalues[-1]
    if largest <= 0 or smallest <= rtol * largest:
        msg = (
            f"Gram matrix is numerically singular: smallest eigenvalue {smallest:.3e},"
            f" largest {largest:.3e}, rtol {rtol:.1e}"
        )
        raise IllConditionedGramError(msg)


def spd_sqrt(gram: npt.ArrayLike, rtol: float = SPD_RTOL) -> tuple[CMatrix, CMatrix]:
    """Compute ``G^{1/2}`` and ``G^{-1/2}`` of a Hermitian positive-definite matrix.

    Args:
        gram (ArrayLike): The Hermitian matrix ``G``.
        rtol (float): Smallest accepted ratio of the smallest to the largest
          eigenvalue.

    Raises:
        IllConditionedGramError: If the smallest eigenvalue doesn't exceed
          ``rtol`` times the largest one.

    Returns:
        tuple[numpy.ndarray, numpy.ndarray]: The Hermitian matrices ``G^{1/2}``
        and ``G^{-1/2}``.

    Example:
        >>> from koopman_mp.numkit import spd_sqrt
        >>> half, neghalf = spd_sqrt([[4, 0], [0, 9]])
        >>> half.real.round(12).diagonal().tolist()
        [2.0, 3.0]
    """
    pair = hermitian_eig(gram)
    _check_spd(pair.values, rtol)
    root = np.sqrt(pair.values)
    half = symmetrize((pair.vectors * root) @ adjoint(pair.vectors))
    neghalf = symmetrize((pair.vectors / root) @ adjoint(pair.vectors))
    return half, neghalf


def spd_solve(
    gram: npt.ArrayLike,
    rhs: npt.ArrayLike,
    rtol: float = SPD_RTOL,
) -> npt.NDArray[np.complex128]:
    """Solve ``G X = B`` for a Hermitian positive-definite ``G``.

    Args:
        gram (ArrayLike): The Hermitian matrix ``G``.
        rhs (ArrayLike): Right-hand side vector or matrix ``B``.
        rtol (float): Conditioning threshold, as for :func:`spd_sqrt`.

    Raises:
        IllConditionedGramError: If ``G`` is numerically singular.

    Returns:
        numpy.ndarray: The solution ``X``, shaped like `rhs`.
    """
    hermitian = symmetrize(_as_square(gram, "Gram matrix"))
    _check_spd(scipy.linalg.eigvalsh(hermitian), rtol)
    try:
        return scipy.linalg.solve(
            hermitian,
            np.asarray(rhs, dtype=np.complex128),
            assume_a="pos",
        )
    except np.linalg.LinAlgError as exception:
        raise IllConditionedGramError(str(exception)) from exception


def unitary_eig(matrix: npt.ArrayLike) -> EigPair:
    """Compute the eigendecomposition of a unitary matrix through a Schur form.

    For a normal matrix the complex Schur form is diagonal, so the Schur vectors
    are an orthonormal eigenbasis by construction. Eigenvalues are projected onto
    the unit circle and sorted by phase in (-π, π]; ties keep their Schur order.

    Args:
        matrix (ArrayLike): A unitary matrix ``Q``.

    Raises:
        NotSquareError: If `matrix` isn't square.
        NotUnitaryError: If ``‖Q*Q - I‖_F > 1e-8 √N``.

    Returns:
        EigPair: Unit-modulus eigenvalues and a unitary eigenvector matrix.

    Example:
        >>> import numpy as np
        >>> from koopman_mp.numkit import circle_phase, unitary_eig
        >>> shift = np.roll(np.eye(4), 1, axis=0)
        >>> phases = circle_phase(unitary_eig(shift).values) / np.pi
        >>> (np.round(phases, 12) + 0.0).tolist()
        [-0.5, 0.0, 0.5, 1.0]
    """
    unitary = _as_square(matrix, "unitary matrix")
    size = unitary.shape[0]
    defect = np.linalg.norm(adjoint(unitary) @ unitary - np.eye(size))
    if defect > UNITARY_TOLERANCE * np.sqrt(size):
        msg = f"matrix is not unitary (‖Q*Q - I‖_F = {defect:.3e})"
        raise NotUnitaryError(msg)

    triangular, vectors = scipy.linalg.schur(unitary, output="complex")
    values = np.diagonal(triangular).copy()
    _logger.debug(
        "Schur form departure from normality {departure}",
        extra={"departure": float(np.linalg.norm(np.triu(triangular, 1)))},
    )
    values = values / np.abs(values)
    order = np.argsort(circle_phase(values), kind="stable")
    return EigPair(values=values[order], vectors=vectors[:, order])
