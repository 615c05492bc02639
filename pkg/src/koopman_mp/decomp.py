"""Fit Koopman matrices with DMD, EDMD, piDMD and measure-preserving EDMD.

All four methods return a :class:`KoopmanModel`. The measure-preserving variant
solves the Galerkin least-squares problem under the isometry constraint
``K* G K = G`` through an orthogonal Procrustes problem, so that its eigenvalues
lie on the unit circle and its eigenvectors are orthonormal in the ``G`` inner
product.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.linalg

from koopman_mp.dictionary import GramPair, LinearCoordinates, gram
from koopman_mp.exceptions import (
    IllConditionedGramError,
    ModelFormatError,
    NonDiagonalizableError,
    NonFiniteError,
)
from koopman_mp.numkit import (
    CMatrix,
    adjoint,
    as_cmatrix,
    circle_phase,
    cond2,
    spd_solve,
    spd_sqrt,
    svd,
    unitary_eig,
)

_logger = logging.getLogger(__name__)

METHODS = ("dmd", "edmd", "pidmd", "mpedmd")
"""The supported fitting methods."""

EIGVEC_COND_LIMIT = 1e8
"""Largest eigenvector condition number of a model flagged diagonalizable."""


@dataclass(frozen=True)
class KoopmanModel:
    """A fitted Koopman matrix with its eigendecomposition.

    Attributes:
        method (str): One of ``dmd``, ``edmd``, ``pidmd`` or ``mpedmd``.
        K (numpy.ndarray): The ``N x N`` Koopman matrix.
        eigvals (numpy.ndarray): The eigenvalues, sorted by phase.
        eigvecs (numpy.ndarray): The eigenvectors ``V`` as columns.
        G (numpy.ndarray): The Gram matrix.
        A (numpy.ndarray | None): The matrix ``Ψ_X* W Ψ_Y``, kept for residuals.
        Ghalf (numpy.ndarray | None): ``G^{1/2}``.
        Gneghalf (numpy.ndarray | None): ``G^{-1/2}``.
        vhat (numpy.ndarray | None): The unitary matrix ``V̂ = G^{1/2} V`` of the
          measure-preserving fit.
        diagonalizable (bool): ``False`` if the eigenvectors are numerically
          linearly dependent, in which case eigenvalues and eigenvectors are
          unreliable.
        dictionary (dict | None): The descriptor of the dictionary.
    """

    method: str
    K: CMatrix  # noqa: N815
    eigvals: npt.NDArray[np.complex128]
    eigvecs: CMatrix
    G: CMatrix  # noqa: N815
    A: CMatrix | None = None  # noqa: N815
    Ghalf: CMatrix | None = None  # noqa: N815
    Gneghalf: CMatrix | None = None  # noqa: N815
    vhat: CMatrix | None = None
    diagonalizable: bool = True
    dictionary: dict[str, Any] | None = None

    @property
    def size(self) -> int:
        """The dictionary size ``N``."""
        return self.K.shape[0]

    @property
    def gram_pair(self) -> GramPair:
        """The Gram pair the model was fitted on.

        Raises:
            ModelFormatError: If the model doesn't carry ``A``.
        """
        if self.A is None:
            msg = f"{self.method} model doesn't carry the matrix A"
            raise ModelFormatError(msg)
        return GramPair(G=self.G, A=self.A)

    def eigenvector_condition(self) -> float:
        """Return the 2-norm condition number of the eigenvector matrix."""
        return cond2(self.eigvecs)


def _sort_by_phase(
    values: npt.NDArray[np.complex128],
    vectors: CMatrix,
) -> tuple[npt.NDArray[np.complex128], CMatrix]:
    order = np.argsort(circle_phase(values), kind="stable")
    return values[order], vectors[:, order]


def _g_normalize(vectors: CMatrix, gram_matrix: CMatrix) -> CMatrix:
    norms = np.sqrt(np.abs(np.einsum("ij,ik,kj->j", vectors.conj(), gram_matrix, vectors)))
    return vectors / np.where(norms > 0, norms, 1.0)


def edmd(pair: GramPair, dictionary: dict[str, Any] | None = None) -> KoopmanModel:
    """Fit the EDMD matrix ``K = G^{-1} A``.

    The eigendecomposition uses a general eigensolver, and the eigenvectors are
    normalized to ``v* G v = 1``. If the eigenvector matrix is numerically
    singular the model is still returned, flagged as not diagonalizable.

    Args:
        pair (GramPair): The Gram pair ``(G, A)``.
        dictionary (dict | None): The dictionary descriptor stored with the model.

    Raises:
        IllConditionedGramError: If ``G`` is numerically singular.

    Returns:
        KoopmanModel: The fitted model.
    """
    koopman = spd_solve(pair.G, pair.A)
    half, neghalf = spd_sqrt(pair.G)
    try:
        values, vectors = scipy.linalg.eig(koopman)
    except np.linalg.LinAlgError as exception:
        raise NonFiniteError(str(exception)) from exception
    values, vectors = _sort_by_phase(values, vectors)
    vectors = _g_normalize(vectors, pair.G)
    condition = cond2(vectors) if np.all(np.isfinite(vectors)) else float("inf")
    diagonalizable = condition <= EIGVEC_COND_LIMIT
    if not diagonalizable:
        _logger.warning(
            "EDMD eigenvectors are numerically dependent (condition {condition:.3e}), "
            "the matrix isn't reliably diagonalizable",
            extra={"condition": condition},
        )
    _logger.info(
        "Fitted {method} model with N={size}",
        extra={"method": "edmd", "size": pair.size},
    )
    return KoopmanModel(
        method="edmd",
        K=koopman,
        eigvals=values,
        eigvecs=vectors,
        G=pair.G,
        A=pair.A,
        Ghalf=half,
        Gneghalf=neghalf,
        diagonalizable=diagonalizable,
        dictionary=dictionary,
    )


def dmd(
    states_x: npt.ArrayLike,
    states_y: npt.ArrayLike,
    weights: npt.ArrayLike,
) -> KoopmanModel:
    """Fit DMD, that is EDMD with the dictionary of state coordinates.

    The Koopman matrix is the transpose of the state-space DMD matrix returned
    by :func:`dmd_operator`.

    Example:
        >>> import numpy as np
        >>> from koopman_mp.decomp import dmd
        >>> states = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        >>> (dmd(states, 2 * states, np.ones(3)).K.real.round(12) + 0.0).tolist()
        [[2.0, 0.0], [0.0, 2.0]]
    """
    states_x = as_cmatrix(np.atleast_2d(states_x), "X")
    pair = gram(states_x, as_cmatrix(np.atleast_2d(states_y), "Y"), weights)
    descriptor = LinearCoordinates(states_x.shape[1]).to_descriptor()
    return replace(edmd(pair, dictionary=descriptor), method="dmd")


def dmd_operator(
    states_x: npt.ArrayLike,
    states_y: npt.ArrayLike,
    weights: npt.ArrayLike,
) -> CMatrix:
    """Return the state-space DMD matrix ``Y_w X_w^†``.

    Here ``X_w`` and ``Y_w`` hold the weighted states ``√w_m x^(m)`` as columns.
    """
    root = np.sqrt(np.asarray(weights, dtype=np.float64))
    columns_x = (root[:, None] * as_cmatrix(np.atleast_2d(states_x), "X")).T
    columns_y = (root[:, None] * as_cmatrix(np.atleast_2d(states_y), "Y")).T
    return columns_y @ scipy.linalg.pinv(columns_x)


def procrustes_from_cross(cross: npt.ArrayLike) -> tuple[CMatrix, npt.NDArray[np.float64]]:
    """Solve the orthogonal Procrustes problem given ``Q* P = U_1 Σ U_2*``.

    Returns:
        tuple: The unitary minimizer ``C = U_2 U_1*`` and the singular values.
    """
    left, sigma, right_h = svd(cross)
    return adjoint(right_h) @ adjoint(left), sigma


def procrustes(p: npt.ArrayLike, q: npt.ArrayLike) -> CMatrix:
    """Find the unitary ``C`` minimizing ``‖P C - Q‖_F``.

    With ``Q* P = U_1 Σ U_2*`` the minimizer is ``C = U_2 U_1*``. It is unique
    only if ``Σ`` is nondegenerate.

    Args:
        p (ArrayLike): The ``M x N`` matrix ``P``.
        q (ArrayLike): The ``M x N`` matrix ``Q``.

    Returns:
        numpy.ndarray: The unitary ``N x N`` minimizer.

    Example:
        >>> import numpy as np
        >>> from koopman_mp.decomp import procrustes
        >>> rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
        >>> (procrustes(np.eye(2), rotation).real.round(12) + 0.0).tolist()
        [[0.0, -1.0], [1.0, 0.0]]
    """
    p = as_cmatrix(p, "P")
    q = as_cmatrix(q, "Q")
    unitary, _ = procrustes_from_cross(adjoint(q) @ p)
    return unitary


def procrustes_objective(p: npt.ArrayLike, q: npt.ArrayLike, c: npt.ArrayLike) -> float:
    """Return ``‖P C - Q‖_F²``."""
    p, q, c = as_cmatrix(p, "P"), as_cmatrix(q, "Q"), as_cmatrix(c, "C")
    return float(np.linalg.norm(p @ c - q) ** 2)


def mpedmd(pair: GramPair, dictionary: dict[str, Any] | None = None) -> KoopmanModel:
    """Fit the measure-preserving EDMD matrix.

    The steps are: an SVD ``G^{-1/2} A* G^{-1/2} = U_1 Σ U_2*``, the unitary
    eigendecomposition ``U_2 U_1* = V̂ Λ V̂*``, and finally
    ``K = G^{-1/2} U_2 U_1* G^{1/2}`` with eigenvectors ``V = G^{-1/2} V̂``.

    Args:
        pair (GramPair): The Gram pair ``(G, A)``.
        dictionary (dict | None): The dictionary descriptor stored with the model.

    Raises:
        IllConditionedGramError: If ``G`` is numerically singular.

    Returns:
        KoopmanModel: The fitted model, with ``K* G K = G`` and all eigenvalues
        on the unit circle.

    Example:
        >>> import numpy as np
        >>> from koopman_mp.decomp import mpedmd
        >>> from koopman_mp.dictionary import GramPair
        >>> model = mpedmd(GramPair(G=np.eye(2), A=np.eye(2)))
        >>> model.eigvals.real.round(12).tolist()
        [1.0, 1.0]
    """
    half, neghalf = spd_sqrt(pair.G)
    unitary, sigma = procrustes_from_cross(neghalf @ adjoint(pair.A) @ neghalf)
    tolerance = pair.size * np.finfo(np.float64).eps * max(float(sigma[0]), 1.0)
    if np.any(sigma <= tolerance):
        _logger.warning(
            "Degenerate singular values in the Procrustes problem, "
            "the measure-preserving fit isn't unique",
        )
    eig = unitary_eig(unitary)
    koopman = neghalf @ unitary @ half
    _logger.debug(
        "Procrustes singular values range from {smallest:.3e} to {largest:.3e}",
        extra={"smallest": float(sigma[-1]), "largest": float(sigma[0])},
    )
    _logger.info(
        "Fitted {method} model with N={size}",
        extra={"method": "mpedmd", "size": pair.size},
    )
    return KoopmanModel(
        method="mpedmd",
        K=koopman,
        eigvals=eig.values,
        eigvecs=neghalf @ eig.vectors,
        G=pair.G,
        A=pair.A,
        Ghalf=half,
        Gneghalf=neghalf,
        vhat=eig.vectors,
        dictionary=dictionary,
    )


def pidmd_unitary(
    states_x: npt.ArrayLike,
    states_y: npt.ArrayLike,
    weights: npt.ArrayLike,
) -> KoopmanModel:
    """Fit unitary physics-informed DMD.

    With the states as rows, ``K`` is the unitary minimizer of the unweighted
    ``‖X K - Y‖_F``: with ``Y* X = V_1 S V_2*`` it is ``K = V_2 V_1*``, so that
    it acts on coefficient vectors like the DMD matrix. It is measure-preserving
    only if ``X* X`` and ``W`` are multiples of the identity, and then it
    coincides with the mpEDMD matrix of the linear dictionary.

    Args:
        states_x (ArrayLike): States ``x^(m)`` as rows, shape ``(M, d)``.
        states_y (ArrayLike): States ``y^(m)`` as rows, shape ``(M, d)``.
        weights (ArrayLike): The quadrature weights, used for ``G`` and ``A``
          only.

    Returns:
        KoopmanModel: The fitted model with unit-modulus eigenvalues.
    """
    states_x = as_cmatrix(np.atleast_2d(states_x), "X")
    states_y = as_cmatrix(np.atleast_2d(states_y), "Y")
    pair = gram(states_x, states_y, weights)
    unitary, _ = procrustes_from_cross(adjoint(states_y) @ states_x)
    eig = unitary_eig(unitary)
    try:
        half, neghalf = spd_sqrt(pair.G)
    except IllConditionedGramError:
        half = neghalf = None
    _logger.info(
        "Fitted {method} model with N={size}",
        extra={"method": "pidmd", "size": pair.size},
    )
    return KoopmanModel(
        method="pidmd",
        K=unitary,
        eigvals=eig.values,
        eigvecs=eig.vectors,
        G=pair.G,
        A=pair.A,
        Ghalf=half,
        Gneghalf=neghalf,
        vhat=eig.vectors,
        dictionary=LinearCoordinates(states_x.shape[1]).to_descriptor(),
    )


def fit(
    method: str,
    psi_x: npt.ArrayLike,
    psi_y: npt.ArrayLike,
    weights: npt.ArrayLike,
    dictionary: dict[str, Any] | None = None,
) -> KoopmanModel:
    """Fit a model with the named method.

    DMD and piDMD treat the columns of `psi_x` and `psi_y` as state
    coordinates; EDMD and mpEDMD assemble the Gram pair of the dictionary.

    Raises:
        ValueError: If the method is unknown.
    """
    if method == "dmd":
        return dmd(psi_x, psi_y, weights)
    if method == "pidmd":
        return pidmd_unitary(psi_x, psi_y, weights)
    if method == "edmd":
        return edmd(gram(psi_x, psi_y, weights), dictionary)
    if method == "mpedmd":
        return mpedmd(gram(psi_x, psi_y, weights), dictionary)
    msg = f"unknown method {method!r}, choose from {list(METHODS)}"
    raise ValueError(msg)


def require_diagonalizable(model: KoopmanModel) -> None:
    """Raise if the eigenvector matrix of `model` isn't reliably invertible.

    Raises:
        NonDiagonalizableError: If the model is flagged not diagonalizable.
    """
    if not model.diagonalizable:
        msg = f"{model.method} model has numerically dependent eigenvectors"
        raise NonDiagonalizableError(msg)


def _encode(array: npt.ArrayLike | None) -> dict[str, Any] | None:
    if array is None:
        return None
    array = np.asarray(array, dtype=np.complex128)
    return {"re": array.real.tolist(), "im": array.imag.tolist()}


def _decode(value: dict[str, Any] | None) -> CMatrix | None:
    if value is None:
        return None
    return np.array(value["re"], dtype=np.float64) + 1j * np.array(value["im"], dtype=np.float64)


_ARRAY_FIELDS = ("K", "eigvals", "eigvecs", "G", "A", "Ghalf", "Gneghalf", "vhat")


def model_to_dict(model: KoopmanModel) -> dict[str, Any]:
    """Convert a model to a JSON-compatible dictionary."""
    document: dict[str, Any] = {
        "method": model.method,
        "diagonalizable": model.diagonalizable,
        "dictionary": model.dictionary,
    }
    for name in _ARRAY_FIELDS:
        document[name] = _encode(getattr(model, name))
    return document


def model_from_dict(document: dict[str, Any]) -> KoopmanModel:
    """Create a model from the dictionary made by :func:`model_to_dict`.

    Raises:
        ModelFormatError: If a field is missing or malformed.
    """
    try:
        if document["method"] not in METHODS:
            msg = f"unknown method {document['method']!r}"
            raise ModelFormatError(msg)
        arrays = {name: _decode(document.get(name)) for name in _ARRAY_FIELDS}
        model = KoopmanModel(
            method=document["method"],
            diagonalizable=bool(document.get("diagonalizable", True)),
            dictionary=document.get("dictionary"),
            **arrays,
        )
    except (KeyError, TypeError, ValueError) as exception:
        msg = f"malformed model: {exception}"
        raise ModelFormatError(msg) from exception
    if model.K is None or model.eigvals is None or model.eigvecs is None or model.G is None:
        msg = "model needs K, eigvals, eigvecs and G"
        raise ModelFormatError(msg)
    return model


def save_model(model: KoopmanModel, path: str | Path) -> None:
    """Write a model as JSON, exact to the stored double precision."""
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True) + "\n")


def load_model(path: str | Path) -> KoopmanModel:
    """Read a model written by :func:`save_model`.

    Raises:
        ModelFormatError: If the file isn't a valid model.
    """
    try:
        document = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exception:
        msg = f"{path} isn't valid JSON: {exception}"
        raise ModelFormatError(msg) from exception
    return model_from_dict(document)
