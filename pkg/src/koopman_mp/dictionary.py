"""Observable dictionaries and the Gram pair ``(G, A)``.

A dictionary is a finite list of observables ``ψ_1, ..., ψ_N``. Evaluating it on
the snapshot states gives the matrices ``Ψ_X`` and ``Ψ_Y``, from which the Gram
matrix ``G = Ψ_X* W Ψ_X`` and the matrix ``A = Ψ_X* W Ψ_Y`` are assembled.

Every dictionary variant is a subclass of :class:`Dictionary` with a
``DICTIONARY_TYPE`` class variable, and can be created from a JSON descriptor such
as ``{"type": "delay", "observable": "lorenz-x", "N": 50}``.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from inspect import isclass
from typing import TYPE_CHECKING, Any, Callable, ClassVar, Sequence, Union

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view

from koopman_mp.exceptions import (
    DictionaryError,
    NonFiniteError,
    SnapshotFormatError,
    TrajectoryTooShortError,
    ZeroObservableError,
)
from koopman_mp.numkit import svd, symmetrize

if TYPE_CHECKING:
    from koopman_mp.numkit import CMatrix
    from koopman_mp.sampling import Flow, SnapshotSet, Trajectory

_logger = logging.getLogger(__name__)

Observable = Callable[[npt.NDArray[np.float64]], npt.NDArray[np.complex128]]
"""A scalar observable, mapping states of shape ``(M, d)`` to ``M`` values."""

ObservableSpec = Union[str, Observable]

GRAM_BLOCK_ROWS = 8_192
"""Number of snapshot rows summed at a time when assembling ``G`` and ``A``."""


def _lorenz_coordinate(states: npt.NDArray[np.float64], index: int) -> CMatrix:
    return states[:, index].astype(np.complex128)


def pendulum_observable(states: npt.NDArray[np.float64]) -> CMatrix:
    """Evaluate ``g(x1, x2) = exp(i x1) x2 exp(-x2^2 / 2)``.

    Example:
        >>> import numpy as np
        >>> from koopman_mp.dictionary import pendulum_observable
        >>> value = pendulum_observable(np.array([[0.0, 1.0]]))[0]
        >>> bool(np.isclose(value, np.exp(-0.5)))
        True
    """
    x1, x2 = states[:, 0], states[:, 1]
    return np.exp(1j * x1) * x2 * np.exp(-(x2**2) / 2)


_OBSERVABLES: dict[str, Observable] = {
    "lorenz-x": lambda states: _lorenz_coordinate(states, 0),
    "lorenz-y": lambda states: _lorenz_coordinate(states, 1),
    "lorenz-z": lambda states: _lorenz_coordinate(states, 2),
    "pendulum": pendulum_observable,
    "circle": lambda states: np.exp(1j * states[:, 0]),
    "coordinate": lambda states: states[:, 0].astype(np.complex128),
}
"""Registry of builtin observables by name."""


def builtin_observables() -> list[str]:
    """Get the names of the builtin observables.

    Example:
        >>> from koopman_mp.dictionary import builtin_observables
        >>> "pendulum" in builtin_observables()
        True
    """
    return sorted(_OBSERVABLES)


def observable(spec: ObservableSpec) -> Observable:
    """Resolve an observable given by name or as a callable.

    Raises:
        DictionaryError: If `spec` names no builtin observable.
    """
    if callable(spec):
        return spec
    try:
        return _OBSERVABLES[spec]
    except KeyError:
        msg = f"unknown observable {spec!r}, choose from {builtin_observables()}"
        raise DictionaryError(msg) from None


def _as_states(states: npt.ArrayLike) -> npt.NDArray[np.float64]:
    array = np.asarray(states, dtype=np.float64)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:  # noqa: PLR2004
        msg = f"states must have shape (M, d), got {array.shape}"
        raise SnapshotFormatError(msg)
    if not np.all(np.isfinite(array)):
        msg = "states contain non-finite values"
        raise NonFiniteError(msg)
    return array


def _evaluate_column(function: Observable, states: npt.NDArray[np.float64]) -> CMatrix:
    values = np.asarray(function(states), dtype=np.complex128).reshape(-1)
    if len(values) != len(states):
        msg = f"observable returned {len(values)} values for {len(states)} states"
        raise DictionaryError(msg)
    return values


class Dictionary(ABC):
    """Abstract class that represents a dictionary of observables.

    Every dictionary variant is a subclass that gives ``DICTIONARY_TYPE`` a value
    and implements :meth:`_evaluate`, :meth:`to_descriptor` and
    :meth:`from_descriptor`.
    """

    DICTIONARY_TYPE: ClassVar[str]
    """The ``type`` key of the JSON descriptor of this dictionary variant."""

    @property
    @abstractmethod
    def size(self) -> int:
        """The number of observables ``N``."""

    @abstractmethod
    def _evaluate(self, states: npt.NDArray[np.float64]) -> CMatrix:
        """Evaluate the dictionary on validated states."""

    @abstractmethod
    def to_descriptor(self) -> dict[str, Any]:
        """Return the JSON descriptor of this dictionary."""

    @classmethod
    @abstractmethod
    def from_descriptor(cls, descriptor: dict[str, Any]) -> Dictionary:
        """Create a dictionary of this variant from its JSON descriptor."""

    def evaluate(self, states: npt.ArrayLike) -> CMatrix:
        """Evaluate the dictionary on states.

        Args:
            states (ArrayLike): States of shape ``(M, d)``.

        Raises:
            NonFiniteError: If a state or observable value isn't finite.

        Returns:
            numpy.ndarray: The complex matrix of shape ``(M, N)`` with row ``m``
            equal to ``Ψ(x^(m))``.
        """
        states = _as_states(states)
        values = np.asarray(self._evaluate(states), dtype=np.complex128)
        if values.shape != (len(states), self.size):
            msg = f"dictionary produced shape {values.shape}, expected {(len(states), self.size)}"
            raise DictionaryError(msg)
        if not np.all(np.isfinite(values)):
            msg = f"{self.DICTIONARY_TYPE} dictionary produced non-finite values"
            raise NonFiniteError(msg)
        return values

    def evaluate_snapshots(self, snapshots: SnapshotSet) -> tuple[CMatrix, CMatrix]:
        """Evaluate ``Ψ_X`` and ``Ψ_Y`` on a snapshot set."""
        return self.evaluate(snapshots.X), self.evaluate(snapshots.Y)

    @staticmethod
    def create_from_descriptor(descriptor: dict[str, Any]) -> Dictionary:
        """Create a dictionary of the right variant from a JSON descriptor.

        This is a factory method that you use if you don't know the dictionary
        variant beforehand.

        Args:
            descriptor (dict[str, Any]): The descriptor with a ``type`` key.

        Raises:
            DictionaryError: If the type is unknown or the descriptor is invalid.

        Returns:
            Dictionary: An object of the subclass corresponding to the type.

        Example:
            >>> from koopman_mp.dictionary import Dictionary
            >>> Dictionary.create_from_descriptor({"type": "fourier", "kmax": 3}).size
            7
        """
        if not isinstance(descriptor, dict) or "type" not in descriptor:
            msg = f"dictionary descriptor needs a 'type' key: {descriptor!r}"
            raise DictionaryError(msg)
        for dictionary_class in _supported_dictionaries():
            if dictionary_class.DICTIONARY_TYPE == descriptor["type"]:
                try:
                    return dictionary_class.from_descriptor(descriptor)
                except (KeyError, TypeError, ValueError) as exception:
                    msg = f"invalid {descriptor['type']} descriptor: {exception}"
                    raise DictionaryError(msg) from exception
        msg = f"unknown dictionary type {descriptor['type']!r}, choose from {supported_dictionaries()}"
        raise DictionaryError(msg)


def _check_keys(descriptor: dict[str, Any], allowed: set[str]) -> None:
    unknown = set(descriptor) - allowed - {"type"}
    if unknown:
        msg = f"unknown keys {sorted(unknown)} for dictionary type {descriptor['type']!r}"
        raise DictionaryError(msg)


class LinearCoordinates(Dictionary):
    """The dictionary ``ψ_j(x) = x_j`` of state coordinates.

    With this dictionary EDMD reduces to DMD.

    Attributes:
        dim (int | None): The state dimension, or ``None`` to take it from the
          first states that are evaluated.
    """

    DICTIONARY_TYPE = "linear"

    def __init__(self, dim: int | None = None) -> None:
        """Create the coordinate dictionary."""
        self.dim = dim

    @property
    def size(self) -> int:
        """The number of observables, equal to the state dimension."""
        if self.dim is None:
            msg = "the dimension of a linear dictionary isn't known before evaluation"
            raise DictionaryError(msg)
        return self.dim

    def _evaluate(self, states: npt.NDArray[np.float64]) -> CMatrix:
        if self.dim is None:
            self.dim = states.shape[1]
        return states.astype(np.complex128)

    def to_descriptor(self) -> dict[str, Any]:
        """Return the descriptor ``{"type": "linear", "dim": d}``."""
        descriptor: dict[str, Any] = {"type": self.DICTIONARY_TYPE}
        if self.dim is not None:
            descriptor["dim"] = self.dim
        return descriptor

    @classmethod
    def from_descriptor(cls, descriptor: dict[str, Any]) -> LinearCoordinates:
        """Create the dictionary from ``{"type": "linear"}``."""
        _check_keys(descriptor, {"dim"})
        dim = descriptor.get("dim")
        return cls(None if dim is None else int(dim))


class FourierModes(Dictionary):
    """The Fourier dictionary ``e^{ikθ}``, ``k = -kmax, ..., kmax``.

    Attributes:
        kmax (int): The largest wavenumber.
        coordinate (int): The state coordinate that holds the angle ``θ``.
    """

    DICTIONARY_TYPE = "fourier"

    def __init__(self, kmax: int, coordinate: int = 0) -> None:
        """Create the Fourier dictionary."""
        if kmax < 0:
            msg = f"kmax must be nonnegative, got {kmax}"
            raise DictionaryError(msg)
        self.kmax = kmax
        self.coordinate = coordinate

    @property
    def wavenumbers(self) -> npt.NDArray[np.int64]:
        """The wavenumbers in column order."""
        return np.arange(-self.kmax, self.kmax + 1)

    @property
    def size(self) -> int:
        """The number of modes ``2 kmax + 1``."""
        return 2 * self.kmax + 1

    def _evaluate(self, states: npt.NDArray[np.float64]) -> CMatrix:
        angles = states[:, self.coordinate]
        return np.exp(1j * np.outer(angles, self.wavenumbers))

    def to_descriptor(self) -> dict[str, Any]:
        """Return the descriptor ``{"type": "fourier", "kmax": ...}``."""
        return {
            "type": self.DICTIONARY_TYPE,
            "kmax": self.kmax,
            "coordinate": self.coordinate,
        }

    @classmethod
    def from_descriptor(cls, descriptor: dict[str, Any]) -> FourierModes:
        """Create the dictionary from ``{"type": "fourier", "kmax": ...}``."""
        _check_keys(descriptor, {"kmax", "coordinate"})
        return cls(int(descriptor["kmax"]), int(descriptor.get("coordinate", 0)))


class IndicatorFunctions(Dictionary):
    """The indicator functions ``e_k(x) = δ_{k,x}``, ``k = 1, ..., N``.

    Example:
        >>> from koopman_mp.dictionary import IndicatorFunctions
        >>> IndicatorFunctions(3).evaluate([[2.0]]).real.tolist()
        [[0.0, 1.0, 0.0]]
    """

    DICTIONARY_TYPE = "indicator"

    def __init__(self, count: int) -> None:
        """Create the indicator dictionary of `count` functions."""
        if count < 1:
            msg = f"an indicator dictionary needs at least 1 function, got {count}"
            raise DictionaryError(msg)
        self.count = count

    @property
    def size(self) -> int:
        """The number of indicator functions."""
        return self.count

    def _evaluate(self, states: npt.NDArray[np.float64]) -> CMatrix:
        labels = np.arange(1, self.count + 1)
        return (states[:, :1] == labels).astype(np.complex128)

    def to_descriptor(self) -> dict[str, Any]:
        """Return the descriptor ``{"type": "indicator", "N": ...}``."""
        return {"type": self.DICTIONARY_TYPE, "N": self.count}

    @classmethod
    def from_descriptor(cls, descriptor: dict[str, Any]) -> IndicatorFunctions:
        """Create the dictionary from ``{"type": "indicator", "N": ...}``."""
        _check_keys(descriptor, {"N"})
        return cls(int(descriptor["N"]))


class ExplicitFunctions(Dictionary):
    """A dictionary of closed-form observables.

    Attributes:
        functions (list): Builtin observable names or callables. Only a
          dictionary of names has a descriptor.
    """

    DICTIONARY_TYPE = "explicit"

    def __init__(self, functions: Sequence[ObservableSpec]) -> None:
        """Create the dictionary from observable names or callables."""
        if not functions:
            msg = "an explicit dictionary needs at least 1 observable"
            raise DictionaryError(msg)
        self.functions = list(functions)
        self._resolved = [observable(function) for function in self.functions]

    @property
    def size(self) -> int:
        """The number of observables."""
        return len(self.functions)

    def _evaluate(self, states: npt.NDArray[np.float64]) -> CMatrix:
        return np.column_stack(
            [_evaluate_column(function, states) for function in self._resolved],
        )

    def to_descriptor(self) -> dict[str, Any]:
        """Return the descriptor ``{"type": "explicit", "observables": [...]}``.

        Raises:
            DictionaryError: If an observable was given as a callable.
        """
        if not all(isinstance(function, str) for function in self.functions):
            msg = "an explicit dictionary with callables has no descriptor"
            raise DictionaryError(msg)
        return {"type": self.DICTIONARY_TYPE, "observables": list(self.functions)}

    @classmethod
    def from_descriptor(cls, descriptor: dict[str, Any]) -> ExplicitFunctions:
        """Create the dictionary from a list of builtin observable names."""
        _check_keys(descriptor, {"observables"})
        return cls([str(name) for name in descriptor["observables"]])


class PODModes(Dictionary):
    """A dictionary of inner products ``ψ_j(x) = <x, u_j>`` with stored modes.

    Attributes:
        modes (numpy.ndarray): The modes ``u_j`` as columns of a ``(d, r)`` matrix.
    """

    DICTIONARY_TYPE = "pod"

    def __init__(self, modes: npt.ArrayLike) -> None:
        """Create the dictionary from the mode matrix."""
        self.modes = np.atleast_2d(np.asarray(modes, dtype=np.complex128))

    @property
    def size(self) -> int:
        """The number of modes ``r``."""
        return self.modes.shape[1]

    def _evaluate(self, states: npt.NDArray[np.float64]) -> CMatrix:
        if states.shape[1] != self.modes.shape[0]:
            msg = f"modes have dimension {self.modes.shape[0]}, states {states.shape[1]}"
            raise DictionaryError(msg)
        return states @ self.modes.conj()

    def to_descriptor(self) -> dict[str, Any]:
        """Return the descriptor with the modes stored densely."""
        return {
            "type": self.DICTIONARY_TYPE,
            "modes": {"re": self.modes.real.tolist(), "im": self.modes.imag.tolist()},
        }

    @classmethod
    def from_descriptor(cls, descriptor: dict[str, Any]) -> PODModes:
        """Create the dictionary from stored modes."""
        _check_keys(descriptor, {"modes"})
        modes = descriptor["modes"]
        return cls(np.array(modes["re"]) + 1j * np.array(modes["im"]))


def pod_dictionary(
    states: npt.ArrayLike,
    rank: int,
    weights: npt.ArrayLike | None = None,
) -> PODModes:
    """Build a POD dictionary from the top right singular vectors of ``√W X``.

    Args:
        states (ArrayLike): The data matrix ``X`` of shape ``(M, d)``.
        rank (int): The number of modes ``r``, at most ``min(M, d)``.
        weights (ArrayLike | None): Quadrature weights, uniform by default.

    Raises:
        DictionaryError: If the rank is too large.

    Returns:
        PODModes: The dictionary of the ``r`` dominant modes.
    """
    states = _as_states(states)
    size, dim = states.shape
    if not 1 <= rank <= min(size, dim):
        msg = f"POD rank must be between 1 and {min(size, dim)}, got {rank}"
        raise DictionaryError(msg)
    weights = np.full(size, 1.0 / size) if weights is None else np.asarray(weights)
    _, sigma, vt = svd(np.sqrt(weights)[:, None] * states)
    _logger.debug(
        "POD kept {rank} of {dim} singular values, tail {tail}",
        extra={"rank": rank, "dim": dim, "tail": float(np.linalg.norm(sigma[rank:]))},
    )
    return PODModes(vt[:rank].conj().T)


def normalize_observable(
    values: npt.ArrayLike,
    weights: npt.ArrayLike,
) -> float:
    """Return the constant ``c = 1 / √(Σ w_m |g(x^(m))|²)`` normalizing `values`.

    Raises:
        ZeroObservableError: If the observable vanishes on the data.

    Example:
        >>> from koopman_mp.dictionary import normalize_observable
        >>> normalize_observable([2.0, 2.0], [0.5, 0.5])
        0.5
    """
    values = np.asarray(values, dtype=np.complex128)
    norm = float(np.sqrt(np.sum(np.asarray(weights) * np.abs(values) ** 2)))
    if norm == 0:
        msg = "observable vanishes on the data and can't be normalized"
        raise ZeroObservableError(msg)
    return 1.0 / norm


def _as_observable_list(observables: ObservableSpec | Sequence[ObservableSpec]) -> list[ObservableSpec]:
    if isinstance(observables, str) or callable(observables):
        return [observables]
    return list(observables)


def delay_matrices(
    trajectory: Trajectory,
    observables: ObservableSpec | Sequence[ObservableSpec],
    N: int,  # noqa: N803
    M: int | None = None,  # noqa: N803
    normalize: bool = False,
) -> tuple[CMatrix, CMatrix, npt.NDArray[np.float64]]:
    """Build the time-delay matrices of one or more observables along a trajectory.

    For observables ``g_1, ..., g_k`` the dictionary is
    ``{g_1, ..., g_k, Kg_1, ..., Kg_k, ..., K^{N-1}g_k}``, so that
    ``Ψ_X[m, j k + i] = g_i(s_{m+j})`` and ``Ψ_Y[m, j k + i] = g_i(s_{m+j+1})``.
    Both matrices are read-only strided views of the evaluated observables.

    Args:
        trajectory (Trajectory): The states ``s_0, s_1, ...``.
        observables (str | Callable | Sequence): One observable or several.
        N (int): The embedding depth.
        M (int | None): The number of snapshots. Defaults to the largest
          number the trajectory allows.
        normalize (bool): Whether to scale each observable to unit norm over the
          ``M`` snapshots.

    Raises:
        TrajectoryTooShortError: If the trajectory has fewer than ``M + N`` states.

    Returns:
        tuple: ``Ψ_X``, ``Ψ_Y`` of shape ``(M, N k)`` and weights ``1 / M``.
    """
    functions = [observable(spec) for spec in _as_observable_list(observables)]
    count = len(functions)
    length = len(trajectory.states)
    if N < 1:
        msg = f"embedding depth must be at least 1, got {N}"
        raise DictionaryError(msg)
    if M is None:
        M = length - N  # noqa: N806
    if M < 1 or length < M + N:
        msg = f"trajectory of {length} states is too short for M={M}, N={N}"
        raise TrajectoryTooShortError(msg)
    states = trajectory.states[: M + N]
    values = np.column_stack([_evaluate_column(function, states) for function in functions])
    if not np.all(np.isfinite(values)):
        msg = "observable produced non-finite values along the trajectory"
        raise NonFiniteError(msg)
    if normalize:
        weights = np.full(M, 1.0 / M)
        for index in range(count):
            values[:, index] *= normalize_observable(values[:M, index], weights)
    flat = np.ascontiguousarray(values).reshape(-1)
    windows = sliding_window_view(flat, N * count)[::count]
    return windows[:M], windows[1 : M + 1], np.full(M, 1.0 / M)


class DelayEmbedding(Dictionary):
    """The Krylov dictionary ``{g, Kg, ..., K^{N-1}g}`` of time-delayed observables.

    On trajectory data use :meth:`matrices`, which realizes ``K^j g`` by time
    shifts. On scattered data, such as a quadrature grid, the dictionary is
    evaluated through a one-step `flow`.

    Attributes:
        observables (list): Builtin observable names or callables.
        depth (int): The embedding depth ``N``.
        normalize (bool): Whether trajectory matrices use normalized observables.
        flow (Callable | None): The one-step map for evaluation on scattered data.
    """

    DICTIONARY_TYPE = "delay"

    def __init__(
        self,
        observables: ObservableSpec | Sequence[ObservableSpec],
        depth: int,
        normalize: bool = False,
        flow: Flow | None = None,
    ) -> None:
        """Create the delay-embedding dictionary."""
        if depth < 1:
            msg = f"embedding depth must be at least 1, got {depth}"
            raise DictionaryError(msg)
        self.observables = _as_observable_list(observables)
        self._resolved = [observable(spec) for spec in self.observables]
        self.depth = depth
        self.normalize = normalize
        self.flow = flow

    @property
    def size(self) -> int:
        """The number of observables ``N k``."""
        return self.depth * len(self.observables)

    def _columns(self, iterates: list[npt.NDArray[np.float64]]) -> CMatrix:
        return np.column_stack(
            [
                _evaluate_column(function, states)
                for states in iterates
                for function in self._resolved
            ],
        )

    def _iterates(self, states: npt.NDArray[np.float64], count: int) -> list[npt.NDArray[np.float64]]:
        if self.flow is None:
            msg = "a delay dictionary needs a flow to be evaluated on scattered states"
            raise DictionaryError(msg)
        iterates = [states]
        for _ in range(count - 1):
            iterates.append(np.asarray(self.flow(iterates[-1]), dtype=np.float64))
        return iterates

    def _evaluate(self, states: npt.NDArray[np.float64]) -> CMatrix:
        return self._columns(self._iterates(states, self.depth))

    def evaluate_snapshots(self, snapshots: SnapshotSet) -> tuple[CMatrix, CMatrix]:
        """Evaluate ``Ψ_X`` and ``Ψ_Y`` from the iterates ``x, y, F(y), ...``.

        The snapshot states ``y^(m)`` serve as the first iterate so that the
        columns of ``Ψ_Y`` are exact column shifts of ``Ψ_X``.
        """
        iterates = [snapshots.X, *self._iterates(snapshots.Y, self.depth)]
        values = self._columns(iterates)
        if not np.all(np.isfinite(values)):
            msg = "delay dictionary produced non-finite values"
            raise NonFiniteError(msg)
        count = len(self.observables)
        return values[:, : self.size], values[:, count:]

    def matrices(
        self,
        trajectory: Trajectory,
        M: int | None = None,  # noqa: N803
    ) -> tuple[CMatrix, CMatrix, npt.NDArray[np.float64]]:
        """Build the delay matrices along a trajectory, see :func:`delay_matrices`."""
        return delay_matrices(trajectory, self.observables, self.depth, M, self.normalize)

    def to_descriptor(self) -> dict[str, Any]:
        """Return the descriptor ``{"type": "delay", "observable": ..., "N": ...}``.

        Raises:
            DictionaryError: If an observable was given as a callable.
        """
        if not all(isinstance(spec, str) for spec in self.observables):
            msg = "a delay dictionary of callables has no descriptor"
            raise DictionaryError(msg)
        descriptor: dict[str, Any] = {"type": self.DICTIONARY_TYPE, "N": self.depth}
        if len(self.observables) == 1:
            descriptor["observable"] = self.observables[0]
        else:
            descriptor["observables"] = list(self.observables)
        if self.normalize:
            descriptor["normalize"] = True
        return descriptor

    @classmethod
    def from_descriptor(cls, descriptor: dict[str, Any]) -> DelayEmbedding:
        """Create the dictionary from its descriptor.

        Either ``observable`` (one name) or ``observables`` (a list of names)
        must be given.
        """
        _check_keys(descriptor, {"observable", "observables", "N", "normalize"})
        if "observables" in descriptor:
            observables = [str(name) for name in descriptor["observables"]]
        else:
            observables = [str(descriptor["observable"])]
        return cls(
            observables,
            int(descriptor["N"]),
            normalize=bool(descriptor.get("normalize", False)),
        )


def _supported_dictionaries() -> list[type[Dictionary]]:
    return [
        attribute
        for attribute in globals().values()
        if isclass(attribute)
        and issubclass(attribute, Dictionary)
        and hasattr(attribute, "DICTIONARY_TYPE")
    ]


def supported_dictionaries() -> list[str]:
    """Get the descriptor types of the supported dictionary variants.

    Example:
        >>> from koopman_mp.dictionary import supported_dictionaries
        >>> supported_dictionaries()
        ['delay', 'explicit', 'fourier', 'indicator', 'linear', 'pod']
    """
    return sorted(cls.DICTIONARY_TYPE for cls in _supported_dictionaries())


@dataclass(frozen=True)
class GramPair:
    """The Gram matrix ``G = Ψ_X* W Ψ_X`` and the matrix ``A = Ψ_X* W Ψ_Y``.

    Attributes:
        G (numpy.ndarray): Hermitian positive semidefinite ``N x N`` matrix.
        A (numpy.ndarray): ``N x N`` matrix.
    """

    G: CMatrix  # noqa: N815
    A: CMatrix  # noqa: N815

    def __post_init__(self) -> None:
        """Check that ``G`` and ``A`` are square of the same size."""
        gram = np.asarray(self.G, dtype=np.complex128)
        cross = np.asarray(self.A, dtype=np.complex128)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or gram.shape != cross.shape:  # noqa: PLR2004
            msg = f"G and A must be square of equal size, got {gram.shape} and {cross.shape}"
            raise SnapshotFormatError(msg)
        object.__setattr__(self, "G", gram)
        object.__setattr__(self, "A", cross)

    @property
    def size(self) -> int:
        """The dictionary size ``N``."""
        return self.G.shape[0]


def gram(
    psi_x: npt.ArrayLike,
    psi_y: npt.ArrayLike,
    weights: npt.ArrayLike,
    block_rows: int = GRAM_BLOCK_ROWS,
) -> GramPair:
    """Assemble ``G = Ψ_X* W Ψ_X`` and ``A = Ψ_X* W Ψ_Y``.

    The sums run over blocks of `block_rows` rows, so strided views such as delay
    matrices are never copied as a whole. ``G`` is symmetrized.

    Args:
        psi_x (ArrayLike): ``Ψ_X`` of shape ``(M, N)``.
        psi_y (ArrayLike): ``Ψ_Y`` of shape ``(M, N)``.
        weights (ArrayLike): The ``M`` quadrature weights.
        block_rows (int): The number of rows summed at a time.

    Raises:
        SnapshotFormatError: If the shapes aren't conformal.
        NonFiniteError: If an entry isn't finite.

    Returns:
        GramPair: The pair ``(G, A)``.

    Example:
        >>> from koopman_mp.dictionary import gram
        >>> pair = gram([[2.0]], [[4.0]], [1.0])
        >>> pair.G.real.tolist(), pair.A.real.tolist()
        ([[4.0]], [[8.0]])
    """
    psi_x = np.asarray(psi_x)
    psi_y = np.asarray(psi_y)
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if psi_x.ndim != 2 or psi_x.shape != psi_y.shape or len(weights) != len(psi_x):  # noqa: PLR2004
        msg = f"non-conformal shapes {psi_x.shape}, {psi_y.shape}, {weights.shape}"
        raise SnapshotFormatError(msg)
    size = psi_x.shape[1]
    gram_matrix = np.zeros((size, size), dtype=np.complex128)
    cross = np.zeros((size, size), dtype=np.complex128)
    for start in range(0, len(weights), block_rows):
        stop = start + block_rows
        block_x = np.asarray(psi_x[start:stop], dtype=np.complex128)
        block_y = np.asarray(psi_y[start:stop], dtype=np.complex128)
        if not (np.all(np.isfinite(block_x)) and np.all(np.isfinite(block_y))):
            msg = "dictionary matrices contain non-finite values"
            raise NonFiniteError(msg)
        weighted = block_x.conj().T * weights[start:stop]
        gram_matrix += weighted @ block_x
        cross += weighted @ block_y
    return GramPair(G=symmetrize(gram_matrix), A=cross)


def gram_from_snapshots(dictionary: Dictionary, snapshots: SnapshotSet) -> GramPair:
    """Evaluate `dictionary` on `snapshots` and assemble the Gram pair."""
    psi_x, psi_y = dictionary.evaluate_snapshots(snapshots)
    _logger.debug(
        "Assembling Gram pair of size {size} from {count} snapshots",
        extra={"size": psi_x.shape[1], "count": snapshots.size},
    )
    return gram(psi_x, psi_y, snapshots.weights)


def snapshot_matrices(
    dictionary: Dictionary,
    snapshots: SnapshotSet,
) -> tuple[CMatrix, CMatrix, npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Evaluate a dictionary on a snapshot file's data.

    A delay dictionary without a flow needs snapshots along one trajectory and
    realizes the delays by time shifts; every other dictionary is evaluated
    pointwise with the snapshot weights.

    Returns:
        tuple: ``Ψ_X``, ``Ψ_Y``, the weights and the states ``x^(m)`` the rows
        of ``Ψ_X`` belong to.
    """
    if isinstance(dictionary, DelayEmbedding) and dictionary.flow is None:
        from koopman_mp.sampling import trajectory_from_snapshots

        trajectory = trajectory_from_snapshots(snapshots)
        psi_x, psi_y, weights = dictionary.matrices(trajectory)
        return psi_x, psi_y, weights, trajectory.states[: len(weights)]
    psi_x, psi_y = dictionary.evaluate_snapshots(snapshots)
    return psi_x, psi_y, snapshots.weights, snapshots.X
