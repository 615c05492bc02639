"""Module with exceptions raised by this library."""


class KoopmanMpError(Exception):
    """Base class for all exceptions raised by this library."""


class NumericalError(KoopmanMpError):
    """Base class for exceptions raised when a numerical contract can't be met."""


class DataError(KoopmanMpError):
    """Base class for exceptions raised on malformed input data or files."""


class NonFiniteError(NumericalError):
    """Exception raised when a matrix or observable value contains NaN or Inf."""


class NotSquareError(NumericalError):
    """Exception raised when a square matrix is required."""


class NotHermitianError(NumericalError):
    """Exception raised when a matrix is too far from Hermitian to factor."""


class NotUnitaryError(NumericalError):
    """Exception raised when a matrix is too far from unitary to factor."""


class IllConditionedGramError(NumericalError):
    """Exception raised when a Gram matrix is numerically rank-deficient.

    This signals that the dictionary is numerically linearly dependent on the
    snapshot data, so that ``G`` can't be inverted reliably.
    """


class NonDiagonalizableError(NumericalError):
    """Exception raised when an eigenvector matrix is needed but not invertible."""


class ZeroObservableError(NumericalError):
    """Exception raised when an observable or vector has zero norm."""


class IntegrationError(NumericalError):
    """Exception raised when a trajectory leaves the finite numbers."""


class SnapshotFormatError(DataError):
    """Exception raised when snapshot data or a snapshot file is malformed."""


class TrajectoryTooShortError(DataError):
    """Exception raised when a trajectory has too few states for a request."""


class DictionaryError(DataError):
    """Exception raised for an invalid dictionary or observable specification."""


class ModelFormatError(DataError):
    """Exception raised when a serialized model can't be read."""


class ConfigError(DataError):
    """Exception raised when an experiment configuration is invalid."""


class UnsupportedExperimentError(DataError):
    """Exception raised when an experiment name is not supported."""
