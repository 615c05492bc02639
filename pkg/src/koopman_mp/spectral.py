"""Spectral measures, functional calculus and residuals of fitted models.

For a measure-preserving model the eigenvectors ``G^{1/2} v_j`` form an
orthonormal basis, so an observable with coefficients ``ĝ`` (``ĝ* G ĝ = 1``)
defines a probability measure on the unit circle with atoms at the eigenvalues
and masses ``|v_j* G ĝ|²``. Residuals of eigenpairs bound the distance to the
spectrum of the Koopman operator and are used to discard spurious eigenvalues.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Callable

import numpy as np
import numpy.typing as npt
from scipy.stats import wasserstein_distance

from koopman_mp.exceptions import ModelFormatError, SnapshotFormatError, ZeroObservableError
from koopman_mp.numkit import CMatrix, adjoint, circle_phase

if TYPE_CHECKING:
    from koopman_mp.decomp import KoopmanModel
    from koopman_mp.dictionary import GramPair

_logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

MASS_CLAMP = 1e-14
"""Negative masses of at most this magnitude are roundoff and clamped to zero."""

MERGE_TOLERANCE = 1e-12
"""Atoms closer than this in phase are merged before cdf and W1 computations."""

LAURENT_SAMPLES = 512
"""Minimum number of circle samples for Laurent coefficients of a test function."""


@dataclass(frozen=True)
class SpectralMeasure:
    """A discrete measure on the unit circle, parameterized by phase in (-π, π].

    Attributes:
        phases (numpy.ndarray): Atom locations, ascending.
        masses (numpy.ndarray): Nonnegative atom masses.
    """

    phases: FloatArray
    masses: FloatArray

    def __post_init__(self) -> None:
        """Sort atoms by phase and clamp roundoff-negative masses."""
        phases = np.asarray(self.phases, dtype=np.float64).reshape(-1)
        masses = np.asarray(self.masses, dtype=np.float64).reshape(-1)
        if phases.shape != masses.shape:
            msg = f"{len(phases)} phases for {len(masses)} masses"
            raise ValueError(msg)
        if np.any(masses < -MASS_CLAMP):
            msg = f"negative mass {masses.min():.3e} in spectral measure"
            raise ValueError(msg)
        order = np.argsort(phases, kind="stable")
        object.__setattr__(self, "phases", phases[order])
        object.__setattr__(self, "masses", np.maximum(masses[order], 0.0))

    @property
    def total(self) -> float:
        """The total mass."""
        return float(self.masses.sum())

    def merged(self, tolerance: float = MERGE_TOLERANCE) -> SpectralMeasure:
        """Return the measure with atoms closer than `tolerance` merged.

        A merged atom sits at the phase of the first atom of its cluster.
        """
        if len(self.phases) == 0:
            return self
        starts = np.concatenate([[True], np.diff(self.phases) > tolerance])
        groups = np.cumsum(starts) - 1
        return SpectralMeasure(
            phases=self.phases[starts],
            masses=np.bincount(groups, weights=self.masses),
        )


def _require_unitary_factors(model: KoopmanModel) -> tuple[CMatrix, CMatrix, CMatrix]:
    if model.method != "mpedmd":
        msg = f"spectral measures need an mpedmd model, got {model.method}"
        raise ModelFormatError(msg)
    if model.vhat is None or model.Ghalf is None or model.Gneghalf is None:
        msg = f"a {model.method} model has no unitary eigenvector factorization"
        raise ModelFormatError(msg)
    return model.vhat, model.Ghalf, model.Gneghalf


def _normalized(gram_matrix: CMatrix, coefficients: npt.ArrayLike) -> ComplexArray:
    vector = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
    norm_squared = float(np.real(np.vdot(vector, gram_matrix @ vector)))
    if not norm_squared > 0:
        msg = "observable has zero norm in the G inner product"
        raise ZeroObservableError(msg)
    return vector / np.sqrt(norm_squared)


def scalar_measure(model: KoopmanModel, ghat: npt.ArrayLike) -> SpectralMeasure:
    """Compute the spectral measure of an observable.

    Args:
        model (KoopmanModel): A measure-preserving model.
        ghat (ArrayLike): The dictionary coefficients of the observable. They're
          normalized to ``ĝ* G ĝ = 1``.

    Raises:
        ZeroObservableError: If ``ĝ* G ĝ = 0``.
        ModelFormatError: If the model isn't an mpEDMD model with its unitary
          eigenvector factorization.

    Returns:
        SpectralMeasure: Atoms at the eigenvalue phases with masses
        ``|v_j* G ĝ|²``.
    """
    vhat, half, _ = _require_unitary_factors(model)
    vector = _normalized(model.G, ghat)
    masses = np.abs(adjoint(vhat) @ (half @ vector)) ** 2
    _logger.debug(
        "Spectral measure total mass deviates by {deviation:.3e}",
        extra={"deviation": float(abs(masses.sum() - 1))},
    )
    return SpectralMeasure(phases=circle_phase(model.eigvals), masses=masses)


def cdf(measure: SpectralMeasure, grid: npt.ArrayLike) -> FloatArray:
    """Evaluate the right-continuous cdf ``F(θ) = Σ_{θ_j <= θ} p_j``.

    Example:
        >>> import numpy as np
        >>> from koopman_mp.spectral import SpectralMeasure, cdf
        >>> measure = SpectralMeasure(phases=[-np.pi / 2, np.pi / 2], masses=[0.5, 0.5])
        >>> cdf(measure, [-np.pi, 0.0, np.pi]).tolist()
        [0.0, 0.5, 1.0]
    """
    merged = measure.merged()
    cumulative = np.concatenate([[0.0], np.cumsum(merged.masses)])
    indices = np.searchsorted(merged.phases, np.asarray(grid, dtype=np.float64), side="right")
    return cumulative[indices]


def w1(mu: SpectralMeasure, nu: SpectralMeasure) -> float:
    """Compute the Wasserstein-1 distance as the L1 distance between the cdfs.

    Both measures are taken on the line (-π, π], cut at ``θ = π``.

    Example:
        >>> from koopman_mp.spectral import SpectralMeasure, w1
        >>> round(w1(SpectralMeasure([0.0], [1.0]), SpectralMeasure([0.3], [1.0])), 12)
        0.3
    """
    mu, nu = mu.merged(), nu.merged()
    return float(
        wasserstein_distance(
            mu.phases,
            nu.phases,
            u_weights=mu.masses,
            v_weights=nu.masses,
        ),
    )


def moment(model: KoopmanModel, ghat: npt.ArrayLike, power: int) -> complex:
    """Compute the moment ``∫ λ^l dμ_g(λ)`` of the spectral measure of `ghat`.

    It equals ``ĝ* G K^l ĝ`` for the normalized ``ĝ``.
    """
    measure = scalar_measure(model, ghat)
    return complex(np.sum(np.exp(1j * power * measure.phases) * measure.masses))


@dataclass(frozen=True)
class TestFunction:
    """A function ``φ`` on the unit circle.

    A test function is given either by a closed-form `rule` or by its Laurent
    coefficients ``c_{-L}, ..., c_L``, so that ``φ(λ) = Σ c_l λ^l``.

    Attributes:
        rule (Callable | None): Vectorized closed form of ``φ``.
        coefficients (numpy.ndarray | None): Laurent coefficients, index ``l + L``.
        name (str): A short description.
    """

    __test__ = False

    rule: Callable[[ComplexArray], ComplexArray] | None = None
    coefficients: ComplexArray | None = field(default=None)
    name: str = "custom"

    def __post_init__(self) -> None:
        """Check that exactly one representation is given."""
        if (self.rule is None) == (self.coefficients is None):
            msg = "give either a rule or Laurent coefficients"
            raise ValueError(msg)
        if self.coefficients is not None:
            coefficients = np.asarray(self.coefficients, dtype=np.complex128).reshape(-1)
            if len(coefficients) % 2 == 0 or not np.all(np.isfinite(coefficients)):
                msg = "Laurent coefficients must be finite and of odd length"
                raise ValueError(msg)
            object.__setattr__(self, "coefficients", coefficients)

    @property
    def order(self) -> int | None:
        """The Laurent order ``L``, or ``None`` for a closed-form rule."""
        if self.coefficients is None:
            return None
        return len(self.coefficients) // 2

    def __call__(self, values: npt.ArrayLike) -> ComplexArray:
        """Evaluate ``φ`` at points on the unit circle."""
        points = np.asarray(values, dtype=np.complex128)
        if self.rule is not None:
            return np.asarray(self.rule(points), dtype=np.complex128)
        order = self.order
        powers = np.arange(-order, order + 1)
        return np.power(points[..., None], powers) @ self.coefficients

    def laurent_truncation(self, order: int) -> TestFunction:
        """Return the truncation ``S_L φ`` to Laurent order `order`.

        Coefficients of a closed-form rule are computed with an FFT of samples
        on the circle.
        """
        if self.coefficients is not None:
            current = self.order
            padded = np.zeros(2 * order + 1, dtype=np.complex128)
            keep = min(order, current)
            padded[order - keep : order + keep + 1] = self.coefficients[current - keep : current + keep + 1]
            return TestFunction(coefficients=padded, name=f"S_{order} {self.name}")
        samples = max(LAURENT_SAMPLES, 4 * (2 * order + 1))
        spectrum = np.fft.fft(self(np.exp(2j * np.pi * np.arange(samples) / samples))) / samples
        powers = np.arange(-order, order + 1)
        return TestFunction(coefficients=spectrum[powers % samples], name=f"S_{order} {self.name}")

    def __mul__(self, other: TestFunction) -> TestFunction:
        """Return the pointwise product of two test functions."""
        if self.coefficients is not None and other.coefficients is not None:
            return TestFunction(
                coefficients=np.convolve(self.coefficients, other.coefficients),
                name=f"{self.name} * {other.name}",
            )
        return TestFunction(
            rule=lambda values: self(values) * other(values),
            name=f"{self.name} * {other.name}",
        )


def power(exponent: int) -> TestFunction:
    """Return the test function ``φ(λ) = λ^l``.

    Example:
        >>> from koopman_mp.spectral import power
        >>> complex(power(2)(1j))
        (-1+0j)
    """
    coefficients = np.zeros(2 * abs(exponent) + 1, dtype=np.complex128)
    coefficients[abs(exponent) + exponent] = 1.0
    return TestFunction(coefficients=coefficients, name=f"lambda^{exponent}")


def _exp_sine(values: ComplexArray) -> ComplexArray:
    return np.exp((values - values.conj()) / 2j)


exp_sine = TestFunction(rule=_exp_sine, name="exp((lambda - conj(lambda)) / 2i)")
"""The test function ``φ(λ) = exp((λ - λ̄) / 2i)``, i.e. ``exp(sin θ)``."""


def apply_test_function(
    model: KoopmanModel,
    phi: TestFunction,
    ghat: npt.ArrayLike,
) -> ComplexArray:
    """Apply ``∫ φ(λ) dE(λ)`` of the discrete projection-valued measure.

    The result is ``G^{-1/2} V̂ diag(φ(λ_j)) V̂* G^{1/2} ĝ``.

    Args:
        model (KoopmanModel): A measure-preserving model.
        phi (TestFunction): The test function.
        ghat (ArrayLike): Coefficients of one observable, or of several as
          columns.

    Returns:
        numpy.ndarray: The coefficients of the result, shaped like `ghat`.
    """
    vhat, half, neghalf = _require_unitary_factors(model)
    coefficients = np.asarray(ghat, dtype=np.complex128)
    values = phi(model.eigvals)
    if coefficients.ndim == 2:  # noqa: PLR2004
        values = values[:, None]
    return neghalf @ (vhat @ (values * (adjoint(vhat) @ (half @ coefficients))))


def residuals(
    pair: GramPair,
    eigvals: npt.ArrayLike,
    eigvecs: npt.ArrayLike,
) -> FloatArray:
    """Compute the residuals of several candidate eigenpairs at once.

    The residual of ``(λ, v)`` with ``v* G v = 1`` is
    ``√max(0, Re v*[(1 + |λ|²) G - λ̄ A - λ A*] v)``.

    Raises:
        ZeroObservableError: If some ``v* G v = 0``.
    """
    values = np.asarray(eigvals, dtype=np.complex128).reshape(-1)
    vectors = np.asarray(eigvecs, dtype=np.complex128).reshape(len(pair.G), -1)
    norms = np.real(np.sum(vectors.conj() * (pair.G @ vectors), axis=0))
    if np.any(norms <= 0):
        msg = "candidate eigenvector has zero norm in the G inner product"
        raise ZeroObservableError(msg)
    cross = np.sum(vectors.conj() * (pair.A @ vectors), axis=0)
    quadratic = (1 + np.abs(values) ** 2) * norms - 2 * np.real(values.conj() * cross)
    return np.sqrt(np.maximum(quadratic / norms, 0.0))


def residual(pair: GramPair, eigval: complex, eigvec: npt.ArrayLike) -> float:
    """Compute the residual of one candidate eigenpair ``(λ, v)``.

    Example:
        >>> import numpy as np
        >>> from koopman_mp.dictionary import GramPair
        >>> from koopman_mp.spectral import residual
        >>> residual(GramPair(G=np.eye(2), A=np.eye(2)), 0.0, [1.0, 0.0])
        1.0
    """
    return float(residuals(pair, [eigval], np.reshape(eigvec, (-1, 1)))[0])


@dataclass(frozen=True)
class EigenpairSelection:
    """Eigenpairs kept by :func:`filter_spectrum`, in phase order.

    Attributes:
        eigvals (numpy.ndarray): The kept eigenvalues.
        eigvecs (numpy.ndarray): The kept eigenvectors as columns.
        residuals (numpy.ndarray): Their residuals.
        indices (numpy.ndarray): Their column indices in the model.
    """

    eigvals: ComplexArray
    eigvecs: CMatrix
    residuals: FloatArray
    indices: npt.NDArray[np.int64]

    def __len__(self) -> int:
        """Return the number of kept eigenpairs."""
        return len(self.eigvals)


def filter_spectrum(
    model: KoopmanModel,
    pair: GramPair,
    epsilon: float,
) -> EigenpairSelection:
    """Discard eigenpairs whose residual exceeds `epsilon`.

    Args:
        model (KoopmanModel): A fitted model.
        pair (GramPair): The Gram pair the residuals are measured against.
        epsilon (float): The residual threshold, nonnegative.

    Returns:
        EigenpairSelection: The eigenpairs with residual at most `epsilon`.
    """
    if epsilon < 0:
        msg = f"residual threshold must be nonnegative, got {epsilon}"
        raise ValueError(msg)
    all_residuals = residuals(pair, model.eigvals, model.eigvecs)
    indices = np.flatnonzero(all_residuals <= epsilon)
    _logger.info(
        "Kept {kept} of {total} eigenpairs with residual at most {epsilon}",
        extra={"kept": len(indices), "total": len(all_residuals), "epsilon": epsilon},
    )
    return EigenpairSelection(
        eigvals=model.eigvals[indices],
        eigvecs=model.eigvecs[:, indices],
        residuals=all_residuals[indices],
        indices=indices,
    )


def write_measure(measure: SpectralMeasure, path: str | Path) -> None:
    """Write a measure as CSV with the columns ``theta,mass``."""
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["theta", "mass"])
        for phase, mass in zip(measure.phases, measure.masses):
            writer.writerow([repr(float(phase)), repr(float(mass))])


def read_measure(path: str | Path) -> SpectralMeasure:
    """Read a measure written by :func:`write_measure`.

    Raises:
        SnapshotFormatError: If the file isn't a ``theta,mass`` CSV.
    """
    with Path(path).open(newline="") as handle:
        reader = csv.DictReader(handle)
        try:
            rows = [(float(row["theta"]), float(row["mass"])) for row in reader]
        except (KeyError, TypeError, ValueError) as exception:
            msg = f"malformed measure file {path}: {exception}"
            raise SnapshotFormatError(msg) from exception
    phases, masses = zip(*rows) if rows else ((), ())
    return SpectralMeasure(phases=np.array(phases), masses=np.array(masses))


def write_cdf(grid: npt.ArrayLike, values: npt.ArrayLike, path: str | Path) -> None:
    """Write cdf values on a grid as CSV with the columns ``theta,F``."""
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["theta", "F"])
        for phase, value in zip(np.asarray(grid), np.asarray(values)):
            writer.writerow([repr(float(phase)), repr(float(value))])
