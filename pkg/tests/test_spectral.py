"""Test spectral measures, functional calculus and residuals."""
from pathlib import Path

import numpy as np
import pytest

from koopman_mp.decomp import edmd, mpedmd, pidmd_unitary
from koopman_mp.dictionary import ExplicitFunctions, FourierModes, GramPair, gram
from koopman_mp.exceptions import ModelFormatError, ZeroObservableError
from koopman_mp.forecast import project_observable
from koopman_mp.numkit import adjoint
from koopman_mp.sampling import periodic_trapezoid_snapshots, rotation_map
from koopman_mp.spectral import (
    SpectralMeasure,
    TestFunction,
    apply_test_function,
    cdf,
    exp_sine,
    filter_spectrum,
    moment,
    power,
    read_measure,
    residual,
    residuals,
    scalar_measure,
    w1,
    write_cdf,
    write_measure,
)

__author__ = "Koen Vervloesem"
__copyright__ = "Koen Vervloesem"
__license__ = "MIT"


def test_spectral_measure_sorted_and_clamped() -> None:
    """Test whether atoms are sorted by phase and tiny negative masses clamped."""
    measure = SpectralMeasure(phases=[1.0, -1.0], masses=[0.5, -1e-16])
    assert measure.phases.tolist() == [-1.0, 1.0]
    assert measure.masses.tolist() == [0.0, 0.5]
    assert measure.total == 0.5


def test_spectral_measure_negative_mass() -> None:
    """Test whether a clearly negative mass is rejected."""
    with pytest.raises(ValueError, match="negative mass"):
        SpectralMeasure(phases=[0.0], masses=[-0.1])


def test_merged() -> None:
    """Test whether coinciding atoms are merged."""
    merged = SpectralMeasure(phases=[0.0, 0.0, 1.0], masses=[0.25, 0.25, 0.5]).merged()
    assert merged.phases.tolist() == [0.0, 1.0]
    assert merged.masses.tolist() == [0.5, 0.5]


def test_cdf_right_continuous() -> None:
    """Test whether the cdf includes the atom at its own phase."""
    measure = SpectralMeasure(phases=[0.0, 1.0], masses=[0.25, 0.75])
    assert cdf(measure, [-0.5, 0.0, 0.5, 1.0, np.pi]).tolist() == [0.0, 0.25, 0.25, 1.0, 1.0]


def test_w1() -> None:
    """Test whether W1 is the L1 distance between cdfs."""
    mu = SpectralMeasure(phases=[-1.0, 1.0], masses=[0.5, 0.5])
    nu = SpectralMeasure(phases=[0.0], masses=[1.0])
    assert w1(mu, nu) == pytest.approx(1.0)
    assert w1(mu, mu) == 0.0


def _random_measure(rng: np.random.Generator) -> SpectralMeasure:
    count = int(rng.integers(1, 7))
    return SpectralMeasure(
        phases=rng.uniform(-np.pi, np.pi, size=count),
        masses=rng.dirichlet(np.ones(count)),
    )


@pytest.mark.parametrize("seed", range(100))
def test_w1_metric(seed: int) -> None:
    """Test whether W1 is symmetric, zero on identical measures and obeys the triangle inequality."""
    rng = np.random.default_rng(seed)
    first, second, third = (_random_measure(rng) for _ in range(3))
    assert w1(first, first) == 0.0
    assert w1(first, second) == pytest.approx(w1(second, first), abs=1e-15)
    assert w1(first, third) <= w1(first, second) + w1(second, third) + 1e-12


def test_scalar_measure_rotation(rotation_data: tuple, rotation_snapshots: object) -> None:
    """Test whether e^{iθ} has a single atom at the rotation angle."""
    dictionary, psi_x, _, pair = rotation_data
    model = mpedmd(pair)
    samples = np.exp(1j * rotation_snapshots.X[:, 0])
    ghat = project_observable(pair, psi_x, rotation_snapshots.weights, samples)
    measure = scalar_measure(model, ghat)
    assert measure.total == pytest.approx(1.0, abs=1e-12)
    atom = np.argmax(measure.masses)
    assert measure.phases[atom] == pytest.approx(1.0, abs=1e-10)
    assert measure.masses[atom] == pytest.approx(1.0, abs=1e-10)
    assert dictionary.size == len(measure.phases)


def test_scalar_measure_is_probability_measure(random_pair: object, rng: np.random.Generator) -> None:
    """Test whether the measure of a random observable has total mass 1."""
    model = mpedmd(random_pair(8))
    ghat = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    measure = scalar_measure(model, ghat)
    assert measure.total == pytest.approx(1.0, abs=1e-12)
    assert np.all(measure.masses >= 0)


def test_scalar_measure_zero_observable(random_pair: object) -> None:
    """Test whether a zero observable is rejected."""
    with pytest.raises(ZeroObservableError):
        scalar_measure(mpedmd(random_pair(3)), np.zeros(3))


def test_scalar_measure_needs_unitary_factors() -> None:
    """Test whether a model without a unitary eigenbasis has no spectral measure."""
    model = mpedmd(GramPair(G=np.eye(2), A=np.diag([0.5, 1.0])))
    stripped = type(model)(method="mpedmd", K=model.K, eigvals=model.eigvals, eigvecs=model.eigvecs, G=model.G)
    with pytest.raises(ModelFormatError, match="unitary"):
        scalar_measure(stripped, [1.0, 0.0])


def test_scalar_measure_needs_mpedmd() -> None:
    """Test whether EDMD and piDMD models are rejected, even when they carry unitary factors."""
    rng = np.random.default_rng(8)
    states_x = rng.standard_normal((20, 2))
    states_y = rng.standard_normal((20, 2))
    unitary = pidmd_unitary(states_x, states_y, np.full(20, 0.05))
    assert unitary.vhat is not None
    assert unitary.Ghalf is not None
    for model in (unitary, edmd(GramPair(G=np.eye(2), A=np.diag([0.5, 1.0])))):
        with pytest.raises(ModelFormatError, match="mpedmd"):
            scalar_measure(model, [1.0, 0.0])
        with pytest.raises(ModelFormatError, match="mpedmd"):
            moment(model, [1.0, 0.0], 1)
        with pytest.raises(ModelFormatError, match="mpedmd"):
            apply_test_function(model, exp_sine, [1.0, 0.0])


@pytest.mark.parametrize("seed", range(50))
def test_moments_and_powers(seed: int) -> None:
    """Test whether moments and the power test functions agree with powers of K."""
    rng = np.random.default_rng(seed)
    size = 6
    factor = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    gram_matrix = adjoint(factor) @ factor + 0.1 * np.eye(size)
    cross = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    model = mpedmd(GramPair(G=gram_matrix, A=cross))
    ghat = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    ghat /= np.sqrt(np.real(np.vdot(ghat, gram_matrix @ ghat)))
    for exponent in (-3, 0, 1, 5, 10):
        powered = np.linalg.matrix_power(model.K, exponent) @ ghat
        expected = np.vdot(ghat, gram_matrix @ powered)
        assert abs(moment(model, ghat, exponent) - expected) <= 1e-10
        applied = apply_test_function(model, power(exponent), ghat)
        assert np.linalg.norm(applied - powered) <= 1e-10 * max(1.0, np.linalg.norm(powered))


def test_test_function_representations() -> None:
    """Test whether a test function needs exactly one representation."""
    with pytest.raises(ValueError, match="either"):
        TestFunction()
    with pytest.raises(ValueError, match="odd length"):
        TestFunction(coefficients=[1.0, 2.0])


def test_laurent_truncation() -> None:
    """Test whether the Laurent truncation of exp(sin θ) converges on the circle."""
    points = np.exp(1j * np.linspace(-np.pi, np.pi, 9))
    truncation = exp_sine.laurent_truncation(12)
    assert truncation.order == 12
    assert np.allclose(truncation(points), exp_sine(points), atol=1e-12)
    assert np.allclose(exp_sine(points), np.exp(np.sin(np.angle(points))))


def test_laurent_truncation_of_coefficients() -> None:
    """Test whether truncating a Laurent polynomial keeps the central coefficients."""
    phi = TestFunction(coefficients=[1.0, 2.0, 3.0, 4.0, 5.0])
    assert phi.laurent_truncation(1).coefficients.tolist() == [2.0, 3.0, 4.0]
    assert phi.laurent_truncation(3).coefficients.tolist() == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 0.0]


def test_test_function_product() -> None:
    """Test whether products of test functions multiply pointwise."""
    points = np.exp(1j * np.array([0.1, 2.0, -1.5]))
    product = power(2) * power(-1)
    assert np.allclose(product(points), points)
    mixed = power(1) * exp_sine
    assert np.allclose(mixed(points), points * exp_sine(points))


def test_apply_test_function_columns(random_pair: object) -> None:
    """Test whether several observables can be given as columns."""
    model = mpedmd(random_pair(4))
    coefficients = np.eye(4)[:, :2]
    applied = apply_test_function(model, exp_sine, coefficients)
    assert applied.shape == (4, 2)
    assert np.allclose(applied[:, 1], apply_test_function(model, exp_sine, coefficients[:, 1]))


@pytest.mark.parametrize("seed", range(30))
def test_functional_calculus_multiplicative(seed: int) -> None:
    """Test whether applying a product of test functions equals applying them in turn."""
    rng = np.random.default_rng(seed)
    size = 5
    factor = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    gram_matrix = adjoint(factor) @ factor + 0.1 * np.eye(size)
    cross = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    model = mpedmd(GramPair(G=gram_matrix, A=cross))
    ghat = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    laurent = TestFunction(coefficients=rng.standard_normal(5) + 1j * rng.standard_normal(5))
    other = TestFunction(coefficients=rng.standard_normal(3))
    for first, second in ((exp_sine, laurent), (laurent, exp_sine), (laurent, other)):
        combined = apply_test_function(model, first * second, ghat)
        nested = apply_test_function(model, first, apply_test_function(model, second, ghat))
        assert np.linalg.norm(combined - nested) <= 1e-9 * max(1.0, np.linalg.norm(combined))


def test_residuals_of_exact_eigenpairs(rotation_data: tuple) -> None:
    """Test whether exact eigenpairs of the rotation have zero residual."""
    _, _, _, pair = rotation_data
    model = mpedmd(pair)
    assert residuals(pair, model.eigvals, model.eigvecs).max() <= 1e-7


def test_residual_detects_spurious_eigenvalue() -> None:
    """Test whether an eigenvalue spuriously produced by a non-invariant dictionary has a large residual."""
    snapshots = periodic_trapezoid_snapshots(64, rotation_map(1.0))
    fourier = FourierModes(3)
    extra = ExplicitFunctions([lambda states: np.exp(np.cos(states[:, 0]))])
    psi_x = np.hstack([fourier.evaluate(snapshots.X), extra.evaluate(snapshots.X)])
    psi_y = np.hstack([fourier.evaluate(snapshots.Y), extra.evaluate(snapshots.Y)])
    pair = gram(psi_x, psi_y, snapshots.weights)
    model = edmd(pair)
    all_residuals = residuals(pair, model.eigvals, model.eigvecs)
    assert np.sort(all_residuals)[6] <= 1e-6
    assert all_residuals.max() > 1e-3
    selection = filter_spectrum(model, pair, 1e-6)
    assert len(selection) == 7
    assert np.all(selection.residuals <= 1e-6)


def test_residual_single_pair() -> None:
    """Test whether the residual of a wrong eigenvalue is the distance to the right one."""
    pair = GramPair(G=np.eye(2), A=np.diag([1.0, -1.0]))
    assert residual(pair, 1.0, [1.0, 0.0]) == pytest.approx(0.0, abs=1e-12)
    assert residual(pair, 0.5, [1.0, 0.0]) == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(30))
def test_residual_phase_invariant(seed: int, random_pair: object) -> None:
    """Test whether multiplying the eigenvector by a unit phase keeps the residual."""
    rng = np.random.default_rng(seed)
    pair = random_pair(4)
    vector = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    eigval = complex(rng.standard_normal(), rng.standard_normal())
    rotated = np.exp(1j * rng.uniform(-np.pi, np.pi)) * vector
    assert residual(pair, eigval, rotated) == pytest.approx(residual(pair, eigval, vector), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("seed", range(30))
def test_residual_bounds_distance_to_spectrum(seed: int, rotation_data: tuple) -> None:
    """Test whether the residual of the rotation is at least the distance to its nearest eigenvalue."""
    dictionary, _, _, pair = rotation_data
    true_eigvals = np.exp(1j * dictionary.wavenumbers)
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((7, 10)) + 1j * rng.standard_normal((7, 10))
    eigvals = rng.uniform(0.5, 1.5, size=10) * np.exp(1j * rng.uniform(-np.pi, np.pi, size=10))
    distances = np.abs(eigvals[:, None] - true_eigvals[None, :]).min(axis=1)
    assert np.all(residuals(pair, eigvals, vectors) ** 2 >= distances**2 - 1e-10)


def test_residuals_zero_vector() -> None:
    """Test whether a zero candidate eigenvector is rejected."""
    with pytest.raises(ZeroObservableError):
        residual(GramPair(G=np.eye(2), A=np.eye(2)), 1.0, [0.0, 0.0])


def test_filter_spectrum_negative_threshold(rotation_data: tuple) -> None:
    """Test whether a negative threshold is rejected."""
    _, _, _, pair = rotation_data
    with pytest.raises(ValueError, match="nonnegative"):
        filter_spectrum(mpedmd(pair), pair, -1.0)


def test_measure_file(tmp_path: Path) -> None:
    """Test whether a measure file is read back exactly."""
    measure = SpectralMeasure(phases=[-0.5, 2.0 / 3.0], masses=[0.1, 0.9])
    path = tmp_path / "measure.csv"
    write_measure(measure, path)
    assert path.read_text().splitlines()[0] == "theta,mass"
    loaded = read_measure(path)
    assert np.array_equal(loaded.phases, measure.phases)
    assert np.array_equal(loaded.masses, measure.masses)


def test_cdf_file(tmp_path: Path) -> None:
    """Test whether the cdf is written with a theta,F header."""
    path = tmp_path / "cdf.csv"
    write_cdf([0.0, 1.0], [0.25, 1.0], path)
    assert path.read_text().splitlines() == ["theta,F", "0.0,0.25", "1.0,1.0"]
