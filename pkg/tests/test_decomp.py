"""Test the Koopman fitting methods and model files."""
from pathlib import Path

import numpy as np
import pytest

from koopman_mp.decomp import (
    KoopmanModel,
    dmd,
    dmd_operator,
    edmd,
    fit,
    load_model,
    model_from_dict,
    model_to_dict,
    mpedmd,
    pidmd_unitary,
    procrustes,
    procrustes_objective,
    require_diagonalizable,
    save_model,
)
from koopman_mp.dictionary import GramPair, IndicatorFunctions, gram_from_snapshots
from koopman_mp.exceptions import (
    IllConditionedGramError,
    ModelFormatError,
    NonDiagonalizableError,
)
from koopman_mp.experiments import multiset_error
from koopman_mp.numkit import adjoint, cond2, spd_sqrt
from koopman_mp.sampling import shift_snapshots

__author__ = "Koen Vervloesem"
__copyright__ = "Koen Vervloesem"
__license__ = "MIT"


def _shift_pair(size: int = 6, count: int = 10) -> GramPair:
    return gram_from_snapshots(IndicatorFunctions(size), shift_snapshots(count))


def test_edmd_shift_is_lower_shift() -> None:
    """Test whether EDMD on the shift is the nilpotent lower shift."""
    model = edmd(_shift_pair())
    assert np.abs(model.K - np.eye(6, k=-1)).max() <= 1e-12
    assert not model.diagonalizable
    with pytest.raises(NonDiagonalizableError):
        require_diagonalizable(model)


def test_mpedmd_shift_is_cyclic_shift() -> None:
    """Test whether mpEDMD on the shift is the lower shift closed by a corner entry."""
    expected = np.eye(6, k=-1)
    expected[0, -1] = 1.0
    model = mpedmd(_shift_pair())
    assert np.abs(model.K - expected).max() <= 1e-12
    assert model.diagonalizable
    assert multiset_error(model.eigvals, np.exp(2j * np.pi * np.arange(6) / 6)) <= 1e-12


def test_edmd_identity() -> None:
    """Test whether Y = X gives the identity with all eigenvalues 1."""
    gram_matrix = np.array([[2.0, 1.0], [1.0, 3.0]])
    for model in (edmd(GramPair(G=gram_matrix, A=gram_matrix)), mpedmd(GramPair(G=gram_matrix, A=gram_matrix))):
        assert np.allclose(model.K, np.eye(2), atol=1e-12)
        assert np.allclose(model.eigvals, 1.0, atol=1e-12)


def test_edmd_eigenpairs(random_pair: object) -> None:
    """Test whether EDMD eigenpairs satisfy K V = V Λ with G-normalized columns."""
    pair = random_pair(5)
    model = edmd(pair)
    assert np.allclose(model.K, np.linalg.solve(pair.G, pair.A), atol=1e-10)
    assert np.allclose(model.K @ model.eigvecs, model.eigvecs * model.eigvals, atol=1e-9)
    norms = np.einsum("ij,ik,kj->j", model.eigvecs.conj(), pair.G, model.eigvecs).real
    assert np.allclose(norms, 1.0)


def test_edmd_singular_gram() -> None:
    """Test whether a singular Gram matrix is rejected."""
    with pytest.raises(IllConditionedGramError):
        edmd(GramPair(G=np.ones((2, 2)), A=np.eye(2)))


@pytest.mark.parametrize("seed", range(200))
def test_mpedmd_measure_preserving(seed: int) -> None:
    """Test whether mpEDMD is an isometry in the G inner product with unit eigenvalues."""
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, 33))
    factor = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    gram_matrix = adjoint(factor) @ factor + 0.1 * np.eye(size)
    cross = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    model = mpedmd(GramPair(G=gram_matrix, A=cross))

    defect = np.linalg.norm(adjoint(model.K) @ gram_matrix @ model.K - gram_matrix)
    assert defect <= 1e-10 * np.linalg.norm(gram_matrix)
    assert np.abs(np.abs(model.eigvals) - 1).max() <= 1e-12
    assert np.linalg.norm(adjoint(model.vhat) @ model.vhat - np.eye(size)) <= 1e-9 * np.sqrt(size)
    half, _ = spd_sqrt(gram_matrix)
    assert cond2(model.eigvecs) <= cond2(half) * (1 + 1e-8)
    assert np.allclose(model.K @ model.eigvecs, model.eigvecs * model.eigvals, atol=1e-8)


@pytest.mark.parametrize("seed", range(100))
def test_procrustes_optimal(seed: int) -> None:
    """Test whether the Procrustes minimizer attains the optimal objective."""
    rng = np.random.default_rng(seed)
    rows, size = 12, 5
    p = rng.standard_normal((rows, size)) + 1j * rng.standard_normal((rows, size))
    q = rng.standard_normal((rows, size)) + 1j * rng.standard_normal((rows, size))
    unitary = procrustes(p, q)
    achieved = procrustes_objective(p, q, unitary)
    sigma = np.linalg.svd(adjoint(q) @ p, compute_uv=False)
    optimum = np.linalg.norm(p) ** 2 + np.linalg.norm(q) ** 2 - 2 * sigma.sum()
    assert achieved == pytest.approx(optimum, rel=1e-10)
    for _ in range(100):
        perturbation, _ = np.linalg.qr(
            np.eye(size) + 0.1 * (rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))),
        )
        assert achieved <= procrustes_objective(p, q, unitary @ perturbation) + 1e-10


def test_dmd() -> None:
    """Test whether DMD recovers a linear map and is the transpose of the state-space matrix."""
    rng = np.random.default_rng(3)
    linear = np.array([[0.9, -0.2], [0.1, 0.8]])
    states_x = rng.standard_normal((20, 2))
    states_y = states_x @ linear.T
    weights = np.full(20, 0.05)
    model = dmd(states_x, states_y, weights)
    assert model.method == "dmd"
    assert np.allclose(model.K, linear.T, atol=1e-10)
    assert np.allclose(dmd_operator(states_x, states_y, weights), linear, atol=1e-10)
    assert model.dictionary == {"type": "linear", "dim": 2}


def test_pidmd_unitary() -> None:
    """Test whether unitary piDMD recovers a rotation of orthonormal data."""
    angle = 0.3
    rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    states_x = np.eye(2)
    states_y = states_x @ rotation.T
    model = pidmd_unitary(states_x, states_y, np.ones(2))
    assert model.method == "pidmd"
    assert np.allclose(np.abs(model.eigvals), 1.0, atol=1e-12)
    assert multiset_error(model.eigvals, np.exp([1j * angle, -1j * angle])) <= 1e-12
    assert np.allclose(adjoint(model.K) @ model.K, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_pidmd_matches_mpedmd_on_orthonormal_data(seed: int) -> None:
    """Test whether piDMD and mpEDMD of linear coordinates agree for orthonormal states and equal weights."""
    rng = np.random.default_rng(seed)
    states = rng.standard_normal((30, 4)) + 1j * rng.standard_normal((30, 4))
    states_x, _ = np.linalg.qr(states)
    states_y = rng.standard_normal((30, 4)) + 1j * rng.standard_normal((30, 4))
    weights = np.full(30, 0.5)
    unitary = pidmd_unitary(states_x, states_y, weights)
    measure_preserving = fit("mpedmd", states_x, states_y, weights)
    assert np.allclose(unitary.K, measure_preserving.K, atol=1e-10)
    assert multiset_error(unitary.eigvals, measure_preserving.eigvals) <= 1e-10


def test_pidmd_complex_states() -> None:
    """Test whether unitary piDMD recovers a complex unitary map of orthonormal states."""
    rng = np.random.default_rng(11)
    states_x, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    koopman, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    model = pidmd_unitary(states_x, states_x @ koopman, np.ones(3))
    assert np.allclose(model.K, koopman, atol=1e-10)


@pytest.mark.parametrize("method", ["dmd", "edmd", "pidmd", "mpedmd"])
def test_fit(method: str) -> None:
    """Test whether every method can be fitted by name."""
    rng = np.random.default_rng(5)
    states_x = rng.standard_normal((30, 3))
    states_y = rng.standard_normal((30, 3))
    model = fit(method, states_x, states_y, np.full(30, 1 / 30))
    assert model.method == method
    assert model.size == 3


def test_fit_unknown_method() -> None:
    """Test whether an unknown method is rejected."""
    with pytest.raises(ValueError, match="unknown method"):
        fit("kdmd", np.eye(2), np.eye(2), np.ones(2))


def test_model_file(tmp_path: Path) -> None:
    """Test whether a saved model is loaded back bitwise."""
    model = mpedmd(_shift_pair(), IndicatorFunctions(6).to_descriptor())
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert isinstance(loaded, KoopmanModel)
    assert loaded.method == "mpedmd"
    assert loaded.dictionary == {"type": "indicator", "N": 6}
    for name in ("K", "eigvals", "eigvecs", "G", "A", "Ghalf", "Gneghalf", "vhat"):
        assert np.array_equal(getattr(loaded, name), getattr(model, name))


def test_model_from_dict_invalid() -> None:
    """Test whether models with an unknown method or missing matrices are rejected."""
    document = model_to_dict(edmd(_shift_pair()))
    with pytest.raises(ModelFormatError):
        model_from_dict({**document, "method": "unknown"})
    with pytest.raises(ModelFormatError):
        model_from_dict({**document, "K": None})
    with pytest.raises(ModelFormatError):
        model_from_dict({"K": document["K"]})


def test_load_model_invalid_json(tmp_path: Path) -> None:
    """Test whether a file that isn't JSON is rejected."""
    path = tmp_path / "model.json"
    path.write_text("not json")
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_gram_pair_of_model() -> None:
    """Test whether a model returns the Gram pair it was fitted on."""
    pair = _shift_pair()
    model = mpedmd(pair)
    assert np.array_equal(model.gram_pair.G, pair.G)
    assert np.array_equal(model.gram_pair.A, pair.A)
