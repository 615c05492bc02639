"""Shared fixtures for the koopman_mp tests.

Read more about conftest.py under:
- https://docs.pytest.org/en/stable/fixture.html
- https://docs.pytest.org/en/stable/writing_plugins.html
"""
from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from koopman_mp.dictionary import FourierModes, GramPair, gram
from koopman_mp.sampling import SnapshotSet, periodic_trapezoid_snapshots, rotation_map

__author__ = "Koen Vervloesem"
__copyright__ = "Koen Vervloesem"
__license__ = "MIT"

PairFactory = Callable[[int], GramPair]


@pytest.fixture()
def rng() -> np.random.Generator:
    """A seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture()
def random_pair(rng: np.random.Generator) -> PairFactory:
    """A factory of random complex pairs ``G = B*B + 0.1 I`` with random ``A``."""

    def create(size: int) -> GramPair:
        factor = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        cross = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        return GramPair(G=factor.conj().T @ factor + 0.1 * np.eye(size), A=cross)

    return create


@pytest.fixture()
def rotation_snapshots() -> SnapshotSet:
    """Snapshots of the rotation by 1 radian on the periodic trapezoidal rule."""
    return periodic_trapezoid_snapshots(64, rotation_map(1.0))


@pytest.fixture()
def rotation_data(
    rotation_snapshots: SnapshotSet,
) -> tuple[FourierModes, np.ndarray, np.ndarray, GramPair]:
    """The Fourier dictionary with kmax 3 evaluated on the rotation snapshots."""
    dictionary = FourierModes(3)
    psi_x, psi_y = dictionary.evaluate_snapshots(rotation_snapshots)
    return dictionary, psi_x, psi_y, gram(psi_x, psi_y, rotation_snapshots.weights)
