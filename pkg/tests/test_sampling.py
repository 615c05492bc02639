"""Test dynamical systems, snapshot assembly and snapshot files."""
from pathlib import Path

import numpy as np
import pytest

from koopman_mp.exceptions import SnapshotFormatError, TrajectoryTooShortError
from koopman_mp.sampling import (
    SnapshotSet,
    Trajectory,
    default_substeps,
    iterate_map,
    lorenz_trajectory,
    pendulum_energy,
    pendulum_flow,
    pendulum_trajectory,
    periodic_trapezoid_snapshots,
    perturb,
    read_snapshots,
    resolve_substeps,
    rk4_step,
    rotation_map,
    shift_map,
    shift_snapshots,
    snapshots_from_trajectory,
    tensor_trapezoid_snapshots,
    trajectory_from_snapshots,
    wrap_angle,
    write_snapshots,
)

__author__ = "Koen Vervloesem"
__copyright__ = "Koen Vervloesem"
__license__ = "MIT"


def test_trajectory_too_short() -> None:
    """Test whether a trajectory needs at least two states."""
    with pytest.raises(TrajectoryTooShortError):
        Trajectory(states=np.zeros((1, 3)), dt=0.1)


def test_snapshot_set_shape_mismatch() -> None:
    """Test whether X and Y of different shapes are rejected."""
    with pytest.raises(SnapshotFormatError):
        SnapshotSet(X=np.zeros((3, 2)), Y=np.zeros((3, 1)), weights=np.ones(3))


@pytest.mark.parametrize("weights", [[1.0, -1.0, 1.0], [0.0, 0.0, 0.0], [1.0, 1.0]])
def test_snapshot_set_invalid_weights(weights: list[float]) -> None:
    """Test whether negative, vanishing or missing weights are rejected."""
    with pytest.raises(SnapshotFormatError):
        SnapshotSet(X=np.zeros(3), Y=np.zeros(3), weights=np.array(weights))


def test_snapshot_set_vector_states() -> None:
    """Test whether one-dimensional states become a column."""
    snapshots = SnapshotSet(X=np.arange(4.0), Y=np.arange(4.0), weights=np.ones(4))
    assert snapshots.X.shape == (4, 1)
    assert snapshots.size == 4
    assert snapshots.dim == 1


def test_default_substeps() -> None:
    """Test whether substeps are at most 0.005 long."""
    assert default_substeps(0.1) == 20
    assert default_substeps(0.5) == 100
    assert default_substeps(0.001) == 1


def test_wrap_angle() -> None:
    """Test whether angles are wrapped to [-π, π)."""
    wrapped = wrap_angle([np.pi, 3 * np.pi / 2, -np.pi, 0.25])
    assert np.allclose(wrapped, [-np.pi, -np.pi / 2, -np.pi, 0.25])


def test_pendulum_flow_conserves_energy() -> None:
    """Test whether the pendulum map conserves the energy up to integration error."""
    states = np.array([[0.5, 0.0], [-2.0, 1.5], [3.0, -3.5]])
    advanced = pendulum_flow(0.5)(states)
    assert np.allclose(pendulum_energy(advanced), pendulum_energy(states), atol=1e-8)
    assert np.all(advanced[:, 0] >= -np.pi)
    assert np.all(advanced[:, 0] < np.pi)


def test_pendulum_trajectory() -> None:
    """Test whether a pendulum trajectory has M + 1 states with constant energy."""
    trajectory = pendulum_trajectory([1.0, 0.5], dt=0.5, M=20)
    assert trajectory.states.shape == (21, 2)
    energies = pendulum_energy(trajectory.states)
    assert np.ptp(energies) < 1e-7


def test_lorenz_trajectory() -> None:
    """Test whether a Lorenz trajectory starts at x0 and stays on the attractor scale."""
    trajectory = lorenz_trajectory([1.0, 1.0, 1.0], dt=0.1, M=200)
    assert trajectory.states.shape == (201, 3)
    assert np.array_equal(trajectory.states[0], [1.0, 1.0, 1.0])
    assert np.all(np.abs(trajectory.states) < 100)
    assert trajectory.dt == 0.1


def test_lorenz_trajectory_fourth_order() -> None:
    """Test whether halving the Runge-Kutta step divides the Lorenz error by about 16."""
    start = [1.0, 1.0, 1.0]
    reference = lorenz_trajectory(start, dt=0.1, M=5, substeps=40).states[-1]
    coarse = lorenz_trajectory(start, dt=0.1, M=5, substeps=10).states[-1]
    fine = lorenz_trajectory(start, dt=0.1, M=5, substeps=20).states[-1]
    ratio = np.linalg.norm(coarse - reference) / np.linalg.norm(fine - reference)
    assert 10 < ratio < 24


def test_rk4_step_linear_decay() -> None:
    """Test whether one Runge-Kutta step of x' = -x is the fourth-order Taylor polynomial."""
    step = 0.1
    advanced = rk4_step(lambda state: -state, np.array([1.0]), step)
    taylor = 1 - step + step**2 / 2 - step**3 / 6 + step**4 / 24
    assert advanced[0] == pytest.approx(taylor, abs=1e-15)
    assert abs(advanced[0] - np.exp(-step)) < step**5 / 120


def test_rk4_step_global_order() -> None:
    """Test whether the global error of x' = -x decreases with the fourth power of the step."""

    def integrate(steps: int) -> float:
        state = np.array([1.0])
        for _ in range(steps):
            state = rk4_step(lambda value: -value, state, 1.0 / steps)
        return float(abs(state[0] - np.exp(-1.0)))

    assert integrate(10) / integrate(20) == pytest.approx(16, rel=0.05)


@pytest.mark.parametrize("substeps", [0, -3])
def test_invalid_substeps(substeps: int) -> None:
    """Test whether fewer than one Runge-Kutta step per sample is rejected."""
    with pytest.raises(ValueError, match="at least 1"):
        lorenz_trajectory([1.0, 1.0, 1.0], dt=0.1, M=2, substeps=substeps)
    with pytest.raises(ValueError, match="at least 1"):
        pendulum_flow(0.5, substeps=substeps)
    with pytest.raises(ValueError, match="at least 1"):
        resolve_substeps(0.1, substeps)


def test_resolve_substeps_default() -> None:
    """Test whether a missing number of substeps falls back to the default."""
    assert resolve_substeps(0.1, None) == default_substeps(0.1)
    assert resolve_substeps(0.1, 3) == 3


def test_rotation_map() -> None:
    """Test whether the rotation adds the angle modulo 2π."""
    rotated = rotation_map(1.0)(np.array([[0.0], [6.0]]))
    assert np.allclose(rotated[:, 0], [1.0, 7.0 - 2 * np.pi])


def test_iterate_map() -> None:
    """Test whether iterating the shift map counts down to zero."""
    trajectory = iterate_map(shift_map, [3.0], 4)
    assert trajectory.states[:, 0].tolist() == [3.0, 2.0, 1.0, 0.0, 0.0]


def test_shift_snapshots() -> None:
    """Test whether the shift example has nodes 1 to M and unit weights."""
    snapshots = shift_snapshots(5)
    assert snapshots.X[:, 0].tolist() == [1.0, 2.0, 3.0, 4.0, 5.0]
    assert snapshots.Y[:, 0].tolist() == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert snapshots.weights.tolist() == [1.0] * 5


def test_periodic_trapezoid_snapshots() -> None:
    """Test whether the periodic trapezoidal rule integrates the constant exactly."""
    snapshots = periodic_trapezoid_snapshots(16, rotation_map(0.5))
    assert snapshots.weights.sum() == pytest.approx(2 * np.pi)
    assert snapshots.X[0, 0] == pytest.approx(-np.pi)
    assert np.allclose(np.exp(1j * snapshots.Y[:, 0]), np.exp(1j * (snapshots.X[:, 0] + 0.5)))


def test_tensor_trapezoid_snapshots() -> None:
    """Test whether the tensor grid has x1 varying slowest and the right total weight."""
    snapshots = tensor_trapezoid_snapshots(4, 5, x2_bound=4.0, flow=lambda states: states)
    assert snapshots.size == 20
    assert np.all(snapshots.X[:5, 0] == -np.pi)
    assert snapshots.X[:5, 1].tolist() == [-4.0, -2.0, 0.0, 2.0, 4.0]
    assert snapshots.weights.sum() == pytest.approx(2 * np.pi * 8.0)


def test_tensor_trapezoid_snapshots_too_small() -> None:
    """Test whether a grid needs two nodes per direction."""
    with pytest.raises(ValueError, match="at least 2 nodes"):
        tensor_trapezoid_snapshots(1, 5)


def test_snapshots_from_trajectory() -> None:
    """Test whether consecutive states are paired with weights 1/M."""
    trajectory = Trajectory(states=np.arange(5.0)[:, None], dt=0.1)
    snapshots = snapshots_from_trajectory(trajectory)
    assert snapshots.X[:, 0].tolist() == [0.0, 1.0, 2.0, 3.0]
    assert snapshots.Y[:, 0].tolist() == [1.0, 2.0, 3.0, 4.0]
    assert np.allclose(snapshots.weights, 0.25)
    assert snapshots_from_trajectory(trajectory, unit_weights=True).weights.tolist() == [1.0] * 4
    assert np.array_equal(trajectory_from_snapshots(snapshots).states, trajectory.states)


def test_trajectory_from_scattered_snapshots() -> None:
    """Test whether snapshots that aren't consecutive states are rejected."""
    with pytest.raises(SnapshotFormatError):
        trajectory_from_snapshots(shift_snapshots(4))


def test_perturb() -> None:
    """Test whether the noise has the requested relative size and is reproducible."""
    psi = np.ones((200, 50), dtype=np.complex128)
    noisy = perturb(psi, 0.1, seed=7)
    relative = np.linalg.norm(noisy - psi) / np.linalg.norm(psi)
    assert relative == pytest.approx(0.1, rel=0.05)
    assert np.array_equal(noisy, perturb(psi, 0.1, seed=7))
    assert not np.array_equal(noisy, perturb(psi, 0.1, seed=8))


def test_perturb_without_noise() -> None:
    """Test whether a zero noise level returns an equal copy."""
    psi = np.eye(3, dtype=np.complex128)
    copy = perturb(psi, 0.0, seed=0)
    assert np.array_equal(copy, psi)
    assert copy is not psi


def test_perturb_negative_level() -> None:
    """Test whether a negative noise level is rejected."""
    with pytest.raises(ValueError, match="nonnegative"):
        perturb(np.eye(2), -0.1, seed=0)


@pytest.mark.parametrize("name", ["snapshots.txt", "snapshots.json"])
def test_snapshot_file(tmp_path: Path, name: str) -> None:
    """Test whether snapshots are read back exactly from text and JSON files."""
    snapshots = tensor_trapezoid_snapshots(3, 4)
    path = tmp_path / name
    write_snapshots(snapshots, path)
    loaded = read_snapshots(path)
    assert np.array_equal(loaded.X, snapshots.X)
    assert np.array_equal(loaded.Y, snapshots.Y)
    assert np.array_equal(loaded.weights, snapshots.weights)


def test_snapshot_file_single_weight_line(tmp_path: Path) -> None:
    """Test whether the weights may be given on one line."""
    path = tmp_path / "snapshots.txt"
    path.write_text("# snapshots M=2 d=1\n1.0\n2.0\n0.0\n1.0\n0.5 0.5\n")
    snapshots = read_snapshots(path)
    assert snapshots.weights.tolist() == [0.5, 0.5]
    assert snapshots.Y[:, 0].tolist() == [0.0, 1.0]


@pytest.mark.parametrize(
    "content",
    [
        "no header\n1.0\n",
        "# snapshots M=2 d=1\n1.0\n2.0\n0.0\n",
        "# snapshots M=1 d=2\n1.0\n0.0 1.0\n1.0\n",
    ],
)
def test_malformed_snapshot_file(tmp_path: Path, content: str) -> None:
    """Test whether malformed snapshot files are rejected."""
    path = tmp_path / "snapshots.txt"
    path.write_text(content)
    with pytest.raises(SnapshotFormatError):
        read_snapshots(path)
