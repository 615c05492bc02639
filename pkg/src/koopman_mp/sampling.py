"""Snapshot data from benchmark dynamical systems.

This module generates trajectories of the Lorenz system and the nonlinear pendulum
with a fixed-step fourth-order Runge-Kutta scheme, provides the discrete circle
rotation and the one-sided shift, and assembles snapshot pairs with quadrature
weights for the three sampling regimes: ergodic sampling along one trajectory,
high-order quadrature on a grid, and the counting measure of the shift example.
It also perturbs measurement matrices with noise and reads/writes snapshot files.
"""
from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Callable

import numpy as np
import numpy.typing as npt

from koopman_mp.exceptions import (
    IntegrationError,
    SnapshotFormatError,
    TrajectoryTooShortError,
)

_logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
Flow = Callable[[FloatArray], FloatArray]
"""A one-step map ``x -> F(x)`` acting on the last axis of a state array."""

MAX_SUBSTEP = 0.005
"""Largest Runge-Kutta step used when the number of substeps isn't given."""

LORENZ_SIGMA = 10.0
LORENZ_RHO = 28.0
LORENZ_BETA = 8.0 / 3.0

PENDULUM_X2_BOUND = 4.0
"""Default truncation of the pendulum momentum direction.

The Gaussian factor of the pendulum observable is below 3e-4 beyond this bound.
"""

_HEADER = re.compile(r"^#\s*snapshots\s+M=(\d+)\s+d=(\d+)\s*$")


@dataclass(frozen=True)
class Trajectory:
    """States ``s_0, ..., s_M`` sampled along one orbit with a fixed time step.

    Attributes:
        states (numpy.ndarray): Array of shape ``(M + 1, d)``.
        dt (float): The time step between consecutive states.
    """

    states: FloatArray
    dt: float = 1.0

    def __post_init__(self) -> None:
        """Validate the trajectory."""
        states = np.asarray(self.states, dtype=np.float64)
        if states.ndim == 1:
            states = states[:, None]
        if states.ndim != 2 or len(states) < 2:  # noqa: PLR2004
            msg = f"a trajectory needs at least 2 states, got shape {states.shape}"
            raise TrajectoryTooShortError(msg)
        if not self.dt > 0:
            msg = f"time step must be positive, got {self.dt}"
            raise ValueError(msg)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        """Return the number of states."""
        return len(self.states)


@dataclass(frozen=True)
class SnapshotSet:
    """Paired samples ``(x^(m), y^(m) = F(x^(m)))`` with quadrature weights.

    Attributes:
        X (numpy.ndarray): States ``x^(m)``, shape ``(M, d)``.
        Y (numpy.ndarray): States ``y^(m)``, shape ``(M, d)``.
        weights (numpy.ndarray): Nonnegative quadrature weights, length ``M``.
        meta (dict[str, Any]): Source tag, e.g. system name, time step and
          sampling regime.
    """

    X: FloatArray  # noqa: N815
    Y: FloatArray  # noqa: N815
    weights: FloatArray
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate shapes and weights.

        Raises:
            SnapshotFormatError: If the shapes don't match or the weights are
              negative or sum to zero.
        """
        states_x = np.asarray(self.X, dtype=np.float64)
        states_y = np.asarray(self.Y, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if states_x.ndim == 1:
            states_x = states_x[:, None]
        if states_y.ndim == 1:
            states_y = states_y[:, None]
        if states_x.shape != states_y.shape or states_x.ndim != 2:  # noqa: PLR2004
            msg = f"X and Y shapes differ: {states_x.shape} vs {states_y.shape}"
            raise SnapshotFormatError(msg)
        if len(weights) != len(states_x):
            msg = f"{len(weights)} weights for {len(states_x)} snapshots"
            raise SnapshotFormatError(msg)
        if np.any(weights < 0) or not weights.sum() > 0:
            msg = "weights must be nonnegative with a positive sum"
            raise SnapshotFormatError(msg)
        if not (np.all(np.isfinite(states_x)) and np.all(np.isfinite(states_y))):
            msg = "snapshots contain non-finite values"
            raise SnapshotFormatError(msg)
        object.__setattr__(self, "X", states_x)
        object.__setattr__(self, "Y", states_y)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        """The number of snapshot pairs ``M``."""
        return len(self.weights)

    @property
    def dim(self) -> int:
        """The state dimension ``d``."""
        return self.X.shape[1]


def default_substeps(dt: float, max_step: float = MAX_SUBSTEP) -> int:
    """Return the smallest number of substeps with ``dt / substeps <= max_step``.

    Example:
        >>> from koopman_mp.sampling import default_substeps
        >>> default_substeps(0.1), default_substeps(0.5)
        (20, 100)
    """
    return max(1, math.ceil(dt / max_step - 1e-9))


def resolve_substeps(dt: float, substeps: int | None) -> int:
    """Return `substeps`, or :func:`default_substeps` of `dt` if it's ``None``.

    Raises:
        ValueError: If `substeps` is given and below 1.
    """
    if substeps is None:
        return default_substeps(dt)
    if substeps < 1:
        msg = f"substeps must be at least 1, got {substeps}"
        raise ValueError(msg)
    return int(substeps)


def rk4_step(rhs: Flow, state: FloatArray, step: float) -> FloatArray:
    """Advance `state` by one classical fourth-order Runge-Kutta step."""
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * step * k1)
    k3 = rhs(state + 0.5 * step * k2)
    k4 = rhs(state + step * k3)
    return state + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def wrap_angle(angle: npt.ArrayLike) -> FloatArray:
    """Wrap angles periodically to the interval [-π, π)."""
    return np.mod(np.asarray(angle, dtype=np.float64) + np.pi, 2 * np.pi) - np.pi


def lorenz_rhs(
    state: FloatArray,
    sigma: float = LORENZ_SIGMA,
    rho: float = LORENZ_RHO,
    beta: float = LORENZ_BETA,
) -> FloatArray:
    """Right-hand side of the Lorenz system, vectorized over leading axes."""
    x, y, z = state[..., 0], state[..., 1], state[..., 2]
    return np.stack([sigma * (y - x), x * (rho - z) - y, x * y - beta * z], axis=-1)


def pendulum_rhs(state: FloatArray) -> FloatArray:
    """Right-hand side of the nonlinear pendulum, vectorized over leading axes."""
    return np.stack([state[..., 1], -np.sin(state[..., 0])], axis=-1)


def _advance(
    states: FloatArray,
    rhs: Flow,
    dt: float,
    substeps: int,
    periodic_first: bool,
) -> FloatArray:
    step = dt / substeps
    advanced = np.asarray(states, dtype=np.float64)
    for _ in range(substeps):
        advanced = rk4_step(rhs, advanced, step)
    if not np.all(np.isfinite(advanced)):
        msg = "trajectory blew up to non-finite values"
        raise IntegrationError(msg)
    if periodic_first:
        advanced = advanced.copy()
        advanced[..., 0] = wrap_angle(advanced[..., 0])
    return advanced


def pendulum_flow(dt: float = 0.5, substeps: int | None = None) -> Flow:
    """Return the time-`dt` map of the pendulum, acting on arrays of states.

    The angle ``x1`` of the result is wrapped to [-π, π).
    """
    return partial(
        _advance,
        rhs=pendulum_rhs,
        dt=dt,
        substeps=resolve_substeps(dt, substeps),
        periodic_first=True,
    )


def lorenz_flow(
    dt: float = 0.1,
    sigma: float = LORENZ_SIGMA,
    rho: float = LORENZ_RHO,
    beta: float = LORENZ_BETA,
    substeps: int | None = None,
) -> Flow:
    """Return the time-`dt` map of the Lorenz system, acting on arrays of states."""
    return partial(
        _advance,
        rhs=partial(lorenz_rhs, sigma=sigma, rho=rho, beta=beta),
        dt=dt,
        substeps=resolve_substeps(dt, substeps),
        periodic_first=False,
    )


def lorenz_trajectory(  # noqa: PLR0913
    x0: npt.ArrayLike,
    dt: float = 0.1,
    M: int = 1_000,  # noqa: N803
    sigma: float = LORENZ_SIGMA,
    rho: float = LORENZ_RHO,
    beta: float = LORENZ_BETA,
    substeps: int | None = None,
) -> Trajectory:
    """Integrate the Lorenz system along one trajectory.

    The Runge-Kutta scheme runs on Python floats of the single state.

    Args:
        x0 (ArrayLike): The initial state ``(X, Y, Z)``.
        dt (float): The sampling time step.
        M (int): The number of steps; the trajectory has ``M + 1`` states.
        sigma (float): The Prandtl number parameter.
        rho (float): The Rayleigh number parameter.
        beta (float): The geometric parameter.
        substeps (int | None): Runge-Kutta steps per sample. Defaults to the
          smallest number with a step of at most 0.005.

    Raises:
        IntegrationError: If the trajectory leaves the finite numbers.
        ValueError: If `substeps` is below 1.

    Returns:
        Trajectory: The sampled trajectory.
    """
    substeps = resolve_substeps(dt, substeps)
    h = dt / substeps
    x, y, z = (float(value) for value in np.asarray(x0, dtype=np.float64))

    def rhs(x: float, y: float, z: float) -> tuple[float, float, float]:
        return sigma * (y - x), x * (rho - z) - y, x * y - beta * z

    states = np.empty((M + 1, 3))
    states[0] = x, y, z
    for m in range(1, M + 1):
        for _ in range(substeps):
            a1, b1, c1 = rhs(x, y, z)
            a2, b2, c2 = rhs(x + 0.5 * h * a1, y + 0.5 * h * b1, z + 0.5 * h * c1)
            a3, b3, c3 = rhs(x + 0.5 * h * a2, y + 0.5 * h * b2, z + 0.5 * h * c2)
            a4, b4, c4 = rhs(x + h * a3, y + h * b3, z + h * c3)
            x += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            y += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            z += h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        if not math.isfinite(x + y + z):
            msg = f"Lorenz trajectory blew up at step {m}"
            raise IntegrationError(msg)
        states[m] = x, y, z
    return Trajectory(states=states, dt=dt)


def iterate_map(
    flow: Flow,
    x0: npt.ArrayLike,
    M: int,  # noqa: N803
    dt: float = 1.0,
) -> Trajectory:
    """Build a trajectory ``x0, F(x0), ..., F^M(x0)`` of a discrete map.

    Args:
        flow (Callable): The one-step map ``F``.
        x0 (ArrayLike): The initial state.
        M (int): The number of steps.
        dt (float): The time step recorded with the trajectory.

    Returns:
        Trajectory: The trajectory of ``M + 1`` states.
    """
    state = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    states = [state]
    for _ in range(M):
        state = np.atleast_1d(flow(state))
        states.append(state)
    return Trajectory(states=np.array(states), dt=dt)


def pendulum_trajectory(
    x0: npt.ArrayLike,
    dt: float = 0.5,
    M: int = 100,  # noqa: N803
    substeps: int | None = None,
) -> Trajectory:
    """Integrate the nonlinear pendulum ``x1' = x2, x2' = -sin(x1)``.

    The angle ``x1`` is wrapped periodically to [-π, π) at every sample.

    Args:
        x0 (ArrayLike): The initial state ``(x1, x2)``.
        dt (float): The sampling time step.
        M (int): The number of steps.
        substeps (int | None): Runge-Kutta steps per sample.

    Raises:
        IntegrationError: If the trajectory leaves the finite numbers.

    Returns:
        Trajectory: The sampled trajectory.
    """
    initial = np.asarray(x0, dtype=np.float64).copy()
    initial[0] = wrap_angle(initial[0])
    return iterate_map(pendulum_flow(dt, substeps), initial, M, dt=dt)


def pendulum_energy(states: npt.ArrayLike) -> FloatArray:
    """Return the pendulum energy ``x2^2 / 2 - cos(x1)`` of each state."""
    states = np.asarray(states, dtype=np.float64)
    return 0.5 * states[..., 1] ** 2 - np.cos(states[..., 0])


def _rotate(states: FloatArray, alpha: float) -> FloatArray:
    return np.mod(np.asarray(states, dtype=np.float64) + alpha, 2 * np.pi)


def rotation_map(alpha: float) -> Flow:
    """Return the circle rotation ``F(θ) = θ + α mod 2π``.

    Example:
        >>> import numpy as np
        >>> from koopman_mp.sampling import rotation_map
        >>> rotate = rotation_map(np.pi / 2)
        >>> float(rotate(np.array([3 * np.pi / 2]))[0])
        0.0
    """
    return partial(_rotate, alpha=alpha)


def shift_map(states: npt.ArrayLike) -> FloatArray:
    """Apply the one-sided shift ``F(x) = x - 1`` if ``x > 1`` and ``0`` otherwise.

    Example:
        >>> from koopman_mp.sampling import shift_map
        >>> shift_map([3, 2, 1, 0]).tolist()
        [2.0, 1.0, 0.0, 0.0]
    """
    states = np.asarray(states, dtype=np.float64)
    return np.where(states > 1, states - 1, 0.0)


def snapshots_from_trajectory(
    trajectory: Trajectory,
    unit_weights: bool = False,
) -> SnapshotSet:
    """Pair consecutive states of a trajectory (ergodic sampling).

    Args:
        trajectory (Trajectory): A trajectory ``s_0, ..., s_M``.
        unit_weights (bool): ``True`` for weights ``w_m = 1`` (counting
          measure), ``False`` for ``w_m = 1 / M``.

    Returns:
        SnapshotSet: Pairs ``x^(m) = s_{m-1}``, ``y^(m) = s_m``.
    """
    size = len(trajectory) - 1
    weight = 1.0 if unit_weights else 1.0 / size
    return SnapshotSet(
        X=trajectory.states[:-1],
        Y=trajectory.states[1:],
        weights=np.full(size, weight),
        meta={"regime": "ergodic", "dt": trajectory.dt},
    )


def trajectory_from_snapshots(snapshots: SnapshotSet) -> Trajectory:
    """Recover the trajectory of snapshots taken along one orbit.

    Raises:
        SnapshotFormatError: If ``y^(m) != x^(m+1)`` for some ``m``.

    Returns:
        Trajectory: The states ``x^(1), ..., x^(M), y^(M)``.
    """
    if not np.array_equal(snapshots.Y[:-1], snapshots.X[1:]):
        msg = "snapshots are not consecutive states of one trajectory"
        raise SnapshotFormatError(msg)
    return Trajectory(
        states=np.vstack([snapshots.X, snapshots.Y[-1:]]),
        dt=float(snapshots.meta.get("dt", 1.0)),
    )


def shift_snapshots(M: int) -> SnapshotSet:  # noqa: N803
    """Assemble the shift example with nodes ``1, ..., M`` and unit weights."""
    nodes = np.arange(1, M + 1, dtype=np.float64)
    return SnapshotSet(
        X=nodes,
        Y=shift_map(nodes),
        weights=np.ones(M),
        meta={"system": "shift", "regime": "counting"},
    )


def periodic_trapezoid_snapshots(M: int, flow: Flow) -> SnapshotSet:  # noqa: N803
    """Assemble snapshots on the periodic trapezoidal rule of the circle.

    Nodes are ``θ_m = -π + 2πm / M`` with weights ``2π / M``.
    """
    nodes = -np.pi + 2 * np.pi * np.arange(M) / M
    return SnapshotSet(
        X=nodes,
        Y=flow(nodes[:, None]),
        weights=np.full(M, 2 * np.pi / M),
        meta={"regime": "quadrature"},
    )


def trapezoid_nodes(
    size: int,
    bound: float,
) -> tuple[FloatArray, FloatArray]:
    """Return nodes and weights of the trapezoidal rule on [-bound, bound]."""
    nodes = np.linspace(-bound, bound, size)
    weights = np.full(size, 2 * bound / (size - 1))
    weights[[0, -1]] /= 2
    return nodes, weights


def tensor_trapezoid_snapshots(
    M1: int,  # noqa: N803
    M2: int,  # noqa: N803
    x2_bound: float = PENDULUM_X2_BOUND,
    flow: Flow | None = None,
) -> SnapshotSet:
    """Assemble snapshots on a periodic-by-truncated trapezoidal tensor grid.

    The first coordinate uses ``M1`` equispaced nodes on [-π, π) with weights
    ``2π / M1``; the second uses ``M2`` equispaced nodes on
    [-x2_bound, x2_bound] with trapezoid weights, halved at the end points.

    Args:
        M1 (int): Number of nodes in the periodic direction, at least 2.
        M2 (int): Number of nodes in the truncated direction, at least 2.
        x2_bound (float): Truncation bound of the second direction.
        flow (Callable | None): The one-step map. Defaults to the pendulum
          sampled with time step 0.5.

    Returns:
        SnapshotSet: ``M1 * M2`` snapshot pairs, ``x1`` varying slowest.
    """
    if M1 < 2 or M2 < 2:  # noqa: PLR2004
        msg = f"need at least 2 nodes per direction, got {M1} x {M2}"
        raise ValueError(msg)
    flow = flow or pendulum_flow()
    x1 = -np.pi + 2 * np.pi * np.arange(M1) / M1
    w1 = np.full(M1, 2 * np.pi / M1)
    x2, w2 = trapezoid_nodes(M2, x2_bound)
    grid = np.stack(np.meshgrid(x1, x2, indexing="ij"), axis=-1).reshape(-1, 2)
    _logger.info(
        "Advancing {count} grid nodes by one step",
        extra={"count": len(grid)},
    )
    return SnapshotSet(
        X=grid,
        Y=flow(grid),
        weights=np.outer(w1, w2).reshape(-1),
        meta={"regime": "quadrature", "M1": M1, "M2": M2, "x2_bound": x2_bound},
    )


def perturb(
    psi: npt.ArrayLike,
    tau: float,
    seed: int,
) -> npt.NDArray[np.complex128]:
    """Add relative complex Gaussian noise to a measurement matrix.

    The noise is ``τ s E`` with ``E`` i.i.d. standard complex Gaussian (real and
    imaginary parts of variance 1/2) and ``s = ‖Ψ‖_F / √(MN)`` the RMS entry
    magnitude, so that ``τ = 0.1`` means a 10% relative Frobenius perturbation.

    Args:
        psi (ArrayLike): The matrix ``Ψ``.
        tau (float): The relative noise level, nonnegative.
        seed (int): Seed of the generator used for this call only.

    Returns:
        numpy.ndarray: The perturbed matrix.
    """
    matrix = np.asarray(psi, dtype=np.complex128)
    if tau < 0:
        msg = f"noise level must be nonnegative, got {tau}"
        raise ValueError(msg)
    if tau == 0:
        return matrix.copy()
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(matrix.shape) + 1j * rng.standard_normal(matrix.shape)
    scale = np.linalg.norm(matrix) / np.sqrt(matrix.size)
    return matrix + tau * scale * noise / np.sqrt(2.0)


def _format_row(values: npt.ArrayLike) -> str:
    return " ".join(repr(float(value)) for value in np.atleast_1d(values))


def _parse_row(line: str, length: int | None, what: str) -> list[float]:
    try:
        values = [float(token) for token in line.split()]
    except ValueError as exception:
        msg = f"can't parse {what} row: {line!r}"
        raise SnapshotFormatError(msg) from exception
    if length is not None and len(values) != length:
        msg = f"{what} row has {len(values)} values, expected {length}"
        raise SnapshotFormatError(msg)
    return values


def write_snapshots(snapshots: SnapshotSet, path: str | Path) -> None:
    """Write snapshots as text, or as JSON if `path` ends with ``.json``.

    The text format has a header line ``# snapshots M=<int> d=<int>``, then ``M``
    rows of ``x``, ``M`` rows of ``y`` and ``M`` weight rows, with floats written
    in full round-trip precision.
    """
    path = Path(path)
    if path.suffix == ".json":
        document = {
            "X": snapshots.X.tolist(),
            "Y": snapshots.Y.tolist(),
            "weights": snapshots.weights.tolist(),
            "meta": snapshots.meta,
        }
        path.write_text(json.dumps(document, sort_keys=True) + "\n")
        return
    lines = [f"# snapshots M={snapshots.size} d={snapshots.dim}"]
    lines += [_format_row(row) for row in snapshots.X]
    lines += [_format_row(row) for row in snapshots.Y]
    lines += [_format_row(weight) for weight in snapshots.weights]
    path.write_text("\n".join(lines) + "\n")


def read_snapshots(path: str | Path) -> SnapshotSet:
    """Read snapshots written by :func:`write_snapshots`.

    In the text format the weights may also be given on a single line.

    Raises:
        SnapshotFormatError: If the header is malformed, rows have inconsistent
          lengths or weights are negative.

    Returns:
        SnapshotSet: The snapshots in the file.
    """
    path = Path(path)
    if path.suffix == ".json":
        try:
            document = json.loads(path.read_text())
            return SnapshotSet(
                X=np.array(document["X"], dtype=np.float64),
                Y=np.array(document["Y"], dtype=np.float64),
                weights=np.array(document["weights"], dtype=np.float64),
                meta=document.get("meta", {}),
            )
        except (KeyError, TypeError, ValueError) as exception:
            msg = f"malformed snapshot file {path}: {exception}"
            raise SnapshotFormatError(msg) from exception

    lines = [line for line in path.read_text().splitlines() if line.strip()]
    header = _HEADER.match(lines[0]) if lines else None
    if header is None:
        msg = f"malformed header in snapshot file {path}"
        raise SnapshotFormatError(msg)
    size, dim = int(header.group(1)), int(header.group(2))
    body = lines[1:]
    if len(body) not in (3 * size, 2 * size + 1):
        msg = f"expected {3 * size} data lines for M={size}, found {len(body)}"
        raise SnapshotFormatError(msg)
    states_x = [_parse_row(line, dim, "x") for line in body[:size]]
    states_y = [_parse_row(line, dim, "y") for line in body[size : 2 * size]]
    weight_lines = body[2 * size :]
    if len(weight_lines) == size:
        weights = [_parse_row(line, 1, "weight")[0] for line in weight_lines]
    else:
        weights = _parse_row(weight_lines[0], size, "weight")
    return SnapshotSet(
        X=np.array(states_x, dtype=np.float64).reshape(size, dim),
        Y=np.array(states_y, dtype=np.float64).reshape(size, dim),
        weights=np.array(weights, dtype=np.float64),
    )
