"""Main entry point for koopman-mp."""
from __future__ import annotations

import json
import logging
import sys
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Any, NoReturn

import numpy as np

import koopman_mp
from koopman_mp.config import ExperimentConfig
from koopman_mp.decomp import METHODS, KoopmanModel, fit, load_model, save_model
from koopman_mp.dictionary import (
    Dictionary,
    builtin_observables,
    observable,
    snapshot_matrices,
)
from koopman_mp.exceptions import ConfigError, DataError, DictionaryError, NumericalError
from koopman_mp.forecast import (
    build_kmd,
    eigenfunction_row,
    predict_series,
    project_observable,
    write_prediction,
)
from koopman_mp.runner import run_experiment
from koopman_mp.sampling import (
    SnapshotSet,
    Trajectory,
    lorenz_trajectory,
    pendulum_flow,
    periodic_trapezoid_snapshots,
    read_snapshots,
    rotation_map,
    shift_snapshots,
    snapshots_from_trajectory,
    tensor_trapezoid_snapshots,
    write_snapshots,
)
from koopman_mp.spectral import cdf, scalar_measure, write_cdf, write_measure

__author__ = "Koen Vervloesem"
__copyright__ = "Koen Vervloesem"
__license__ = "MIT"

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_NUMERICAL_ERROR = 2
EXIT_CHECK_FAILED = 3

SYSTEMS = ("rotation", "shift", "lorenz", "pendulum")
CDF_GRID = 1001


class _Parser(ArgumentParser):
    """Argument parser that exits with the usage error status 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_DATA_ERROR, f"{self.prog}: error: {message}\n")


def run() -> None:
    """Calls :func:`main` passing the CLI arguments extracted from :obj:`sys.argv`.

    This function can be used as entry point to create console scripts with setuptools.
    """
    sys.exit(main(sys.argv[1:]))


def main(args: list[str]) -> int:
    """Wrapper allowing the koopman-mp command to be called on the command line.

    This wrapper accepts string arguments.

    Args:
      args (list[str]): Command line parameters as list of strings.

    Returns:
      int: The exit status, 1 for invalid input, 2 for a numerical failure and
      3 for failed acceptance checks.
    """
    cli_args = parse_args(args)
    setup_logging(cli_args.loglevel)
    try:
        return cli_args.func(cli_args)
    except (DataError, OSError) as exception:
        print(f"Invalid input: {exception}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except NumericalError as exception:
        print(f"Numerical failure: {exception}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR


def parse_args(args: list[str]) -> Namespace:
    """Parse command line parameters.

    Args:
      args (List[str]): command line parameters as list of strings
          (for example  ``["--help"]``).

    Returns:
      :class:`argparse.Namespace`: command line parameters namespace
    """
    parser = _Parser(description="Measure-preserving extended dynamic mode decomposition")
    parser.add_argument(
        "--version",
        action="version",
        version=f"koopman-mp {koopman_mp.__version__}",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        dest="loglevel",
        help="set loglevel to INFO",
        action="store_const",
        const=logging.INFO,
    )
    parser.add_argument(
        "-vv",
        "--very-verbose",
        dest="loglevel",
        help="set loglevel to DEBUG",
        action="store_const",
        const=logging.DEBUG,
    )

    subparsers = parser.add_subparsers(title="Subcommands", parser_class=_Parser)
    subparsers.required = True

    # Parser for the "list" subcommand
    parser_list = subparsers.add_parser("list", help="list the available experiments")
    parser_list.set_defaults(func=list_experiments)

    # Parser for the "schema" subcommand
    parser_schema = subparsers.add_parser(
        "schema",
        help="show the default configuration of an experiment",
    )
    parser_schema.add_argument("name", help="the experiment name")
    parser_schema.set_defaults(func=show_schema)

    # Parser for the "generate" subcommand
    parser_generate = subparsers.add_parser(
        "generate",
        help="write a snapshot file for a builtin system",
    )
    parser_generate.add_argument("system", choices=SYSTEMS, help="the system")
    parser_generate.add_argument(
        "-o",
        "--output",
        default="snapshots.txt",
        help="the snapshot file, JSON if it ends with .json (default: snapshots.txt)",
    )
    parser_generate.add_argument(
        "-M",
        "--snapshots",
        dest="count",
        type=int,
        help="number of snapshots, or grid nodes per direction for the pendulum",
    )
    parser_generate.add_argument(
        "--alpha",
        type=float,
        default=1.0,
        help="rotation angle of the circle rotation (default: 1.0)",
    )
    parser_generate.add_argument(
        "--dt",
        type=float,
        help="time step of the Lorenz system (default: 0.1) or the pendulum (default: 0.5)",
    )
    parser_generate.add_argument(
        "--burn-in",
        type=int,
        default=1000,
        help="number of Lorenz steps discarded first (default: 1000)",
    )
    parser_generate.add_argument(
        "--m2",
        type=int,
        help="pendulum grid nodes in the momentum direction (default: as -M)",
    )
    parser_generate.set_defaults(func=generate)

    # Parser for the "experiment" subcommand
    parser_experiment = subparsers.add_parser("experiment", help="run an experiment")
    parser_experiment.add_argument(
        "name",
        nargs="?",
        help="the experiment name, if no configuration file is given",
    )
    parser_experiment.add_argument("-c", "--config", help="JSON configuration file")
    parser_experiment.add_argument("--out", help="output directory")
    parser_experiment.add_argument("--seed", type=int, help="run with this single seed")
    parser_experiment.add_argument(
        "--workers",
        type=int,
        help="number of sweep points computed in parallel (-1 for all CPUs)",
    )
    parser_experiment.add_argument(
        "--check",
        help="exit with status 3 if an acceptance check fails",
        action="store_true",
    )
    parser_experiment.set_defaults(func=experiment)

    # Parser for the "fit" subcommand
    parser_fit = subparsers.add_parser("fit", help="fit a model to a snapshot file")
    parser_fit.add_argument("-s", "--snapshots", required=True, help="snapshot file")
    parser_fit.add_argument(
        "-m",
        "--method",
        choices=METHODS,
        default="mpedmd",
        help="the method (default: mpedmd)",
    )
    parser_fit.add_argument(
        "-d",
        "--dictionary",
        default='{"type": "linear"}',
        help='dictionary descriptor as JSON (default: {"type": "linear"})',
    )
    parser_fit.add_argument(
        "-o",
        "--output",
        default="model.json",
        help="model file (default: model.json)",
    )
    parser_fit.set_defaults(func=fit_model)

    # Parser for the "spectrum" subcommand
    parser_spectrum = subparsers.add_parser(
        "spectrum",
        help="compute the spectral measure of an observable",
    )
    _add_model_arguments(parser_spectrum)
    parser_spectrum.add_argument(
        "-o",
        "--output",
        default="measure.csv",
        help="measure file (default: measure.csv)",
    )
    parser_spectrum.add_argument("--cdf", help="also write the cdf to this file")
    parser_spectrum.set_defaults(func=spectrum)

    # Parser for the "predict" subcommand
    parser_predict = subparsers.add_parser(
        "predict",
        help="forecast an observable with the Koopman mode decomposition",
    )
    _add_model_arguments(parser_predict)
    parser_predict.add_argument(
        "--start",
        type=int,
        default=0,
        help="index of the snapshot to start from (default: 0)",
    )
    parser_predict.add_argument(
        "--steps",
        type=int,
        default=100,
        help="number of steps (default: 100)",
    )
    parser_predict.add_argument(
        "-o",
        "--output",
        default="prediction.csv",
        help="prediction file (default: prediction.csv)",
    )
    parser_predict.set_defaults(func=predict)

    # Return complete parser
    return parser.parse_args(args)


def _add_model_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--model", required=True, help="model file written by fit")
    parser.add_argument("-s", "--snapshots", required=True, help="snapshot file")
    parser.add_argument(
        "--observable",
        default="circle",
        choices=builtin_observables(),
        help="builtin observable (default: circle)",
    )


def setup_logging(loglevel: int) -> None:
    """Setup basic logging.

    Args:
      loglevel (int): minimum loglevel for emitting messages
    """
    logformat = "[%(asctime)s] %(levelname)s:%(name)s:%(message)s"
    logging.basicConfig(
        level=loglevel,
        stream=sys.stdout,
        format=logformat,
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def list_experiments(_args: Namespace) -> int:
    """List the experiments with their descriptions."""
    for name in koopman_mp.supported_experiments():
        print(f"{name}: {koopman_mp.experiment_class(name).DESCRIPTION}")
    return EXIT_OK


def show_schema(args: Namespace) -> int:
    """Show the default configuration of an experiment as JSON."""
    schema = koopman_mp.experiment_class(args.name).schema()
    print(json.dumps(schema, indent=2))
    return EXIT_OK


def _generate_snapshots(args: Namespace) -> SnapshotSet:
    if args.system == "rotation":
        return periodic_trapezoid_snapshots(args.count or 256, rotation_map(args.alpha))
    if args.system == "shift":
        return shift_snapshots(args.count or 10)
    if args.system == "lorenz":
        count = args.count or 1000
        full = lorenz_trajectory([1.0, 1.0, 1.0], dt=args.dt or 0.1, M=args.burn_in + count)
        trajectory = Trajectory(states=full.states[args.burn_in :], dt=full.dt)
        return snapshots_from_trajectory(trajectory)
    count = args.count or 50
    return tensor_trapezoid_snapshots(
        count,
        args.m2 or count,
        flow=pendulum_flow(args.dt or 0.5),
    )


def generate(args: Namespace) -> int:
    """Write a snapshot file for a builtin system."""
    if args.count is not None and args.count < 2:  # noqa: PLR2004
        msg = f"need at least 2 snapshots, got {args.count}"
        raise ConfigError(msg)
    snapshots = _generate_snapshots(args)
    write_snapshots(snapshots, args.output)
    print(f"Wrote {snapshots.size} {args.system} snapshots to {args.output}")
    return EXIT_OK


def experiment(args: Namespace) -> int:
    """Run an experiment and write its results."""
    if args.config:
        config = ExperimentConfig.from_file(args.config)
        if args.name and args.name != config.experiment:
            msg = f"experiment {args.name!r} doesn't match configuration {config.experiment!r}"
            raise ConfigError(msg)
    elif args.name:
        config = ExperimentConfig.from_dict(
            {"experiment": args.name, "output": f"results/{args.name}"},
        )
    else:
        msg = "give an experiment name or a configuration file"
        raise ConfigError(msg)
    config = config.with_overrides(output=args.out, seed=args.seed, workers=args.workers)

    report = run_experiment(config)
    for name, check in report.summary.checks.items():
        status = "passed" if check.passed else "FAILED"
        print(f"{name}: {check.value!r} {status}")
    print(f"Results written to {report.output}")
    if args.check and not report.passed:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _parse_descriptor(text: str) -> dict[str, Any]:
    try:
        descriptor = json.loads(text)
    except json.JSONDecodeError as exception:
        msg = f"dictionary descriptor isn't valid JSON: {exception}"
        raise DictionaryError(msg) from exception
    Dictionary.create_from_descriptor(descriptor)
    return descriptor


def fit_model(args: Namespace) -> int:
    """Fit a model to a snapshot file and save it as JSON."""
    snapshots = read_snapshots(args.snapshots)
    if args.method in ("dmd", "pidmd"):
        model = fit(args.method, snapshots.X, snapshots.Y, snapshots.weights)
    else:
        descriptor = _parse_descriptor(args.dictionary)
        psi_x, psi_y, weights, _ = snapshot_matrices(
            Dictionary.create_from_descriptor(descriptor),
            snapshots,
        )
        model = fit(args.method, psi_x, psi_y, weights, descriptor)
    save_model(model, args.output)
    print(f"Fitted {model.method} model with N={model.size}, written to {args.output}")
    if not model.diagonalizable:
        print("Warning: the model isn't diagonalizable")
    return EXIT_OK


def _model_data(
    args: Namespace,
) -> tuple[KoopmanModel, np.ndarray, np.ndarray, np.ndarray]:
    """Load the model and evaluate its dictionary and the observable on the snapshots.

    Returns:
        tuple: The model, ``Ψ_X``, the weights and the observable samples.
    """
    model = load_model(args.model)
    descriptor = model.dictionary or {"type": "linear"}
    snapshots = read_snapshots(args.snapshots)
    psi_x, _, weights, states = snapshot_matrices(
        Dictionary.create_from_descriptor(descriptor),
        snapshots,
    )
    if psi_x.shape[1] != model.size:
        msg = f"dictionary of size {psi_x.shape[1]} doesn't match model of size {model.size}"
        raise DataError(msg)
    return model, psi_x, weights, observable(args.observable)(states)


def spectrum(args: Namespace) -> int:
    """Compute the spectral measure of an observable and write it as CSV."""
    model, psi_x, weights, samples = _model_data(args)
    ghat = project_observable(model.gram_pair, psi_x, weights, samples)
    measure = scalar_measure(model, ghat)
    write_measure(measure, args.output)
    print(f"Wrote measure with {len(measure.phases)} atoms to {args.output}")
    if args.cdf:
        grid = np.linspace(-np.pi, np.pi, CDF_GRID)
        write_cdf(grid, cdf(measure, grid), args.cdf)
        print(f"Wrote cdf to {args.cdf}")
    return EXIT_OK


def predict(args: Namespace) -> int:
    """Forecast an observable from a snapshot and write the series as CSV."""
    model, psi_x, weights, samples = _model_data(args)
    if not 0 <= args.start < len(psi_x):
        msg = f"start index {args.start} out of range for {len(psi_x)} snapshots"
        raise DataError(msg)
    if args.steps < 0:
        msg = f"number of steps must be nonnegative, got {args.steps}"
        raise DataError(msg)
    kmd = build_kmd(model, model.gram_pair, psi_x, weights, samples)
    series = predict_series(kmd, eigenfunction_row(kmd, psi_x[args.start]), args.steps)
    write_prediction(series[:, 0], Path(args.output))
    print(f"Wrote {args.steps + 1} predicted values to {args.output}")
    return EXIT_OK


if __name__ == "__main__":
    # ^  This is a guard statement that will prevent the following code from
    #    being executed in the case someone imports this file instead of
    #    executing it as a script.
    #    https://docs.python.org/3/library/__main__.html
    run()
