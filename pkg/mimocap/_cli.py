import argparse
import logging
import sys
from collections.abc import Iterator
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from enum import Enum
from enum import unique
from typing import Any

import numpy as np
from typing_extensions import override

from mimocap._config import ModelConfig
from mimocap._config import SweepConfig
from mimocap._config import SweepVariable
from mimocap._config import apply_sweep_value
from mimocap._config import build_model
from mimocap._config import check_sweep
from mimocap._config import load_config
from mimocap._errors import ConfigError
from mimocap._errors import NumericalError
from mimocap._mutual_info import deq_mutual_information
from mimocap._mutual_info import nats_to_bits
from mimocap._records import CheckRecord
from mimocap._records import ModelColumns
from mimocap._records import MonteCarloRecord
from mimocap._records import ResultType
from mimocap._records import SolveRecord
from mimocap._records import TrialRecord
from mimocap._records import ValidationRecord
from mimocap._selftest import run_selftest
from mimocap._solver import SolverOptions
from mimocap._writer import ResultWriter
from mimocap.montecarlo import McConfig
from mimocap.montecarlo import estimate

logger = logging.getLogger(__name__)

EXIT_SUCCESS: int = 0
EXIT_NUMERICAL: int = 1
EXIT_CONFIG: int = 2

DEFAULT_TOLERANCE: float = 0.02
"""The default relative gap allowed between Monte Carlo and the deterministic equivalent."""


@unique
class Trend(str, Enum):
    """The shape of a swept curve."""

    Increasing = "increasing"
    Decreasing = "decreasing"
    InteriorMax = "interior-max"
    Other = "other"

    @override
    def __str__(self) -> str:
        return self.value


def classify_trend(values: Sequence[float]) -> Trend:
    """Classify a curve as strictly increasing, strictly decreasing or peaking inside its range.

    Examples:
        >>> classify_trend([1.0, 2.0, 1.5])
        <Trend.InteriorMax: 'interior-max'>
    """
    steps = np.diff(np.asarray(values, dtype=np.float64))
    if steps.size > 0 and bool(np.all(steps > 0.0)):
        return Trend.Increasing
    if steps.size > 0 and bool(np.all(steps < 0.0)):
        return Trend.Decreasing
    peak = int(np.argmax(values)) if len(values) > 0 else 0
    if 0 < peak < len(values) - 1:
        return Trend.InteriorMax
    return Trend.Other


@contextmanager
def _open_writer(out: str, record_type: type[ResultType]) -> Iterator[ResultWriter[ResultType]]:
    """Open a CSV writer with its header on a path, or on standard output for '-'."""
    if out == "-":
        writer = ResultWriter(sys.stdout, record_type)  # type: ignore[arg-type]
        writer.write_header()
        yield writer
        sys.stdout.flush()
    else:
        with ResultWriter.from_path(out, record_type) as writer:
            writer.write_header()
            yield writer


def _solve_row(
    config: ModelConfig,
    options: SolverOptions,
    variable: SweepVariable | None = None,
    value: float | None = None,
) -> SolveRecord:
    """Solve one configuration; a failure becomes a row carrying the error."""
    columns: dict[str, Any] = ModelColumns.describe(config, variable, value)
    try:
        result = deq_mutual_information(build_model(config), options)
    except (NumericalError, ConfigError) as error:
        logger.error("Solve failed for %s=%s: %s", variable, value, error)
        return SolveRecord(**columns, error=str(error))
    return SolveRecord(
        **columns,
        mutual_info_nats=result.total,
        mutual_info_bits=nats_to_bits(result.total),
        term_logdet=result.term_logdet,
        term_log_scalar=result.term_log_scalar,
        term_cross=result.term_cross,
        iterations=result.diagnostics.iterations,
        final_residual=result.diagnostics.final_residual,
    )


def _validation_row(
    config: ModelConfig,
    mc_config: McConfig,
    tolerance: float,
    threads: int,
    variable: SweepVariable | None = None,
    value: float | None = None,
) -> ValidationRecord:
    """Compare the deterministic equivalent with a Monte Carlo estimate for one configuration."""
    columns: dict[str, Any] = ModelColumns.describe(config, variable, value)
    settings = {
        "window": mc_config.window,
        "trials": mc_config.trials,
        "seed": mc_config.seed,
        "tolerance": tolerance,
    }
    try:
        model = build_model(config)
        deq = deq_mutual_information(model).total
        mc = estimate(model, mc_config, threads=threads)
    except (NumericalError, ConfigError) as error:
        logger.error("Validation skipped at M=%d: %s", mc_config.window, error)
        return ValidationRecord(**columns, **settings, error=str(error))
    abs_gap = abs(mc.mean - deq)
    rel_gap = abs_gap / abs(deq) if deq != 0.0 else (0.0 if abs_gap == 0.0 else float("inf"))
    passed = rel_gap < tolerance
    logger.info(
        "M=%d: deterministic equivalent %.6f, Monte Carlo %.6f +/- %.6f, relative gap %.4f (%s).",
        mc_config.window,
        deq,
        mc.mean,
        mc.stderr,
        rel_gap,
        "pass" if passed else "fail",
    )
    return ValidationRecord(
        **columns,
        **settings,
        deq_nats=deq,
        deq_bits=nats_to_bits(deq),
        mc_nats=mc.mean,
        mc_bits=nats_to_bits(mc.mean),
        stderr_nats=mc.stderr,
        abs_gap=abs_gap,
        rel_gap=rel_gap,
        passed=passed,
    )


def run_solve(args: argparse.Namespace) -> int:
    """Solve the configured model at z = -1 and write one row."""
    config = load_config(args.config)
    build_model(config)
    options = SolverOptions(tol=args.solver_tol)
    record = _solve_row(config, options)
    with _open_writer(args.out, SolveRecord) as writer:
        writer.write(record)
    return EXIT_SUCCESS if record.error is None else EXIT_NUMERICAL


def _sweep_spec(args: argparse.Namespace, config: ModelConfig) -> SweepConfig:
    """The sweep given on the command line, or else the one in the configuration."""
    if args.variable is not None:
        if not args.values:
            raise ConfigError("--variable needs --values!")
        try:
            return SweepConfig(variable=SweepVariable(args.variable), values=tuple(args.values))
        except ValueError as error:
            raise ConfigError(str(error)) from error
    if config.sweep is None:
        raise ConfigError("No sweep given: pass --variable and --values or add a sweep section!")
    return config.sweep


def run_sweep(args: argparse.Namespace) -> int:
    """Solve the model once per sweep value; window sweeps compare against Monte Carlo."""
    config = load_config(args.config)
    sweep = _sweep_spec(args, config)
    check_sweep(config, sweep)
    variable = sweep.variable
    logger.info("Sweeping %s over %d values.", variable, len(sweep.values))

    if variable is SweepVariable.M:
        mc_configs = [
            McConfig.from_window(int(value), trials=args.trials, seed=args.seed)
            for value in sweep.values
        ]
        validations = [
            _validation_row(config, mc_config, args.tolerance, args.threads, variable, value)
            for mc_config, value in zip(mc_configs, sweep.values, strict=True)
        ]
        with _open_writer(args.out, ValidationRecord) as writer:
            for validation in validations:
                writer.write(validation)
        gaps = [row.rel_gap for row in validations if row.rel_gap is not None]
        logger.info("Relative gap versus window: %s.", classify_trend(gaps))
        return EXIT_SUCCESS

    options = SolverOptions(tol=args.solver_tol)

    def _point(value: float) -> SolveRecord:
        return _solve_row(apply_sweep_value(config, variable, value), options, variable, value)

    with ThreadPoolExecutor(max_workers=args.threads) as executor:
        records = list(executor.map(_point, sweep.values))
    with _open_writer(args.out, SolveRecord) as writer:
        for record in records:
            writer.write(record)
    curve = [record.mutual_info_nats for record in records if record.mutual_info_nats is not None]
    logger.info("Mutual information versus %s: %s.", variable, classify_trend(curve))
    return EXIT_SUCCESS


def run_montecarlo(args: argparse.Namespace) -> int:
    """Estimate the per-antenna mutual information of the configured model by simulation."""
    config = load_config(args.config)
    model = build_model(config)
    mc_config = McConfig.from_window(args.window, trials=args.trials, seed=args.seed)
    columns: dict[str, Any] = ModelColumns.describe(config)
    settings = {"window": mc_config.window, "trials": mc_config.trials, "seed": mc_config.seed}
    try:
        result = estimate(model, mc_config, threads=args.threads, keep_trials=True)
    except NumericalError as error:
        logger.error("Monte Carlo failed: %s", error)
        with _open_writer(args.out, MonteCarloRecord) as writer:
            writer.write(MonteCarloRecord(**columns, **settings, error=str(error)))
        return EXIT_NUMERICAL

    with _open_writer(args.out, MonteCarloRecord) as writer:
        writer.write(
            MonteCarloRecord(
                **columns,
                **settings,
                mutual_info_nats=result.mean,
                mutual_info_bits=nats_to_bits(result.mean),
                stderr_nats=result.stderr,
            )
        )
    if args.per_trial is not None and result.per_trial is not None:
        with _open_writer(args.per_trial, TrialRecord) as writer:
            for trial, value in enumerate(result.per_trial):
                writer.write(
                    TrialRecord(
                        trial=trial,
                        window=mc_config.window,
                        mutual_info_nats=float(value),
                        mutual_info_bits=nats_to_bits(float(value)),
                    )
                )
    return EXIT_SUCCESS


def run_validate(args: argparse.Namespace) -> int:
    """Compare the deterministic equivalent with Monte Carlo and report pass or fail."""
    config = load_config(args.config)
    build_model(config)
    if args.tolerance < 0.0:
        raise ConfigError(f"The tolerance must be nonnegative but found: {args.tolerance}")
    mc_config = McConfig.from_window(args.window, trials=args.trials, seed=args.seed)
    record = _validation_row(config, mc_config, args.tolerance, args.threads)
    with _open_writer(args.out, ValidationRecord) as writer:
        writer.write(record)
    if record.error is not None:
        return EXIT_NUMERICAL
    if not record.passed and not args.informational:
        return EXIT_NUMERICAL
    return EXIT_SUCCESS


def run_selftest_command(args: argparse.Namespace) -> int:
    """Run the oracle suites and write one row per check."""
    checks = run_selftest(seed=args.seed)
    with _open_writer(args.out, CheckRecord) as writer:
        for check in checks:
            writer.write(check)
    failed = [check for check in checks if not check.passed]
    for check in failed:
        logger.error("Self-test check failed: %s/%s (%s)", check.suite, check.name, check.detail)
    return EXIT_SUCCESS if not failed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    """Build the command-line parser."""
    parser = argparse.ArgumentParser(
        prog="mimocap",
        description="Ergodic mutual information of time-correlated frequency-selective MIMO "
        "channels: deterministic equivalents and Monte Carlo validation.",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, help="Command to run")

    def _common(sub: argparse.ArgumentParser, config: bool = True) -> None:
        if config:
            sub.add_argument("--config", required=True, help="Model configuration (JSON)")
        sub.add_argument("--out", default="-", help="Output CSV path, '-' for standard output")
        sub.add_argument("--format", default="csv", choices=["csv"], help="Output format")
        sub.add_argument("--seed", type=int, default=42, help="Master random seed")
        sub.add_argument("--threads", type=int, default=1, help="Worker threads")

    def _monte_carlo(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--window", type=int, default=41, help="Window length M = 2n + 1")
        sub.add_argument("--trials", type=int, default=200, help="Monte Carlo trials")

    solve_parser = subparsers.add_parser("solve", help="Solve the model at z = -1")
    _common(solve_parser)
    solve_parser.add_argument("--solver-tol", type=float, default=1e-12, help="Solver tolerance")
    solve_parser.set_defaults(handler=run_solve)

    sweep_parser = subparsers.add_parser("sweep", help="Solve over a parameter sweep")
    _common(sweep_parser)
    sweep_parser.add_argument(
        "--variable", choices=[v.value for v in SweepVariable], help="Parameter to sweep"
    )
    sweep_parser.add_argument("--values", type=float, nargs="+", help="Sweep values")
    sweep_parser.add_argument("--solver-tol", type=float, default=1e-12, help="Solver tolerance")
    sweep_parser.add_argument("--trials", type=int, default=200, help="Trials for window sweeps")
    sweep_parser.add_argument(
        "--tolerance", type=float, default=DEFAULT_TOLERANCE, help="Gap for window sweeps"
    )
    sweep_parser.set_defaults(handler=run_sweep)

    montecarlo_parser = subparsers.add_parser("montecarlo", help="Simulate the channel")
    _common(montecarlo_parser)
    _monte_carlo(montecarlo_parser)
    montecarlo_parser.add_argument("--per-trial", default=None, help="CSV of per-trial values")
    montecarlo_parser.set_defaults(handler=run_montecarlo)

    validate_parser = subparsers.add_parser("validate", help="Compare with Monte Carlo")
    _common(validate_parser)
    _monte_carlo(validate_parser)
    validate_parser.add_argument(
        "--tolerance", type=float, default=DEFAULT_TOLERANCE, help="Allowed relative gap"
    )
    validate_parser.add_argument(
        "--informational", action="store_true", help="Report the gap without failing on it"
    )
    validate_parser.set_defaults(handler=run_validate)

    selftest_parser = subparsers.add_parser("selftest", help="Run the oracle suites")
    _common(selftest_parser, config=False)
    selftest_parser.set_defaults(handler=run_selftest_command)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line; exit 0 on success, 1 on numerical failure, 2 on bad configuration."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    try:
        return int(args.handler(args))
    except ConfigError as error:
        logger.error("%s", error)
        return EXIT_CONFIG
    except NumericalError as error:
        logger.error("Numerical failure: %s", error)
        return EXIT_NUMERICAL
    except ValueError as error:
        logger.error("Invalid input: %s", error)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
