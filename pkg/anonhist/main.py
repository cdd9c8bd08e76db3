"""
Command-line entry point.
"""
# Load environment variables first, before any other imports
from dotenv import load_dotenv
load_dotenv()

from typing import List, Optional, Tuple

import click
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from anonhist import __version__
from anonhist.core.config import settings
from anonhist.core.logging_config import configure_logging, get_logger
from anonhist.models.partition import IntegerPartition
from anonhist.models.requests.release_requests import InputShape, MechanismKind, ReleaseConfig
from anonhist.models.responses.experiment_responses import ExperimentReport
from anonhist.services.experiment_service import (
    brute_force_project,
    canonical_input,
    run_error_experiment,
    run_sweep,
    sensitivity_audit,
)
from anonhist.services.lowerbound_service import (
    build_encoding_spec,
    decode_nearest,
    encode,
    generate_packing,
)
from anonhist.services.mechanism_service import release
from anonhist.utils.exceptions import AnonHistError
from anonhist.utils.random_streams import SeededStream
from anonhist.utils.serialization import (
    dumps_json,
    format_bits,
    format_partition,
    parse_hex_bits,
    read_int_vector,
    read_partition,
    reports_to_csv,
)

logger = get_logger(__name__)

_MECHANISMS = click.Choice([kind.value for kind in MechanismKind])
_SHAPES = click.Choice([shape.value for shape in InputShape])
_INPUT_FILE = click.Path(exists=True, dir_okay=False)


class AnonHistGroup(click.Group):
    """Click group that maps domain errors to exit codes."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except AnonHistError as exc:
            logger.error(
                "Command failed",
                error_code=exc.error_code,
                message=exc.message,
                details=exc.details,
                exception_type=type(exc).__name__,
            )
            click.echo(f"error: {exc.message}", err=True)
            ctx.exit(exc.exit_code)
        except ValidationError as exc:
            logger.error("Validation error", errors=exc.errors(include_url=False, include_context=False))
            click.echo(f"error: {exc}", err=True)
            ctx.exit(2)


def _seed(seed: Optional[int]) -> int:
    return settings.default_seed if seed is None else seed


def _emit_reports(reports: List[ExperimentReport], output_format: str, single: bool) -> None:
    if output_format == "csv":
        click.echo(reports_to_csv(reports), nl=False)
    elif output_format == "table":
        _print_table(reports)
    else:
        click.echo(dumps_json(reports[0] if single else reports), nl=False)


def _print_table(reports: List[ExperimentReport]) -> None:
    table = Table(title="Utility sweep")
    for column in ("mechanism", "input", "n", "epsilon", "trials", "mean_error", "std_error", "max_error", "bound"):
        table.add_column(column, justify="right")
    for report in reports:
        table.add_row(
            report.mechanism_kind.value,
            report.input_label,
            str(report.n),
            f"{report.epsilon:g}",
            str(report.trials),
            f"{report.mean_error:.3f}",
            f"{report.std_error:.3f}",
            str(report.max_error),
            "-" if report.bound is None else f"{report.bound:.3f}",
        )
    Console().print(table)


@click.group(cls=AnonHistGroup)
@click.version_option(__version__, prog_name="anonhist")
def cli() -> None:
    """Differentially private release of anonymized histograms."""
    configure_logging()


@cli.command("release")
@click.option("--eps", "epsilon", type=float, required=True, help="Privacy parameter")
@click.option("--n", "size_bound", type=int, default=None, help="Known bound on the partition size")
@click.option("--unknown-n", is_flag=True, help="Run the unknown-size release (eps >= 2)")
@click.option("--mechanism", type=_MECHANISMS, default=None, help="Defaults to alg1, or alg2 with --unknown-n")
@click.option("--seed", type=int, default=None)
@click.option("--input", "input_path", type=_INPUT_FILE, required=True)
def release_command(
    epsilon: float,
    size_bound: Optional[int],
    unknown_n: bool,
    mechanism: Optional[str],
    seed: Optional[int],
    input_path: str,
) -> None:
    """Release a private partition (text format on stdout)."""
    if unknown_n and size_bound is not None:
        raise click.UsageError("--n and --unknown-n are mutually exclusive")
    kind = MechanismKind(mechanism) if mechanism else (MechanismKind.ALG2 if unknown_n else MechanismKind.ALG1)
    if unknown_n and kind != MechanismKind.ALG2:
        raise click.UsageError("--unknown-n requires the alg2 mechanism")

    config = ReleaseConfig(epsilon=epsilon, size_bound=size_bound, mechanism_kind=kind, seed=_seed(seed))
    partition = read_partition(input_path)
    released = release(partition, config, SeededStream(config.seed))
    logger.info("Released partition", mechanism=kind.value, epsilon=epsilon, input_size=partition.size)
    click.echo(format_partition(released), nl=False)


@cli.command("eval")
@click.option("--eps", "epsilon", type=float, required=True)
@click.option("--n", "size_bound", type=int, required=True, help="Size bound, also the size of canonical inputs")
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--input", "input_path", type=_INPUT_FILE, default=None)
@click.option("--shape", type=_SHAPES, default=None, help="Canonical input; all three when omitted")
@click.option("--mechanism", type=_MECHANISMS, default=MechanismKind.ALG1.value, show_default=True)
@click.option("--format", "output_format", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--workers", type=int, default=None)
@click.option("--progress/--no-progress", default=None)
@click.option("--include-timing", is_flag=True, help="Add wall_time_ms (breaks byte reproducibility)")
def eval_command(
    epsilon: float,
    size_bound: int,
    trials: Optional[int],
    seed: Optional[int],
    input_path: Optional[str],
    shape: Optional[str],
    mechanism: str,
    output_format: str,
    workers: Optional[int],
    progress: Optional[bool],
    include_timing: bool,
) -> None:
    """Monte-Carlo utility report."""
    if input_path and shape:
        raise click.UsageError("--input and --shape are mutually exclusive")
    kind = MechanismKind(mechanism)
    config = ReleaseConfig(
        epsilon=epsilon,
        size_bound=None if kind == MechanismKind.ALG2 else size_bound,
        mechanism_kind=kind,
        seed=_seed(seed),
    )

    inputs: List[Tuple[IntegerPartition, str]]
    if input_path:
        inputs = [(read_partition(input_path), "input")]
    elif shape:
        inputs = [(canonical_input(InputShape(shape), size_bound), shape)]
    else:
        inputs = [(canonical_input(s, size_bound), s.value) for s in InputShape]

    reports = [
        run_error_experiment(
            config,
            partition,
            settings.default_trials if trials is None else trials,
            input_label=label,
            workers=workers,
            progress=progress,
            include_timing=include_timing,
        )
        for partition, label in inputs
    ]
    _emit_reports(reports, output_format, single=len(inputs) == 1 and bool(input_path or shape))


@cli.command("sweep")
@click.option("--eps", "epsilons", type=float, multiple=True, required=True, help="Repeat for each epsilon")
@click.option("--n", "size_bound", type=int, required=True)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--shape", type=_SHAPES, default=InputShape.STAIRCASE.value, show_default=True)
@click.option("--mechanism", type=_MECHANISMS, default=MechanismKind.ALG1.value, show_default=True)
@click.option("--format", "output_format", type=click.Choice(["json", "csv", "table"]), default="json", show_default=True)
@click.option("--workers", type=int, default=None)
@click.option("--progress/--no-progress", default=None)
def sweep_command(
    epsilons: Tuple[float, ...],
    size_bound: int,
    trials: Optional[int],
    seed: Optional[int],
    shape: str,
    mechanism: str,
    output_format: str,
    workers: Optional[int],
    progress: Optional[bool],
) -> None:
    """Utility scaling over a list of epsilons."""
    reports = run_sweep(
        epsilons,
        size_bound,
        settings.default_trials if trials is None else trials,
        _seed(seed),
        shape=InputShape(shape),
        mechanism_kind=MechanismKind(mechanism),
        workers=workers,
        progress=progress,
    )
    _emit_reports(reports, output_format, single=False)


@cli.command("encode")
@click.option("--n", type=int, required=True)
@click.option("--delta", type=int, required=True)
@click.option("--bits", "hex_bits", type=str, required=True, help="m bits as hex, most significant first")
def encode_command(n: int, delta: int, hex_bits: str) -> None:
    """Encode a bit vector as a partition (JSON array)."""
    spec = build_encoding_spec(n, delta)
    partition = encode(spec, parse_hex_bits(hex_bits, spec.m))
    click.echo(dumps_json(partition), nl=False)


@cli.command("decode")
@click.option("--n", type=int, required=True)
@click.option("--delta", type=int, required=True)
@click.option("--input", "input_path", type=_INPUT_FILE, required=True)
@click.option("--exhaustive", is_flag=True, help="Score all 2^m candidates")
def decode_command(n: int, delta: int, input_path: str, exhaustive: bool) -> None:
    """Nearest codeword of a partition, as a bit string."""
    spec = build_encoding_spec(n, delta)
    bits = decode_nearest(spec, read_partition(input_path), exhaustive=exhaustive)
    click.echo(format_bits(bits))


@cli.command("pack")
@click.option("--n", type=int, required=True)
@click.option("--delta", type=int, required=True)
@click.option("--attempts", type=int, default=None)
@click.option("--seed", type=int, default=None)
def pack_command(n: int, delta: int, attempts: Optional[int], seed: Optional[int]) -> None:
    """Certified packing of partitions."""
    result = generate_packing(
        n,
        delta,
        settings.packing_attempts if attempts is None else attempts,
        _seed(seed),
    )
    click.echo(dumps_json(result), nl=False)


@cli.command("audit")
@click.option("--n", type=int, required=True)
def audit_command(n: int) -> None:
    """Exhaustive sensitivity audit of the rank-split map."""
    click.echo(dumps_json(sensitivity_audit(n)), nl=False)


@cli.group("oracle")
def oracle() -> None:
    """Exact reference implementations."""


@oracle.command("project")
@click.option("--n", type=int, required=True)
@click.option("--input", "input_path", type=_INPUT_FILE, required=True)
def oracle_project_command(n: int, input_path: str) -> None:
    """Brute-force closest partition of size at most n."""
    click.echo(dumps_json(brute_force_project(read_int_vector(input_path), n)), nl=False)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
