"""
Command-line front end.

Usage::

    quadctrl analyze SPEC.json [--oracle] [--simulate] [--json]
    quadctrl analyze --model sprott --mu 1 --control 1,0,0
    quadctrl analyze --example r5-nonaccessible --oracle
    quadctrl examples [--json] [--write DIR]

Exit codes: 0 when a decisive verdict was produced, 2 when the STLC cascade
was inconclusive, 1 on any input error (no verdict is printed then).
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import click

from quadctrl.analyzer import ControllabilityAnalyzer
from quadctrl.constants import (
    DEFAULT_BRACKET_CAP,
    DEFAULT_ORACLE_DEPTH,
    DEFAULT_SIM_HORIZON,
    DEFAULT_SIM_SAMPLES,
    THREADS_ENV_VAR,
    VERSION,
    ArithmeticMode,
    ExitCode,
)
from quadctrl.exceptions import QuadCtrlError, SpecError
from quadctrl.models import (
    EXAMPLE_PROVENANCE,
    hypergraph,
    lorenz,
    paper_examples,
    rigid_body,
    sprott,
)
from quadctrl.report import render_text
from quadctrl.system import QuadraticSystem

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
MODELS = ("sprott", "lorenz", "rigid-body", "hypergraph")


class NumberType(click.ParamType):
    """Exact number: integer, ``p/q`` or decimal string."""

    name = "number"

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> Fraction:
        if isinstance(value, Fraction):
            return value
        try:
            return Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a number", param, ctx)


class VectorType(click.ParamType):
    """Comma-separated exact numbers, e.g. ``1,0,-1/2``."""

    name = "vector"

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> Tuple[Fraction, ...]:
        if isinstance(value, tuple):
            return value
        try:
            return tuple(Fraction(part.strip()) for part in str(value).split(","))
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a comma-separated vector", param, ctx)


NUMBER = NumberType()
VECTOR = VectorType()


@click.group()
@click.version_option(VERSION, prog_name="quadctrl")
@click.option("--verbose", "-v", is_flag=True, help="Log debug messages to stderr.")
def cli(verbose: bool) -> None:
    """Accessibility and STLC analysis of quadratic affine control systems."""
    logging.basicConfig(level=logging.WARNING, format=LOG_FORMAT)
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


@cli.command()
@click.argument(
    "spec", required=False, type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
@click.option(
    "--example", type=click.Choice(sorted(EXAMPLE_PROVENANCE)), help="Analyze a bundled example."
)
@click.option("--model", type=click.Choice(MODELS), help="Analyze a named model family.")
@click.option("--mu", type=NUMBER, help="Sprott parameter.")
@click.option("--sigma", type=NUMBER, help="Lorenz sigma.")
@click.option("--rho", type=NUMBER, help="Lorenz rho.")
@click.option("--beta", type=NUMBER, help="Lorenz beta.")
@click.option("--xi", type=VECTOR, help="Rigid-body inertia, e.g. 1,2,3.")
@click.option(
    "--control",
    "controls",
    type=VECTOR,
    multiple=True,
    help="Control vector (repeatable). Rigid-body controls are torque axes.",
)
@click.option("--oracle", is_flag=True, help="Compare S_k with an exact bracket enumeration.")
@click.option(
    "--oracle-depth",
    type=click.IntRange(min=1),
    default=DEFAULT_ORACLE_DEPTH,
    show_default=True,
    help="Longest bracket word.",
)
@click.option(
    "--bracket-cap",
    type=click.IntRange(min=1),
    default=DEFAULT_BRACKET_CAP,
    show_default=True,
    help="Hard limit on enumerated brackets.",
)
@click.option("--simulate", is_flag=True, help="Add reachable-cloud statistics.")
@click.option(
    "--samples", type=click.IntRange(min=1), default=DEFAULT_SIM_SAMPLES, show_default=True
)
@click.option(
    "--horizon",
    type=click.FloatRange(min=0, min_open=True),
    default=DEFAULT_SIM_HORIZON,
    show_default=True,
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--mode",
    type=click.Choice([m.value for m in ArithmeticMode]),
    help="Force the arithmetic mode (default: rational for all-rational data).",
)
@click.option("--tol", type=click.FloatRange(min=0), help="Float-mode tolerance.")
@click.option("--json/--text", "as_json", default=False, help="Output format.")
@click.option(
    "--csv",
    "csv_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Write simulated endpoints to this CSV file (implies --simulate).",
)
@click.option(
    "--forest",
    "forest_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Write the enumerated bracket forest as JSON.",
)
@click.option(
    "--threads",
    envvar=THREADS_ENV_VAR,
    type=click.IntRange(min=1),
    help=f"Worker threads (also read from {THREADS_ENV_VAR}).",
)
@click.pass_context
def analyze(
    ctx: click.Context,
    spec: Optional[Path],
    example: Optional[str],
    model: Optional[str],
    mu: Optional[Fraction],
    sigma: Optional[Fraction],
    rho: Optional[Fraction],
    beta: Optional[Fraction],
    xi: Optional[Tuple[Fraction, ...]],
    controls: Tuple[Tuple[Fraction, ...], ...],
    oracle: bool,
    oracle_depth: int,
    bracket_cap: int,
    simulate: bool,
    samples: int,
    horizon: float,
    seed: int,
    mode: Optional[str],
    tol: Optional[float],
    as_json: bool,
    csv_path: Optional[Path],
    forest_path: Optional[Path],
    threads: Optional[int],
) -> None:
    """Run chain, accessibility and the STLC cascade on one system."""
    try:
        analyzer = ControllabilityAnalyzer(
            mode=ArithmeticMode(mode) if mode else None,
            tol=tol,
            oracle_depth=oracle_depth,
            bracket_cap=bracket_cap,
            sim_horizon=horizon,
            sim_samples=samples,
            seed=seed,
            workers=threads,
        )
        system = _load_system(spec, example, model, mu, sigma, rho, beta, xi, controls)
        logger.debug("Loaded %r", system)
        report = analyzer.analyze(system, oracle=oracle, simulate=simulate, endpoints_csv=csv_path)
        if forest_path is not None:
            entries = [entry.to_dict() for entry in analyzer.forest(system)]
            forest_path.write_text(json.dumps(entries, indent=2))
    except QuadCtrlError as exc:
        raise click.ClickException(str(exc)) from exc

    click.echo(report.to_json() if as_json else render_text(report))
    code = ExitCode.DECISIVE if report.is_decisive else ExitCode.INCONCLUSIVE
    ctx.exit(int(code))


@cli.command()
@click.option("--json", "as_json", is_flag=True, help="Print the specs as JSON.")
@click.option(
    "--write",
    "directory",
    type=click.Path(file_okay=False, path_type=Path),
    help="Write one <name>.json spec file per example into this directory.",
)
def examples(as_json: bool, directory: Optional[Path]) -> None:
    """List the bundled example systems."""
    systems = paper_examples()
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)
        for name, sys in systems.items():
            (directory / f"{name}.json").write_text(sys.to_json())
    if as_json:
        listing = [
            {"name": name, "provenance": EXAMPLE_PROVENANCE[name], "spec": sys.to_dict()}
            for name, sys in systems.items()
        ]
        click.echo(json.dumps(listing, indent=2))
        return
    width = max(len(name) for name in systems)
    for name in systems:
        click.echo(f"{name.ljust(width)}  {EXAMPLE_PROVENANCE[name]}")


def _load_system(
    spec: Optional[Path],
    example: Optional[str],
    model: Optional[str],
    mu: Optional[Fraction],
    sigma: Optional[Fraction],
    rho: Optional[Fraction],
    beta: Optional[Fraction],
    xi: Optional[Tuple[Fraction, ...]],
    controls: Sequence[Tuple[Fraction, ...]],
) -> QuadraticSystem:
    sources = [s for s in (spec, example, model) if s is not None]
    if len(sources) != 1:
        raise SpecError("Give exactly one of SPEC, --example or --model")
    if spec is not None:
        return QuadraticSystem.from_json(spec.read_text())
    if example is not None:
        return paper_examples()[example]

    fields: List[Any] = [list(f) for f in controls]
    if model == "sprott":
        return sprott(_or(mu, 0), fields or [(1, 0, 0)])
    if model == "lorenz":
        params = (_or(sigma, 10), _or(rho, 28), _or(beta, Fraction(8, 3)))
        return lorenz(*params, fields or [(0, 0, 1)])
    if model == "rigid-body":
        inertia = list(xi) if xi else [1, 2, 3]
        return rigid_body(inertia, fields or [(1, 0, 0), (0, 1, 0)], torques=True)
    if not fields:
        raise SpecError("The hypergraph model needs one --control", field="control")
    return hypergraph(fields[0])


def _or(value: Optional[Fraction], default: Any) -> Any:
    return default if value is None else value


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Console entry point.

    Usage errors exit with 1 like every other input error, keeping exit
    code 2 for inconclusive verdicts.
    """
    try:
        args = list(argv) if argv is not None else None
        code = cli.main(args=args, prog_name="quadctrl", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return int(ExitCode.INPUT_ERROR)
    except click.ClickException as exc:
        exc.show()
        return int(ExitCode.INPUT_ERROR)
    return int(code or 0)


if __name__ == "__main__":
    raise SystemExit(main())
