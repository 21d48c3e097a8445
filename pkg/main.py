import functools
import json
from pathlib import Path

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from classify import wall_invariants
from errors import ParseError, TYError
from experiments import ExperimentConfig, distinguish, run_selftest, write_report
from forms import parse_form, require_bicharacter
from gauss import ZetaData, zeta_bruteforce, zeta_closed_form_p, zeta_via_prin
from logger import get_logger, set_level
from tycat import TYData, lens_invariant

app = typer.Typer(help="Exact lens-space invariants of Tambara-Yamagami categories.", no_args_is_help=True)
console = Console()
err_console = Console(stderr=True)
log = get_logger("cli")

METHODS = {"brute": zeta_bruteforce, "prin": zeta_via_prin, "closed": zeta_closed_form_p}


def parse_k_range(text):
    """'0..4', '7' or '1,3,5'."""
    text = text.strip()
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
            ks = list(range(low, high + 1))
        else:
            ks = [int(part) for part in text.split(",")]
    except ValueError as e:
        raise ParseError(f"bad k range {text!r}") from e
    if not ks or any(k < 0 for k in ks):
        raise ParseError(f"k range {text!r} must list nonnegative integers")
    return ks


def parse_nu(text):
    try:
        nu = int(text)
    except ValueError as e:
        raise ParseError(f"nu must be +1 or -1, got {text!r}") from e
    if nu not in (1, -1):
        raise ParseError(f"nu must be +1 or -1, got {text!r}")
    return nu


def cli_errors(command):
    """Turn package errors into a message on stderr and the matching exit code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except TYError as e:
            err_console.print(f"[bold red]error[/] ({type(e).__name__}): {e}")
            raise typer.Exit(code=e.exit_code)
        except ValidationError as e:
            err_console.print(f"[bold red]error[/] (invalid configuration): {e}")
            raise typer.Exit(code=ParseError.exit_code)

    return wrapper


@app.callback()
def configure(log_level: str = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR.")):
    if log_level:
        set_level(log_level)


@app.command()
@cli_errors
def lens(
    group: str = typer.Option(..., "--group", help="Cyclic orders, e.g. '3,3'."),
    gram: str = typer.Option(..., "--gram", help="Rows separated by ';', e.g. '1/3,0;0,2/3'."),
    nu: str = typer.Option("+1", "--nu", help="+1 or -1."),
    k: str = typer.Option("0..8", "--k", help="k values: '0..8', '3' or '1,3,5'."),
    as_json: bool = typer.Option(False, "--json", help="Print JSON rows instead of a table."),
):
    """|L_k| of TY(A, chi, nu) for every requested k."""
    category = TYData(parse_form(group, gram), parse_nu(nu))
    rows = [(kk, lens_invariant(category, kk)) for kk in parse_k_range(k)]
    if as_json:
        payload = [{"k": kk, "value": v.to_json(), "numeric": [v.value.real, v.value.imag]} for kk, v in rows]
        typer.echo(json.dumps(payload))
        return
    table = Table(title=f"|L_k| for {category.describe()}")
    table.add_column("k", justify="right")
    table.add_column("exact")
    table.add_column("numeric", justify="right")
    for kk, v in rows:
        table.add_row(str(kk), str(v), f"{v.value.real:.12g}{v.value.imag:+.12g}j")
    console.print(table)


@app.command()
@cli_errors
def zeta(
    group: str = typer.Option(..., "--group"),
    gram: str = typer.Option(..., "--gram"),
    k: str = typer.Option("0..8", "--k"),
    method: str = typer.Option("all", "--method", help="brute, prin, closed or all."),
    as_json: bool = typer.Option(False, "--json"),
):
    """zeta_k(chi) by brute force, the principal formula, the closed form, or all three."""
    if method != "all" and method not in METHODS:
        raise ParseError(f"unknown method {method!r}")
    chi = require_bicharacter(parse_form(group, gram))
    data = ZetaData.of(chi)
    methods = list(METHODS) if method == "all" else [method]
    rows = []
    mismatch = False
    for kk in parse_k_range(k):
        values = {name: METHODS[name](chi, kk, data=data) for name in methods}
        if len(set(values.values())) > 1:
            mismatch = True
            log.error("methods disagree at k=%d: %s", kk, {n: str(v) for n, v in values.items()})
        rows.append((kk, values))
    if as_json:
        typer.echo(json.dumps([{"k": kk, **{n: str(v) for n, v in values.items()}} for kk, values in rows]))
    else:
        table = Table(title=f"zeta_k for {chi.literal()}")
        table.add_column("k", justify="right")
        for name in methods:
            table.add_column(name)
        for kk, values in rows:
            table.add_row(str(kk), *(str(values[name]) for name in methods))
        console.print(table)
    if mismatch:
        raise typer.Exit(code=1)


@app.command()
@cli_errors
def classify(
    group: str = typer.Option(..., "--group"),
    gram: str = typer.Option(..., "--gram"),
):
    """Wall invariants r_{p,s} and sigma_{p,s}; the 2-part is reported as unclassified."""
    invariants = wall_invariants(parse_form(group, gram))
    typer.echo(json.dumps(invariants.to_json(), sort_keys=True))


@app.command(name="distinguish")
@cli_errors
def distinguish_command(
    max_order: int = typer.Option(9, "--max-order"),
    k_max: int = typer.Option(None, "--k-max", help="Defaults to 8 * max-order."),
    allow_even: bool = typer.Option(False, "--allow-even", help="Also scan even orders (no theorem backs the result)."),
    output: Path = typer.Option(None, "--output"),
    fmt: str = typer.Option("json", "--format", help="json or csv."),
    seed: int = typer.Option(0, "--seed"),
    parallelism: int = typer.Option(1, "--parallelism"),
    members_per_class: int = typer.Option(2, "--members-per-class", help="Class members checked against their representative."),
):
    """Separate every pair of inequivalent TY categories by their lens invariants."""
    config = ExperimentConfig(
        max_order=max_order,
        k_max=k_max,
        allow_even=allow_even,
        output=output,
        format=fmt,
        seed=seed,
        parallelism=parallelism,
        members_per_class=members_per_class,
    )
    if config.allow_even:
        err_console.print("[yellow]note[/]: even orders included; an UNSEPARATED row there is not a contradiction of any theorem")
    report = distinguish(config)
    if config.output:
        write_report(report, config.output, config.format)
    else:
        typer.echo(json.dumps(report.to_json()))
    err_console.print(
        f"{report.categories} categories, {len(report.rows)} rows, "
        f"max separating k = {report.max_separating_k}, unseparated = {len(report.unseparated)}"
    )
    if report.failures:
        raise typer.Exit(code=1)


@app.command()
@cli_errors
def selftest(
    level: str = typer.Option("quick", "--level", help="quick or full."),
    perturb: bool = typer.Option(False, "--perturb", help="Run the structure suite on corrupted associators."),
    seed: int = typer.Option(0, "--seed"),
    suite: list[str] = typer.Option(None, "--suite", help="Run only the named suites."),
):
    """Run the acceptance suites and print per-suite timing."""
    if level not in ("quick", "full"):
        raise ParseError(f"level must be quick or full, got {level!r}")
    results = run_selftest(level, perturb=perturb, seed=seed, only=suite or None)
    table = Table(title=f"selftest ({level})")
    for column in ("suite", "checks", "failures", "seconds", "status"):
        table.add_column(column)
    for result in results:
        status = "[green]ok[/]" if result.passed else "[red]FAIL[/]"
        table.add_row(result.name, str(result.checked), str(len(result.failures)), f"{result.seconds:.2f}", status)
    err_console.print(table)
    failed = [{"suite": r.name, "failures": r.failures} for r in results if not r.passed]
    typer.echo(json.dumps({"passed": not failed, "failures": failed}, default=str))
    if failed:
        raise typer.Exit(code=1)


if __name__ == "__main__":
    app()
