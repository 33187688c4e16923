"""Command-line front end for the verification harness.

Three subcommands: build populates the matrix cache for the requested
instances, verify runs the checks and exits nonzero on any failure, report
renders a previously written JSON report. Instance flags repeat and zip:
`--N 5 --p 3 --rmax 2 --N 11 --p 3 --rmax 1` describes two instances.
"""

import json
import sys

import click

from .harness import (
    CHECK_NAMES,
    HarnessError,
    VerificationConfig,
    VerificationSession,
    render_report,
    run,
)

_DEFAULTS = VerificationConfig()


def _config(n, p, rmax, precision, nmax, cache_dir, oracle, check) -> VerificationConfig:
    if not (len(n) == len(p) == len(rmax)):
        raise click.UsageError("--N, --p, and --rmax must be given the same number of times")
    instances = tuple(zip(n, p, rmax)) if n else _DEFAULTS.instances
    try:
        return VerificationConfig(
            instances=instances,
            precision=precision,
            n_max=nmax,
            cache_dir=cache_dir,
            oracle=oracle,
            checks=tuple(check) if check else CHECK_NAMES,
        )
    except HarnessError as exc:
        raise click.UsageError(str(exc)) from exc


def _instance_options(command):
    for option in reversed(
        [
            click.option("--N", "-N", "n", type=int, multiple=True, help="tame level, prime to p"),
            click.option("--p", "p", type=int, multiple=True, help="the prime of the tower"),
            click.option("--rmax", "rmax", type=int, multiple=True, help="deepest tower layer"),
            click.option("--precision", type=int, default=_DEFAULTS.precision, show_default=True, help="reported p-adic digits"),
            click.option("--nmax", type=int, default=_DEFAULTS.n_max, show_default=True, help="Hecke operators up to T(nmax)"),
            click.option("--cache-dir", type=click.Path(), default=None, help="matrix cache directory"),
            click.option("--oracle", type=click.Path(exists=True), default=None, help="CSV of eigenvalue rows: level,n,a_n"),
            click.option("--check", type=click.Choice(CHECK_NAMES), multiple=True, help="run only the named checks"),
        ]
    ):
        command = option(command)
    return command


@click.group()
def main():
    """Exact verification of ordinary towers of modular symbol spaces."""


@main.command()
@_instance_options
def build(n, p, rmax, precision, nmax, cache_dir, oracle, check):
    """Construct the pipelines and populate the cache, running no checks."""
    config = _config(n, p, rmax, precision, nmax, cache_dir, oracle, check)
    session = VerificationSession(config)
    for inst_n, inst_p, r_max in config.instances:
        for r in range(1, r_max + 1):
            pipe = session.pipeline(inst_n, inst_p, r)
            source = "cache" if pipe.from_cache else "built"
            click.echo(
                f"level {pipe.space.level} (N={inst_n}, p={inst_p}, r={r}): "
                f"ordinary rank {pipe.dec.rank}, algebra rank {pipe.algebra.rank} [{source}]"
            )
    session.flush_cache()


@main.command()
@_instance_options
def verify(n, p, rmax, precision, nmax, cache_dir, oracle, check):
    """Run the configured checks; exit 0 only if every entry passes."""
    config = _config(n, p, rmax, precision, nmax, cache_dir, oracle, check)
    rep = run(config)
    click.echo(render_report(rep))
    sys.exit(0 if rep["ok"] else 1)


@main.command()
@click.argument("path", type=click.Path(exists=True))
def report(path):
    """Render a JSON report written by a previous verify run."""
    try:
        with open(path) as handle:
            rep = json.load(handle)
        text = render_report(rep)
    except (ValueError, KeyError, TypeError) as exc:
        raise click.ClickException(f"not a readable report: {exc}") from exc
    click.echo(text)
    sys.exit(0 if rep.get("ok") else 1)


if __name__ == "__main__":
    main()
