"""Command line entry points.

stdout carries machine-readable output only (canonical JSON, CSV);
diagnostics go to stderr. Exit codes: 0 success, 1 invalid program,
2 I/O or usage failure, 3 program run ended in an error, 4 serve could
not bind its port.
"""

from __future__ import annotations

import sys
from typing import Optional

import click

from .blocks.model import ProgramSyntaxError, SchemaError
from .blocks.serialize import parse, serialize
from .plotsvg import plot_trace
from .sim.engine import InvalidCount
from .sim.preview import live_run, preview_run
from .sim.rtf import bench


def _load_program(path: str):
    """Read and parse, translating failures to the documented exits."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        click.echo(f"cannot read {path}: {e}", err=True)
        sys.exit(2)
    try:
        return parse(data)
    except (ProgramSyntaxError, SchemaError) as e:
        click.echo(f"{type(e).__name__}: {e}", err=True)
        sys.exit(1)


@click.group()
@click.version_option(package_name="swarmlab", prog_name="swarmlab")
def main() -> None:
    """Block-programmed drone swarms: validate, simulate, benchmark, serve."""


@main.command("validate")
@click.argument("path", type=click.Path())
def cmd_validate(path: str) -> None:
    """Validate a .sib.json program and echo its canonical form."""
    program = _load_program(path)
    sys.stdout.write(serialize(program).decode("utf-8") + "\n")


@main.command("run")
@click.argument("path", type=click.Path())
@click.option("--drones", "n_drones", default=4, show_default=True,
              help="Swarm size.")
@click.option("--preview", is_flag=True,
              help="Run as fast as possible instead of real time.")
@click.option("--trace", "trace_out", type=click.Path(), default=None,
              help="Write the run trace to this JSONL file.")
@click.option("--plot", "plot_out", type=click.Path(), default=None,
              help="Write a top-down SVG plot to this file.")
@click.option("--seed", default=0, show_default=True, help="Simulator seed.")
def cmd_run(path: str, n_drones: int, preview: bool, trace_out: Optional[str],
            plot_out: Optional[str], seed: int) -> None:
    """Run a program against a local simulated swarm.

    Prompts cannot be answered headless; a program that prompts will end
    in an error (use the station for interactive runs).
    """
    program = _load_program(path)
    try:
        if preview:
            trace = preview_run(program, n=n_drones, seed=seed)
        else:
            trace = live_run(program, n=n_drones, seed=seed)
    except InvalidCount as e:
        raise click.UsageError(str(e))
    try:
        if trace_out is not None:
            trace.save(trace_out)
        if plot_out is not None:
            plot_trace(trace, plot_out)
    except OSError as e:
        click.echo(f"cannot write output: {e}", err=True)
        sys.exit(2)
    if trace.error is not None:
        click.echo(f"error: {trace.error}", err=True)
        sys.exit(3)


@main.command("bench")
@click.option("--drones", "drones_csv", default="1,2,5,10,20,50",
              show_default=True, help="Comma-separated swarm sizes.")
@click.option("--duration", default=10.0, show_default=True,
              help="Simulated seconds per run.")
@click.option("--runs", default=5, show_default=True,
              help="Runs per swarm size (median reported).")
def cmd_bench(drones_csv: str, duration: float, runs: int) -> None:
    """Benchmark the real-time factor; CSV on stdout."""
    try:
        counts = [int(part) for part in drones_csv.split(",") if part.strip()]
        if not counts:
            raise ValueError("empty drone list")
        rows = bench(counts, duration=duration, runs=runs)
    except (ValueError, InvalidCount) as e:
        raise click.UsageError(str(e))
    sys.stdout.write("n,rtf_median,rtf_min,rtf_max,runs\n")
    for row in rows:
        sys.stdout.write(
            f"{row.n_drones},{row.rtf_median:.4f},{row.rtf_min:.4f},"
            f"{row.rtf_max:.4f},{row.runs}\n"
        )


@main.command("serve")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--drones", "n_drones", default=4, show_default=True)
@click.option("--dt-ms", default=50, show_default=True,
              help="Simulator tick length in milliseconds.")
@click.option("--programs", "program_dir", type=click.Path(), default="programs",
              show_default=True, help="Directory for stored programs.")
def cmd_serve(port: int, host: str, n_drones: int, dt_ms: int,
              program_dir: str) -> None:
    """Serve the station API, websocket and UI until interrupted."""
    from .station.server import BindFailure, serve

    try:
        serve(host=host, port=port, n_drones=n_drones, dt_ms=dt_ms,
              program_dir=program_dir)
    except BindFailure as e:
        click.echo(str(e), err=True)
        sys.exit(4)
    except KeyboardInterrupt:
        pass


if __name__ == "__main__":
    main()
