"""CLI entry point for tincell."""

from pathlib import Path
from typing import Callable, NamedTuple, NoReturn, Optional

import typer
from rich.console import Console

from tincell import __version__
from tincell.models.config import Engine, OutputConfig
from tincell.models.network import SchedulingPolicy

console = Console()

app = typer.Typer(
    name="tincell",
    help="Coverage, rate and optimal design of TIN-scheduled cellular networks.",
    add_completion=False,
)


class _State:
    quiet: bool = False


state = _State()


class SweepArgs(NamedTuple):
    """Options shared by every sweeping command."""

    config: Optional[Path]
    seed: Optional[int]
    trials: Optional[int]
    workers: Optional[int]
    axis: Optional[str]
    values: Optional[str]

    def overrides(self) -> dict:
        return {"seed": self.seed, "trials": self.trials, "workers": self.workers}


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress details"),
    quiet: bool = typer.Option(
        False, "--quiet", "-q", help="Suppress progress output and warnings"
    ),
) -> None:
    """Evaluate, simulate and optimize TIN-based scheduling.

    Every command evaluates one point, or sweeps one parameter with
    --axis/--values, and emits a long-format table. With --out the table is
    written as CSV (or JSON with --format json) next to a .manifest.json
    holding the resolved configuration and sha256 checksums.
    """
    from tincell.services.output import configure_logging

    state.quiet = quiet
    configure_logging(verbose=verbose, quiet=quiet)


ConfigOpt = typer.Option(None, "--config", "-c", help="TOML or JSON config file")
SeedOpt = typer.Option(None, "--seed", help="Master seed (0 <= seed < 2^64)")
TrialsOpt = typer.Option(None, "--trials", help="Monte Carlo trials per point")
WorkersOpt = typer.Option(None, "--workers", help="Size of the process pool")
AxisOpt = typer.Option(
    None, "--axis", help="Swept parameter: theta_db, lambda_b, mu, m_factor or alpha"
)
ValuesOpt = typer.Option(None, "--values", help="Comma-separated sorted grid values")
OutOpt = typer.Option(None, "--out", "-o", help="Write the table to this file")
FormatOpt = typer.Option("csv", "--format", help="Table format: csv or json")
BitsOpt = typer.Option(False, "--bits", help="Report bits/sec/Hz instead of nats")


def _fail(message: str) -> NoReturn:
    from tincell.services.output import display_error

    display_error(message, console)
    raise typer.Exit(1)


def _output(out: Optional[Path], fmt: str, bits: bool = False) -> OutputConfig:
    if fmt not in ("csv", "json"):
        _fail(f"--format must be csv or json, got '{fmt}'")
    return OutputConfig(format=fmt, out_path=out, bits=bits, quiet=state.quiet)


def _parse_engines(text: str) -> frozenset[Engine]:
    try:
        return frozenset(Engine(p.strip()) for p in text.split(",") if p.strip())
    except ValueError:
        _fail(
            f"unknown engine in '{text}'; choose from "
            + ", ".join(e.value for e in Engine)
        )


def _parse_values(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        _fail(f"--values must be comma-separated numbers, got '{text}'")


def _manifest_option(value):
    return ",".join(value) if isinstance(value, tuple) else value


def _run_command(
    command: str,
    point: Callable,
    columns: list[str],
    args: SweepArgs,
    engines: str,
    policies: list[SchedulingPolicy],
    output: OutputConfig,
    **options,
):
    """Resolve configuration, run the sweep and emit its table.

    Returns:
        The result DataFrame
    """
    from pydantic import ValidationError

    from tincell.errors import TincellError
    from tincell.models.config import RunManifest, SweepSpec
    from tincell.services.config import load_config
    from tincell.services.output import create_progress, write_results
    from tincell.services.sweep import run_sweep

    try:
        loaded = load_config(args.config, args.overrides())
        run = loaded.run
        axis = args.axis or "theta_db"
        if args.values:
            grid = _parse_values(args.values)
        else:
            grid = (float(getattr(run, axis, run.theta_db)),)
        spec = SweepSpec(
            axis=axis,
            values=grid,
            fixed=run,
            engines=_parse_engines(engines),
            policies=tuple(dict.fromkeys(policies)),
        )
    except TincellError as e:
        _fail(str(e))
    except ValidationError as e:
        first = e.errors()[0]
        _fail(f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}")

    try:
        with create_progress(output.quiet) as progress:
            task = progress.add_task(f"{command}...", total=len(spec.values))
            frame = run_sweep(
                spec,
                point,
                columns=columns,
                workers=run.workers,
                on_point=lambda: progress.update(task, advance=1),
                **options,
            )
    except (TincellError, ValueError) as e:
        _fail(f"{type(e).__name__}: {e}")

    manifest = RunManifest(
        command=command,
        version=__version__,
        config=run,
        defaults=loaded.defaults,
        sweep_axis=spec.axis,
        sweep_values=spec.values,
        engines=tuple(sorted(spec.engines, key=lambda e: e.value)),
        policies=spec.policies,
        options={k: _manifest_option(v) for k, v in options.items()},
    )
    write_results(frame, manifest, output, console, title=command)
    return frame


@app.command()
def ptin(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    trials: Optional[int] = TrialsOpt,
    workers: Optional[int] = WorkersOpt,
    axis: Optional[str] = AxisOpt,
    values: Optional[str] = ValuesOpt,
    engines: str = typer.Option(
        "analytic", "--engines", help="Comma list of analytic, asymptotic, simulation"
    ),
    policy: list[SchedulingPolicy] = typer.Option(
        [SchedulingPolicy.TIN_SIMPLIFIED], "--policy", help="TIN policy (repeatable)"
    ),
    out: Optional[Path] = OutOpt,
    fmt: str = FormatOpt,
) -> None:
    """Probability that the typical cell stays on.

    Columns: parameters, engine, policy, metric=prob_tin, value,
    ci95_halfwidth, trials_used, flags.

    Examples:
        tincell ptin --axis mu --values 1,1.2,1.4,1.6,1.8,2
        tincell ptin --axis alpha --values 3,3.5,4,4.5
    """
    from tincell.services.sweep import METRIC_COLUMNS, ptin_point

    args = SweepArgs(config, seed, trials, workers, axis, values)
    _run_command(
        "ptin", ptin_point, METRIC_COLUMNS, args, engines, policy, _output(out, fmt)
    )


@app.command()
def coverage(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    trials: Optional[int] = TrialsOpt,
    workers: Optional[int] = WorkersOpt,
    axis: Optional[str] = AxisOpt,
    values: Optional[str] = ValuesOpt,
    engines: str = typer.Option(
        "analytic", "--engines", help="Comma list of analytic, asymptotic, simulation"
    ),
    policy: list[SchedulingPolicy] = typer.Option(
        [SchedulingPolicy.CLASSICAL, SchedulingPolicy.TIN_SIMPLIFIED],
        "--policy",
        help="Scheduling policy (repeatable)",
    ),
    out: Optional[Path] = OutOpt,
    fmt: str = FormatOpt,
) -> None:
    """Effective and conditional SINR coverage at theta_db.

    Columns: parameters, engine, policy, metric (effective, conditional,
    effective_series, effective_highsnr), value, ci95_halfwidth,
    trials_used, flags.
    """
    from tincell.services.sweep import METRIC_COLUMNS, coverage_point

    args = SweepArgs(config, seed, trials, workers, axis, values)
    _run_command(
        "coverage",
        coverage_point,
        METRIC_COLUMNS,
        args,
        engines,
        policy,
        _output(out, fmt),
    )


@app.command()
def rate(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    trials: Optional[int] = TrialsOpt,
    workers: Optional[int] = WorkersOpt,
    axis: Optional[str] = AxisOpt,
    values: Optional[str] = ValuesOpt,
    engines: str = typer.Option(
        "analytic", "--engines", help="Comma list of analytic, simulation"
    ),
    policy: list[SchedulingPolicy] = typer.Option(
        [SchedulingPolicy.CLASSICAL, SchedulingPolicy.TIN_SIMPLIFIED],
        "--policy",
        help="Scheduling policy (repeatable)",
    ),
    bits: bool = BitsOpt,
    out: Optional[Path] = OutOpt,
    fmt: str = FormatOpt,
) -> None:
    """Effective and conditional average rate, nats/sec/Hz unless --bits.

    Columns: parameters, engine, policy, metric (effective, conditional),
    value, ci95_halfwidth, trials_used, flags.
    """
    from tincell.services.sweep import METRIC_COLUMNS, rate_point

    output = _output(out, fmt, bits)
    args = SweepArgs(config, seed, trials, workers, axis, values)
    _run_command(
        "rate",
        rate_point,
        METRIC_COLUMNS,
        args,
        engines,
        policy,
        output,
        scale=output.rate_scale,
    )


@app.command("optimize-mu")
def optimize_mu(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    trials: Optional[int] = TrialsOpt,
    workers: Optional[int] = WorkersOpt,
    axis: Optional[str] = AxisOpt,
    values: Optional[str] = ValuesOpt,
    engines: str = typer.Option(
        "asymptotic",
        "--engines",
        help="asymptotic solves the optimality equation; analytic and "
        "simulation scan a mu grid",
    ),
    policy: list[SchedulingPolicy] = typer.Option(
        [SchedulingPolicy.TIN_SIMPLIFIED], "--policy", help="Policy for simulation"
    ),
    grid_step: float = typer.Option(0.01, "--grid-step", help="mu grid step"),
    out: Optional[Path] = OutOpt,
    fmt: str = FormatOpt,
) -> None:
    """Coverage-optimal mu.

    Columns: parameters, engine, policy, metric (mu_star, log_minuend,
    log_subtrahend, r_statistic, effective), value, ci95_halfwidth,
    trials_used, flags.

    Example:
        tincell optimize-mu --axis theta_db --values 0,5,10,15,20
    """
    from tincell.services.sweep import METRIC_COLUMNS, optimize_mu_point

    args = SweepArgs(config, seed, trials, workers, axis, values)
    _run_command(
        "optimize-mu",
        optimize_mu_point,
        METRIC_COLUMNS,
        args,
        engines,
        policy,
        _output(out, fmt),
        grid_step=grid_step,
    )


@app.command()
def compare(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    trials: Optional[int] = TrialsOpt,
    workers: Optional[int] = WorkersOpt,
    axis: Optional[str] = AxisOpt,
    values: Optional[str] = ValuesOpt,
    engines: str = typer.Option(
        "simulation", "--engines", help="Comma list of analytic, simulation"
    ),
    policy: list[SchedulingPolicy] = typer.Option(
        [SchedulingPolicy.TIN_EXACT, SchedulingPolicy.TIN_SIMPLIFIED],
        "--policy",
        help="TIN policy compared against classical (repeatable)",
    ),
    metric: str = typer.Option("both", "--metric", help="coverage, rate or both"),
    optimize: bool = typer.Option(
        False, "--optimize-mu", help="Use the coverage-optimal mu of each policy"
    ),
    grid_step: float = typer.Option(0.05, "--grid-step", help="mu grid step"),
    bits: bool = BitsOpt,
    out: Optional[Path] = OutOpt,
    fmt: str = FormatOpt,
) -> None:
    """Relative gain of TIN policies over classical scheduling.

    Columns: parameters, engine, policy, metric (coverage, rate), mu_used,
    baseline, treatment, relative_gain = (treatment - baseline) / baseline.

    Example:
        tincell compare --metric coverage --optimize-mu --trials 50000
    """
    from tincell.models.results import GainReport
    from tincell.services.output import display_gains
    from tincell.services.sweep import COMPARE_COLUMNS, compare_point

    metrics = ("coverage", "rate") if metric == "both" else (metric,)
    if any(m not in ("coverage", "rate") for m in metrics):
        _fail(f"--metric must be coverage, rate or both, got '{metric}'")
    output = _output(out, fmt, bits)
    args = SweepArgs(config, seed, trials, workers, axis, values)
    frame = _run_command(
        "compare",
        compare_point,
        COMPARE_COLUMNS,
        args,
        engines,
        policy,
        output,
        metrics=metrics,
        optimize=optimize,
        grid_step=grid_step,
        scale=output.rate_scale,
    )
    if not output.quiet and len(frame):
        reports = [
            (
                row.policy,
                row.metric,
                GainReport(baseline=row.baseline, treatment=row.treatment),
            )
            for row in frame.itertuples(index=False)
            if row.baseline > 0
        ]
        display_gains(reports, console)


@app.command()
def distances(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    trials: Optional[int] = TrialsOpt,
    workers: Optional[int] = WorkersOpt,
    policy: SchedulingPolicy = typer.Option(
        SchedulingPolicy.TIN_SIMPLIFIED, "--policy", help="Scheduling policy"
    ),
    active_only: bool = typer.Option(
        False, "--active-only", help="Condition the CDFs on an active typical cell"
    ),
    grid_points: int = typer.Option(200, "--grid-points", help="CDF grid size"),
    dump: Optional[Path] = typer.Option(
        None, "--dump", help="Also write every sampled triple to this CSV"
    ),
    out: Optional[Path] = OutOpt,
    fmt: str = FormatOpt,
) -> None:
    """Empirical CDFs of the typical-cell distances X11, X12 and X21.

    Columns: parameters, policy, x, ecdf_x11, ecdf_x12, ecdf_x21,
    cdf_x11_crofton, cdf_x21_crofton, samples.
    """
    from tincell.errors import TincellError
    from tincell.models.config import RunManifest
    from tincell.services.config import load_config
    from tincell.services.output import create_progress, sha256_file, write_results
    from tincell.services.simulator import dump_trials, run_trials
    from tincell.services.sweep import distance_cdf_frame

    output = _output(out, fmt)
    args = SweepArgs(config, seed, trials, workers, None, None)
    try:
        loaded = load_config(args.config, args.overrides())
        run = loaded.run
        with create_progress(output.quiet) as progress:
            task = progress.add_task("distances...", total=run.trials)
            outcomes = run_trials(
                run.simulation(policy),
                run.network(),
                run.tin(),
                on_progress=lambda n: progress.update(task, advance=n),
            )
        frame = distance_cdf_frame(run, policy, outcomes, active_only, grid_points)
    except (TincellError, ValueError) as e:
        _fail(f"{type(e).__name__}: {e}")

    artifacts = {}
    if dump is not None:
        dump_trials(outcomes, dump)
        artifacts[dump.name] = sha256_file(dump)
    manifest = RunManifest(
        command="distances",
        version=__version__,
        config=run,
        defaults=loaded.defaults,
        engines=(Engine.SIMULATION,),
        policies=(policy,),
        options={"active_only": active_only, "grid_points": grid_points},
        artifacts=artifacts,
    )
    write_results(frame, manifest, output, console, title="distances")


if __name__ == "__main__":
    app()
