"""Parameter sweeps over the analytic, asymptotic and simulation engines.

A sweep evaluates one point function at every grid value of a
``SweepSpec``. Each point returns a list of long-format rows that carry the
full parameter tuple, the engine and the policy that produced them. Rows
come back in grid order regardless of which worker finished first.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Any, Callable, Iterable, Protocol

import numpy as np
import pandas as pd

from tincell.errors import DegenerateConditioningError, UnsupportedRegimeError
from tincell.models.config import Engine, RunConfig, SweepSpec
from tincell.models.network import SchedulingPolicy
from tincell.models.results import GainReport, MetricEstimate
from tincell.models.simulation import TrialOutcomes
from tincell.services import analytics, asymptotics, simulator

logger = logging.getLogger(__name__)

PARAM_COLUMNS = [
    "lambda_b",
    "p_dbm",
    "n_dbm",
    "alpha",
    "m_factor",
    "mu",
    "theta_db",
    "window_side",
    "guard_fraction",
    "trials",
    "seed",
    "typical_cell",
    "lambda_u_mode",
]
METRIC_COLUMNS = PARAM_COLUMNS + [
    "engine",
    "policy",
    "metric",
    "value",
    "ci95_halfwidth",
    "trials_used",
    "flags",
]
COMPARE_COLUMNS = PARAM_COLUMNS + [
    "engine",
    "policy",
    "metric",
    "mu_used",
    "baseline",
    "treatment",
    "relative_gain",
]

TIN_POLICIES = (SchedulingPolicy.TIN_SIMPLIFIED, SchedulingPolicy.TIN_EXACT)

Row = dict[str, Any]


class PointFn(Protocol):
    def __call__(
        self,
        run: RunConfig,
        engines: frozenset[Engine],
        policies: tuple[SchedulingPolicy, ...],
    ) -> list[Row]: ...


def params(run: RunConfig) -> Row:
    """The parameter columns of a row."""
    data = run.model_dump(mode="json")
    return {column: data[column] for column in PARAM_COLUMNS}


def metric_row(
    run: RunConfig,
    engine: Engine,
    policy: SchedulingPolicy,
    metric: str,
    value: float,
    ci95_halfwidth: float = 0.0,
    trials_used: int = 0,
    flags: Iterable[str] = (),
) -> Row:
    return {
        **params(run),
        "engine": engine.value,
        "policy": policy.value,
        "metric": metric,
        "value": value,
        "ci95_halfwidth": ci95_halfwidth,
        "trials_used": trials_used,
        "flags": ";".join(flags),
    }


def estimate_row(
    run: RunConfig,
    policy: SchedulingPolicy,
    metric: str,
    estimate: MetricEstimate,
    scale: float = 1.0,
) -> Row:
    return metric_row(
        run,
        Engine.SIMULATION,
        policy,
        metric,
        estimate.mean * scale,
        estimate.ci95_halfwidth * scale,
        estimate.trials_used,
        ("undefined",) if estimate.flagged else (),
    )


def _guarded(
    run: RunConfig,
    engine: Engine,
    policy: SchedulingPolicy,
    metric: str,
    compute: Callable[[], float],
) -> Row:
    """Row for ``compute()``, or a NaN row flagged with the reason it has no value."""
    try:
        return metric_row(run, engine, policy, metric, compute())
    except UnsupportedRegimeError as e:
        logger.debug("%s/%s skipped: %s", engine.value, metric, e)
        return metric_row(run, engine, policy, metric, math.nan, flags=("unsupported",))
    except DegenerateConditioningError as e:
        logger.warning("%s: %s", metric, e)
        return metric_row(run, engine, policy, metric, math.nan, flags=("degenerate",))


def _approx_row(
    run: RunConfig, policy: SchedulingPolicy, metric: str, compute: Callable
) -> Row:
    try:
        result = compute()
    except UnsupportedRegimeError as e:
        logger.debug("asymptotic %s skipped: %s", metric, e)
        return metric_row(
            run, Engine.ASYMPTOTIC, policy, metric, math.nan, flags=("unsupported",)
        )
    return metric_row(
        run, Engine.ASYMPTOTIC, policy, metric, result.value, flags=result.flags
    )


def ptin_point(
    run: RunConfig,
    engines: frozenset[Engine],
    policies: tuple[SchedulingPolicy, ...],
) -> list[Row]:
    """Probability of TIN from every requested engine."""
    net, tin = run.network(), run.tin()
    rows: list[Row] = []
    for policy in policies:
        if policy is SchedulingPolicy.CLASSICAL:
            continue
        if policy is SchedulingPolicy.TIN_SIMPLIFIED:
            if Engine.ANALYTIC in engines:
                result = analytics.prob_tin(net, tin)
                rows.append(
                    metric_row(run, Engine.ANALYTIC, policy, "prob_tin", result.value)
                )
            if Engine.ASYMPTOTIC in engines:
                rows.append(
                    _approx_row(
                        run,
                        policy,
                        "prob_tin",
                        lambda: asymptotics.prob_tin_highsnr(net, tin),
                    )
                )
        if Engine.SIMULATION in engines:
            estimate = simulator.estimate_prob_tin(
                run.simulation(policy), net, tin, policy
            )
            rows.append(estimate_row(run, policy, "prob_tin", estimate))
    return rows


def coverage_point(
    run: RunConfig,
    engines: frozenset[Engine],
    policies: tuple[SchedulingPolicy, ...],
) -> list[Row]:
    """Effective and conditional SINR coverage at ``run.theta``."""
    net, tin, theta = run.network(), run.tin(), run.theta
    rows: list[Row] = []
    for policy in policies:
        if Engine.ANALYTIC in engines:
            if policy is SchedulingPolicy.CLASSICAL:
                value = analytics.coverage_classical(theta, net).value
                rows.append(
                    metric_row(run, Engine.ANALYTIC, policy, "effective", value)
                )
                rows.append(
                    metric_row(run, Engine.ANALYTIC, policy, "conditional", value)
                )
            elif policy is SchedulingPolicy.TIN_SIMPLIFIED:
                p_a = analytics.prob_tin(net, tin).value
                rows.append(
                    _guarded(
                        run,
                        Engine.ANALYTIC,
                        policy,
                        "effective",
                        lambda: analytics.coverage_effective(
                            theta, net, tin, p_a
                        ).value,
                    )
                )
                rows.append(
                    _guarded(
                        run,
                        Engine.ANALYTIC,
                        policy,
                        "conditional",
                        lambda: analytics.coverage_active(theta, net, tin, p_a).value,
                    )
                )
        if Engine.ASYMPTOTIC in engines and policy is SchedulingPolicy.TIN_SIMPLIFIED:
            rows.append(
                _approx_row(
                    run,
                    policy,
                    "effective_series",
                    lambda: asymptotics.coverage_series(theta, net, tin),
                )
            )
            rows.append(
                _approx_row(
                    run,
                    policy,
                    "effective_highsnr",
                    lambda: asymptotics.coverage_highsnr_integral(theta, net, tin),
                )
            )
        if Engine.SIMULATION in engines:
            effective, conditional = simulator.estimate_coverage(
                run.simulation(policy), net, tin, theta
            )
            rows.append(estimate_row(run, policy, "effective", effective))
            rows.append(estimate_row(run, policy, "conditional", conditional))
    return rows


def rate_point(
    run: RunConfig,
    engines: frozenset[Engine],
    policies: tuple[SchedulingPolicy, ...],
    scale: float = 1.0,
) -> list[Row]:
    """Effective and conditional average rate; ``scale`` converts nats to bits."""
    net, tin = run.network(), run.tin()
    rows: list[Row] = []
    for policy in policies:
        if Engine.ANALYTIC in engines:
            if policy is SchedulingPolicy.CLASSICAL:
                value = analytics.rate_classical(net).value * scale
                rows.append(
                    metric_row(run, Engine.ANALYTIC, policy, "effective", value)
                )
                rows.append(
                    metric_row(run, Engine.ANALYTIC, policy, "conditional", value)
                )
            elif policy is SchedulingPolicy.TIN_SIMPLIFIED:
                p_a = analytics.prob_tin(net, tin).value
                rows.append(
                    _guarded(
                        run,
                        Engine.ANALYTIC,
                        policy,
                        "effective",
                        lambda: analytics.rate_effective(net, tin, p_a).value * scale,
                    )
                )
                rows.append(
                    _guarded(
                        run,
                        Engine.ANALYTIC,
                        policy,
                        "conditional",
                        lambda: analytics.rate_active(net, tin, p_a).value * scale,
                    )
                )
        if Engine.SIMULATION in engines:
            effective, conditional = simulator.estimate_rate(
                run.simulation(policy), net, tin
            )
            rows.append(estimate_row(run, policy, "effective", effective, scale))
            rows.append(estimate_row(run, policy, "conditional", conditional, scale))
    return rows


def mu_grid(step: float) -> list[float]:
    return [float(mu) for mu in np.linspace(1.0, 2.0, int(round(1.0 / step)) + 1)]


def optimize_mu_point(
    run: RunConfig,
    engines: frozenset[Engine],
    policies: tuple[SchedulingPolicy, ...],
    grid_step: float = 0.01,
) -> list[Row]:
    """Coverage-optimal mu at ``run.theta``.

    The asymptotic engine solves the optimal-mu equation and also reports
    both of its terms and R at the root. The analytic engine scans the
    exact effective coverage, and the simulation engine scans simulated
    coverage, on a grid of step ``grid_step``.
    """
    net, theta = run.network(), run.theta
    rows: list[Row] = []
    policy = SchedulingPolicy.TIN_SIMPLIFIED
    if Engine.ASYMPTOTIC in engines:
        try:
            optimum = asymptotics.solve_optimal_mu(theta, net)
        except UnsupportedRegimeError as e:
            logger.debug("asymptotic optimizer skipped: %s", e)
            rows.append(
                metric_row(
                    run,
                    Engine.ASYMPTOTIC,
                    policy,
                    "mu_star",
                    math.nan,
                    flags=("unsupported",),
                )
            )
        else:
            flags = (optimum.flag,) if optimum.flag else ()
            terms = asymptotics.optimality_terms(optimum.mu, theta, net)
            at_root = run.model_copy(update={"mu": optimum.mu, "m_factor": 1.0})
            r = asymptotics.r_statistic(theta, net, at_root.tin())
            for metric, value in (
                ("mu_star", optimum.mu),
                ("log_minuend", terms.log_minuend),
                ("log_subtrahend", terms.log_subtrahend),
                ("r_statistic", r),
            ):
                rows.append(
                    metric_row(
                        run, Engine.ASYMPTOTIC, policy, metric, value, flags=flags
                    )
                )
    if Engine.ANALYTIC in engines:
        best = asymptotics.argmax_mu_exact(theta, net, grid_step, run.m_factor)
        rows.append(metric_row(run, Engine.ANALYTIC, policy, "mu_star", best.mu))
        rows.append(metric_row(run, Engine.ANALYTIC, policy, "effective", best.value))
    if Engine.SIMULATION in engines:
        for sim_policy in policies:
            if sim_policy is SchedulingPolicy.CLASSICAL:
                continue
            found = simulator.optimize_mu_simulated(
                run.simulation(sim_policy),
                net,
                theta,
                sim_policy,
                mu_grid(grid_step),
                run.m_factor,
            )
            rows.append(
                metric_row(
                    run,
                    Engine.SIMULATION,
                    sim_policy,
                    "mu_star",
                    found.mu,
                    trials_used=found.coverage.trials_used,
                )
            )
            rows.append(estimate_row(run, sim_policy, "effective", found.coverage))
    return rows


def _gain_row(
    run: RunConfig,
    engine: Engine,
    policy: SchedulingPolicy,
    metric: str,
    mu_used: float,
    report: GainReport,
) -> Row:
    return {
        **params(run),
        "engine": engine.value,
        "policy": policy.value,
        "metric": metric,
        "mu_used": mu_used,
        "baseline": report.baseline,
        "treatment": report.treatment,
        "relative_gain": report.relative_gain,
    }


def compare_point(
    run: RunConfig,
    engines: frozenset[Engine],
    policies: tuple[SchedulingPolicy, ...],
    metrics: tuple[str, ...] = ("coverage", "rate"),
    optimize: bool = False,
    grid_step: float = 0.05,
    scale: float = 1.0,
) -> list[Row]:
    """Gain of each TIN policy over classical scheduling.

    With ``optimize`` the coverage comparison uses the mu that maximizes
    coverage for each policy; the rate comparison always uses ``run.mu``.
    """
    net, theta = run.network(), run.theta
    rows: list[Row] = []
    tin_policies = [p for p in policies if p is not SchedulingPolicy.CLASSICAL]

    if Engine.ANALYTIC in engines and SchedulingPolicy.TIN_SIMPLIFIED in tin_policies:
        policy = SchedulingPolicy.TIN_SIMPLIFIED
        if "coverage" in metrics:
            mu = run.mu
            if optimize:
                mu = asymptotics.argmax_mu_exact(theta, net, grid_step, run.m_factor).mu
            tin = run.model_copy(update={"mu": mu}).tin()
            report = GainReport(
                baseline=analytics.coverage_classical(theta, net).value,
                treatment=analytics.coverage_effective(theta, net, tin).value,
            )
            rows.append(_gain_row(run, Engine.ANALYTIC, policy, "coverage", mu, report))
        if "rate" in metrics:
            report = GainReport(
                baseline=analytics.rate_classical(net).value * scale,
                treatment=analytics.rate_effective(net, run.tin()).value * scale,
            )
            rows.append(_gain_row(run, Engine.ANALYTIC, policy, "rate", run.mu, report))

    if Engine.SIMULATION in engines and tin_policies:
        classical = simulator.run_trials(
            run.simulation(SchedulingPolicy.CLASSICAL), net, run.tin()
        )
        for policy in tin_policies:
            sim = run.simulation(policy)
            if "coverage" in metrics:
                baseline, _ = simulator.coverage_from_outcomes(classical, theta)
                if optimize:
                    found = simulator.optimize_mu_simulated(
                        sim, net, theta, policy, mu_grid(grid_step), run.m_factor
                    )
                    mu, treatment = found.mu, found.coverage
                else:
                    mu = run.mu
                    outcomes = simulator.run_trials(sim, net, run.tin())
                    treatment, _ = simulator.coverage_from_outcomes(outcomes, theta)
                report = GainReport(baseline=baseline.mean, treatment=treatment.mean)
                rows.append(
                    _gain_row(run, Engine.SIMULATION, policy, "coverage", mu, report)
                )
            if "rate" in metrics:
                baseline, _ = simulator.rate_from_outcomes(classical)
                outcomes = simulator.run_trials(sim, net, run.tin())
                treatment, _ = simulator.rate_from_outcomes(outcomes)
                report = GainReport(
                    baseline=baseline.mean * scale, treatment=treatment.mean * scale
                )
                rows.append(
                    _gain_row(run, Engine.SIMULATION, policy, "rate", run.mu, report)
                )
    return rows


def _evaluate(point: Callable[[RunConfig], list[Row]], run: RunConfig) -> list[Row]:
    return point(run)


def run_sweep(
    spec: SweepSpec,
    point: PointFn,
    columns: list[str] = METRIC_COLUMNS,
    workers: int = 1,
    on_point: Callable[[], None] | None = None,
    **options: Any,
) -> pd.DataFrame:
    """Evaluate ``point`` at every grid value of ``spec``.

    Args:
        spec: Grid, fixed parameters, engines and policies
        point: Point function such as ``coverage_point``
        columns: Column order of the returned frame
        workers: Size of the process pool for grid points. Sweeps that
            include the simulation engine evaluate points one by one and
            hand the pool to the trial engine instead.
        on_point: Called after every finished grid point
        **options: Extra keyword arguments for ``point``

    Returns:
        DataFrame with the rows of all points in grid order
    """
    bound = partial(point, engines=spec.engines, policies=spec.policies, **options)
    runs = [spec.point(value) for value in spec.values]
    logger.info("sweeping %s over %d values", spec.axis, len(runs))

    results: list[list[Row]] = []
    if workers > 1 and Engine.SIMULATION not in spec.engines:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rows in pool.map(partial(_evaluate, bound), runs):
                results.append(rows)
                if on_point:
                    on_point()
    else:
        for run in runs:
            results.append(bound(run))
            if on_point:
                on_point()

    flat = [row for rows in results for row in rows]
    return pd.DataFrame(flat, columns=columns)


DISTANCE_COLUMNS = PARAM_COLUMNS + [
    "policy",
    "x",
    "ecdf_x11",
    "ecdf_x12",
    "ecdf_x21",
    "cdf_x11_crofton",
    "cdf_x21_crofton",
    "samples",
]


def _ecdf(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return np.searchsorted(np.sort(samples), grid, side="right") / samples.size


def distance_cdf_frame(
    run: RunConfig,
    policy: SchedulingPolicy,
    outcomes: TrialOutcomes,
    active_only: bool = False,
    grid_points: int = 200,
) -> pd.DataFrame:
    """Empirical CDFs of X11, X12, X21 next to the Crofton-cell closed forms.

    Raises:
        DegenerateConditioningError: If ``active_only`` and no trial had an
            active typical cell
    """
    triples = outcomes.triples[outcomes.active] if active_only else outcomes.triples
    if len(triples) == 0:
        raise DegenerateConditioningError("no trial with an active typical cell")
    finite = triples[np.isfinite(triples)]
    grid = np.linspace(0.0, float(np.quantile(finite, 0.999)), grid_points)
    frame = pd.DataFrame(
        {
            "x": grid,
            "ecdf_x11": _ecdf(triples[:, 0], grid),
            "ecdf_x12": _ecdf(triples[:, 1], grid),
            "ecdf_x21": _ecdf(triples[:, 2], grid),
            "cdf_x11_crofton": analytics.x11_marginal_cdf(grid, run.lambda_b),
            "cdf_x21_crofton": analytics.x21_marginal_cdf(grid, run.lambda_b),
            "samples": len(triples),
        }
    )
    for column, value in params(run).items():
        frame[column] = value
    frame["policy"] = policy.value
    return frame[DISTANCE_COLUMNS]
