"""Monte Carlo engine for the two-step TIN scheduler.

Each trial drops a Poisson field of BSs in a square window, tags one UE
per Voronoi cell, schedules every cell in a single pass on that step-one
configuration, and measures the SINR of the typical cell under Rayleigh
fading. Trial ``i`` draws all of its randomness from
``default_rng([master_seed, i])``, so results do not depend on how trials
are split across worker processes.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from tincell.errors import DomainError
from tincell.models.network import (
    DistanceTriple,
    NetworkParams,
    SchedulingPolicy,
    TinParams,
)
from tincell.models.results import MetricEstimate
from tincell.models.simulation import (
    NetworkRealization,
    SimulationConfig,
    TrialOutcomes,
    TypicalCell,
    Victims,
)
from tincell.services.conditions import tin_exact_mask, tin_simplified_mask

logger = logging.getLogger(__name__)

Z_95 = 1.959963984540054

# Fewer BSs than this cannot define x12 and x21 for every cell.
MIN_BS = 3
MAX_RESAMPLES = 1000
MAX_CHUNK = 1000

TRIAL_COLUMNS = ["trial", "active", "sinr", "x11", "x12", "x21"]


class CellDistances(NamedTuple):
    """Per-cell distances; NaN for cells without a tagged UE."""

    x11: np.ndarray
    x12: np.ndarray
    x21: np.ndarray


class SimulatedOptimum(NamedTuple):
    mu: float
    coverage: MetricEstimate


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream of one trial, keyed on (master_seed, trial_index)."""
    return np.random.default_rng([master_seed, trial_index])


def _tag_ues_dense(
    rng: np.random.Generator, bs_tree: cKDTree, n: int, side: float
) -> np.ndarray:
    """Uniform point in every Voronoi cell by rejection against the nearest BS."""
    tagged = np.full((n, 2), np.nan)
    missing = np.ones(n, dtype=bool)
    rounds = 0
    while missing.any():
        points = rng.uniform(0.0, side, size=(4 * n, 2))
        _, owner = bs_tree.query(points)
        owners, first = np.unique(owner, return_index=True)
        hit = missing[owners]
        tagged[owners[hit]] = points[first[hit]]
        missing[owners[hit]] = False
        rounds += 1
    logger.debug("tagged %d cells in %d rounds", n, rounds)
    return tagged


def _tag_ues_sparse(
    rng: np.random.Generator, bs_tree: cKDTree, n: int, side: float, lambda_u: float
) -> np.ndarray:
    """One uniformly chosen UE of a UE PPP per cell; cells with none stay NaN."""
    tagged = np.full((n, 2), np.nan)
    count = rng.poisson(lambda_u * side * side)
    if count == 0:
        return tagged
    points = rng.uniform(0.0, side, size=(count, 2))
    points = points[rng.permutation(count)]
    _, owner = bs_tree.query(points)
    owners, first = np.unique(owner, return_index=True)
    tagged[owners] = points[first]
    return tagged


def _interior(points: np.ndarray, side: float, guard_fraction: float) -> np.ndarray:
    lo, hi = guard_fraction * side, (1.0 - guard_fraction) * side
    return np.all((points >= lo) & (points <= hi), axis=1)


def sample_network(
    cfg: SimulationConfig,
    net: NetworkParams,
    trial_seed: int | Sequence[int] | np.random.Generator,
) -> NetworkRealization:
    """Drop one network and pick its typical cell.

    In ``crofton`` mode the typical UE sits at the window center and the
    typical cell is the one containing it. In ``random`` mode the typical
    cell is drawn uniformly among cells whose BS lies outside the guard
    band and that have a tagged UE. Drops with too few BSs, or with no
    eligible typical cell, are redrawn from the same stream.
    """
    rng = (
        trial_seed
        if isinstance(trial_seed, np.random.Generator)
        else np.random.default_rng(trial_seed)
    )
    side = cfg.resolve_window(net)
    center = np.array([side / 2.0, side / 2.0])

    for _ in range(MAX_RESAMPLES):
        n = int(rng.poisson(net.lambda_b * side * side))
        if n < MIN_BS:
            logger.debug("drop with %d BSs redrawn", n)
            continue
        bs = rng.uniform(0.0, side, size=(n, 2))
        tree = cKDTree(bs)
        if cfg.lambda_u is None:
            tagged = _tag_ues_dense(rng, tree, n, side)
        else:
            tagged = _tag_ues_sparse(rng, tree, n, side, cfg.lambda_u)

        if cfg.typical_cell is TypicalCell.CROFTON:
            _, typical = tree.query(center)
            tagged[typical] = center
            return NetworkRealization(bs, tagged, int(typical), side)

        eligible = np.flatnonzero(
            _interior(bs, side, cfg.guard_fraction) & ~np.isnan(tagged[:, 0])
        )
        if eligible.size == 0:
            logger.debug("drop without an eligible typical cell redrawn")
            continue
        return NetworkRealization(bs, tagged, int(rng.choice(eligible)), side)

    raise DomainError(
        f"no usable drop in {MAX_RESAMPLES} attempts; "
        f"lambda_b={net.lambda_b}, window side={side}"
    )


def _nearest_other(
    points: np.ndarray | cKDTree,
    owners: np.ndarray,
    queries: np.ndarray,
    self_ids: np.ndarray,
) -> np.ndarray:
    """Distance from each query point to the nearest point not its own."""
    if len(owners) == 0:
        return np.full(len(queries), np.inf)
    tree = points if isinstance(points, cKDTree) else cKDTree(points)
    if len(owners) == 1:
        d, j = tree.query(queries)
        return np.where(owners[j] == self_ids, np.inf, d)
    d, j = tree.query(queries, k=2)
    return np.where(owners[j[:, 0]] == self_ids, d[:, 1], d[:, 0])


def cell_distances(
    real: NetworkRealization,
    net: NetworkParams,
    tin: TinParams,
    victims: Victims = Victims.ALL,
    bs_tree: cKDTree | None = None,
) -> CellDistances:
    """x11, x12 and x21 of every cell of a realization.

    x21 is the distance from the tagged UE to the nearest other BS and
    x12 the distance from the BS to the nearest tagged UE of another cell.
    With ``Victims.ACTIVE`` only UEs of cells that pass the simplified
    condition count as victims.
    """
    bs = real.bs_points
    n = len(bs)
    tree = bs_tree if bs_tree is not None else cKDTree(bs)
    served = np.flatnonzero(real.has_ue)
    ue = real.tagged_ue[served]

    x11 = np.full(n, np.nan)
    x21 = np.full(n, np.nan)
    x11[served] = np.linalg.norm(bs[served] - ue, axis=1)
    x21[served] = _nearest_other(tree, np.arange(n), ue, served)

    victim_cells = served
    if victims is Victims.ACTIVE:
        victim_cells = served[tin_simplified_mask(x11[served], x21[served], net, tin)]
    x12 = _nearest_other(real.tagged_ue[victim_cells], victim_cells, bs, np.arange(n))
    return CellDistances(x11, x12, x21)


def extract_distances(
    real: NetworkRealization,
    net: NetworkParams,
    tin: TinParams,
    victims: Victims = Victims.ALL,
    index: int | None = None,
) -> DistanceTriple:
    """Distance triple of the typical cell, or of cell ``index``."""
    d = cell_distances(real, net, tin, victims)
    i = real.typical_index if index is None else index
    return DistanceTriple(x11=d.x11[i], x12=d.x12[i], x21=d.x21[i])


def _schedule(
    real: NetworkRealization,
    distances: CellDistances,
    policy: SchedulingPolicy,
    net: NetworkParams,
    tin: TinParams,
) -> np.ndarray:
    if policy is SchedulingPolicy.CLASSICAL:
        return real.has_ue.copy()
    with np.errstate(invalid="ignore"):
        if policy is SchedulingPolicy.TIN_SIMPLIFIED:
            keep = tin_simplified_mask(distances.x11, distances.x21, net, tin)
        else:
            keep = tin_exact_mask(
                distances.x11, distances.x12, distances.x21, net, tin
            )
    return real.has_ue & keep


def apply_scheduling(
    real: NetworkRealization,
    policy: SchedulingPolicy,
    net: NetworkParams,
    tin: TinParams,
    victims: Victims = Victims.ALL,
) -> np.ndarray:
    """Boolean mask of the BSs that stay on after step two.

    All checks use the step-one configuration; switching one BS off never
    re-triggers the checks of its neighbours.
    """
    distances = cell_distances(real, net, tin, victims)
    return _schedule(real, distances, policy, net, tin)


def _typical_sinr(
    real: NetworkRealization,
    active: np.ndarray,
    net: NetworkParams,
    rng: np.random.Generator,
) -> float:
    on = np.flatnonzero(active)
    ue = real.tagged_ue[real.typical_index]
    dist = np.linalg.norm(real.bs_points[on] - ue, axis=1)
    power = rng.exponential(1.0, size=on.size) * dist ** (-net.alpha)
    serving = on == real.typical_index
    signal = float(power[serving].sum())
    interference = float(power[~serving].sum())
    return signal / (interference + 1.0 / net.beta)


def run_trial(
    index: int,
    cfg: SimulationConfig,
    net: NetworkParams,
    tin: TinParams,
) -> tuple[bool, float, tuple[float, float, float]]:
    """One trial: (typical cell active, SINR or NaN, (x11, x12, x21))."""
    rng = trial_rng(cfg.master_seed, index)
    real = sample_network(cfg, net, rng)
    distances = cell_distances(real, net, tin, cfg.victims)
    active = _schedule(real, distances, cfg.policy, net, tin)
    t = real.typical_index
    triple = (distances.x11[t], distances.x12[t], distances.x21[t])
    if not active[t]:
        return False, math.nan, triple
    return True, _typical_sinr(real, active, net, rng), triple


def _run_chunk(
    args: tuple[int, int, SimulationConfig, NetworkParams, TinParams],
) -> TrialOutcomes:
    start, stop, cfg, net, tin = args
    rows = [run_trial(i, cfg, net, tin) for i in range(start, stop)]
    return TrialOutcomes(
        active=np.array([r[0] for r in rows], dtype=bool),
        sinr=np.array([r[1] for r in rows], dtype=float),
        triples=np.array([r[2] for r in rows], dtype=float).reshape(-1, 3),
    )


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, min(MAX_CHUNK, math.ceil(trials / (8 * workers))))
    return [(s, min(s + size, trials)) for s in range(0, trials, size)]


def run_trials(
    cfg: SimulationConfig,
    net: NetworkParams,
    tin: TinParams,
    on_progress: Callable[[int], None] | None = None,
) -> TrialOutcomes:
    """Run ``cfg.trials`` trials and return their outcomes in trial order.

    Args:
        cfg: Simulation settings; ``cfg.workers > 1`` fans chunks out to a
            process pool
        net: Network parameters
        tin: TIN parameters (ignored by the classical policy)
        on_progress: Called with the number of trials finished per chunk

    Returns:
        TrialOutcomes, identical for any worker count
    """
    cfg.resolve_window(net)
    tasks = [(s, e, cfg, net, tin) for s, e in _chunks(cfg.trials, cfg.workers)]
    logger.info(
        "running %d trials (%s, %d workers)", cfg.trials, cfg.policy.value, cfg.workers
    )

    parts: list[TrialOutcomes] = []
    if cfg.workers == 1:
        results = map(_run_chunk, tasks)
        for part in results:
            parts.append(part)
            if on_progress:
                on_progress(part.trials)
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for part in pool.map(_run_chunk, tasks):
                parts.append(part)
                if on_progress:
                    on_progress(part.trials)

    return TrialOutcomes(
        active=np.concatenate([p.active for p in parts]),
        sinr=np.concatenate([p.sinr for p in parts]),
        triples=np.concatenate([p.triples for p in parts]),
    )


def _estimate(samples: np.ndarray) -> MetricEstimate:
    n = int(samples.size)
    if n == 0:
        logger.warning("estimate undefined: no samples")
        return MetricEstimate(
            mean=math.nan, ci95_halfwidth=0.0, trials_used=0, flagged=True
        )
    half = Z_95 * float(samples.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return MetricEstimate(
        mean=float(samples.mean()), ci95_halfwidth=half, trials_used=n
    )


def coverage_from_outcomes(
    outcomes: TrialOutcomes, theta: float
) -> tuple[MetricEstimate, MetricEstimate]:
    """Effective and conditional coverage at threshold ``theta``."""
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta!r}")
    with np.errstate(invalid="ignore"):
        covered = outcomes.active & (outcomes.sinr >= theta)
    effective = _estimate(covered.astype(float))
    conditional = _estimate(covered[outcomes.active].astype(float))
    return effective, conditional


def rate_from_outcomes(
    outcomes: TrialOutcomes,
) -> tuple[MetricEstimate, MetricEstimate]:
    """Effective and conditional rate, nats/sec/Hz."""
    rate = np.where(outcomes.active, np.log1p(np.nan_to_num(outcomes.sinr)), 0.0)
    return _estimate(rate), _estimate(rate[outcomes.active])


def estimate_prob_tin(
    cfg: SimulationConfig,
    net: NetworkParams,
    tin: TinParams,
    policy: SchedulingPolicy,
    on_progress: Callable[[int], None] | None = None,
) -> MetricEstimate:
    """Fraction of trials in which the typical cell stays on."""
    if policy is SchedulingPolicy.CLASSICAL:
        raise DomainError("probability of TIN needs a TIN policy")
    sim = cfg.model_copy(update={"policy": policy})
    outcomes = run_trials(sim, net, tin, on_progress)
    return _estimate(outcomes.active.astype(float))


def estimate_coverage(
    cfg: SimulationConfig,
    net: NetworkParams,
    tin: TinParams,
    theta: float,
    on_progress: Callable[[int], None] | None = None,
) -> tuple[MetricEstimate, MetricEstimate]:
    """Effective and conditional SINR coverage under ``cfg.policy``."""
    return coverage_from_outcomes(run_trials(cfg, net, tin, on_progress), theta)


def estimate_rate(
    cfg: SimulationConfig,
    net: NetworkParams,
    tin: TinParams,
    on_progress: Callable[[int], None] | None = None,
) -> tuple[MetricEstimate, MetricEstimate]:
    """Effective and conditional average rate under ``cfg.policy``."""
    return rate_from_outcomes(run_trials(cfg, net, tin, on_progress))


def sample_distance_triples(
    cfg: SimulationConfig,
    net: NetworkParams,
    tin: TinParams,
    policy: SchedulingPolicy,
    n: int,
) -> list[tuple[DistanceTriple, bool]]:
    """``n`` typical-cell distance triples with their activity flags."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    outcomes = run_trials(
        cfg.model_copy(update={"trials": n, "policy": policy}), net, tin
    )
    return [
        (DistanceTriple(x11=row[0], x12=row[1], x21=row[2]), bool(on))
        for row, on in zip(outcomes.triples, outcomes.active)
    ]


def optimize_mu_simulated(
    cfg: SimulationConfig,
    net: NetworkParams,
    theta: float,
    policy: SchedulingPolicy,
    grid: Sequence[float],
    m_factor: float = 1.0,
) -> SimulatedOptimum:
    """Grid search for the mu that maximizes simulated effective coverage.

    Every grid point reuses the same trial seeds.
    """
    if not grid:
        raise DomainError("mu grid is empty")
    sim = cfg.model_copy(update={"policy": policy})
    best: SimulatedOptimum | None = None
    for mu in grid:
        tin = TinParams(m_factor=m_factor, mu=mu)
        effective, _ = coverage_from_outcomes(run_trials(sim, net, tin), theta)
        logger.debug("mu=%.3f effective coverage %.4f", mu, effective.mean)
        if best is None or effective.mean > best.coverage.mean:
            best = SimulatedOptimum(mu=float(mu), coverage=effective)
    return best


def outcomes_frame(outcomes: TrialOutcomes) -> pd.DataFrame:
    """Per-trial table with columns ``TRIAL_COLUMNS``."""
    return pd.DataFrame(
        {
            "trial": np.arange(outcomes.trials),
            "active": outcomes.active,
            "sinr": outcomes.sinr,
            "x11": outcomes.triples[:, 0],
            "x12": outcomes.triples[:, 1],
            "x21": outcomes.triples[:, 2],
        },
        columns=TRIAL_COLUMNS,
    )


def dump_trials(outcomes: TrialOutcomes, path: Path) -> Path:
    """Write the per-trial table as comma-delimited text."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    outcomes_frame(outcomes).to_csv(path, index=False, float_format="%.17g")
    return path
