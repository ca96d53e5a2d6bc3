"""Full clustering-plus-weighting synthesis loop.

For every angular sample of the clustering grid, the normalized
elementary-pattern column is clustered with several seeded k-means
restarts; each distinct partition is weighted by alternating projections
and scored with the pattern-matching metric. The best trial across all
samples and restarts is returned, together with per-sample diagnostics.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .elementary import ep_matrix
from .kmeans import kmeans_cluster
from .model import (
    AngularGrid,
    ArrayGeometry,
    ClusteringVector,
    PowerPattern,
    as_excitations,
    fpa_power_pattern,
)
from .weighting import ipm_weighting

DEGENERATE_RTOL = 1e-14


class SynthesisFailedError(RuntimeError):
    """Raised when no angular sample yields a usable clustering."""


@dataclass(frozen=True)
class PmmConfig:
    """Knobs of the synthesis loop.

    grid_m is the clustering grid (where elementary-pattern columns are
    taken); metric_m is the grid used for weighting and for the reported
    metric, defaulting to the clustering grid.
    """

    q_count: int
    grid_m: int = 17
    metric_m: int | None = None
    restarts: int = 50
    base_seed: int = 0
    kmeans_max_iter: int = 100
    ipm_max_iter: int = 200
    ipm_tol: float = 1e-6

    def __post_init__(self):
        if self.q_count < 1:
            raise ValueError(f"q_count must be >= 1, got {self.q_count}")
        if self.grid_m < 2:
            raise ValueError(f"grid_m must be >= 2, got {self.grid_m}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")

    @property
    def effective_metric_m(self) -> int:
        return self.grid_m if self.metric_m is None else self.metric_m


@dataclass
class SampleOutcome:
    """Best trial obtained at one angular sample."""

    sample_index: int
    u: float
    gamma: float
    clustering: ClusteringVector | None
    weights: np.ndarray | None
    seed_index: int | None
    degenerate: bool = False


@dataclass
class SynthesisResult:
    """Optimal clustering, sub-array weights, and metric of a synthesis run."""

    clustering: ClusteringVector
    weights: np.ndarray
    gamma: float
    per_sample: list[SampleOutcome] = field(default_factory=list)
    best_sample_index: int | None = None
    method: str = "pmm"


def _evaluate_sample(
    geometry: ArrayGeometry,
    excitations: np.ndarray,
    reference: PowerPattern,
    config: PmmConfig,
    sample_index: int,
    u_value: float,
    column: np.ndarray,
    scale: float,
) -> SampleOutcome:
    peak = np.abs(column).max()
    if peak <= DEGENERATE_RTOL * scale:
        return SampleOutcome(sample_index, u_value, np.inf, None, None, None, degenerate=True)

    points = column / peak
    cache: dict[tuple, object] = {}
    best: SampleOutcome | None = None
    for s in range(config.restarts):
        result = kmeans_cluster(
            points, config.q_count, seed=config.base_seed + s, max_iter=config.kmeans_max_iter
        )
        key = tuple(result.clustering.assignments)
        trace = cache.get(key)
        if trace is None:
            trace = ipm_weighting(
                geometry,
                result.clustering,
                excitations,
                reference,
                max_iter=config.ipm_max_iter,
                tol=config.ipm_tol,
            )
            cache[key] = trace
        if best is None or trace.best_gamma < best.gamma:
            best = SampleOutcome(
                sample_index,
                u_value,
                trace.best_gamma,
                result.clustering,
                trace.final_weights,
                seed_index=s,
            )
    return best


_POOL_CTX: dict = {}


def _pool_init(geometry, excitations, reference, config, scale):
    _POOL_CTX.update(
        geometry=geometry,
        excitations=excitations,
        reference=reference,
        config=config,
        scale=scale,
    )


def _pool_task(args):
    sample_index, u_value, column = args
    return _evaluate_sample(
        _POOL_CTX["geometry"],
        _POOL_CTX["excitations"],
        _POOL_CTX["reference"],
        _POOL_CTX["config"],
        sample_index,
        u_value,
        column,
        _POOL_CTX["scale"],
    )


def pmm_synthesize(
    geometry: ArrayGeometry,
    reference_excitations,
    config: PmmConfig,
    threads: int = 1,
) -> SynthesisResult:
    """Synthesize a clustered array matching the reference power pattern.

    Deterministic for fixed inputs and base_seed regardless of ``threads``:
    samples are evaluated independently and reduced in grid order, with
    ties broken toward the smaller sample index (then the smaller restart
    index within a sample).
    """
    exc = as_excitations(reference_excitations, geometry.n_elements, require_nonzero=True)
    if config.q_count > geometry.n_elements:
        raise ValueError(
            f"q_count={config.q_count} exceeds n_elements={geometry.n_elements}"
        )
    if config.effective_metric_m < geometry.n_elements + 1:
        raise ValueError(
            f"metric grid must have M >= N+1 = {geometry.n_elements + 1} samples, "
            f"got M = {config.effective_metric_m}"
        )

    cluster_grid = AngularGrid(config.grid_m)
    metric_grid = AngularGrid(config.effective_metric_m)
    reference = fpa_power_pattern(geometry, exc, metric_grid)
    scale = float(reference.values.max())
    eps = ep_matrix(geometry, exc, cluster_grid)

    tasks = [
        (m, float(cluster_grid.u[m]), eps.column(m)) for m in range(config.grid_m)
    ]
    if threads > 1:
        with ProcessPoolExecutor(
            max_workers=threads,
            initializer=_pool_init,
            initargs=(geometry, exc, reference, config, scale),
        ) as pool:
            chunksize = max(1, len(tasks) // (4 * threads))
            outcomes = list(pool.map(_pool_task, tasks, chunksize=chunksize))
    else:
        outcomes = [
            _evaluate_sample(geometry, exc, reference, config, m, u, col, scale)
            for m, u, col in tasks
        ]

    best = None
    for outcome in outcomes:
        if outcome.degenerate:
            continue
        if best is None or outcome.gamma < best.gamma:
            best = outcome
    if best is None:
        raise SynthesisFailedError(
            "every angular sample was degenerate (all-zero elementary-pattern column)"
        )
    return SynthesisResult(
        clustering=best.clustering,
        weights=best.weights,
        gamma=best.gamma,
        per_sample=outcomes,
        best_sample_index=best.sample_index,
        method="pmm",
    )
