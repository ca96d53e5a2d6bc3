"""Comparison methods: excitation-space clustering and exhaustive search.

The excitation-matching baseline clusters the raw complex reference
excitations (no normalization) and takes cluster means as weights; the
enumerative oracle scores every set partition of the elements into
exactly Q non-empty blocks and is the ground-truth minimum for the
pattern-matching metric at desk scales.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .kmeans import kmeans_cluster
from .model import (
    AngularGrid,
    ArrayGeometry,
    ClusteringVector,
    as_excitations,
    cpa_power_pattern,
    fpa_power_pattern,
    pm_metric,
)
from .synthesis import SynthesisResult
from .weighting import ipm_weighting, subarray_average

ProgressFn = Callable[[int, int, float, tuple], None]


class PartitionCapError(RuntimeError):
    """Enumeration refused: the partition count exceeds the cap."""

    def __init__(self, count: int, cap: int):
        super().__init__(
            f"enumeration refused: {count} partitions exceed the cap of {cap}"
        )
        self.count = count
        self.cap = cap


def stirling2(n: int, q: int) -> int:
    """Number of partitions of n labeled items into q non-empty blocks."""
    if n < 0 or q < 0:
        raise ValueError("n and q must be non-negative")
    if q == 0:
        return 1 if n == 0 else 0
    if q > n:
        return 0
    row = [1] + [0] * q  # S(0, *)
    for _ in range(n):
        new = [0] * (q + 1)
        for j in range(1, q + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[q]


def set_partitions(n: int, q: int) -> Iterator[tuple[int, ...]]:
    """All restricted-growth strings of length n with exactly q blocks.

    Yields 0-based label tuples in lexicographic order; each partition
    appears exactly once (labels in first-occurrence order).
    """
    if not 1 <= q <= n:
        raise ValueError(f"q must be in [1, {n}], got {q}")
    a = [0] * n

    def rec(i: int, max_used: int):
        if i == n:
            if max_used == q - 1:
                yield tuple(a)
            return
        hi = min(max_used + 1, q - 1)
        for v in range(hi + 1):
            new_max = max(max_used, v)
            # prune branches that can no longer reach q blocks
            if q - 1 - new_max <= n - 1 - i:
                a[i] = v
                yield from rec(i + 1, new_max)

    yield from rec(1, 0)


def emm_synthesize(
    geometry: ArrayGeometry,
    reference_excitations,
    q_count: int,
    grid: AngularGrid,
    restarts: int = 50,
    base_seed: int = 0,
    kmeans_max_iter: int = 100,
) -> SynthesisResult:
    """Cluster the reference excitations themselves; weights are cluster means.

    Restart selection uses the k-means objective (within-cluster SSE),
    not the pattern metric; the metric is evaluated afterwards on the
    given grid for reporting.
    """
    exc = as_excitations(reference_excitations, geometry.n_elements, require_nonzero=True)
    best = None
    for s in range(restarts):
        result = kmeans_cluster(exc, q_count, seed=base_seed + s, max_iter=kmeans_max_iter)
        if best is None or result.inertia < best.inertia:
            best = result
    weights = subarray_average(exc, best.clustering)
    reference = fpa_power_pattern(geometry, exc, grid)
    trial = cpa_power_pattern(geometry, best.clustering, weights, grid)
    return SynthesisResult(
        clustering=best.clustering,
        weights=weights,
        gamma=pm_metric(reference, trial),
        per_sample=[],
        best_sample_index=None,
        method="emm",
    )


@dataclass
class EnumerationResult:
    clustering: ClusteringVector
    gamma: float
    partition_count: int


def _score_partition(geometry, exc, reference, rgs, ipm_max_iter, ipm_tol) -> float:
    clustering = ClusteringVector(np.asarray(rgs, dtype=int) + 1, int(max(rgs)) + 1)
    trace = ipm_weighting(
        geometry, clustering, exc, reference, max_iter=ipm_max_iter, tol=ipm_tol
    )
    return trace.best_gamma


_ENUM_CTX: dict = {}


def _enum_init(geometry, exc, reference, ipm_max_iter, ipm_tol):
    _ENUM_CTX.update(
        geometry=geometry,
        exc=exc,
        reference=reference,
        ipm_max_iter=ipm_max_iter,
        ipm_tol=ipm_tol,
    )


def _enum_batch(batch: list[tuple[int, ...]]) -> tuple[float, tuple[int, ...]]:
    best_gamma = np.inf
    best_rgs = batch[0]
    for rgs in batch:
        gamma = _score_partition(
            _ENUM_CTX["geometry"],
            _ENUM_CTX["exc"],
            _ENUM_CTX["reference"],
            rgs,
            _ENUM_CTX["ipm_max_iter"],
            _ENUM_CTX["ipm_tol"],
        )
        if gamma < best_gamma:
            best_gamma, best_rgs = gamma, rgs
    return best_gamma, best_rgs


def epm_enumerate(
    geometry: ArrayGeometry,
    reference_excitations,
    q_count: int,
    grid: AngularGrid,
    ipm_max_iter: int = 200,
    ipm_tol: float = 1e-6,
    cap: int = 1_000_000,
    threads: int = 1,
    progress: ProgressFn | None = None,
    progress_every: int = 10_000,
) -> EnumerationResult:
    """Score every partition of the elements into q_count non-empty blocks.

    Refuses (with the computed count) when the Stirling number exceeds
    ``cap``. Ties resolve to the lexicographically smallest
    restricted-growth string, independent of ``threads``. ``progress`` is
    called with (done, total, best_gamma, best_rgs) roughly every
    ``progress_every`` partitions.
    """
    exc = as_excitations(reference_excitations, geometry.n_elements, require_nonzero=True)
    if not 1 <= q_count <= geometry.n_elements:
        raise ValueError(
            f"q_count must be in [1, {geometry.n_elements}], got {q_count}"
        )
    count = stirling2(geometry.n_elements, q_count)
    if count > cap:
        raise PartitionCapError(count, cap)
    reference = fpa_power_pattern(geometry, exc, grid)

    best_gamma = np.inf
    best_rgs: tuple[int, ...] | None = None
    done = 0
    next_report = progress_every

    def note(gamma: float, rgs: tuple[int, ...], n_done: int):
        nonlocal best_gamma, best_rgs, done, next_report
        if gamma < best_gamma:
            best_gamma, best_rgs = gamma, rgs
        done += n_done
        if progress is not None and (done >= next_report or done == count):
            progress(done, count, best_gamma, best_rgs)
            next_report = done + progress_every

    if threads > 1:
        batch_size = 2048
        batches: list[list[tuple[int, ...]]] = []
        batch: list[tuple[int, ...]] = []
        for rgs in set_partitions(geometry.n_elements, q_count):
            batch.append(rgs)
            if len(batch) == batch_size:
                batches.append(batch)
                batch = []
        if batch:
            batches.append(batch)
        with ProcessPoolExecutor(
            max_workers=threads,
            initializer=_enum_init,
            initargs=(geometry, exc, reference, ipm_max_iter, ipm_tol),
        ) as pool:
            for size, (gamma, rgs) in zip(
                (len(b) for b in batches), pool.map(_enum_batch, batches)
            ):
                note(gamma, rgs, size)
    else:
        for rgs in set_partitions(geometry.n_elements, q_count):
            gamma = _score_partition(geometry, exc, reference, rgs, ipm_max_iter, ipm_tol)
            note(gamma, rgs, 1)

    clustering = ClusteringVector(np.asarray(best_rgs, dtype=int) + 1, q_count)
    return EnumerationResult(clustering=clustering, gamma=best_gamma, partition_count=count)
