"""Sub-array weights for a fixed clustering via alternating projections.

Starting from the reference element excitations, the loop alternates
between the set of patterns realizable by the clustered architecture
(cluster-mean weights) and the reference power pattern (magnitude
replacement of the array factor), tracking the pattern-matching metric
of each realizable iterate and keeping the best one visited.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .model import (
    AngularGrid,
    ArrayGeometry,
    ClusteringVector,
    PowerPattern,
    as_excitations,
    cluster_sums,
)

PROJECTION_RTOL = 1e-12
GAMMA_FLOOR = 1e-14


class UnsupportedGeometryError(ValueError):
    """Raised for configurations outside the supported manifold."""


@dataclass
class IpmTrace:
    """Outcome of one weighting run for a fixed clustering."""

    gamma_history: list[float]
    final_weights: np.ndarray
    best_gamma: float
    best_iteration: int
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.gamma_history) - 1

    def to_csv(self) -> str:
        """Per-iteration trace as CSV ``t,gamma``."""
        buf = io.StringIO()
        buf.write("t,gamma\n")
        for t, g in enumerate(self.gamma_history):
            buf.write(f"{t},{g:.17g}\n")
        return buf.getvalue()


def subarray_average(aux, clustering: ClusteringVector) -> np.ndarray:
    """Arithmetic mean of the auxiliary excitations within each cluster."""
    exc = as_excitations(aux, clustering.n_elements)
    labels0 = clustering.assignments - 1
    counts = np.bincount(labels0, minlength=clustering.q_count)
    if np.any(counts == 0):
        raise ValueError("clustering contains an empty cluster")
    sums = np.bincount(labels0, weights=exc.real, minlength=clustering.q_count) + 1j * np.bincount(
        labels0, weights=exc.imag, minlength=clustering.q_count
    )
    return sums / counts


def project_onto_reference(af_samples, reference: PowerPattern) -> np.ndarray:
    """Replace the array-factor magnitude with the reference one per node.

    Nodes where |af|^2 already equals the reference power (relative
    tolerance ``PROJECTION_RTOL``) pass through unchanged; a zero-magnitude
    node takes sqrt(P_ref) with zero phase.
    """
    af = np.asarray(af_samples, dtype=complex).ravel()
    ref = reference.values
    if af.size != ref.size:
        raise ValueError(f"expected {ref.size} samples, got {af.size}")
    mag = np.abs(af)
    power = mag**2
    target = np.sqrt(ref)
    same = np.abs(power - ref) <= PROJECTION_RTOL * np.maximum(power, ref)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(mag > 0, af * (target / np.where(mag > 0, mag, 1.0)), target)
    return np.where(same, af, scaled)


def invert_af_to_excitations(projected_af, geometry: ArrayGeometry, grid: AngularGrid) -> np.ndarray:
    """Recover element excitations from array-factor samples.

    I_n = (1/2) * integral over u in [-1, 1] of AF(u) e^{-j*2*pi*d*(n-1)*u},
    by composite trapezoid. Exact left-inverse only for d = 1/2 wavelength
    spacing, where the element exponentials are orthonormal under this
    weighting, and only free of aliasing for M > N.
    """
    if geometry.spacing != 0.5:
        raise UnsupportedGeometryError(
            "excitation recovery requires half-wavelength spacing (d = 0.5); "
            f"got d = {geometry.spacing}"
        )
    if grid.m_samples < geometry.n_elements + 1:
        raise ValueError(
            f"grid must have M >= N+1 = {geometry.n_elements + 1} samples, "
            f"got M = {grid.m_samples}"
        )
    af = np.asarray(projected_af, dtype=complex).ravel()
    if af.size != grid.m_samples:
        raise ValueError(f"expected {grid.m_samples} samples, got {af.size}")
    basis = 0.5 * np.conj(geometry.steering_matrix(grid.u)) * grid.trap_weights
    return basis @ af


def ipm_weighting(
    geometry: ArrayGeometry,
    clustering: ClusteringVector,
    reference_excitations,
    reference: PowerPattern,
    max_iter: int = 200,
    tol: float = 1e-6,
) -> IpmTrace:
    """Alternating-projection sub-array weighting for a fixed clustering.

    Each iteration averages the auxiliary excitations per cluster,
    evaluates the realized clustered-array pattern and its matching
    metric, projects the array factor onto the reference magnitude, and
    maps the projection back to element excitations. Stops when the
    metric stagnates (relative change <= tol) or after max_iter
    iterations; returns the best-metric weights visited.
    """
    exc = as_excitations(reference_excitations, geometry.n_elements, require_nonzero=True)
    if geometry.spacing != 0.5:
        raise UnsupportedGeometryError(
            "weighting requires half-wavelength spacing (d = 0.5) for the "
            f"excitation-recovery step; got d = {geometry.spacing}"
        )
    grid = reference.grid
    if grid.m_samples < geometry.n_elements + 1:
        raise ValueError(
            f"grid must have M >= N+1 = {geometry.n_elements + 1} samples, "
            f"got M = {grid.m_samples}"
        )
    energy = grid.integrate(reference.values)
    if energy <= 0:
        raise ValueError("reference pattern has zero energy")

    manifold = geometry.steering_matrix(grid.u)
    agg = cluster_sums(manifold, clustering)
    inverse_basis = 0.5 * np.conj(manifold) * grid.trap_weights
    target = np.sqrt(reference.values)
    weights_trap = grid.trap_weights

    aux = exc.copy()
    history: list[float] = []
    best_gamma = np.inf
    best_weights = None
    best_iteration = 0
    converged = False

    for t in range(max_iter + 1):
        weights = subarray_average(aux, clustering)
        af = weights @ agg
        power = np.abs(af) ** 2
        gamma = float(weights_trap @ np.abs(reference.values - power)) / energy
        history.append(gamma)
        if gamma < best_gamma:
            best_gamma, best_weights, best_iteration = gamma, weights, t
        if t > 0 and abs(gamma - history[-2]) <= tol * history[-2]:
            converged = True
            break
        if gamma <= GAMMA_FLOOR:
            converged = True
            break
        if t == max_iter:
            break
        # project magnitude onto the reference, keep phase
        mag = np.abs(af)
        same = np.abs(power - reference.values) <= PROJECTION_RTOL * np.maximum(power, reference.values)
        projected = np.where(mag > 0, af * (target / np.where(mag > 0, mag, 1.0)), target)
        projected = np.where(same, af, projected)
        aux = inverse_basis @ projected

    return IpmTrace(
        gamma_history=history,
        final_weights=best_weights,
        best_gamma=best_gamma,
        best_iteration=best_iteration,
        converged=converged,
    )
