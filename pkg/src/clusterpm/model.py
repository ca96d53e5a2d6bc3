"""Linear-array geometry, power patterns, and pattern figures of merit.

Conventions: isotropic elements on a line with uniform spacing ``d`` in
wavelengths, directions expressed as ``u = sin(theta)`` over visible space
``u in [-1, 1]``. The element-n phase term at direction u is
``exp(1j * 2*pi*d * (n-1) * u)``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element count and spacing in wavelengths."""

    n_elements: int
    spacing: float = 0.5

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError(f"n_elements must be >= 1, got {self.n_elements}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")

    def steering_matrix(self, u: np.ndarray) -> np.ndarray:
        """Phase manifold exp(j*2*pi*d*(n-1)*u), shape (N, len(u))."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        n = np.arange(self.n_elements)
        return np.exp(2j * np.pi * self.spacing * np.outer(n, u))


@dataclass(frozen=True)
class AngularGrid:
    """Uniform grid of M >= 2 samples over u in [-1, 1], endpoints included."""

    m_samples: int

    def __post_init__(self):
        if self.m_samples < 2:
            raise ValueError(f"m_samples must be >= 2, got {self.m_samples}")

    @property
    def u(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.m_samples)

    @property
    def step(self) -> float:
        return 2.0 / (self.m_samples - 1)

    @property
    def trap_weights(self) -> np.ndarray:
        """Composite-trapezoid quadrature weights on the grid."""
        w = np.full(self.m_samples, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w

    def integrate(self, values: np.ndarray) -> float:
        return float(np.real(self.trap_weights @ values))


@dataclass(frozen=True)
class PowerPattern:
    """Non-negative power samples on an angular grid."""

    grid: AngularGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.m_samples,):
            raise ValueError(
                f"values shape {vals.shape} does not match grid with "
                f"M={self.grid.m_samples}"
            )
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("power pattern values must be finite and >= 0")
        object.__setattr__(self, "values", vals)

    def db(self, floor_db: float = -400.0) -> np.ndarray:
        """Values in dB relative to the pattern peak."""
        peak = self.values.max()
        if peak <= 0:
            raise ValueError("cannot normalize an all-zero pattern to dB")
        with np.errstate(divide="ignore"):
            out = 10.0 * np.log10(self.values / peak)
        return np.maximum(out, floor_db)

    def to_csv(self) -> str:
        """CSV text with header ``u,p_linear,p_db``."""
        peak = self.values.max()
        buf = io.StringIO()
        buf.write("u,p_linear,p_db\n")
        with np.errstate(divide="ignore"):
            p_db = 10.0 * np.log10(self.values / peak) if peak > 0 else np.full_like(self.values, -np.inf)
        for u, p, pdb in zip(self.grid.u, self.values, p_db):
            buf.write(f"{u:.17g},{p:.17g},{pdb:.17g}\n")
        return buf.getvalue()


@dataclass
class ClusteringVector:
    """Element-to-cluster assignment: labels in 1..q_count, all present."""

    assignments: np.ndarray
    q_count: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=int)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("assignments must be a non-empty 1-d sequence")
        if not 1 <= self.q_count <= a.size:
            raise ValueError(f"q_count must be in [1, {a.size}], got {self.q_count}")
        if a.min() < 1 or a.max() > self.q_count:
            raise ValueError(
                f"cluster labels must lie in [1, {self.q_count}], "
                f"got range [{a.min()}, {a.max()}]"
            )
        counts = np.bincount(a - 1, minlength=self.q_count)
        if np.any(counts == 0):
            missing = int(np.flatnonzero(counts == 0)[0]) + 1
            raise ValueError(f"cluster {missing} is empty; every label must occur")
        self.assignments = a

    @property
    def n_elements(self) -> int:
        return self.assignments.size

    def counts(self) -> np.ndarray:
        return np.bincount(self.assignments - 1, minlength=self.q_count)

    def canonicalized(self) -> "ClusteringVector":
        """Relabel clusters in order of first occurrence (labels 1..Q)."""
        return ClusteringVector(
            canonical_labels(self.assignments - 1) + 1, self.q_count
        )

    def key(self) -> tuple:
        """Hashable partition identity, independent of label permutation."""
        return tuple(canonical_labels(self.assignments - 1))


def canonical_labels(labels0: np.ndarray) -> np.ndarray:
    """Map 0-based labels to first-occurrence order (0, 1, 2, ...)."""
    labels0 = np.asarray(labels0, dtype=int)
    mapping: dict[int, int] = {}
    out = np.empty_like(labels0)
    for i, lab in enumerate(labels0):
        lab = int(lab)
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out


def as_excitations(weights, n: int | None = None, require_nonzero: bool = False) -> np.ndarray:
    """Validate and coerce an excitation vector to a 1-d complex array."""
    w = np.asarray(weights, dtype=complex).ravel()
    if n is not None and w.size != n:
        raise ValueError(f"expected {n} excitations, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise ValueError("excitations must be finite")
    if require_nonzero and not np.any(w != 0):
        raise ValueError("reference excitations must not be all zero")
    return w


def cluster_sums(matrix: np.ndarray, clustering: ClusteringVector) -> np.ndarray:
    """Sum rows of an (N, M) matrix by cluster, returning (Q, M)."""
    out = np.zeros((clustering.q_count, matrix.shape[1]), dtype=matrix.dtype)
    np.add.at(out, clustering.assignments - 1, matrix)
    return out


def fpa_array_factor(geometry: ArrayGeometry, excitations, grid: AngularGrid) -> np.ndarray:
    """Complex array factor of the fully populated array on the grid."""
    exc = as_excitations(excitations, geometry.n_elements)
    return exc @ geometry.steering_matrix(grid.u)


def fpa_power_pattern(geometry: ArrayGeometry, excitations, grid: AngularGrid) -> PowerPattern:
    """Power pattern |sum_n I_n e^{j*2*pi*d*(n-1)*u}|^2 per grid node."""
    af = fpa_array_factor(geometry, excitations, grid)
    return PowerPattern(grid, np.abs(af) ** 2)


def cpa_array_factor(
    geometry: ArrayGeometry,
    clustering: ClusteringVector,
    weights,
    grid: AngularGrid,
) -> np.ndarray:
    """Complex array factor of the clustered array with sub-array weights."""
    if clustering.n_elements != geometry.n_elements:
        raise ValueError(
            f"clustering has {clustering.n_elements} elements, "
            f"geometry has {geometry.n_elements}"
        )
    w = as_excitations(weights, clustering.q_count)
    agg = cluster_sums(geometry.steering_matrix(grid.u), clustering)
    return w @ agg


def cpa_power_pattern(
    geometry: ArrayGeometry,
    clustering: ClusteringVector,
    weights,
    grid: AngularGrid,
) -> PowerPattern:
    """Power pattern of the clustered array (one shared weight per cluster)."""
    af = cpa_array_factor(geometry, clustering, weights, grid)
    return PowerPattern(grid, np.abs(af) ** 2)


def pm_metric(reference: PowerPattern, trial: PowerPattern) -> float:
    """Normalized L1 mismatch of two power patterns on the same grid.

    Gamma = integral |P_ref - P| du / integral P_ref du, both by
    composite trapezoid over u in [-1, 1].
    """
    if reference.grid != trial.grid:
        raise ValueError(
            f"patterns are on different grids "
            f"(M={reference.grid.m_samples} vs M={trial.grid.m_samples})"
        )
    energy = reference.grid.integrate(reference.values)
    if energy <= 0:
        raise ValueError("reference pattern has zero energy")
    return reference.grid.integrate(np.abs(reference.values - trial.values)) / energy


def matching_improvement(gamma_emm: float, gamma_pmm: float) -> float:
    """Relative improvement (percent) of a trial metric over a baseline one."""
    if gamma_emm <= 0:
        raise ValueError(f"baseline gamma must be > 0, got {gamma_emm}")
    return (gamma_emm - gamma_pmm) / gamma_emm * 100.0


@dataclass(frozen=True)
class PatternMetrics:
    """Scalar pattern figures; fields are None when not measurable."""

    sll_db: float | None
    fnbw_deg: float | None
    ripple_db: float | None
    peak_u: float = field(default=np.nan)
    null_left_u: float | None = None
    null_right_u: float | None = None

    @property
    def has_sidelobe(self) -> bool:
        return self.sll_db is not None


def _descend(values: np.ndarray, start: int, direction: int, require_move: bool = True) -> int | None:
    """Walk downhill from ``start``; return the flanking local-minimum index.

    Returns None when the pattern is monotone to the grid edge (no null).
    ``require_move=False`` accepts ``start`` itself as the minimum (used
    when walking outward from a window edge rather than from a peak).
    """
    i = start
    last = values.size - 1
    while True:
        j = i + direction
        if j < 0 or j > last:
            return None
        if values[j] < values[i]:
            i = j
            continue
        # discrete derivative changed sign (or went flat): i flanks the lobe
        if i == start and require_move:
            return None
        return i


def pattern_metrics(
    pattern: PowerPattern,
    mainlobe_hint: float | None = None,
    ripple_window: tuple[float, float] | None = None,
    mainlobe_window: tuple[float, float] | None = None,
) -> PatternMetrics:
    """Side-lobe level, first-null beamwidth, and shaped-region ripple.

    Parameters
    ----------
    pattern
        Power pattern to analyze; the grid should resolve the nulls
        (M >= 201 recommended).
    mainlobe_hint
        Optional direction u0 of the intended main lobe. When given, the
        peak is located by hill-climbing from the nearest grid node,
        otherwise the global maximum is used.
    ripple_window
        Optional (u_lo, u_hi) shaped-beam region; when given, ripple_db is
        the peak-to-peak dB variation of the pattern inside the window.
    mainlobe_window
        Optional (u_lo, u_hi) region known to contain the whole main lobe
        (plateau included). Use for shaped beams whose ripple would
        otherwise stop the null search: the peak is taken inside the
        window and the flanking nulls are searched outward from its edges.
    """
    vals = pattern.values
    u = pattern.grid.u
    if vals.max() <= 0:
        raise ValueError("pattern has no positive maximum")

    if mainlobe_window is not None:
        lo, hi = mainlobe_window
        inside = np.flatnonzero((u >= lo) & (u <= hi))
        if inside.size == 0:
            raise ValueError(f"mainlobe window [{lo}, {hi}] contains no grid nodes")
        peak = int(inside[np.argmax(vals[inside])])
        left = _descend(vals, int(inside[0]), -1, require_move=False)
        right = _descend(vals, int(inside[-1]), +1, require_move=False)
    else:
        if mainlobe_hint is None:
            peak = int(np.argmax(vals))
        else:
            peak = int(np.argmin(np.abs(u - mainlobe_hint)))
            while peak > 0 and vals[peak - 1] > vals[peak]:
                peak -= 1
            while peak < vals.size - 1 and vals[peak + 1] > vals[peak]:
                peak += 1
        left = _descend(vals, peak, -1)
        right = _descend(vals, peak, +1)

    fnbw = None
    if left is not None and right is not None:
        fnbw = float(np.degrees(np.arcsin(u[right]) - np.arcsin(u[left])))

    side = np.array([], dtype=float)
    if left is not None:
        side = np.concatenate([side, vals[: left + 1]])
    if right is not None:
        side = np.concatenate([side, vals[right:]])
    sll = None
    if side.size and side.max() > 0:
        sll = float(10.0 * np.log10(side.max() / vals[peak]))

    ripple = None
    if ripple_window is not None:
        lo, hi = ripple_window
        inside = vals[(u >= lo) & (u <= hi)]
        if inside.size == 0:
            raise ValueError(f"ripple window [{lo}, {hi}] contains no grid nodes")
        if inside.min() <= 0:
            ripple = float("inf")
        else:
            ripple = float(10.0 * np.log10(inside.max() / inside.min()))

    return PatternMetrics(
        sll_db=sll,
        fnbw_deg=fnbw,
        ripple_db=ripple,
        peak_u=float(u[peak]),
        null_left_u=None if left is None else float(u[left]),
        null_right_u=None if right is None else float(u[right]),
    )
