"""Decomposition of a reference power pattern into per-element contributions.

Each element n contributes a complex "elementary" pattern

    P_n(u) = |AF_n(u)|^2 + sum_{l != n} AF_n(u) * conj(AF_l(u))
           = AF_n(u) * conj(AF(u)),

with AF_n(u) = I_n e^{j*2*pi*d*(n-1)*u} and AF the total array factor.
Individual P_n are complex, but their sum collapses to the real power
pattern |AF(u)|^2: the cross terms pair up as AF_n*conj(AF_l) +
AF_l*conj(AF_n) = 2*Re{AF_n*conj(AF_l)}.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .model import AngularGrid, ArrayGeometry, as_excitations


@dataclass(frozen=True)
class EPMatrix:
    """Complex per-element pattern samples, N rows by M grid columns."""

    grid: AngularGrid
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[1] != self.grid.m_samples:
            raise ValueError(
                f"entries must be (N, {self.grid.m_samples}), got {e.shape}"
            )
        object.__setattr__(self, "entries", e)

    @property
    def n_elements(self) -> int:
        return self.entries.shape[0]

    def column(self, sample_index: int) -> np.ndarray:
        return self.entries[:, sample_index]

    def to_csv(self) -> str:
        """CSV text ``n,m,u,re,im`` with 1-based n and m."""
        buf = io.StringIO()
        buf.write("n,m,u,re,im\n")
        u = self.grid.u
        for n in range(self.entries.shape[0]):
            for m in range(self.entries.shape[1]):
                z = self.entries[n, m]
                buf.write(f"{n + 1},{m + 1},{u[m]:.17g},{z.real:.17g},{z.imag:.17g}\n")
        return buf.getvalue()


def elementary_af(geometry: ArrayGeometry, excitations, u: float) -> np.ndarray:
    """Per-element array-factor terms I_n e^{j*2*pi*d*(n-1)*u} at one direction."""
    if not -1.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [-1, 1], got {u}")
    exc = as_excitations(excitations, geometry.n_elements)
    return exc * geometry.steering_matrix(np.array([u]))[:, 0]


def ep_matrix(geometry: ArrayGeometry, excitations, grid: AngularGrid) -> EPMatrix:
    """All elementary patterns P_n(u_m) = AF_n(u_m) * conj(AF(u_m))."""
    exc = as_excitations(excitations, geometry.n_elements)
    af_terms = exc[:, None] * geometry.steering_matrix(grid.u)
    total = af_terms.sum(axis=0)
    return EPMatrix(grid, af_terms * np.conj(total)[None, :])


def normalize_column(ep: EPMatrix, sample_index: int) -> np.ndarray:
    """Column scaled by its largest modulus, so max_n |P~_n| = 1."""
    col = ep.column(sample_index)
    scale = np.abs(col).max()
    if scale == 0:
        raise ValueError(f"column {sample_index} is all zero (degenerate sample)")
    return col / scale
