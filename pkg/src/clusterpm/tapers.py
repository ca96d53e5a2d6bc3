"""Reference excitation generators and excitation/mask file I/O.

Generators produce classic line-source tapers sampled at the element
positions, normalized to unit peak amplitude and steered by a progressive
phase exp(-j*2*pi*d*(n-1)*sin(theta0)). Shaped-beam references (e.g.
cosecant-squared coverage patterns) are loaded from files instead; a
piecewise dB-bound mask format is provided so such references can be
produced and checked with external tools.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import windows


def _steering(n_elements: int, theta0_deg: float, spacing: float) -> np.ndarray:
    u0 = np.sin(np.radians(theta0_deg))
    n = np.arange(n_elements)
    return np.exp(-2j * np.pi * spacing * n * u0)


def dolph_chebyshev(
    n_elements: int,
    sll_db: float,
    theta0_deg: float = 0.0,
    spacing: float = 0.5,
) -> np.ndarray:
    """Equiripple Chebyshev taper with the given design side-lobe level.

    sll_db is negative (e.g. -20.0); the broadside amplitudes are real,
    symmetric, and peak-normalized.
    """
    if n_elements < 3:
        raise ValueError(f"n_elements must be >= 3, got {n_elements}")
    if not sll_db < 0:
        raise ValueError(f"sll_db must be negative, got {sll_db}")
    with warnings.catch_warnings():
        # chebwin warns about spectral-analysis use below 45 dB attenuation
        warnings.simplefilter("ignore", UserWarning)
        amps = windows.chebwin(n_elements, at=-sll_db, sym=True)
    amps = amps / amps.max()
    return amps * _steering(n_elements, theta0_deg, spacing)


def taylor_nbar(
    n_elements: int,
    sll_db: float,
    nbar: int = 3,
    theta0_deg: float = 0.0,
    spacing: float = 0.5,
) -> np.ndarray:
    """Taylor n-bar taper: near-uniform close-in side lobes, then decay."""
    if n_elements < 3:
        raise ValueError(f"n_elements must be >= 3, got {n_elements}")
    if not sll_db < 0:
        raise ValueError(f"sll_db must be negative, got {sll_db}")
    if nbar < 1:
        raise ValueError(f"nbar must be >= 1, got {nbar}")
    amps = windows.taylor(n_elements, nbar=nbar, sll=-sll_db, norm=False, sym=True)
    amps = amps / amps.max()
    return amps * _steering(n_elements, theta0_deg, spacing)


def save_reference(path, excitations) -> None:
    """Write excitations as CSV rows ``n,amp,phase_deg`` (1-based n)."""
    exc = np.asarray(excitations, dtype=complex).ravel()
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "amp", "phase_deg"])
        for i, z in enumerate(exc):
            writer.writerow([i + 1, f"{abs(z):.17g}", f"{np.degrees(np.angle(z)):.17g}"])


def load_reference(path) -> np.ndarray:
    """Read excitations from CSV (``n,amp,phase_deg``) or JSON.

    The JSON form is a list of objects with ``amp`` and ``phase_deg``
    keys, in element order.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"reference file not found: {path}")
    if path.suffix.lower() == ".json":
        return _load_reference_json(path)
    return _load_reference_csv(path)


def _load_reference_json(path: Path) -> np.ndarray:
    with path.open() as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise ValueError(f"{path}: expected a non-empty JSON list of excitations")
    out = np.empty(len(data), dtype=complex)
    for i, item in enumerate(data):
        try:
            amp = float(item["amp"])
            phase = float(item["phase_deg"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}: entry {i + 1} is malformed: {exc}") from exc
        out[i] = amp * np.exp(1j * np.radians(phase))
    return out


def _load_reference_csv(path: Path) -> np.ndarray:
    rows: list[complex] = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if lineno == 1 and not _is_float(row[-1]):
                continue  # header
            if len(row) != 3:
                raise ValueError(
                    f"{path}:{lineno}: expected 3 columns (n,amp,phase_deg), got {len(row)}"
                )
            try:
                amp = float(row[1])
                phase = float(row[2])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            rows.append(amp * np.exp(1j * np.radians(phase)))
    if not rows:
        raise ValueError(f"{path}: no excitation rows found")
    return np.asarray(rows, dtype=complex)


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class MaskSegment:
    """Piecewise dB bounds over a u interval; -inf lower bound = unbounded."""

    u_start: float
    u_end: float
    upper_db: float
    lower_db: float


def load_mask(path) -> list[MaskSegment]:
    """Read a pattern mask as CSV rows ``u_start,u_end,upper_db,lower_db``."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"mask file not found: {path}")
    segments: list[MaskSegment] = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if lineno == 1 and not _is_float(row[-1]):
                continue
            if len(row) != 4:
                raise ValueError(
                    f"{path}:{lineno}: expected 4 columns "
                    f"(u_start,u_end,upper_db,lower_db), got {len(row)}"
                )
            try:
                seg = MaskSegment(*(float(tok) for tok in row))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            if not seg.u_start < seg.u_end:
                raise ValueError(f"{path}:{lineno}: u_start must be < u_end")
            segments.append(seg)
    if not segments:
        raise ValueError(f"{path}: no mask rows found")
    return segments
