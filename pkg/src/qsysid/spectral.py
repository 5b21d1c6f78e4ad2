"""Power spectrum of (possibly irregularly sampled) data and peak seeding.

The transform is evaluated directly, ``sum_n d_n exp(-i w t_n)``, which costs
O(N_t N_w) but handles any sample placement.  Frequencies are the bins
``w_k = 2 pi k / T`` for ``k = 0 .. N_t // 2`` regardless of sampling mode.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulator import DataVector

PEAK_MARGIN = 10.0
EDGE_BINS = 2.0
_CHUNK = 1 << 22


@dataclass(frozen=True)
class PowerSpectrum:
    omegas: np.ndarray
    values: np.ndarray
    horizon: float

    @property
    def resolution(self) -> float:
        return 2.0 * np.pi / self.horizon


@dataclass(frozen=True)
class Peak:
    """Highest non-DC bin of a spectrum.

    ``valid`` is false when the bin cannot be trusted as a frequency seed;
    ``reason`` then says why.
    """

    omega: float
    height: float
    index: int
    valid: bool
    reason: str = ""


def nudft(values, times, omegas) -> np.ndarray:
    """Direct non-uniform DFT ``out_k = sum_n values_n exp(-i omegas_k times_n)``."""
    values = np.asarray(values)
    times = np.asarray(times, dtype=float)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if values.shape != times.shape or values.ndim != 1:
        raise ValueError(f"values {values.shape} and times {times.shape} must be 1-D of equal length")
    out = np.empty(omegas.size, dtype=complex)
    step = max(1, _CHUNK // max(times.size, 1))
    for lo in range(0, omegas.size, step):
        w = omegas[lo:lo + step]
        out[lo:lo + step] = np.exp(-1j * np.outer(w, times)) @ values
    return out


def frequency_grid(n: int, T: float) -> np.ndarray:
    """Bins ``2 pi k / T`` for ``k = 0 .. n // 2``; the top bin is ``~ pi n / T``."""
    return 2.0 * np.pi * np.arange(n // 2 + 1) / T


def power_spectrum(data: DataVector, horizon: float | None = None) -> PowerSpectrum:
    """Rescaled power ``F(w) = 20 log10(|DFT[d - mean(d)](w)|**2 + 1)``."""
    if len(data) < 2:
        raise ValueError("power spectrum needs at least 2 samples")
    T = data.span if horizon is None else float(horizon)
    omegas = frequency_grid(len(data), T)
    centered = data.values - data.values.mean()
    power = np.abs(nudft(centered, data.times, omegas)) ** 2
    return PowerSpectrum(omegas, 20.0 * np.log10(power + 1.0), T)


def find_peak(spectrum: PowerSpectrum, margin: float = PEAK_MARGIN, edge_bins: float = EDGE_BINS) -> Peak | None:
    """Locate the global maximum of ``spectrum`` over ``w > 0``.

    The peak is valid only if it clears ``median(F) + margin`` and lies at
    least ``edge_bins`` resolution widths from both ends of the band.  Closer
    to an edge, a tone overlaps its own mirror image (about DC, or about the
    top of the band for a frequency folded in from above), so its position
    says little about the true frequency.  Returns ``None`` if there is no
    bin above DC.
    """
    omegas, values = spectrum.omegas, spectrum.values
    if omegas.size < 2:
        return None
    k = 1 + int(np.argmax(values[1:]))
    omega, height = float(omegas[k]), float(values[k])
    floor = float(np.median(values))
    guard = edge_bins * spectrum.resolution
    if height < floor + margin:
        return Peak(omega, height, k, False, f"peak {height:.3g} below median {floor:.3g} + margin {margin:g}")
    slack = 1e-9 * spectrum.resolution
    if omega < guard - slack:
        return Peak(omega, height, k, False, "peak too close to DC to resolve")
    if omegas[-1] - omega < guard - slack:
        return Peak(omega, height, k, False, "peak at the top edge of the band; frequency likely outside the range")
    return Peak(omega, height, k, True)
