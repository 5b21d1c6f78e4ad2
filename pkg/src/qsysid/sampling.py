"""Measurement time grids on the window [0, T).

Random grids draw from numpy's ``PCG64`` bit generator seeded through
``SeedSequence(seed)``.  Both algorithms are fixed by numpy's stream
compatibility policy, so a given seed yields the same grid on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MODES = ("uniform", "stratified", "explicit")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times inside ``[0, horizon]``."""

    times: np.ndarray
    horizon: float
    mode: str = "explicit"
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("a time grid needs at least 2 samples")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon!r}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if times[0] < 0 or times[-1] > self.horizon:
            raise ValueError("sample times must lie within [0, horizon]")
        if self.mode not in MODES:
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "horizon", float(self.horizon))

    def __len__(self):
        return self.times.size

    def __array__(self, dtype=None, copy=None):
        return self.times if dtype is None else self.times.astype(dtype)


def _check(T, n):
    if not T > 0:
        raise ValueError(f"horizon T must be > 0, got {T!r}")
    if int(n) != n or n < 2:
        raise ValueError(f"sample count must be an integer >= 2, got {n!r}")


def uniform_grid(T: float, n: int) -> TimeGrid:
    """``t_k = k T / n`` for ``k = 0 .. n-1`` (``T`` itself excluded)."""
    _check(T, n)
    return TimeGrid(np.arange(n) * (T / n), T, "uniform")


def stratified_grid(T: float, n: int, seed: int) -> TimeGrid:
    """One uniformly placed sample in each of the ``n`` strata of width ``T/n``."""
    _check(T, n)
    rng = np.random.default_rng(seed)
    width = T / n
    lower = np.arange(n) * width
    times = lower + rng.random(n) * width
    # (k + u) * width can round up onto the next stratum edge when u ~ 1
    upper = np.arange(1, n + 1) * width
    over = times >= upper
    times[over] = np.nextafter(upper[over], -np.inf)
    return TimeGrid(times, T, "stratified", seed=int(seed))


def explicit_grid(times, T: float | None = None) -> TimeGrid:
    times = np.asarray(times, dtype=float)
    if T is None:
        T = infer_horizon(times)
    return TimeGrid(times, T, "explicit")


def infer_horizon(times) -> float:
    """Window length implied by ``n`` samples: ``(t_max - t_min) * n / (n - 1)``.

    Exact for ``uniform_grid`` output when ``t_min = 0``.
    """
    times = np.asarray(times, dtype=float)
    n = times.size
    if n < 2:
        raise ValueError("need at least 2 samples to infer a horizon")
    return float((times[-1] - times[0]) * n / (n - 1))


def make_grid(mode: str, T: float, n: int, seed: int | None = None) -> TimeGrid:
    if mode == "uniform":
        return uniform_grid(T, n)
    if mode == "stratified":
        if seed is None:
            raise ValueError("stratified sampling needs a seed")
        return stratified_grid(T, n, seed)
    raise ValueError(f"cannot build a {mode!r} grid from (T, n)")
