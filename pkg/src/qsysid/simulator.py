"""Shot-noise simulation of stroboscopic p11 measurements.

Each data point is estimated the way a laboratory would: prepare state 1,
evolve for ``t``, project onto state 1, repeat.  The adaptive rule keeps
adding batches of shots until ``d * sqrt(n_shots) >= snr_target`` (so the
relative error ``~ 1/sqrt(d n)`` is roughly uniform across points) or the
shot cap is reached.

Per-point generators are seeded from ``(seed, point_index)``, so a trace is
reproducible bit for bit and independent of evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, p11
from .sampling import TimeGrid, infer_horizon

DEFAULT_SNR = 10.0
DEFAULT_MAX_SHOTS = 10_000
DEFAULT_BATCH = 100


@dataclass(frozen=True)
class MeasurementRecord:
    time: float
    successes: int
    shots: int

    @property
    def estimate(self) -> float:
        return self.successes / self.shots


@dataclass(frozen=True)
class DataVector:
    """Sample times with population estimates and optional shot counts.

    ``horizon`` is the observation window ``T``; when unknown (e.g. data read
    from a bare CSV) it is inferred from the sample spacing.
    """

    times: np.ndarray
    values: np.ndarray
    shots: np.ndarray | None = None
    horizon: float | None = field(default=None)

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=float)
        values = np.ascontiguousarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if np.any(values < 0) or np.any(values > 1):
            raise ValueError("population estimates must lie in [0, 1]")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.shots is not None:
            shots = np.ascontiguousarray(self.shots, dtype=np.int64)
            if shots.shape != times.shape:
                raise ValueError("shots must match times in length")
            object.__setattr__(self, "shots", shots)
        if self.horizon is not None:
            object.__setattr__(self, "horizon", float(self.horizon))

    def __len__(self):
        return self.times.size

    @property
    def span(self) -> float:
        """Observation window ``T`` (stored, or inferred from the times)."""
        if self.horizon is not None:
            return self.horizon
        return infer_horizon(self.times)


def exact_trace(params: ModelParams, grid: TimeGrid) -> DataVector:
    """Noiseless data ``d_n = p11(t_n)``."""
    return DataVector(grid.times, p11(params, grid.times), horizon=grid.horizon)


def _check_rule(snr_target, max_shots, batch):
    if not snr_target > 0:
        raise ValueError("snr_target must be > 0")
    if not 1 <= batch <= max_shots:
        raise ValueError("need 1 <= batch <= max_shots")


def simulate_point(
    params: ModelParams,
    t: float,
    rng: np.random.Generator,
    snr_target: float = DEFAULT_SNR,
    max_shots: int = DEFAULT_MAX_SHOTS,
    batch: int = DEFAULT_BATCH,
) -> MeasurementRecord:
    """Adaptive-repetition estimate of p11 at a single time.

    Shots are drawn ``batch`` at a time (the count of ones in a batch of
    Bernoulli trials is binomial); the stopping rule is tested only at batch
    boundaries.  The final batch is truncated so ``shots <= max_shots``.
    """
    _check_rule(snr_target, max_shots, batch)
    p = float(p11(params, t))
    successes = 0
    shots = 0
    while shots < max_shots:
        size = min(batch, max_shots - shots)
        successes += int(rng.binomial(size, p))
        shots += size
        if successes >= snr_target * np.sqrt(shots):
            break
    return MeasurementRecord(float(t), successes, shots)


def simulate_fixed_point(params: ModelParams, t: float, rng: np.random.Generator, shots: int) -> MeasurementRecord:
    """Estimate with a fixed number of repetitions."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = float(p11(params, t))
    return MeasurementRecord(float(t), int(rng.binomial(shots, p)), int(shots))


def point_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def simulate_trace(
    params: ModelParams,
    grid: TimeGrid,
    seed: int,
    snr_target: float = DEFAULT_SNR,
    max_shots: int = DEFAULT_MAX_SHOTS,
    batch: int = DEFAULT_BATCH,
    fixed_shots: int | None = None,
    return_records: bool = False,
):
    """Simulate a full data vector on ``grid``.

    With ``fixed_shots`` set, every point uses that many repetitions instead
    of the adaptive rule.  Returns the ``DataVector``, or
    ``(DataVector, records)`` when ``return_records`` is true.
    """
    if fixed_shots is None:
        _check_rule(snr_target, max_shots, batch)
    records = []
    for i, t in enumerate(grid.times):
        rng = point_rng(seed, i)
        if fixed_shots is None:
            rec = simulate_point(params, t, rng, snr_target, max_shots, batch)
        else:
            rec = simulate_fixed_point(params, t, rng, fixed_shots)
        records.append(rec)
    data = DataVector(
        grid.times,
        np.array([r.estimate for r in records]),
        np.array([r.shots for r in records]),
        horizon=grid.horizon,
    )
    if return_records:
        return data, records
    return data
