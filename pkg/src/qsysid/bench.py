"""Desk-scale estimation campaign over random test systems and sampling plans.

Every run draws its grid and noise from generators keyed by
``(master_seed, run_index)``, so records do not depend on execution order or
on how many worker processes are used.
"""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EstimationFailedError
from .estimator import EstimatorConfig, error_metrics, estimate
from .model import HALF_PI, ModelParams
from .sampling import make_grid
from .simulator import DEFAULT_BATCH, DEFAULT_MAX_SHOTS, DEFAULT_SNR, exact_trace, simulate_trace

SUCCESS_THRESHOLD = 0.01
_SYSTEMS_STREAM = 0
_RUNS_STREAM = 1


@dataclass(frozen=True)
class BenchmarkConfig:
    n_systems: int = 10
    omega_range: tuple = (0.0, 2.0 * np.pi)
    alpha_range: tuple = (0.0, HALF_PI)
    T: float = 100.0
    nt_list: tuple = (32, 64, 128, 256, 512, 1024)
    modes: tuple = ("uniform", "stratified")
    plans: tuple | None = None
    noise: bool = True
    seed: int = 0
    snr_target: float = DEFAULT_SNR
    max_shots: int = DEFAULT_MAX_SHOTS
    batch: int = DEFAULT_BATCH
    fixed_shots: int | None = None

    def __post_init__(self):
        lo, hi = self.omega_range
        if not 0 <= lo <= hi <= 2.0 * np.pi + 1e-12:
            raise ValueError("omega_range must be a sub-interval of [0, 2 pi]")
        lo, hi = self.alpha_range
        if not 0 <= lo <= hi <= HALF_PI + 1e-12:
            raise ValueError("alpha_range must be a sub-interval of [0, pi/2]")
        if self.n_systems < 1:
            raise ValueError("n_systems must be >= 1")
        if not self.T > 0:
            raise ValueError("T must be positive")
        for mode, nt in self.sampling_plans():
            if mode not in ("uniform", "stratified"):
                raise ValueError(f"unknown sampling mode {mode!r}")
            if nt < 4:
                raise ValueError("every N_t must be >= 4")

    def sampling_plans(self) -> list:
        """``(mode, N_t)`` pairs: ``plans`` if given, else ``modes x nt_list``."""
        if self.plans is not None:
            return [(str(m), int(n)) for m, n in self.plans]
        return [(m, int(n)) for m in self.modes for n in self.nt_list]

    @classmethod
    def from_dict(cls, raw: dict) -> "BenchmarkConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown benchmark config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        for key in ("omega_range", "alpha_range", "nt_list", "modes"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        if kwargs.get("plans") is not None:
            kwargs["plans"] = tuple((p["mode"], p["nt"]) if isinstance(p, dict) else tuple(p) for p in kwargs["plans"])
        return cls(**kwargs)


@dataclass
class RunRecord:
    run_index: int
    system_index: int
    omega_true: float
    alpha_true: float
    x_true: float
    mode: str
    nt: int
    T: float
    grid_seed: int
    noise_seed: int
    degenerate: bool
    method: str = ""
    omega0: float | None = None
    omega3: float | None = None
    x_hat: float | None = None
    alpha_hat: float | None = None
    flag_ambiguous: bool = False
    E0: float | None = None
    E1: float | None = None
    success: bool = False
    error: str = ""
    wall_time: float = field(default=0.0, compare=False)


CSV_COLUMNS = [f for f in RunRecord.__dataclass_fields__ if f != "wall_time"]


def generate_systems(cfg: BenchmarkConfig, rng: np.random.Generator | None = None) -> list:
    """``cfg.n_systems`` parameter pairs drawn uniformly from the configured ranges."""
    if rng is None:
        rng = np.random.default_rng([cfg.seed, _SYSTEMS_STREAM])
    omegas = rng.uniform(*cfg.omega_range, size=cfg.n_systems)
    alphas = rng.uniform(*cfg.alpha_range, size=cfg.n_systems)
    return [ModelParams(float(w), float(min(a, HALF_PI))) for w, a in zip(omegas, alphas)]


def is_degenerate(params: ModelParams, T: float) -> bool:
    """Near-decoupled (x within 0.02 of 0 or 1) or slower than two Fourier bins."""
    return params.x < 0.02 or params.x > 0.98 or params.omega < 4.0 * np.pi / T


def run_specs(cfg: BenchmarkConfig) -> list:
    systems = generate_systems(cfg)
    specs = []
    for s, params in enumerate(systems):
        for mode, nt in cfg.sampling_plans():
            specs.append((len(specs), s, params, mode, nt))
    return specs


def execute_run(cfg: BenchmarkConfig, spec, est_cfg: EstimatorConfig = EstimatorConfig()) -> RunRecord:
    run_index, system_index, params, mode, nt = spec
    rng = np.random.default_rng([cfg.seed, _RUNS_STREAM, run_index])
    grid_seed, noise_seed = (int(v) for v in rng.integers(0, 2**63, size=2))
    rec = RunRecord(
        run_index, system_index, params.omega, params.alpha, params.x, mode, nt, cfg.T,
        grid_seed, noise_seed, is_degenerate(params, cfg.T),
    )
    start = time.perf_counter()
    try:
        grid = make_grid(mode, cfg.T, nt, grid_seed)
        if cfg.noise:
            data = simulate_trace(
                params, grid, noise_seed, cfg.snr_target, cfg.max_shots, cfg.batch, cfg.fixed_shots
            )
        else:
            data = exact_trace(params, grid)
        result = estimate(data, est_cfg)
    except (EstimationFailedError, ValueError) as exc:
        rec.method = "failed"
        rec.error = f"{type(exc).__name__}: {exc}"
    else:
        rec.method = result.method
        rec.omega0 = result.omega0 if result.peak_valid else None
        rec.omega3 = result.omega3
        rec.x_hat = result.x_hat
        rec.alpha_hat = result.alpha_hat
        rec.flag_ambiguous = result.flag_ambiguous
        if params.omega > 0:
            rec.E1 = error_metrics(result.omega3, params.omega)[1]
            if rec.omega0 is not None:
                rec.E0 = error_metrics(rec.omega0, params.omega)[0]
        rec.success = rec.E0 is not None and rec.E0 < SUCCESS_THRESHOLD
    rec.wall_time = time.perf_counter() - start
    return rec


def _execute(args):
    return execute_run(*args)


def run_benchmark(cfg: BenchmarkConfig, workers: int = 1, est_cfg: EstimatorConfig = EstimatorConfig()):
    """Run every (system, plan) pair; returns ``(records, summary)``.

    A failing run is recorded (``method == "failed"``) and never aborts the
    campaign.  ``workers > 1`` fans the runs out over processes.
    """
    jobs = [(cfg, spec, est_cfg) for spec in run_specs(cfg)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_execute, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = [_execute(job) for job in jobs]
    records.sort(key=lambda r: r.run_index)
    return records, summarize(records)


def _median(values):
    return float(np.median(values)) if values else None


def _stats(records) -> dict:
    ok = [r for r in records if r.success]
    return {
        "total": len(records),
        "successes": len(ok),
        "flagged": sum(r.flag_ambiguous for r in records),
        "failed": sum(r.method == "failed" for r in records),
        "median_E0": _median([r.E0 for r in ok]),
        "median_E1": _median([r.E1 for r in ok if r.E1 is not None]),
    }


def summarize(records) -> dict:
    """Counts and medians; medians are over successful runs only (``None`` if none)."""
    records = sorted(records, key=lambda r: r.run_index)
    out = _stats(records)
    out["degenerate"] = _stats([r for r in records if r.degenerate])
    out["non_degenerate"] = _stats([r for r in records if not r.degenerate])
    plans = sorted({(r.mode, r.nt) for r in records})
    out["by_plan"] = [
        {"mode": mode, "nt": nt, **_stats([r for r in records if (r.mode, r.nt) == (mode, nt)])}
        for mode, nt in plans
    ]
    out["wall_time"] = float(sum(r.wall_time for r in records))
    return out


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def records_to_csv(records) -> str:
    """CSV text, one row per run; wall times are left out so output is reproducible."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in sorted(records, key=lambda r: r.run_index):
        row = asdict(rec)
        writer.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()
