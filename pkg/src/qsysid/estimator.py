"""End-to-end estimation of (Omega, alpha) from one p11 trace.

Pipeline:

1. The highest peak ``w0`` of the rescaled power spectrum is either Omega or
   2*Omega.
2. The log-likelihood is maximized in ``[w0 - dw, w0 + dw]`` (``w0`` read as
   Omega) and in ``[w0/2 - dw, w0/2 + dw]`` (``w0`` read as 2*Omega).  A third
   window around ``(w_s - w0)/2`` covers a 2*Omega component folded into the
   band from above, where ``w_s = 2 pi N_t / T`` is the mean sampling rate.
3. The candidate with the highest likelihood wins.  If another candidate lies
   within ``tau`` of it, the result is flagged as ambiguous and the tie is
   broken by how well each candidate's amplitudes match the model's
   ``a(x)`` curve.
4. ``x`` (hence alpha) is fitted to the amplitudes at the chosen frequency.

When the spectrum has no usable peak, the likelihood is scanned on a dense
grid instead and the best local maxima are polished.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import bayes
from .errors import EstimationFailedError
from .simulator import DataVector
from .spectral import EDGE_BINS, PEAK_MARGIN, find_peak, power_spectrum


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning knobs.  ``None`` means "derive from the data" (see each field).

    delta_omega
        Half-width of the refinement windows; default ``2 pi / T``.
    ambiguity_tau
        Absolute likelihood gap below which two candidates tie; default
        ``ambiguity_fraction * (max P - median P)`` over the spectral bins.
    grid_step
        Scan step for windows and exhaustive search; default ``pi / (8 T)``.
    omega_range
        Exhaustive-search range; default ``(0, range_factor * pi N_t / T]``.
    """

    delta_omega: float | None = None
    ambiguity_tau: float | None = None
    ambiguity_fraction: float = 0.05
    grid_step: float | None = None
    xtol: float = 1e-10
    omega_range: tuple | None = None
    range_factor: float = 1.25
    peak_margin: float = PEAK_MARGIN
    edge_bins: float = EDGE_BINS
    fold_candidates: bool = True
    n_polish: int = 8
    residual_tol: float = 0.02

    def __post_init__(self):
        for name in ("delta_omega", "ambiguity_tau", "grid_step"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive")
        if not (self.xtol > 0 and self.ambiguity_fraction > 0 and self.range_factor > 0):
            raise ValueError("xtol, ambiguity_fraction and range_factor must be positive")
        if self.omega_range is not None:
            lo, hi = self.omega_range
            if not 0 <= lo < hi:
                raise ValueError("omega_range must satisfy 0 <= lo < hi")


@dataclass(frozen=True)
class Candidate:
    label: str
    omega: float
    logp: float
    amplitudes: tuple
    x_hat: float
    residual: float


@dataclass
class EstimateResult:
    omega3: float
    x_hat: float
    alpha_hat: float
    amplitudes: list
    fit_residual: float
    logp3: float
    method: str
    flag_ambiguous: bool
    resolved_by: str
    tau: float
    horizon: float
    n_samples: int
    omega0: float | None = None
    omega0_height: float | None = None
    peak_valid: bool = False
    peak_reason: str = ""
    omega1: float | None = None
    P1: float | None = None
    omega2: float | None = None
    P2: float | None = None
    omega2_folded: float | None = None
    P2_folded: float | None = None
    candidates: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


class SearchResult(NamedTuple):
    profile: bayes.LikelihoodProfile
    omega_star: float
    logp_star: float
    peaks: list
    interior: bool


def _polish(data, lo, hi, xtol):
    """Bounded Brent (golden section + parabolic steps) on ``-P`` over [lo, hi]."""
    res = minimize_scalar(
        lambda w: -bayes.log_likelihood(w, data),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xtol * max(1.0, hi)},
    )
    return float(res.x), float(-res.fun)


def _local_maxima(values, limit):
    """Indices of the ``limit`` highest grid local maxima (endpoints included)."""
    padded = np.concatenate([[-np.inf], values, [-np.inf]])
    mid = padded[1:-1]
    idx = np.flatnonzero((mid >= padded[:-2]) & (mid > padded[2:]))
    return idx[np.argsort(-values[idx], kind="stable")][:limit]


def _maximize_window(data, lo, hi, step, xtol, n_polish=3):
    """Scan [lo, hi] and polish the few best local maxima; returns ``(omega, P)``.

    Polishing more than the top grid point matters when two nearly equal
    components beat against each other and the exact peak falls between
    grid points.
    """
    n = max(int(np.ceil((hi - lo) / step)) + 1, 5)
    grid = np.linspace(lo, hi, n)
    values = bayes.log_likelihood_many(grid, data)
    i = int(np.argmax(values))
    best = (float(grid[i]), float(values[i]))
    for j in _local_maxima(values, n_polish):
        polished = _polish(data, grid[max(j - 1, 0)], grid[min(j + 1, n - 1)], xtol)
        if polished[1] > best[1]:
            best = polished
    return best


def _settings(data, cfg):
    T = data.span
    dw = cfg.delta_omega if cfg.delta_omega is not None else 2.0 * np.pi / T
    step = cfg.grid_step if cfg.grid_step is not None else np.pi / (8.0 * T)
    return T, dw, min(step, dw / 8.0)


def _check(data):
    if len(data) <= bayes.N_BASIS:
        raise bayes.InsufficientDataError(f"need more than {bayes.N_BASIS} samples, got {len(data)}")
    if not np.any(data.values):
        raise bayes.UndefinedLikelihoodError("likelihood is undefined for an all-zero data vector")


def refine(data: DataVector, omega0: float, cfg: EstimatorConfig = EstimatorConfig()):
    """Maximize the likelihood near ``omega0`` (as Omega) and ``omega0/2`` (as 2 Omega).

    Returns ``(omega1, P1, omega2, P2)``; a window that collapses after
    clipping at zero yields ``None`` for its pair.
    """
    if not omega0 > 0:
        raise ValueError("omega0 must be positive")
    _check(data)
    _, dw, step = _settings(data, cfg)
    out = []
    for center in (omega0, 0.5 * omega0):
        lo, hi = max(center - dw, step), center + dw
        out.extend(_maximize_window(data, lo, hi, step, cfg.xtol) if hi > lo else (None, None))
    return tuple(out)


def _candidate(label, omega, logp, data):
    amps = bayes.amplitudes(omega, data)
    x_hat, resid = bayes.fit_x(amps)
    return Candidate(label, float(omega), float(logp), tuple(amps.as_array().tolist()), float(x_hat), resid)


def _dedupe(cands, tol):
    kept = []
    for c in sorted(cands, key=lambda c: -c.logp):
        if all(abs(c.omega - k.omega) > tol for k in kept):
            kept.append(c)
    return kept


def disambiguate_by_amplitudes(candidates, tau: float = 0.0, residual_tol: float = 0.02):
    """Pick among candidates whose likelihoods tie within ``tau``.

    A tie is broken in favour of the candidate whose amplitudes are closest
    to a valid ``a(x)`` (smallest ``fit_x`` residual); if residuals also agree
    within ``residual_tol`` the higher-likelihood candidate is kept.

    Returns ``(choice, flagged, resolved_by)``.
    """
    cands = list(candidates)
    if not cands:
        raise ValueError("no candidates to choose from")
    best = max(cands, key=lambda c: c.logp)
    tied = [c for c in cands if best.logp - c.logp < tau]
    if len(tied) <= 1:
        return best, False, "likelihood"
    rmin = min(c.residual for c in tied)
    consistent = [c for c in tied if c.residual - rmin <= residual_tol]
    if len(consistent) == 1:
        return consistent[0], True, "amplitude_fit"
    return max(consistent, key=lambda c: c.logp), True, "unresolved"


def default_search_range(data: DataVector, cfg: EstimatorConfig = EstimatorConfig()):
    if cfg.omega_range is not None:
        return tuple(map(float, cfg.omega_range))
    return 0.0, cfg.range_factor * np.pi * len(data) / data.span


def exhaustive_search(data: DataVector, omega_range=None, cfg: EstimatorConfig = EstimatorConfig()) -> SearchResult:
    """Scan the likelihood over ``omega_range`` and polish the best local maxima.

    ``profile`` holds the raw scan (a lower endpoint of 0 is skipped);
    ``peaks`` lists polished ``(omega, P)`` local maxima, best first.
    ``interior`` is false when the scan maximum sits on the range boundary.
    """
    _check(data)
    _, dw, step = _settings(data, cfg)
    lo, hi = omega_range if omega_range is not None else default_search_range(data, cfg)
    if not 0 <= lo < hi:
        raise ValueError("omega_range must satisfy 0 <= lo < hi")
    n = int(np.ceil((hi - lo) / step))
    grid = lo + (hi - lo) * np.arange(n + 1) / n
    if grid[0] == 0.0:
        grid = grid[1:]
    values = bayes.log_likelihood_many(grid, data)
    profile = bayes.LikelihoodProfile(grid, values)

    inner = values[1:-1]
    local = 1 + np.flatnonzero((inner >= values[:-2]) & (inner > values[2:]))
    local = local[np.argsort(-values[local], kind="stable")][: cfg.n_polish]
    peaks = []
    for i in local:
        peaks.append(_polish(data, grid[i - 1], grid[i + 1], cfg.xtol))
    peaks.sort(key=lambda p: -p[1])
    merged = []
    for w, p in peaks:
        if all(abs(w - m[0]) > dw / 4.0 for m in merged):
            merged.append((w, p))

    top = int(np.argmax(values))
    interior = 0 < top < grid.size - 1 and bool(merged)
    if interior:
        omega_star, logp_star = merged[0]
    else:
        omega_star, logp_star = float(grid[top]), float(values[top])
    return SearchResult(profile, omega_star, logp_star, merged, interior)


def _tau(cfg, profile_values, extra):
    if cfg.ambiguity_tau is not None:
        return cfg.ambiguity_tau
    top = max(np.max(profile_values), max(extra, default=-np.inf))
    return cfg.ambiguity_fraction * max(top - float(np.median(profile_values)), 0.0)


def estimate(data: DataVector, cfg: EstimatorConfig = EstimatorConfig()) -> EstimateResult:
    """Run the full pipeline on ``data``.

    Raises
    ------
    InsufficientDataError, UndefinedLikelihoodError
        For data the likelihood cannot handle.
    EstimationFailedError
        When the exhaustive fallback finds no interior maximum.
    """
    _check(data)
    T, dw, step = _settings(data, cfg)
    spectrum = power_spectrum(data, T)
    peak = find_peak(spectrum, cfg.peak_margin, cfg.edge_bins)
    bins = spectrum.omegas[1:]
    bin_logp = bayes.log_likelihood_many(bins, data)

    info = dict(horizon=T, n_samples=len(data))
    if peak is not None:
        info.update(omega0=peak.omega, omega0_height=peak.height, peak_valid=peak.valid, peak_reason=peak.reason)

    cands = []
    if peak is not None and peak.valid:
        method = "seeded"
        w0 = peak.omega
        windows = [("omega1", w0), ("omega2", 0.5 * w0)]
        folded = 0.5 * (2.0 * np.pi * len(data) / T - w0)
        if cfg.fold_candidates and dw < folded <= spectrum.omegas[-1]:
            windows.append(("omega2_folded", folded))
        for label, center in windows:
            lo, hi = max(center - dw, step), center + dw
            if hi <= lo:
                continue
            w, p = _maximize_window(data, lo, hi, step, cfg.xtol)
            info[label] = w
            info[{"omega1": "P1", "omega2": "P2", "omega2_folded": "P2_folded"}[label]] = p
            cands.append(_candidate(label, w, p, data))
    else:
        method = "exhaustive"
        search = exhaustive_search(data, None, cfg)
        if not search.interior:
            info.update(
                method=method,
                omega_range=list(default_search_range(data, cfg)),
                boundary_omega=search.omega_star,
                boundary_logp=search.logp_star,
            )
            raise EstimationFailedError("no interior likelihood maximum in the search range", info)
        for j, (w, p) in enumerate(search.peaks):
            cands.append(_candidate(f"peak{j}", w, p, data))

    cands = _dedupe(cands, dw / 4.0)
    tau = _tau(cfg, bin_logp, [c.logp for c in cands])
    choice, flagged, how = disambiguate_by_amplitudes(cands, tau, cfg.residual_tol)
    alpha_hat = float(np.arccos(np.sqrt(choice.x_hat)))
    return EstimateResult(
        omega3=choice.omega,
        x_hat=choice.x_hat,
        alpha_hat=alpha_hat,
        amplitudes=list(choice.amplitudes),
        fit_residual=choice.residual,
        logp3=choice.logp,
        method=method,
        flag_ambiguous=flagged,
        resolved_by=how,
        tau=float(tau),
        candidates=[asdict(c) for c in cands],
        **info,
    )


def error_metrics(omega_est: float, omega_true: float) -> tuple:
    """``(E, E1)``: seed error against Omega or 2 Omega, and plain relative error."""
    if not omega_true > 0:
        raise ValueError("omega_true must be positive")
    e1 = abs(omega_est - omega_true) / omega_true
    e = min(e1, abs(omega_est - 2.0 * omega_true) / (2.0 * omega_true))
    return e, e1
