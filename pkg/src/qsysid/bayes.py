"""Single-frequency Bayesian model for p11 data.

The signal model is a linear combination of ``g0 = 1``, ``g1 = cos(w t)`` and
``g2 = cos(2 w t)``.  For a trial frequency ``w`` the design matrix ``G``
(rows ``g_m(t_n)``) is orthonormalized through the eigendecomposition of the
3x3 Gram matrix ``G G^T = E diag(lam) E^T``: with ``V = diag(lam**-0.5) E^T``
the rows of ``V G`` are orthonormal, ``h = V G d`` are the projections of the
data onto them and ``a = V^T h`` are the least-squares amplitudes.  The
marginal log-likelihood (Student-t form, noise level integrated out) is

    P(w | d) = (m_b - N_t) / 2 * log10(1 - m_b <h^2> / (N_t <d^2>))

with ``m_b = 3``, ``<d^2> = sum(d**2) / N_t`` and ``<h^2> = sum(h**2) / m_b``.
Only differences and argmaxes of ``P`` are meaningful.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import InsufficientDataError, UndefinedLikelihoodError
from .simulator import DataVector

N_BASIS = 3
RANK_EPS = 1e-10
LOG_FLOOR = 1e-300
_CHUNK = 1 << 21


@dataclass(frozen=True)
class OrthonormalBasis:
    """Retained eigenpairs of ``G G^T`` (descending) and the whitening map."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    whitening: np.ndarray

    @property
    def rank(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class AmplitudeEstimate:
    a0: float
    a1: float
    a2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2])


@dataclass(frozen=True)
class LikelihoodProfile:
    omegas: np.ndarray
    values: np.ndarray


def design_matrix(omega: float, times) -> np.ndarray:
    """``G[m, n] = g_m(t_n)``, shape ``(3, N_t)``."""
    phase = float(omega) * np.asarray(times, dtype=float)
    return np.stack([np.ones_like(phase), np.cos(phase), np.cos(2.0 * phase)])


def orthonormal_projection(G: np.ndarray, d, rank_eps: float = RANK_EPS):
    """Whiten ``G`` and project ``d`` onto the resulting orthonormal rows.

    Eigen-directions with ``lam < rank_eps * lam_max`` are dropped, so near
    degenerate frequencies (``w ~ 0`` or aliased coincidences of the basis
    functions) give a basis of fewer than three vectors.

    Returns
    -------
    basis : OrthonormalBasis
    h : ndarray, shape (basis.rank,)
    """
    d = np.asarray(d, dtype=float)
    if G.shape[1] != d.size:
        raise ValueError("design matrix and data disagree in length")
    lam, vecs = np.linalg.eigh(G @ G.T)
    lam, vecs = lam[::-1], vecs[:, ::-1]
    if not lam[0] > 0:
        raise RuntimeError("Gram matrix is identically zero")
    keep = lam > rank_eps * lam[0]
    lam, vecs = lam[keep], vecs[:, keep]
    whitening = vecs.T / np.sqrt(lam)[:, None]
    return OrthonormalBasis(lam, vecs, whitening), whitening @ (G @ d)


def _check_data(values):
    if values.size <= N_BASIS:
        raise InsufficientDataError(f"need more than {N_BASIS} samples, got {values.size}")
    if not np.any(values):
        raise UndefinedLikelihoodError("likelihood is undefined for an all-zero data vector")


def _batch(omegas, times, values, rank_eps=RANK_EPS):
    """Projection statistics at many frequencies at once.

    Returns ``(ratio, arg, amps)``: ``ratio = sum(h**2) / sum(d**2)``, the
    log argument ``arg = |d - G^T a|**2 / sum(d**2)`` (the same quantity as
    ``1 - ratio`` without the cancellation) and the amplitudes, shape (K, 3).
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    dd = float(values @ values)
    ratio = np.empty(omegas.size)
    arg = np.empty(omegas.size)
    amps = np.empty((omegas.size, N_BASIS))
    step = max(1, _CHUNK // times.size)
    for lo in range(0, omegas.size, step):
        sl = slice(lo, lo + step)
        phase = omegas[sl, None] * times[None, :]
        G = np.stack([np.ones_like(phase), np.cos(phase), np.cos(2.0 * phase)], axis=1)
        lam, vecs = np.linalg.eigh(G @ G.transpose(0, 2, 1))
        keep = lam > rank_eps * lam[:, -1:]
        proj = np.einsum("kji,kj->ki", vecs, G @ values)
        safe = np.where(keep, lam, 1.0)
        h2 = np.where(keep, proj * proj / safe, 0.0)
        a = np.einsum("kij,kj->ki", vecs, np.where(keep, proj / safe, 0.0))
        resid = values[None, :] - np.einsum("kmn,km->kn", G, a)
        ratio[sl] = h2.sum(axis=1) / dd
        arg[sl] = np.einsum("kn,kn->k", resid, resid) / dd
        amps[sl] = a
    return ratio, np.clip(arg, LOG_FLOOR, 1.0), amps


def _as_arrays(data):
    if isinstance(data, DataVector):
        return data.times, data.values
    times, values = data
    return np.asarray(times, dtype=float), np.asarray(values, dtype=float)


def log_likelihood_many(omegas, data) -> np.ndarray:
    """Vectorized ``log_likelihood`` over an array of trial frequencies."""
    times, values = _as_arrays(data)
    _check_data(values)
    _, arg, _ = _batch(omegas, times, values)
    return 0.5 * (N_BASIS - values.size) * np.log10(arg)


def log_likelihood(omega: float, data) -> float:
    """Marginal log-likelihood ``P(omega | d)`` up to an additive constant.

    ``data`` is a ``DataVector`` or a ``(times, values)`` pair.
    """
    return float(log_likelihood_many([omega], data)[0])


def likelihood_profile(omegas, data) -> LikelihoodProfile:
    omegas = np.asarray(omegas, dtype=float)
    return LikelihoodProfile(omegas, log_likelihood_many(omegas, data))


def projection_ratio(omega: float, data) -> float:
    """``m_b <h^2> / (N_t <d^2>)``, which lies in [0, 1] for any input."""
    times, values = _as_arrays(data)
    _check_data(values)
    ratio, _, _ = _batch([omega], times, values)
    return float(ratio[0])


def amplitudes(omega: float, data) -> AmplitudeEstimate:
    """Least-squares coefficients of ``(g0, g1, g2)`` at ``omega``.

    Dropped eigen-directions contribute nothing (minimum-norm solution).
    """
    times, values = _as_arrays(data)
    _check_data(values)
    _, _, amps = _batch([omega], times, values)
    return AmplitudeEstimate(*map(float, amps[0]))


# a(x) = A0 + A1 x + A2 x^2, rows are (a0, a1, a2)
_AX = np.array([[1.0, -2.0, 1.5], [0.0, 2.0, -2.0], [0.0, 0.0, 0.5]])


def fit_x(a) -> tuple:
    """Closest model amplitudes to ``a`` over ``x`` in [0, 1].

    Minimizes ``|a(x) - a|_2``.  The squared distance is a quartic in ``x``,
    so the minimizer is either an endpoint or a real root of its cubic
    derivative; each root is polished with a Newton step.

    Returns
    -------
    x_hat : float
    residual : float
        The distance ``|a(x_hat) - a|_2``.
    """
    target = a.as_array() if hasattr(a, "as_array") else np.asarray(a, dtype=float)
    diffs = [Polynomial([_AX[m, 0] - target[m], _AX[m, 1], _AX[m, 2]]) for m in range(3)]
    obj = sum(p * p for p in diffs)
    grad = obj.deriv()
    hess = grad.deriv()
    candidates = [0.0, 1.0]
    for r in grad.roots():
        if abs(r.imag) > 1e-6:
            continue
        x = float(r.real)
        if -1e-6 <= x <= 1.0 + 1e-6:
            h = hess(x)
            if h > 0:
                x -= grad(x) / h
            candidates.append(min(max(x, 0.0), 1.0))
    values = [obj(x) for x in candidates]
    x_hat = float(candidates[int(np.argmin(values))])
    # distance evaluated directly; the expanded quartic loses a few digits
    residual = float(np.linalg.norm(_AX @ [1.0, x_hat, x_hat * x_hat] - target))
    return x_hat, residual


def x_from_peak_amplitude(a2: float) -> float:
    """``x = sqrt(2 a2)`` from the 2*omega amplitude alone, clipped to [0, 1]."""
    return float(min(max(np.sqrt(max(2.0 * a2, 0.0)), 0.0), 1.0))
