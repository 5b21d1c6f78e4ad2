"""What stroboscopic basis-state measurements can and cannot reveal about H.

Setting: a diagonal observable ``M``, Hamiltonian ``H`` and initial state
``rho0`` on an N-dimensional space, observed through
``Tr[M U(t) rho0 U(t)^dag]`` with ``U(t) = exp(-i t H)``.

* If all three operators are block diagonal on a common split of the basis,
  the evolution is a direct sum of independent blocks and adding
  ``lambda_s * identity`` on any block only multiplies that block's
  propagator by a phase, which cancels in the trace.
* A diagonal unitary ``D`` (phases on the basis states) together with a
  global shift gives another unobservable family ``D (H - lambda0) D^dag``
  whenever ``rho0`` is diagonal too.

Block detection works in the fixed measurement basis only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidPartitionError

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class SystemSpec:
    """Measurement ``M`` (real diagonal), Hamiltonian ``H`` and state ``rho0``."""

    M: np.ndarray
    H: np.ndarray
    rho0: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M)
        if M.ndim == 1:
            M = np.diag(M)
        H = np.asarray(self.H, dtype=complex)
        rho = np.asarray(self.rho0, dtype=complex)
        n = H.shape[0]
        for name, op in (("M", M), ("H", H), ("rho0", rho)):
            if op.shape != (n, n):
                raise ValueError(f"{name} has shape {op.shape}, expected {(n, n)}")
        if np.any(np.abs(M - np.diag(np.diag(M))) > 0) or np.any(np.abs(np.imag(M)) > 0):
            raise ValueError("M must be real and diagonal in the measurement basis")
        if not np.allclose(H, H.conj().T, atol=1e-12):
            raise ValueError("H must be Hermitian")
        if not np.allclose(rho, rho.conj().T, atol=1e-12):
            raise ValueError("rho0 must be Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-12:
            raise ValueError("rho0 must have unit trace")
        if np.linalg.eigvalsh(rho).min() < -1e-12:
            raise ValueError("rho0 must be positive semidefinite")
        object.__setattr__(self, "M", np.real(M).astype(float))
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "rho0", rho)

    @property
    def dimension(self) -> int:
        return self.H.shape[0]


def common_blocks(spec: SystemSpec, tol: float = DEFAULT_TOL) -> list:
    """Finest basis-aligned partition that block-diagonalizes M, H and rho0.

    Indices ``i != j`` are linked when ``|H_ij| > tol`` or ``|rho0_ij| > tol``;
    the blocks are the connected components, each a sorted tuple of 0-based
    indices, ordered by smallest member.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    link = (np.abs(spec.H) > tol) | (np.abs(spec.rho0) > tol)
    np.fill_diagonal(link, False)
    _, labels = connected_components(csr_matrix(link), directed=False)
    blocks = {}
    for i, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(i)
    return sorted((tuple(b) for b in blocks.values()), key=lambda b: b[0])


def _validate_partition(partition, n):
    flat = sorted(i for block in partition for i in block)
    if flat != list(range(n)):
        raise InvalidPartitionError("partition must cover each index exactly once")


def respects_partition(op, partition, tol: float = DEFAULT_TOL) -> bool:
    """True when ``op`` has no coupling above ``tol`` between distinct blocks."""
    op = np.asarray(op)
    label = np.empty(op.shape[0], dtype=int)
    for s, block in enumerate(partition):
        label[list(block)] = s
    cross = label[:, None] != label[None, :]
    return not np.any(np.abs(op[cross]) > tol)


def shift_hamiltonian(H, partition, lambdas, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``H + sum_s lambdas[s] * identity_s`` for the blocks of ``partition``."""
    H = np.asarray(H, dtype=complex)
    _validate_partition(partition, H.shape[0])
    if len(lambdas) != len(partition):
        raise InvalidPartitionError("need one shift per block")
    if not respects_partition(H, partition, tol):
        raise InvalidPartitionError("H couples different blocks of the partition")
    shift = np.zeros(H.shape[0])
    for block, lam in zip(partition, lambdas):
        shift[list(block)] = lam
    return H + np.diag(shift)


def gauge_transform(H, phases, lambda0: float = 0.0) -> np.ndarray:
    """``D (H - lambda0 I) D^dag`` with ``D = diag(1, e^{i phi_2}, ..., e^{i phi_N})``.

    ``phases`` lists ``phi_2 .. phi_N``; the first basis state is the phase
    reference.
    """
    H = np.asarray(H, dtype=complex)
    phases = np.asarray(phases, dtype=float)
    if phases.size != H.shape[0] - 1:
        raise ValueError(f"need {H.shape[0] - 1} phases, got {phases.size}")
    d = np.exp(1j * np.concatenate([[0.0], phases]))
    return d[:, None] * (H - lambda0 * np.eye(H.shape[0])) * d.conj()[None, :]


def positive_gauge_representative(H) -> np.ndarray:
    """Sign gauge making the nearest-neighbour chain couplings of a real H positive.

    For a real symmetric H whose coupling graph is a path ``1-2-...-N`` the
    sign of each off-diagonal entry can be flipped with phases in {0, pi};
    this returns the representative with ``H[k, k+1] >= 0``.
    """
    H = np.asarray(H, dtype=float)
    signs = np.ones(H.shape[0])
    for k in range(1, H.shape[0]):
        # entry becomes signs[k-1] * H[k-1, k] * signs[k]
        signs[k] = -signs[k - 1] if H[k - 1, k] < 0 else signs[k - 1]
    return signs[:, None] * H * signs[None, :]


def trace_expectation(spec: SystemSpec, H, times) -> np.ndarray:
    """``Tr[M U(t) rho0 U(t)^dag]`` at each time, with ``U`` from the eigenbasis of ``H``."""
    H = np.asarray(H, dtype=complex)
    if H.shape != spec.H.shape:
        raise ValueError(f"H has shape {H.shape}, system is {spec.H.shape}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    energies, vecs = np.linalg.eigh(H)
    rho_e = vecs.conj().T @ spec.rho0 @ vecs
    m_e = vecs.conj().T @ spec.M @ vecs
    # Tr[M U rho U^dag] = sum_jk m_e[k, j] rho_e[j, k] exp(-i (E_j - E_k) t)
    weights = (m_e.T * rho_e).ravel()
    gaps = (energies[:, None] - energies[None, :]).ravel()
    out = np.exp(-1j * np.outer(times, gaps)) @ weights
    return out.real


def indistinguishable(spec: SystemSpec, H_a, H_b, times, tol: float = 1e-10) -> bool:
    """True if the two Hamiltonians give the same trace within ``tol`` at every time."""
    a = trace_expectation(spec, H_a, times)
    b = trace_expectation(spec, H_b, times)
    return bool(np.max(np.abs(a - b)) <= tol)


def max_trace_deviation(spec: SystemSpec, H_a, H_b, times) -> float:
    return float(np.max(np.abs(trace_expectation(spec, H_a, times) - trace_expectation(spec, H_b, times))))
