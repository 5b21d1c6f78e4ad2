"""Resonantly driven three-level system in the rotating frame.

States are labelled 1, 2, 3; the (1,2) and (2,3) transitions are driven with
real Rabi couplings ``omega1`` and ``omega2`` and there is no direct 1-3
coupling.  Units have hbar = 1, so frequencies are in rad per time unit.

The couplings are carried in polar form: ``omega = hypot(omega1, omega2)``
and ``alpha = arctan(omega2 / omega1)``.  With ``c = cos(alpha)``,
``s = sin(alpha)`` the propagator has a closed form and the population of
state 1 after starting in state 1 is

    p11(t) = a0 + a1 cos(omega t) + a2 cos(2 omega t)

with ``x = c**2``, ``a0 = (1 - x)**2 + x**2 / 2``, ``a1 = 2 x (1 - x)`` and
``a2 = x**2 / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError

HALF_PI = 0.5 * np.pi


@dataclass(frozen=True)
class ModelParams:
    """Rabi frequency ``omega`` >= 0 and mixing angle ``alpha`` in [0, pi/2]."""

    omega: float
    alpha: float

    def __post_init__(self):
        omega = float(self.omega)
        alpha = float(self.alpha)
        if not np.isfinite(omega) or omega < 0:
            raise ValueError(f"omega must be finite and >= 0, got {omega!r}")
        if not np.isfinite(alpha) or alpha < 0 or alpha > HALF_PI:
            raise ValueError(f"alpha must lie in [0, pi/2], got {alpha!r}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def from_x(cls, omega: float, x: float) -> "ModelParams":
        """Build from ``x = cos(alpha)**2`` instead of the angle."""
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"x must lie in [0, 1], got {x!r}")
        return cls(omega, float(np.arccos(np.sqrt(x))))

    @property
    def c(self) -> float:
        return float(np.cos(self.alpha))

    @property
    def s(self) -> float:
        return float(np.sin(self.alpha))

    @property
    def x(self) -> float:
        return self.c ** 2

    @property
    def omega1(self) -> float:
        return self.omega * self.c

    @property
    def omega2(self) -> float:
        return self.omega * self.s


@dataclass(frozen=True)
class SignalComponents:
    """Amplitudes of the 0, omega and 2*omega components of p11(t)."""

    a0: float
    a1: float
    a2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2])


def params_from_couplings(omega1: float, omega2: float) -> ModelParams:
    """Convert the Cartesian couplings ``(omega1, omega2)`` to ``ModelParams``.

    Raises
    ------
    DegenerateModelError
        If both couplings are zero.
    ValueError
        If either coupling is negative.
    """
    if omega1 < 0 or omega2 < 0:
        raise ValueError("couplings must be non-negative")
    if omega1 == 0 and omega2 == 0:
        raise DegenerateModelError("omega1 = omega2 = 0 leaves alpha undefined")
    return ModelParams(float(np.hypot(omega1, omega2)), float(np.arctan2(omega2, omega1)))


def effective_hamiltonian(omega1: float, omega2: float) -> np.ndarray:
    """Rotating-frame Hamiltonian for couplings ``omega1`` (1-2), ``omega2`` (2-3)."""
    h = np.zeros((3, 3))
    h[0, 1] = h[1, 0] = omega1
    h[1, 2] = h[2, 1] = omega2
    return h


def propagator(params: ModelParams, t) -> np.ndarray:
    """Closed-form ``U(t, 0) = exp(-i t H_eff)``.

    ``t`` may be a scalar (returns a 3x3 array) or an array of times (returns
    an array of shape ``t.shape + (3, 3)``).
    """
    t = np.asarray(t, dtype=float)
    c, s = params.c, params.s
    cw = np.cos(params.omega * t)
    sw = np.sin(params.omega * t)
    u = np.empty(t.shape + (3, 3), dtype=complex)
    u[..., 0, 0] = c * c * cw + s * s
    u[..., 0, 1] = -1j * c * sw
    u[..., 0, 2] = c * s * (cw - 1.0)
    u[..., 1, 0] = -1j * c * sw
    u[..., 1, 1] = cw
    u[..., 1, 2] = -1j * s * sw
    u[..., 2, 0] = c * s * (cw - 1.0)
    u[..., 2, 1] = -1j * s * sw
    u[..., 2, 2] = s * s * cw + c * c
    return u


def population_trace(params: ModelParams, k: int, l: int, times) -> np.ndarray:
    """``p_kl(t) = |<l|U(t,0)|k>|**2`` for basis labels ``k, l`` in {1, 2, 3}."""
    if k not in (1, 2, 3) or l not in (1, 2, 3):
        raise IndexError(f"basis labels must be 1, 2 or 3, got k={k!r}, l={l!r}")
    u = propagator(params, np.asarray(times, dtype=float))
    return np.abs(u[..., l - 1, k - 1]) ** 2


def components_from_x(x) -> tuple:
    """Amplitudes ``(a0, a1, a2)`` as functions of ``x``; accepts arrays."""
    x = np.asarray(x, dtype=float)
    return 1.0 - 2.0 * x + 1.5 * x * x, 2.0 * x * (1.0 - x), 0.5 * x * x


def p11_components(params: ModelParams) -> SignalComponents:
    a0, a1, a2 = components_from_x(params.x)
    return SignalComponents(float(a0), float(a1), float(a2))


def p11(params: ModelParams, times) -> np.ndarray:
    """Noiseless population of state 1, evaluated from the three-term expansion."""
    comp = p11_components(params)
    phase = params.omega * np.asarray(times, dtype=float)
    # clip guards rounding just outside [0, 1] before it reaches a binomial draw
    return np.clip(comp.a0 + comp.a1 * np.cos(phase) + comp.a2 * np.cos(2.0 * phase), 0.0, 1.0)
