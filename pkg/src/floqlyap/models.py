"""Optomechanical model builders.

Mode 0 is the cavity field and mode 1 the mechanical oscillator. All rates
are in units of the mechanical frequency, which is fixed to 1.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError
from .gaussian import ModeLayout, PeriodicSystem, StaticSystem

__all__ = [
    "CAVITY",
    "MECHANICS",
    "OMEGA_M",
    "J_PLUS",
    "J_MINUS",
    "G1",
    "G2",
    "M_PLUS",
    "M_MINUS",
    "M_ZERO",
    "CoolingParams",
    "TwoToneParams",
    "LevitatedParams",
    "damping_matrix",
    "diffusion_matrix",
    "cooling_lab_frame",
    "cooling_rwa",
    "cooling_periodic",
    "two_tone_periodic",
    "levitated_periodic",
    "bogoliubov_params",
]

CAVITY = 0
MECHANICS = 1
OMEGA_M = 1.0
# every model's interaction-picture drive is periodic at twice the mechanical frequency
DRIVE_FREQUENCY = 2.0 * OMEGA_M

LAYOUT = ModeLayout(2)
_ROOT2 = np.sqrt(2.0)


def _const(rows):
    arr = np.array(rows, dtype=float)
    arr.setflags(write=False)
    return arr


J_PLUS = _const([[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]])
J_MINUS = _const([[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]])
G1 = _const([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]])
G2 = _const([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
M_PLUS = _const([[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
M_MINUS = _const([[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
M_ZERO = _const(np.diag([0, 0, 1, -1]))


class _Params:
    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                raise DomainError(f"{f.name} must be finite")
            object.__setattr__(self, f.name, float(value))
        for name in self._nonnegative:
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class CoolingParams(_Params):
    g: float
    kappa: float
    gamma: float
    nbar: float
    delta: float = OMEGA_M

    _nonnegative = ("g", "kappa", "gamma", "nbar")


@dataclass(frozen=True)
class TwoToneParams(_Params):
    g_minus: float
    g_plus: float
    kappa: float
    gamma: float
    nbar: float

    _nonnegative = ("g_minus", "g_plus", "kappa", "gamma", "nbar")

    @property
    def dissipative_regime(self) -> bool:
        return self.g_plus < self.g_minus


@dataclass(frozen=True)
class LevitatedParams(_Params):
    g: float
    alpha: float
    kappa: float
    gamma: float
    nbar: float

    _nonnegative = ("g", "kappa", "gamma", "nbar")

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 <= self.alpha < 1.0:
            raise DomainError("modulation depth alpha must lie in [0, 1)")


def damping_matrix(kappa: float, gamma: float) -> np.ndarray:
    return np.diag([-kappa, -kappa, -gamma, -gamma])


def diffusion_matrix(kappa: float, gamma: float, nbar: float) -> np.ndarray:
    """Vacuum noise on the cavity, thermal noise on the mechanics."""
    thermal = 2.0 * gamma * (2.0 * nbar + 1.0)
    return np.diag([2.0 * kappa, 2.0 * kappa, thermal, thermal])


def cooling_lab_frame(p: CoolingParams) -> StaticSystem:
    """Full linearized cooling model without any rotating frame."""
    k, d, g, gm, wm = p.kappa, p.delta, p.g, p.gamma, OMEGA_M
    drift = np.array(
        [
            [-k, d, 0.0, 0.0],
            [-d, -k, -2.0 * g, 0.0],
            [0.0, 0.0, -gm, wm],
            [-2.0 * g, 0.0, -wm, -gm],
        ]
    )
    return StaticSystem(LAYOUT, drift, diffusion_matrix(p.kappa, p.gamma, p.nbar))


def cooling_rwa(p: CoolingParams) -> StaticSystem:
    """Beam-splitter-only cooling drift (rotating-wave approximation)."""
    drift = damping_matrix(p.kappa, p.gamma) + p.g * J_MINUS
    return StaticSystem(LAYOUT, drift, diffusion_matrix(p.kappa, p.gamma, p.nbar))


def cooling_periodic(p: CoolingParams) -> PeriodicSystem:
    """Red-sideband cooling in the frame rotating at the mechanical frequency."""
    g = p.g
    return PeriodicSystem(
        LAYOUT,
        DRIVE_FREQUENCY,
        damping_matrix(p.kappa, p.gamma) + g * J_MINUS,
        (-g / _ROOT2 * J_PLUS,),
        (g / _ROOT2 * G1,),
        diffusion_matrix(p.kappa, p.gamma, p.nbar),
    )


def two_tone_periodic(p: TwoToneParams) -> PeriodicSystem:
    """Two-tone (both sidebands) drive for dissipative mechanical squeezing."""
    gm, gp = p.g_minus, p.g_plus
    return PeriodicSystem(
        LAYOUT,
        DRIVE_FREQUENCY,
        damping_matrix(p.kappa, p.gamma) + gm * J_MINUS - gp * J_PLUS,
        (-gm / _ROOT2 * J_PLUS + gp / _ROOT2 * J_MINUS,),
        (gm / _ROOT2 * G1 - gp / _ROOT2 * G2,),
        diffusion_matrix(p.kappa, p.gamma, p.nbar),
    )


def levitated_periodic(p: LevitatedParams) -> PeriodicSystem:
    """Levitated particle with tweezer amplitude modulated at twice the
    mechanical frequency (modulation phase zero, detuning on the red sideband).
    """
    g, a, wm, r2 = p.g, p.alpha, OMEGA_M, _ROOT2
    a0 = (
        damping_matrix(p.kappa, p.gamma)
        - g / r2 * J_MINUS
        + g * a / (2 * r2) * J_PLUS
        + wm * a**2 / 4 * M_MINUS
        - wm * a / 2 * M_PLUS
    )
    cos = (
        g / 2 * J_PLUS - g * a / 2 * J_MINUS + wm * a / r2 * M_MINUS - 3 * wm * a**2 / (8 * r2) * M_PLUS,
        g * a / 4 * J_PLUS - wm * a / (2 * r2) * M_PLUS + wm * a**2 / (4 * r2) * M_MINUS,
        -wm * a**2 / (8 * r2) * M_PLUS,
    )
    sin = (
        -g / 2 * G1 + wm * a**2 / (8 * r2) * M_ZERO,
        -g * a / 4 * G1 + wm * a / (2 * r2) * M_ZERO,
        wm * a**2 / (8 * r2) * M_ZERO,
    )
    return PeriodicSystem(
        LAYOUT, DRIVE_FREQUENCY, a0, cos, sin, diffusion_matrix(p.kappa, p.gamma, p.nbar)
    )


def bogoliubov_params(alpha: float, g: float) -> tuple[float, float, float]:
    """Effective rates of the mechanical Bogoliubov mode under the RWA.

    Returns ``(lambda_eff, rotation_rate, parametric_rate)`` with
    ``lambda_eff = g sqrt((4 - alpha^2) / 8)``, ``rotation_rate =
    alpha^2 / 4`` and ``parametric_rate = alpha / 4`` (units of the
    mechanical frequency). The coupling prefactor is taken to be ``g``.
    """
    if not 0.0 <= alpha < 1.0 + 1e-15:
        raise DomainError("alpha must lie in [0, 1]")
    return (
        g * np.sqrt((4.0 - alpha**2) / 8.0),
        OMEGA_M * alpha**2 / 4.0,
        OMEGA_M * alpha / 4.0,
    )
