"""Gaussian-system data model and covariance observables.

Quadratures are interleaved as ``(q1, p1, q2, p2, ...)`` and covariances
are normalized so that the vacuum state has ``Gamma = I``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainError, IndexOutOfRange, NonPhysical, Unstable
from .linalg import as_real_matrix, solve_lyapunov, spectral_abscissa

__all__ = [
    "ModeLayout",
    "StaticSystem",
    "PeriodicSystem",
    "Covariance",
    "symplectic_form",
    "steady_state",
    "evaluate_drift",
    "mech_occupation",
    "squeezing_variances",
    "to_decibels",
    "physicality_check",
]

CLAMP_TOL = 1e-9


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModeLayout:
    n_modes: int

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise DomainError("n_modes must be a positive integer")

    @property
    def dim(self) -> int:
        return 2 * self.n_modes

    def mode_slice(self, mode: int) -> slice:
        if not 0 <= mode < self.n_modes:
            raise IndexOutOfRange(f"mode {mode} outside 0..{self.n_modes - 1}")
        return slice(2 * mode, 2 * mode + 2)

    def check(self, matrix: np.ndarray, name: str) -> None:
        if matrix.shape != (self.dim, self.dim):
            raise DimensionMismatch(
                f"{name} has shape {matrix.shape}, layout needs {(self.dim, self.dim)}"
            )


def _diffusion(layout: ModeLayout, n) -> np.ndarray:
    n = as_real_matrix(n, "diffusion")
    layout.check(n, "diffusion")
    if not np.allclose(n, n.T, rtol=0, atol=1e-12 * max(1.0, np.abs(n).max())):
        raise DomainError("diffusion must be symmetric")
    if np.linalg.eigvalsh(n).min() < -1e-10 * max(1.0, np.abs(n).max()):
        raise DomainError("diffusion must be positive semidefinite")
    return _readonly(n)


@dataclass(frozen=True)
class StaticSystem:
    """Time-independent drift ``A`` and diffusion ``N``."""

    layout: ModeLayout
    drift: np.ndarray
    diffusion: np.ndarray

    def __post_init__(self):
        drift = as_real_matrix(self.drift, "drift")
        self.layout.check(drift, "drift")
        object.__setattr__(self, "drift", _readonly(drift))
        object.__setattr__(self, "diffusion", _diffusion(self.layout, self.diffusion))


@dataclass(frozen=True)
class PeriodicSystem:
    """Drift with Fourier components, constant diffusion.

    ``A(t) = A0 + sqrt(2) * sum_n [C_n cos(n w t) + S_n sin(n w t)]``
    with ``C_n = cos_harmonics[n-1]`` and ``S_n = sin_harmonics[n-1]``.
    """

    layout: ModeLayout
    base_frequency: float
    a0: np.ndarray
    cos_harmonics: tuple = field(default_factory=tuple)
    sin_harmonics: tuple = field(default_factory=tuple)
    diffusion: np.ndarray = None

    def __post_init__(self):
        if not np.isfinite(self.base_frequency) or self.base_frequency <= 0:
            raise DomainError("base_frequency must be positive")
        dim = self.layout.dim
        a0 = as_real_matrix(self.a0, "a0")
        self.layout.check(a0, "a0")
        cos = [as_real_matrix(m, "cos harmonic") for m in self.cos_harmonics]
        sin = [as_real_matrix(m, "sin harmonic") for m in self.sin_harmonics]
        order = max(len(cos), len(sin))
        cos += [np.zeros((dim, dim))] * (order - len(cos))
        sin += [np.zeros((dim, dim))] * (order - len(sin))
        for m in cos + sin:
            self.layout.check(m, "harmonic")
        if self.diffusion is None:
            raise DomainError("diffusion matrix is required")
        object.__setattr__(self, "base_frequency", float(self.base_frequency))
        object.__setattr__(self, "a0", _readonly(a0))
        object.__setattr__(self, "cos_harmonics", tuple(_readonly(m.copy()) for m in cos))
        object.__setattr__(self, "sin_harmonics", tuple(_readonly(m.copy()) for m in sin))
        object.__setattr__(self, "diffusion", _diffusion(self.layout, self.diffusion))

    @property
    def order(self) -> int:
        """Highest harmonic ``M`` stored."""
        return len(self.cos_harmonics)

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.base_frequency

    def cos_component(self, m: int) -> np.ndarray:
        """``C_m``; zero for ``m <= 0`` or ``m > M``."""
        if 1 <= m <= self.order:
            return self.cos_harmonics[m - 1]
        return np.zeros((self.layout.dim, self.layout.dim))

    def sin_component(self, m: int) -> np.ndarray:
        if 1 <= m <= self.order:
            return self.sin_harmonics[m - 1]
        return np.zeros((self.layout.dim, self.layout.dim))

    def without_harmonics(self) -> "PeriodicSystem":
        return PeriodicSystem(self.layout, self.base_frequency, self.a0, (), (), self.diffusion)

    def dc_system(self) -> StaticSystem:
        """The rotating-wave (zeroth-zone) static system ``(A0, N)``."""
        return StaticSystem(self.layout, self.a0, self.diffusion)


@dataclass(frozen=True)
class Covariance:
    layout: ModeLayout
    gamma: np.ndarray

    def __post_init__(self):
        g = as_real_matrix(self.gamma, "covariance")
        self.layout.check(g, "covariance")
        object.__setattr__(self, "gamma", _readonly(g))

    def mode_block(self, mode: int) -> np.ndarray:
        s = self.layout.mode_slice(mode)
        return self.gamma[s, s]


def symplectic_form(layout: ModeLayout) -> np.ndarray:
    """Block-diagonal ``sigma_N`` with ``sigma = [[0, 1], [-1, 0]]``."""
    sigma = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(layout.n_modes), sigma)


def steady_state(sys: StaticSystem) -> Covariance:
    """Stationary covariance of a static system.

    Raises
    ------
    Unstable
        If the drift is not Hurwitz.
    """
    abscissa = spectral_abscissa(sys.drift)
    if abscissa >= 0:
        raise Unstable(f"drift not Hurwitz (spectral abscissa {abscissa:.6g})", abscissa)
    sol = solve_lyapunov(sys.drift, sys.diffusion)
    return Covariance(sys.layout, sol.gamma)


def evaluate_drift(sys: PeriodicSystem, t: float) -> np.ndarray:
    if not np.isfinite(t):
        raise DomainError("t must be finite")
    a = np.array(sys.a0, dtype=float)
    root2 = np.sqrt(2.0)
    for n in range(1, sys.order + 1):
        phase = n * sys.base_frequency * t
        a += root2 * (np.cos(phase) * sys.cos_harmonics[n - 1] + np.sin(phase) * sys.sin_harmonics[n - 1])
    return a


def _clamp(value: float, what: str) -> float:
    if value < -CLAMP_TOL:
        raise NonPhysical(f"{what} = {value:.3e} is negative")
    return max(value, 0.0)


def mech_occupation(cov: Covariance, mode: int) -> float:
    """Mean occupation ``(G_qq + G_pp - 2) / 4`` of one mode."""
    block = cov.mode_block(mode)
    return _clamp(0.25 * (block[0, 0] + block[1, 1] - 2.0), "occupation")


def squeezing_variances(cov: Covariance, mode: int) -> tuple[float, float]:
    """Smallest and largest eigenvalue of the mode's 2x2 covariance block.

    Raises
    ------
    NonPhysical
        If the squeezed variance is not positive or the block violates
        ``det >= 1``.
    """
    block = cov.mode_block(mode)
    lo, hi = np.linalg.eigvalsh(0.5 * (block + block.T))
    if lo <= 0:
        raise NonPhysical(f"squeezed variance {lo:.3e} is not positive")
    if lo * hi < 1.0 - CLAMP_TOL:
        raise NonPhysical(f"reduced block violates the uncertainty bound (det={lo * hi:.6g})")
    return float(lo), float(hi)


def to_decibels(v: float) -> float:
    """Noise reduction below vacuum in dB, ``-10 log10 V``."""
    if not v > 0:
        raise DomainError(f"variance must be positive, got {v}")
    return float(-10.0 * np.log10(v))


def physicality_check(cov: Covariance) -> bool:
    g = cov.gamma
    if not np.allclose(g, g.T, rtol=0, atol=1e-10 * max(1.0, np.abs(g).max())):
        return False
    herm = g + 1j * symplectic_form(cov.layout)
    return bool(np.linalg.eigvalsh(herm).min() >= -CLAMP_TOL)
