"""Floquet-space assembly and steady-state solve.

A periodic drift is unfolded into a time-independent block drift acting on
the harmonic components ``(dc, c1, s1, c2, s2, ...)`` of the quadrature
vector. The steady state of the enlarged system follows from one algebraic
Lyapunov equation; physical observables are read from the dc block.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, IndexOutOfRange, Unstable
from .gaussian import Covariance, ModeLayout, PeriodicSystem, squeezing_variances
from .linalg import as_real_matrix, solve_lyapunov, spectral_abscissa

__all__ = [
    "ZoneIndex",
    "DC",
    "cos_zone",
    "sin_zone",
    "Truncation",
    "FloquetSystem",
    "FloquetCovariance",
    "zone_order",
    "build_drift",
    "build_diffusion",
    "solve_steady",
    "zone_block",
    "ConvergenceResult",
    "converge",
    "squeezed_variance_observable",
]

_KINDS = ("dc", "cos", "sin")


@dataclass(frozen=True)
class ZoneIndex:
    kind: str
    harmonic: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"zone kind must be one of {_KINDS}")
        if self.kind == "dc":
            if self.harmonic not in (None, 0):
                raise DomainError("dc zone carries no harmonic")
            object.__setattr__(self, "harmonic", None)
        elif self.harmonic is None or int(self.harmonic) != self.harmonic or self.harmonic < 1:
            raise DomainError("cos/sin zones need a harmonic n >= 1")

    def __str__(self):
        return "dc" if self.kind == "dc" else f"{self.kind[0]}{self.harmonic}"


DC = ZoneIndex("dc")


def cos_zone(n: int) -> ZoneIndex:
    return ZoneIndex("cos", n)


def sin_zone(n: int) -> ZoneIndex:
    return ZoneIndex("sin", n)


@dataclass(frozen=True)
class Truncation:
    """Keep harmonics ``n <= max_harmonic``; ``max_harmonic = 0`` is the RWA."""

    max_harmonic: int

    def __post_init__(self):
        if int(self.max_harmonic) != self.max_harmonic or self.max_harmonic < 0:
            raise DomainError("max_harmonic must be a non-negative integer")

    @property
    def zone_count(self) -> int:
        return 2 * self.max_harmonic + 1

    def dimension(self, layout: ModeLayout) -> int:
        return layout.dim * self.zone_count


def zone_order(trunc: Truncation) -> list[ZoneIndex]:
    zones = [DC]
    for n in range(1, trunc.max_harmonic + 1):
        zones += [cos_zone(n), sin_zone(n)]
    return zones


def _zone_position(zone: ZoneIndex, trunc: Truncation) -> int:
    # single source of truth for block placement: dc=0, c_n=2n-1, s_n=2n
    if zone.kind == "dc":
        return 0
    if zone.harmonic > trunc.max_harmonic:
        raise IndexOutOfRange(f"zone {zone} beyond truncation K={trunc.max_harmonic}")
    return 2 * zone.harmonic - (1 if zone.kind == "cos" else 0)


def _block(zone: ZoneIndex, trunc: Truncation, d: int) -> slice:
    i = _zone_position(zone, trunc)
    return slice(i * d, (i + 1) * d)


@dataclass(frozen=True)
class FloquetSystem:
    layout: ModeLayout
    truncation: Truncation
    base_frequency: float
    drift: np.ndarray
    diffusion: np.ndarray

    @property
    def zones(self) -> list[ZoneIndex]:
        return zone_order(self.truncation)

    def block(self, row: ZoneIndex, col: ZoneIndex) -> np.ndarray:
        d = self.layout.dim
        return self.drift[_block(row, self.truncation, d), _block(col, self.truncation, d)]


@dataclass(frozen=True)
class FloquetCovariance:
    layout: ModeLayout
    truncation: Truncation
    gamma: np.ndarray
    residual_norm: float = 0.0
    spectral_abscissa: float = float("nan")

    @property
    def zones(self) -> list[ZoneIndex]:
        return zone_order(self.truncation)

    def block(self, row: ZoneIndex, col: ZoneIndex) -> np.ndarray:
        return zone_block(self, row, col)

    @property
    def dc(self) -> Covariance:
        """Zeroth-zone covariance, the physically observed block."""
        return Covariance(self.layout, self.block(DC, DC))


def build_diffusion(n, trunc: Truncation) -> np.ndarray:
    """Block-diagonal diffusion with ``2K+1`` copies of ``n``."""
    n = as_real_matrix(n, "diffusion")
    if not np.allclose(n, n.T, rtol=0, atol=1e-12 * max(1.0, np.abs(n).max())):
        raise DimensionMismatch("diffusion must be a symmetric square matrix")
    return np.kron(np.eye(trunc.zone_count), n)


def build_drift(sys: PeriodicSystem, trunc: Truncation) -> FloquetSystem:
    """Assemble the time-independent Floquet drift (and diffusion).

    With ``C_m``, ``S_m`` the cosine and sine components (zero outside
    ``1..M``), ``w`` the base frequency and ``r = 1/sqrt(2)``, the blocks
    for ``1 <= n, k <= K`` are::

        [c_n, c_k] = d_nk A0 + r (C_{n+k} + C_{k-n} + C_{n-k})
        [c_n, s_k] = -d_nk n w I + r (S_{n+k} + S_{k-n} - S_{n-k})
        [s_n, c_k] = +d_nk n w I + r (S_{n+k} - S_{k-n} + S_{n-k})
        [s_n, s_k] = d_nk A0 + r (-C_{n+k} + C_{k-n} + C_{n-k})

    and the dc row/column couple through ``C_k`` and ``S_k`` directly.
    """
    K = trunc.max_harmonic
    d = sys.layout.dim
    C, S = sys.cos_component, sys.sin_component
    eye = np.eye(d)
    r = 1.0 / np.sqrt(2.0)
    w = sys.base_frequency
    drift = np.zeros((d * trunc.zone_count,) * 2)

    def put(row, col, value):
        drift[_block(row, trunc, d), _block(col, trunc, d)] = value

    put(DC, DC, sys.a0)
    for k in range(1, K + 1):
        put(DC, cos_zone(k), C(k))
        put(DC, sin_zone(k), S(k))
        put(cos_zone(k), DC, C(k))
        put(sin_zone(k), DC, S(k))
    for n in range(1, K + 1):
        for k in range(1, K + 1):
            same = 1.0 if n == k else 0.0
            put(cos_zone(n), cos_zone(k), same * sys.a0 + r * (C(n + k) + C(k - n) + C(n - k)))
            put(cos_zone(n), sin_zone(k), -same * n * w * eye + r * (S(n + k) + S(k - n) - S(n - k)))
            put(sin_zone(n), cos_zone(k), same * n * w * eye + r * (S(n + k) - S(k - n) + S(n - k)))
            put(sin_zone(n), sin_zone(k), same * sys.a0 + r * (-C(n + k) + C(k - n) + C(n - k)))

    drift.setflags(write=False)
    diffusion = build_diffusion(sys.diffusion, trunc)
    diffusion.setflags(write=False)
    return FloquetSystem(sys.layout, trunc, sys.base_frequency, drift, diffusion)


def solve_steady(fs: FloquetSystem) -> FloquetCovariance:
    """Solve ``A_F G + G A_F^T + N_F = 0``.

    Raises
    ------
    Unstable
        If the Floquet drift is not Hurwitz; carries the spectral abscissa.
    """
    abscissa = spectral_abscissa(fs.drift)
    if abscissa >= 0:
        raise Unstable(
            f"Floquet drift not Hurwitz at K={fs.truncation.max_harmonic} "
            f"(spectral abscissa {abscissa:.6g})",
            abscissa,
        )
    sol = solve_lyapunov(fs.drift, fs.diffusion)
    return FloquetCovariance(fs.layout, fs.truncation, sol.gamma, sol.residual_norm, abscissa)


def zone_block(fc: FloquetCovariance, row: ZoneIndex, col: ZoneIndex) -> np.ndarray:
    d = fc.layout.dim
    return fc.gamma[_block(row, fc.truncation, d), _block(col, fc.truncation, d)]


def squeezed_variance_observable(mode: int = 1) -> Callable[[FloquetCovariance], float]:
    """Observable returning ``V_sq`` of ``mode`` in the dc block."""

    def observable(fc: FloquetCovariance) -> float:
        return squeezing_variances(fc.dc, mode)[0]

    observable.__name__ = f"V_sq[mode {mode}]"
    return observable


@dataclass(frozen=True)
class ConvergenceResult:
    """Observable per truncation ``K = 0..K_max``.

    ``values[K]`` is NaN and ``stable[K]`` False where the truncated system
    was unstable. ``k_star`` is None when no consecutive pair agreed.
    """

    k_star: int | None
    values: tuple[float, ...]
    stable: tuple[bool, ...]

    @property
    def converged(self) -> bool:
        return self.k_star is not None

    def relative_changes(self) -> list[float]:
        """``|v_K - v_{K-1}| / |v_K|`` for ``K >= 1`` (NaN if either is unstable)."""
        out = []
        for k in range(1, len(self.values)):
            a, b = self.values[k - 1], self.values[k]
            out.append(abs(b - a) / abs(b) if b != 0 else abs(b - a))
        return out


def converge(
    sys: PeriodicSystem,
    observable: Callable[[FloquetCovariance], float],
    k_max: int,
    rtol: float,
    stop_early: bool = True,
) -> ConvergenceResult:
    """Increase the truncation until the observable stops changing.

    Solves ``K = 0, 1, ...`` and stops at the first ``K`` with
    ``|obs(K) - obs(K-1)| <= rtol |obs(K)|``. Instability at a given ``K`` is
    recorded, not raised. With ``stop_early=False`` all ``K <= k_max`` are
    solved and ``k_star`` still marks the first agreement.
    """
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    values: list[float] = []
    stable: list[bool] = []
    k_star = None
    for k in range(k_max + 1):
        try:
            fc = solve_steady(build_drift(sys, Truncation(k)))
        except Unstable:
            values.append(float("nan"))
            stable.append(False)
        else:
            values.append(float(observable(fc)))
            stable.append(True)
        if k_star is None and k >= 1 and stable[k] and stable[k - 1]:
            if abs(values[k] - values[k - 1]) <= rtol * abs(values[k]):
                k_star = k
                if stop_early:
                    break
    return ConvergenceResult(k_star, tuple(values), tuple(stable))
