"""Independent oracles for the Floquet steady state.

Three routes to the cooling occupation are compared: the static lab-frame
solve, the static rotating-wave solve and the Floquet dc block. The
time-domain probe integrates the periodic differential Lyapunov equation
until the covariance repeats from one period to the next.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, Divergence, NotSettled, Unstable
from .floquet import Truncation, build_drift, solve_steady
from .gaussian import (
    Covariance,
    PeriodicSystem,
    evaluate_drift,
    mech_occupation,
    steady_state,
)
from .linalg import OVERFLOW_FACTOR, rk4_step, solve_lyapunov, spectral_abscissa
from .models import (
    MECHANICS,
    CoolingParams,
    cooling_lab_frame,
    cooling_periodic,
    cooling_rwa,
)

__all__ = [
    "ComparisonReport",
    "compare_cooling",
    "rwa_equivalence",
    "PeriodicProbe",
    "time_domain_probe",
    "bisect_onset",
    "first_unstable",
]

COOLING_METHODS = ("lab", "rwa", "floquet")


@dataclass(frozen=True)
class ComparisonReport:
    """Per-point values of one observable for several methods.

    Unstable points hold NaN in ``values`` and False in ``stable``.
    """

    variable: str
    grid: tuple[float, ...]
    values: dict[str, tuple[float, ...]]
    stable: dict[str, tuple[bool, ...]]
    pair: tuple[str, str] = ("floquet", "lab")

    def relative_discrepancy(self, method: str, reference: str) -> list[float]:
        out = []
        for v, r, sv, sr in zip(
            self.values[method], self.values[reference], self.stable[method], self.stable[reference]
        ):
            out.append(abs(v - r) / abs(r) if sv and sr else float("nan"))
        return out

    @property
    def max_discrepancy(self) -> float:
        """Max relative difference of the designated pair over jointly stable points."""
        rel = [x for x in self.relative_discrepancy(*self.pair) if not math.isnan(x)]
        return max(rel) if rel else float("nan")

    def onset(self, method: str) -> float | None:
        return first_unstable(self.grid, self.stable[method])

    def to_rows(self) -> list[dict]:
        rows = []
        for i, x in enumerate(self.grid):
            row = {self.variable: x}
            for m in self.values:
                row[m] = self.values[m][i]
                row[f"{m}_stable"] = self.stable[m][i]
            rows.append(row)
        return rows


def first_unstable(grid: Sequence[float], stable: Sequence[bool]) -> float | None:
    for x, s in zip(grid, stable):
        if not s:
            return x
    return None


def _cooling_occupation(method: str, p: CoolingParams, k: int) -> float:
    if method == "lab":
        cov = steady_state(cooling_lab_frame(p))
    elif method == "rwa":
        cov = steady_state(cooling_rwa(p))
    elif method == "floquet":
        cov = solve_steady(build_drift(cooling_periodic(p), Truncation(k))).dc
    else:
        raise DomainError(f"unknown method {method!r}")
    return mech_occupation(cov, MECHANICS)


def compare_cooling(
    p: CoolingParams,
    variable: str,
    grid: Sequence[float],
    truncation: int = 1,
    methods: Sequence[str] = COOLING_METHODS,
) -> ComparisonReport:
    """Mechanical occupation along a sweep of ``kappa`` or ``g``."""
    if variable not in ("kappa", "g"):
        raise DomainError("cooling sweeps vary 'kappa' or 'g'")
    values = {m: [] for m in methods}
    stable = {m: [] for m in methods}
    base = p.as_dict()
    for x in grid:
        point = CoolingParams(**{**base, variable: float(x)})
        for m in methods:
            try:
                values[m].append(_cooling_occupation(m, point, truncation))
                stable[m].append(True)
            except Unstable:
                values[m].append(float("nan"))
                stable[m].append(False)
    return ComparisonReport(
        variable,
        tuple(float(x) for x in grid),
        {m: tuple(v) for m, v in values.items()},
        {m: tuple(s) for m, s in stable.items()},
    )


def rwa_equivalence(sys: PeriodicSystem, k: int) -> float:
    """Max-abs difference between dc blocks at truncation ``k`` and ``0``
    after all harmonics are removed.
    """
    bare = sys.without_harmonics()
    full = solve_steady(build_drift(bare, Truncation(k))).dc.gamma
    single = solve_steady(build_drift(bare, Truncation(0))).dc.gamma
    return float(np.max(np.abs(full - single)))


def bisect_onset(
    abscissa: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-4
) -> float:
    """Locate where ``abscissa(x)`` crosses zero between a stable ``lo`` and
    an unstable ``hi``, to relative precision ``rtol``.
    """
    a_lo, a_hi = abscissa(lo), abscissa(hi)
    if not (a_lo < 0 <= a_hi):
        raise DomainError("bracket must be stable at lo and unstable at hi")
    while abs(hi - lo) > rtol * max(abs(hi), abs(lo), np.finfo(float).tiny):
        mid = 0.5 * (lo + hi)
        if abscissa(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PeriodicProbe:
    """Settled periodic covariance sampled over one drive period."""

    times: np.ndarray
    gammas: np.ndarray
    average: np.ndarray
    periods: int
    settle_residual: float
    period: float = field(default=float("nan"))

    def covariances(self, layout) -> list[Covariance]:
        return [Covariance(layout, g) for g in self.gammas]


def _default_settle_periods(sys: PeriodicSystem) -> int:
    fs = build_drift(sys, Truncation(max(1, sys.order)))
    rate = -spectral_abscissa(fs.drift)
    if rate <= 0:
        return 50
    return int(min(1e6, math.ceil(50 * max(1.0, 1.0 / (rate * sys.period)))))


def time_domain_probe(
    sys: PeriodicSystem,
    n_periods_settle: int | None = None,
    n_samples: int = 20,
    steps_per_period: int = 2000,
    tol: float = 1e-8,
    gamma0=None,
) -> PeriodicProbe:
    """Integrate ``dG/dt = A(t) G + G A(t)^T + N`` into its periodic regime.

    Integration runs period by period with RK4 until
    ``||G(t + tau) - G(t)||_F <= tol ||G(t)||_F``; one further period is then
    sampled at ``n_samples`` equally spaced times, and averaged over all
    steps.

    Raises
    ------
    Unstable
        If the Floquet drift (``K = max(1, M)``) is not Hurwitz.
    Divergence
        If the covariance norm runs past the overflow guard.
    NotSettled
        If periodicity is not reached within ``n_periods_settle`` periods.
    """
    check = build_drift(sys, Truncation(max(1, sys.order)))
    abscissa = spectral_abscissa(check.drift)
    if abscissa >= 0:
        raise Unstable(f"Floquet drift not Hurwitz (spectral abscissa {abscissa:.6g})", abscissa)
    if n_periods_settle is None:
        n_periods_settle = _default_settle_periods(sys)
    if steps_per_period < 1 or n_samples < 1:
        raise DomainError("steps_per_period and n_samples must be positive")
    if steps_per_period % n_samples:
        raise DomainError("n_samples must divide steps_per_period")

    tau = sys.period
    dt = tau / steps_per_period
    # drift at every half step of one period; exact reuse since dt divides tau
    table = [evaluate_drift(sys, j * 0.5 * dt) for j in range(2 * steps_per_period + 1)]
    n = np.asarray(sys.diffusion)
    if gamma0 is None:
        try:
            g = np.array(solve_lyapunov(sys.a0, n).gamma) if spectral_abscissa(sys.a0) < 0 else None
        except Exception:
            g = None
        if g is None:
            g = np.eye(sys.layout.dim)
    else:
        g = np.array(gamma0, dtype=float)
    guard = OVERFLOW_FACTOR * max(np.linalg.norm(n), 1e-300)

    def one_period(g, keep=None):
        acc = np.zeros_like(g) if keep is not None else None
        for i in range(steps_per_period):
            if keep is not None:
                if i % (steps_per_period // n_samples) == 0:
                    keep.append(g.copy())
                acc += g
            g = rk4_step(table[2 * i], table[2 * i + 1], table[2 * i + 2], g, n, dt)
            g = 0.5 * (g + g.T)
        if not np.isfinite(g).all() or np.linalg.norm(g) > guard:
            raise Divergence("covariance norm exceeded overflow guard")
        return g, acc

    residual = float("inf")
    periods = 0
    for periods in range(1, n_periods_settle + 1):
        start = g
        g, _ = one_period(g)
        residual = np.linalg.norm(g - start) / np.linalg.norm(g)
        if residual <= tol:
            break
    else:
        raise NotSettled(
            f"periodicity residual {residual:.3e} above {tol:.1e} after {n_periods_settle} periods"
        )
    samples: list[np.ndarray] = []
    _, acc = one_period(g, keep=samples)
    times = np.arange(n_samples) * tau / n_samples
    return PeriodicProbe(
        times=times,
        gammas=np.array(samples),
        average=acc / steps_per_period,
        periods=periods,
        settle_residual=float(residual),
        period=tau,
    )
