"""Dense real-matrix kernels.

Algebraic Lyapunov solves ``A X + X A^T + N = 0``, Hurwitz tests and a
fixed-step RK4 integrator for the differential Lyapunov equation
``dX/dt = A(t) X + X A(t)^T + N``.

Matrices are plain ``numpy.ndarray`` objects of dtype float64.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    Divergence,
    DomainError,
    NumericalFailure,
    SingularSystem,
)

__all__ = [
    "LyapunovSolution",
    "LyapunovTrajectory",
    "as_real_matrix",
    "solve_lyapunov",
    "spectral_abscissa",
    "is_hurwitz",
    "hurwitz_by_spectrum",
    "hurwitz_by_lyapunov",
    "lyapunov_rhs",
    "rk4_step",
    "integrate_lyapunov",
]

# d above which the d^2 x d^2 Kronecker system gets too expensive for "auto"
KRONECKER_MAX_DIM = 40
SYMMETRY_TOL = 1e-8
OVERFLOW_FACTOR = 1e12


def as_real_matrix(x, name: str = "matrix", square: bool = True) -> np.ndarray:
    """Validate and convert ``x`` to a finite 2-D float64 array (a copy)."""
    arr = np.array(x, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or Inf entries")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _check_symmetric(n: np.ndarray, name: str, rtol: float = 1e-10) -> None:
    scale = max(1.0, np.linalg.norm(n))
    if np.linalg.norm(n - n.T) > rtol * scale:
        raise DomainError(f"{name} must be symmetric")


@dataclass(frozen=True)
class LyapunovSolution:
    """Result of :func:`solve_lyapunov`.

    Attributes
    ----------
    gamma : ndarray
        Symmetrized solution.
    residual_norm : float
        Frobenius norm of ``A gamma + gamma A^T + N``, recomputed after
        symmetrization.
    stable : bool
        Whether the drift used was Hurwitz.
    """

    gamma: np.ndarray
    residual_norm: float
    stable: bool


def _eigvals(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue iteration failed: {exc}") from exc


def _kronecker_solve(a: np.ndarray, n: np.ndarray) -> np.ndarray:
    d = a.shape[0]
    eye = np.eye(d)
    # column-major vec: vec(AX) = (I kron A) vec X, vec(XA^T) = (A kron I) vec X
    op = np.kron(eye, a) + np.kron(a, eye)
    rhs = -n.reshape(-1, order="F")
    with warnings.catch_warnings():
        warnings.simplefilter("error", sla.LinAlgWarning)
        try:
            lu = sla.lu_factor(op, check_finite=False)
        except (sla.LinAlgWarning, np.linalg.LinAlgError) as exc:
            raise SingularSystem(f"Kronecker operator is singular: {exc}") from exc
    x = sla.lu_solve(lu, rhs, check_finite=False)
    # one step of iterative refinement
    x = x + sla.lu_solve(lu, rhs - op @ x, check_finite=False)
    return x.reshape((d, d), order="F")


def _bartels_stewart(a: np.ndarray, n: np.ndarray) -> np.ndarray:
    # complex Schur A = U T U^H reduces the problem to T Y + Y T^H = C
    t, u = sla.schur(a.astype(complex), output="complex")
    c = -(u.conj().T @ n @ u)
    d = a.shape[0]
    y = np.zeros((d, d), dtype=complex)
    eye = np.eye(d)
    for j in range(d - 1, -1, -1):
        rhs = c[:, j] - y[:, j + 1:] @ t[j, j + 1:].conj()
        y[:, j] = sla.solve_triangular(t + t[j, j].conj() * eye, rhs, check_finite=False)
    return (u @ y @ u.conj().T).real


def solve_lyapunov(a, n, method: str = "auto") -> LyapunovSolution:
    """Solve the algebraic Lyapunov equation ``A X + X A^T + N = 0``.

    Parameters
    ----------
    a : array_like
        Square drift matrix.
    n : array_like
        Symmetric diffusion matrix of the same size.
    method : {"auto", "kronecker", "bartels-stewart"}
        ``"kronecker"`` vectorizes the equation into a dense ``d^2 x d^2``
        LU solve. ``"bartels-stewart"`` works on the complex Schur form of
        ``A``. ``"auto"`` picks Kronecker up to ``KRONECKER_MAX_DIM``.

    Raises
    ------
    SingularSystem
        If two eigenvalues of ``A`` sum to (numerically) zero.
    DimensionMismatch
        On shape errors.
    """
    a = as_real_matrix(a, "drift")
    n = as_real_matrix(n, "diffusion")
    if a.shape != n.shape:
        raise DimensionMismatch(f"drift {a.shape} and diffusion {n.shape} differ")
    _check_symmetric(n, "diffusion")

    lam = _eigvals(a)
    scale = max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
    sums = np.abs(lam[:, None] + lam[None, :])
    if sums.size and sums.min() <= 1e-12 * scale:
        raise SingularSystem(
            "drift has eigenvalues summing to zero; the Lyapunov operator is singular"
        )

    if method == "auto":
        method = "kronecker" if a.shape[0] <= KRONECKER_MAX_DIM else "bartels-stewart"
    if method == "kronecker":
        x = _kronecker_solve(a, n)
    elif method == "bartels-stewart":
        x = _bartels_stewart(a, n)
    else:
        raise ValueError(f"unknown method {method!r}")

    if not np.all(np.isfinite(x)):
        raise NumericalFailure("Lyapunov solve produced non-finite entries")
    xnorm = np.linalg.norm(x)
    if np.linalg.norm(x - x.T) > SYMMETRY_TOL * max(xnorm, np.finfo(float).tiny):
        raise NumericalFailure("Lyapunov solution is not symmetric to tolerance")
    x = 0.5 * (x + x.T)
    residual = float(np.linalg.norm(a @ x + x @ a.T + n))
    stable = bool(lam.size == 0 or lam.real.max() < 0)
    return LyapunovSolution(gamma=_frozen(x), residual_norm=residual, stable=stable)


def spectral_abscissa(a) -> float:
    """Largest real part over the eigenvalues of ``a``."""
    a = as_real_matrix(a, "drift")
    return float(_eigvals(a).real.max())


def hurwitz_by_spectrum(a) -> bool:
    # a tie at zero real part is not Hurwitz
    return spectral_abscissa(a) < 0.0


def hurwitz_by_lyapunov(a) -> bool:
    """Hurwitz test via positive definiteness of ``X`` in ``A X + X A^T + I = 0``."""
    a = as_real_matrix(a, "drift")
    try:
        x = solve_lyapunov(a, np.eye(a.shape[0])).gamma
    except SingularSystem:
        return False
    try:
        np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return False
    return True


def is_hurwitz(a) -> bool:
    """True iff every eigenvalue of ``a`` has strictly negative real part.

    Both the spectral test and the Lyapunov positive-definiteness test are
    evaluated. They must agree unless the spectrum sits within rounding
    distance of the imaginary axis, where the spectral verdict wins.

    Raises
    ------
    NumericalFailure
        If the eigen-iteration fails or the two criteria disagree on a
        matrix that is clearly away from marginal stability.
    """
    a = as_real_matrix(a, "drift")
    lam = _eigvals(a)
    abscissa = float(lam.real.max())
    by_spectrum = abscissa < 0.0
    by_lyapunov = hurwitz_by_lyapunov(a)
    if by_spectrum != by_lyapunov:
        margin = 1e-8 * max(1.0, float(np.max(np.abs(lam))))
        if abs(abscissa) > margin:
            raise NumericalFailure(
                f"Hurwitz criteria disagree (spectral abscissa {abscissa:.3e})"
            )
    return by_spectrum


def lyapunov_rhs(a: np.ndarray, g: np.ndarray, n: np.ndarray) -> np.ndarray:
    ag = a @ g
    return ag + ag.T + n


def rk4_step(a_start, a_mid, a_end, g, n, dt):
    """One classical RK4 step for ``dG/dt = A G + G A^T + N``.

    The drift is supplied at the start, midpoint and end of the step.
    """
    k1 = lyapunov_rhs(a_start, g, n)
    k2 = lyapunov_rhs(a_mid, g + 0.5 * dt * k1, n)
    k3 = lyapunov_rhs(a_mid, g + 0.5 * dt * k2, n)
    k4 = lyapunov_rhs(a_end, g + dt * k3, n)
    return g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True)
class LyapunovTrajectory:
    times: np.ndarray
    gammas: np.ndarray  # shape (samples, d, d)

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.gammas[-1]


def integrate_lyapunov(
    drift_at: Callable[[float], np.ndarray],
    n,
    gamma0,
    t_end: float,
    dt: float | None = None,
    stride: int = 1,
) -> LyapunovTrajectory:
    """Integrate the differential Lyapunov equation with fixed-step RK4.

    Parameters
    ----------
    drift_at : callable
        ``t -> A(t)``.
    n, gamma0 : array_like
        Diffusion matrix and (symmetric) initial covariance.
    t_end : float
        Final time; the last step is shortened to land on it exactly.
    dt : float, optional
        Step size. Defaults to ``1 / (100 max|A(0)|)``.
    stride : int
        Keep every ``stride``-th step. ``t=0`` and ``t_end`` are always kept.

    Raises
    ------
    Divergence
        If ``||G||_F`` exceeds ``1e12 * ||N||_F``.
    """
    n = as_real_matrix(n, "diffusion")
    g = as_real_matrix(gamma0, "initial covariance")
    if g.shape != n.shape:
        raise DimensionMismatch("initial covariance and diffusion differ in shape")
    _check_symmetric(g, "initial covariance", rtol=1e-8)
    if t_end < 0:
        raise DomainError("t_end must be non-negative")
    if dt is None:
        amax = float(np.max(np.abs(drift_at(0.0))))
        dt = 1.0 / (100.0 * amax) if amax > 0 else max(t_end, 1.0)
    if dt <= 0:
        raise DomainError("dt must be positive")
    if stride < 1:
        raise DomainError("stride must be >= 1")

    guard = OVERFLOW_FACTOR * max(np.linalg.norm(n), np.linalg.norm(g), 1e-300)
    times = [0.0]
    samples = [g.copy()]
    t = 0.0
    step = 0
    n_steps = int(np.ceil(t_end / dt - 1e-12)) if t_end > 0 else 0
    for step in range(1, n_steps + 1):
        h = min(dt, t_end - t)
        g = rk4_step(drift_at(t), drift_at(t + 0.5 * h), drift_at(t + h), g, n, h)
        g = 0.5 * (g + g.T)
        t = t_end if step == n_steps else t + h
        if not np.isfinite(g).all() or np.linalg.norm(g) > guard:
            raise Divergence(f"covariance norm exceeded overflow guard at t={t:.6g}")
        if step % stride == 0 or step == n_steps:
            times.append(t)
            samples.append(g.copy())
    return LyapunovTrajectory(times=np.array(times), gammas=np.array(samples))
