"""Floquet-Lyapunov steady states for periodically driven Gaussian systems."""
from .errors import (
    ConfigError,
    DimensionMismatch,
    Divergence,
    DomainError,
    FloqLyapError,
    IndexOutOfRange,
    NonPhysical,
    NotSettled,
    NumericalFailure,
    SingularSystem,
    Unstable,
)
from .floquet import (
    DC,
    FloquetCovariance,
    FloquetSystem,
    Truncation,
    ZoneIndex,
    build_diffusion,
    build_drift,
    converge,
    cos_zone,
    sin_zone,
    solve_steady,
    zone_block,
)
from .gaussian import (
    Covariance,
    ModeLayout,
    PeriodicSystem,
    StaticSystem,
    evaluate_drift,
    mech_occupation,
    physicality_check,
    squeezing_variances,
    steady_state,
    symplectic_form,
    to_decibels,
)
from .linalg import integrate_lyapunov, is_hurwitz, solve_lyapunov, spectral_abscissa

__version__ = "0.1.0"
