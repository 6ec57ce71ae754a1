import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floqlyap.errors import DimensionMismatch, DomainError, IndexOutOfRange, NonPhysical, Unstable
from floqlyap.gaussian import (
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
from floqlyap.models import CoolingParams, cooling_lab_frame, cooling_periodic, cooling_rwa

ONE = ModeLayout(1)
TWO = ModeLayout(2)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


# -- layout and symplectic form --------------------------------------------

def test_layout_dimension_and_slices():
    layout = ModeLayout(3)
    assert layout.dim == 6
    assert layout.mode_slice(2) == slice(4, 6)
    with pytest.raises(IndexOutOfRange):
        layout.mode_slice(3)
    with pytest.raises(DomainError):
        ModeLayout(0)


def test_symplectic_single_mode():
    np.testing.assert_array_equal(symplectic_form(ONE), [[0, 1], [-1, 0]])


def test_symplectic_two_modes_is_block_diagonal():
    s = symplectic_form(TWO)
    expected = np.zeros((4, 4))
    expected[:2, :2] = expected[2:, 2:] = [[0, 1], [-1, 0]]
    np.testing.assert_array_equal(s, expected)


def test_symplectic_algebra():
    s = symplectic_form(ModeLayout(3))
    np.testing.assert_array_equal(s.T, -s)
    np.testing.assert_array_equal(s @ s, -np.eye(6))


# -- system types ----------------------------------------------------------

def test_static_system_validates_shapes_and_diffusion():
    with pytest.raises(DimensionMismatch):
        StaticSystem(TWO, -np.eye(2), np.eye(4))
    with pytest.raises(DomainError):
        StaticSystem(ONE, -np.eye(2), [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(DomainError):
        StaticSystem(ONE, -np.eye(2), np.diag([1.0, -1.0]))


def test_static_system_is_immutable():
    sys = StaticSystem(ONE, -np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        sys.drift[0, 0] = 1.0


def test_periodic_system_zero_fills_harmonics():
    c = [np.eye(2), 2 * np.eye(2)]
    s = [np.ones((2, 2))]
    sys = PeriodicSystem(ONE, 2.0, -np.eye(2), c, s, np.eye(2))
    assert sys.order == 2
    np.testing.assert_array_equal(sys.sin_component(2), np.zeros((2, 2)))
    np.testing.assert_array_equal(sys.cos_component(0), np.zeros((2, 2)))
    np.testing.assert_array_equal(sys.cos_component(3), np.zeros((2, 2)))
    assert sys.period == pytest.approx(np.pi)


def test_periodic_system_rejects_bad_frequency():
    with pytest.raises(DomainError):
        PeriodicSystem(ONE, 0.0, -np.eye(2), (), (), np.eye(2))


# -- steady_state ----------------------------------------------------------

def test_vacuum_steady_state():
    kappa = 0.3
    cov = steady_state(StaticSystem(ONE, -kappa * np.eye(2), 2 * kappa * np.eye(2)))
    np.testing.assert_allclose(cov.gamma, np.eye(2), atol=1e-14)


def test_thermal_steady_state():
    gamma, nbar = 1e-3, 37.0
    cov = steady_state(StaticSystem(ONE, -gamma * np.eye(2), 2 * gamma * (2 * nbar + 1) * np.eye(2)))
    np.testing.assert_allclose(cov.gamma, (2 * nbar + 1) * np.eye(2), rtol=1e-12)


def test_unstable_static_system_raises():
    with pytest.raises(Unstable) as info:
        steady_state(StaticSystem(ONE, np.diag([0.1, -1.0]), np.eye(2)))
    assert info.value.spectral_abscissa == pytest.approx(0.1)


def test_cooling_lab_frame_occupation_in_range():
    n_f = mech_occupation(steady_state(cooling_lab_frame(CoolingParams(0.1, 0.2, 1e-6, 1e3))), 1)
    assert 0 < n_f < 1e3


# -- evaluate_drift --------------------------------------------------------

def test_evaluate_drift_at_zero_sums_cosines():
    sys = cooling_periodic(CoolingParams(0.3, 0.2, 1e-3, 10.0))
    np.testing.assert_allclose(evaluate_drift(sys, 0.0), sys.a0 + np.sqrt(2) * sys.cos_harmonics[0], atol=1e-15)


def test_evaluate_drift_without_harmonics_is_constant():
    sys = cooling_periodic(CoolingParams(0.3, 0.2, 1e-3, 10.0)).without_harmonics()
    for t in (0.0, 0.3, 17.1):
        np.testing.assert_array_equal(evaluate_drift(sys, t), sys.a0)


def test_evaluate_drift_cooling_quarter_period():
    # at t = pi/4 the 2t phase is pi/2: cos = 0, sin = 1
    g, kappa, gamma = 0.3, 0.2, 1e-3
    sys = cooling_periodic(CoolingParams(g, kappa, gamma, 10.0))
    expected = np.array(
        [
            [-kappa, 0, g, g],
            [0, -kappa, -g, -g],
            [g, g, -gamma, 0],
            [-g, -g, 0, -gamma],
        ]
    )
    np.testing.assert_allclose(evaluate_drift(sys, np.pi / 4), expected, atol=1e-15)


def test_evaluate_drift_is_periodic():
    sys = cooling_periodic(CoolingParams(0.3, 0.2, 1e-3, 10.0))
    for t in np.linspace(0, 3, 13):
        np.testing.assert_allclose(evaluate_drift(sys, t), evaluate_drift(sys, t + sys.period), atol=1e-14)


def test_evaluate_drift_rejects_nonfinite_time():
    sys = cooling_periodic(CoolingParams(0.3, 0.2, 1e-3, 10.0))
    with pytest.raises(DomainError):
        evaluate_drift(sys, np.inf)


# -- observables -----------------------------------------------------------

def test_occupation_of_vacuum_and_thermal():
    assert mech_occupation(Covariance(ONE, np.eye(2)), 0) == 0.0
    assert mech_occupation(Covariance(ONE, 2001.0 * np.eye(2)), 0) == 1000.0


@pytest.mark.parametrize("nbar", [0, 1, 10, 1e3, 1e7])
def test_occupation_inverts_thermal_state(nbar):
    assert mech_occupation(Covariance(ONE, (2 * nbar + 1) * np.eye(2)), 0) == nbar


def test_occupation_clamps_rounding_and_rejects_violations():
    assert mech_occupation(Covariance(ONE, (1 - 1e-12) * np.eye(2)), 0) == 0.0
    with pytest.raises(NonPhysical):
        mech_occupation(Covariance(ONE, 0.5 * np.eye(2)), 0)


def test_occupation_picks_requested_mode():
    cov = Covariance(TWO, np.diag([1.0, 1.0, 5.0, 5.0]))
    assert mech_occupation(cov, 1) == 2.0
    with pytest.raises(IndexOutOfRange):
        mech_occupation(cov, 2)


def test_rwa_underestimates_occupation():
    p = CoolingParams(0.1, 0.2, 1e-6, 1e3)
    lab = mech_occupation(steady_state(cooling_lab_frame(p)), 1)
    rwa = mech_occupation(steady_state(cooling_rwa(p)), 1)
    assert rwa < lab


def test_squeezing_variance_examples():
    assert squeezing_variances(Covariance(ONE, np.eye(2)), 0) == (1.0, 1.0)
    assert squeezing_variances(Covariance(ONE, np.diag([0.5, 2.0])), 0) == (0.5, 2.0)


def test_squeezing_rejects_unphysical_blocks():
    with pytest.raises(NonPhysical):
        squeezing_variances(Covariance(ONE, np.diag([-0.1, 2.0])), 0)
    with pytest.raises(NonPhysical):
        squeezing_variances(Covariance(ONE, np.diag([0.5, 1.0])), 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.0, 2 * np.pi), st.floats(0.0, 100.0))
def test_squeezing_rotation_invariant(r, theta, nbar):
    block = (2 * nbar + 1) * np.diag([np.exp(-2 * r), np.exp(2 * r)])
    rot = rotation(theta)
    a = squeezing_variances(Covariance(ONE, block), 0)
    b = squeezing_variances(Covariance(ONE, rot @ block @ rot.T), 0)
    np.testing.assert_allclose(a, b, rtol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(0.0, np.pi), st.floats(0.0, 1e3), st.floats(0.0, np.pi))
def test_uncertainty_bound_on_squeezed_thermal_states(r, theta, nbar, phi):
    # rotated squeezed thermal state S (2n+1) S^T, S symplectic
    s = rotation(theta) @ np.diag([np.exp(-r), np.exp(r)]) @ rotation(phi)
    gamma = (2 * nbar + 1) * s @ s.T
    cov = Covariance(ONE, gamma)
    lo, hi = squeezing_variances(cov, 0)
    assert lo * hi >= 1 - 1e-9
    assert physicality_check(cov)


def test_decibels():
    assert to_decibels(1.0) == 0.0
    assert to_decibels(0.5) == pytest.approx(3.0103, abs=1e-4)
    assert to_decibels(10 ** (-0.2)) == pytest.approx(2.0, abs=1e-15)
    assert to_decibels(2.0) < 0
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            to_decibels(bad)


def test_physicality_examples():
    assert physicality_check(Covariance(ONE, np.eye(2)))
    assert not physicality_check(Covariance(ONE, 0.5 * np.eye(2)))
    assert not physicality_check(Covariance(ONE, [[1.0, 0.3], [0.0, 1.0]]))


def test_physicality_of_two_mode_squeezed_vacuum():
    r = 0.8
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    gamma = np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])
    assert physicality_check(Covariance(TWO, gamma))
    # the reduced state is thermal, so the squeezed variance is above vacuum
    assert squeezing_variances(Covariance(TWO, gamma), 1)[0] == pytest.approx(c)
