import math

import numpy as np
import pytest

from floqlyap.crosscheck import (
    ComparisonReport,
    bisect_onset,
    compare_cooling,
    first_unstable,
    rwa_equivalence,
    time_domain_probe,
)
from floqlyap.errors import DomainError, NotSettled, Unstable
from floqlyap.floquet import Truncation, build_drift, solve_steady
from floqlyap.gaussian import ModeLayout, PeriodicSystem, mech_occupation, squeezing_variances, steady_state
from floqlyap.linalg import solve_lyapunov, spectral_abscissa
from floqlyap.models import (
    CoolingParams,
    LevitatedParams,
    TwoToneParams,
    cooling_lab_frame,
    cooling_periodic,
    levitated_periodic,
    two_tone_periodic,
)

FIG1 = CoolingParams(g=0.1, kappa=0.2, gamma=1e-6, nbar=1e3)


def test_uncoupled_cooling_all_methods_give_bath_occupation():
    report = compare_cooling(FIG1, "g", [0.0])
    for method in ("lab", "rwa", "floquet"):
        assert report.values[method][0] == pytest.approx(1e3, rel=1e-9)


def test_kappa_sweep_agreement():
    report = compare_cooling(FIG1, "kappa", np.geomspace(0.01, 1, 25))
    assert all(report.stable["lab"]) and all(report.stable["floquet"])
    assert report.max_discrepancy <= 1e-2
    assert max(report.relative_discrepancy("rwa", "lab")) > 0.05


def test_coupling_sweep_onsets():
    grid = np.linspace(0.01, 0.6, 60)
    report = compare_cooling(FIG1, "g", grid)
    lab, floq = report.onset("lab"), report.onset("floquet")
    assert lab is not None and floq is not None
    step = grid[1] - grid[0]
    assert abs(lab - floq) <= step
    assert report.onset("rwa") is None


def test_report_rows_and_nan_handling():
    report = ComparisonReport(
        "g", (0.1, 0.2), {"lab": (1.0, math.nan), "floquet": (1.01, math.nan)},
        {"lab": (True, False), "floquet": (True, False)},
    )
    assert report.relative_discrepancy("floquet", "lab")[0] == pytest.approx(0.01)
    assert math.isnan(report.relative_discrepancy("floquet", "lab")[1])
    assert report.max_discrepancy == pytest.approx(0.01)
    rows = report.to_rows()
    assert rows[1] == {"g": 0.2, "lab": rows[1]["lab"], "lab_stable": False,
                       "floquet": rows[1]["floquet"], "floquet_stable": False}


def test_compare_rejects_other_variables():
    with pytest.raises(DomainError):
        compare_cooling(FIG1, "gamma", [1e-6])


def test_first_unstable():
    assert first_unstable([1, 2, 3], [True, False, False]) == 2
    assert first_unstable([1, 2], [True, True]) is None


# -- RWA equivalence -------------------------------------------------------

@pytest.mark.parametrize(
    "sys",
    [
        cooling_periodic(FIG1),
        two_tone_periodic(TwoToneParams(0.28, 0.196, 0.2, 2e-6, 1e4)),
        levitated_periodic(LevitatedParams(0.35, 0.32, 0.3, 1e-9, 2e7)),
    ],
)
def test_rwa_equivalence(sys):
    assert rwa_equivalence(sys, 3) <= 1e-12


def test_counterrotating_terms_change_cooling():
    sys = cooling_periodic(CoolingParams(0.1, 0.2, 1e-6, 1e3))
    k1 = solve_steady(build_drift(sys, Truncation(1))).dc.gamma
    k0 = solve_steady(build_drift(sys, Truncation(0))).dc.gamma
    assert np.abs(k1 - k0).max() > 1e-3


def test_counterrotating_terms_add_noise_to_squeezed_quadrature():
    sys = two_tone_periodic(TwoToneParams(0.28, 0.196, 0.2, 2e-6, 1e4))
    full = squeezing_variances(solve_steady(build_drift(sys, Truncation(2))).dc, 1)[0]
    rwa = squeezing_variances(solve_steady(build_drift(sys, Truncation(0))).dc, 1)[0]
    assert full > rwa


# -- bisection ---------------------------------------------------------------

def test_bisect_linear():
    assert bisect_onset(lambda x: x - 0.3, 0.0, 1.0, rtol=1e-8) == pytest.approx(0.3, rel=1e-8)


def test_bisect_decreasing_direction():
    # stable above the threshold: lo > hi is accepted
    assert bisect_onset(lambda x: 0.3 - x, 1.0, 0.0, rtol=1e-8) == pytest.approx(0.3, rel=1e-8)


def test_bisect_rejects_bad_bracket():
    with pytest.raises(DomainError):
        bisect_onset(lambda x: x - 0.3, 0.5, 1.0)


def test_cooling_onset_bisection_agrees_between_frames():
    def lab(g):
        return spectral_abscissa(cooling_lab_frame(CoolingParams(g, 0.2, 1e-6, 1e3)).drift)

    def floq(g):
        return spectral_abscissa(build_drift(cooling_periodic(CoolingParams(g, 0.2, 1e-6, 1e3)), Truncation(1)).drift)

    g_lab = bisect_onset(lab, 0.3, 0.6, rtol=1e-6)
    g_floq = bisect_onset(floq, 0.3, 0.6, rtol=1e-6)
    assert g_lab == pytest.approx(g_floq, rel=1e-5)
    assert 0.5 < g_lab < 0.52


# -- time-domain probe -----------------------------------------------------

def test_probe_constant_drift_matches_algebraic_solve():
    a = np.array([[-0.5, 1.0], [-1.0, -0.3]])
    n = np.diag([1.0, 0.5])
    sys = PeriodicSystem(ModeLayout(1), 2.0, a, (), (), n)
    probe = time_domain_probe(sys, n_periods_settle=200, n_samples=10, steps_per_period=200, gamma0=np.eye(2))
    exact = solve_lyapunov(a, n).gamma
    np.testing.assert_allclose(probe.average, exact, rtol=1e-8, atol=1e-10)
    for g in probe.gammas:
        np.testing.assert_allclose(g, exact, rtol=1e-7)


def test_probe_cooling_matches_lab_frame():
    sys = cooling_periodic(FIG1)
    probe = time_domain_probe(sys, n_samples=20, steps_per_period=2000)
    lab = mech_occupation(steady_state(cooling_lab_frame(FIG1)), 1)
    occupations = [mech_occupation(c, 1) for c in probe.covariances(sys.layout)]
    assert (max(occupations) - min(occupations)) / lab < 1e-3
    assert abs(occupations[0] - lab) / lab < 1e-3
    assert probe.settle_residual <= 1e-8
    assert probe.times[1] == pytest.approx(sys.period / 20)


def test_probe_two_tone_settles_periodically():
    sys = two_tone_periodic(TwoToneParams(0.28, 0.196, 0.2, 2e-6, 1e4))
    probe = time_domain_probe(sys, n_samples=10, steps_per_period=1000)
    assert probe.settle_residual <= 1e-8
    assert probe.period == pytest.approx(np.pi)
    assert probe.gammas.shape == (10, 4, 4)


def test_probe_rejects_unstable_system():
    with pytest.raises(Unstable):
        time_domain_probe(cooling_periodic(CoolingParams(0.6, 0.2, 1e-6, 1e3)))


def test_probe_reports_unsettled_integration():
    with pytest.raises(NotSettled):
        time_domain_probe(cooling_periodic(FIG1), n_periods_settle=2, steps_per_period=200)


def test_probe_sampling_must_divide_steps():
    with pytest.raises(DomainError):
        time_domain_probe(cooling_periodic(FIG1), n_samples=7, steps_per_period=100)
