"""Forced-trajectory simulator and disturbance diagnostics.

Closed-form transitions give exact homogeneous solutions; linearity gives
the forced ones via superposition.  Disturbance summaries are checked
against hand-integrable cases.
"""

import math

import numpy as np
import pytest

from lpstab.catalog import CATALOG, lti_diag, rotating_frame, strong_coupling
from lpstab.perturb import (
    Disturbance,
    convergence_report,
    disturbance_from_strings,
    simulate_perturbed,
    windowed_drift,
)


def test_disturbance_parsing():
    d = disturbance_from_strings(["exp(-t)", "0"])
    assert d.n == 2
    assert d.vector(0.0) == pytest.approx([1.0, 0.0])
    assert d.as_strings() == ("exp(-t)", "0")
    with pytest.raises(Exception):
        disturbance_from_strings(["exp(-t", "0"])
    z = Disturbance.zero(3)
    assert np.array_equal(z.vector(5.0), np.zeros(3))


def test_unforced_matches_closed_transition():
    entry = rotating_frame(0.5)
    x0 = np.array([1.0, -2.0])
    traj = simulate_perturbed(entry.system, Disturbance.zero(2), x0, 6.0, samples=64)
    for i, t in enumerate(traj.times):
        ref = entry.transition(float(t), 0.0) @ x0
        assert np.abs(traj.states[i] - ref).max() <= 1e-7 * (1.0 + np.abs(ref).max())
    assert not traj.overflowed
    assert traj.check_error is not None and traj.check_error <= 1e-5


def test_superposition():
    # x(d1 + d2) = x(d1) + x(d2) - x_hom, sample by sample
    sysd = strong_coupling().system
    x0 = np.array([0.5, 1.5])
    t_end = 2.0
    d1 = disturbance_from_strings(["sin(3*t)", "0"])
    d2 = disturbance_from_strings(["exp(-t)", "cos(t)"])
    dsum = disturbance_from_strings(["sin(3*t) + exp(-t)", "cos(t)"])
    kw = dict(samples=48, cross_check=False)
    a = simulate_perturbed(sysd, d1, x0, t_end, **kw)
    b = simulate_perturbed(sysd, d2, x0, t_end, **kw)
    h = simulate_perturbed(sysd, Disturbance.zero(2), x0, t_end, **kw)
    s = simulate_perturbed(sysd, dsum, x0, t_end, **kw)
    combo = a.states + b.states - h.states
    assert np.abs(s.states - combo).max() <= 1e-6 * (1.0 + np.abs(s.states).max())


def test_forced_constant_system_settles():
    # x' = -x + 1 from 0 tends to 1
    sysd = lti_diag(-1.0, -1.0).system
    d = disturbance_from_strings(["1", "1"])
    traj = simulate_perturbed(sysd, d, np.zeros(2), 20.0, samples=128)
    assert traj.states[-1] == pytest.approx([1.0, 1.0], abs=1e-6)


def test_simulator_validation():
    sysd = lti_diag().system
    with pytest.raises(ValueError):
        simulate_perturbed(sysd, Disturbance.zero(3), np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        simulate_perturbed(sysd, Disturbance.zero(2), np.zeros(3), 1.0)
    with pytest.raises(ValueError):
        simulate_perturbed(sysd, Disturbance.zero(2), np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        simulate_perturbed(sysd, Disturbance.zero(2), np.zeros(2), 1.0, samples=1)


def test_overflow_is_flagged_not_raised():
    # x' = (0.3 + sin t) x passes 1e300 near t = ln(1e300)/0.3; the result
    # must come back truncated and flagged, with every kept sample finite
    entry = CATALOG["scalar_unstable"]()
    traj = simulate_perturbed(entry.system, Disturbance.zero(1), np.array([1.0]),
                              2600.0, samples=256)
    assert traj.overflowed
    assert traj.t_overflow is not None
    assert traj.t_overflow == pytest.approx(math.log(1e300) / 0.3, rel=0.02)
    assert np.isfinite(traj.states).all()
    assert traj.times[-1] < 2600.0


def test_no_false_overflow_on_stiff_stable_system():
    # large |A| with a coarse initial substep must not masquerade as blowup
    sysd = lti_diag(-80.0, -120.0).system
    traj = simulate_perturbed(sysd, Disturbance.zero(2), np.array([1.0, 1.0]),
                              40.0, samples=32, cross_check=False)
    assert not traj.overflowed
    assert np.abs(traj.states[-1]).max() <= 1e-10


def test_convergence_report():
    sysd = strong_coupling().system
    d = disturbance_from_strings(["exp(-t)", "0"])
    traj = simulate_perturbed(sysd, d, np.array([-4.0, 3.0]), 10.0, samples=256)
    rep = convergence_report(traj)
    assert rep.tail_max_norm < 1e-3
    assert rep.decreasing_tail
    assert rep.tail_start == pytest.approx(7.5, abs=0.2)


def test_convergence_report_needs_enough_samples():
    sysd = lti_diag().system
    traj = simulate_perturbed(sysd, Disturbance.zero(2), np.ones(2), 1.0, samples=8,
                              cross_check=False)
    with pytest.raises(ValueError):
        convergence_report(traj)


def test_windowed_drift_constant():
    # d = (1, 0): the running integral over [t, t+eta] has norm eta, sup = window
    d = disturbance_from_strings(["1", "0"])
    rep = windowed_drift(d, np.linspace(0.0, 20.0, 21), window=1.0)
    assert np.abs(rep.sups - 1.0).max() <= 1e-12
    assert abs(rep.tail_log_slope) <= 1e-9


def test_windowed_drift_zero():
    rep = windowed_drift(Disturbance.zero(2), np.linspace(0.0, 10.0, 11))
    assert rep.sups.max() == 0.0


def test_windowed_drift_decaying():
    # d = (e^{-t}, 0): sup attained at eta = window, equals e^{-t}(1 - e^{-w});
    # the tail log slope recovers the rate -1
    d = disturbance_from_strings(["exp(-t)", "0"])
    ts = np.linspace(0.0, 12.0, 25)
    rep = windowed_drift(d, ts, window=1.0)
    want = np.exp(-ts) * (1.0 - math.exp(-1.0))
    assert np.abs(rep.sups - want).max() <= 1e-9
    assert rep.tail_log_slope == pytest.approx(-1.0, abs=1e-6)


def test_windowed_drift_oscillation_averages_out():
    # d = (sin(t^2), 0) never decays pointwise, but its windowed integral
    # does; the sups must fall by an order of magnitude across the grid
    d = disturbance_from_strings(["sin(t^2)", "0"])
    rep = windowed_drift(d, np.array([10.0, 50.0, 100.0, 200.0]), window=1.0)
    s = rep.sups
    assert s[0] > 0.05
    assert np.diff(s).max() < 0.0
    assert s[-1] < s[0] / 10.0


def test_windowed_drift_validation():
    d = Disturbance.zero(1)
    with pytest.raises(ValueError):
        windowed_drift(d, np.linspace(0.0, 1.0, 10), window=0.0)
    with pytest.raises(ValueError):
        windowed_drift(d, np.linspace(0.0, 1.0, 10), eta_samples=4)
    with pytest.raises(ValueError):
        windowed_drift(d, np.array([0.0, 1.0]))


def test_trajectory_is_deterministic():
    sysd = strong_coupling().system
    d = disturbance_from_strings(["sin(t)", "0"])
    a = simulate_perturbed(sysd, d, np.ones(2), 3.0, samples=64)
    b = simulate_perturbed(sysd, d, np.ones(2), 3.0, samples=64)
    assert np.array_equal(a.states, b.states)
    assert a.check_times == b.check_times
