import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ahricci.experiments import (CONVERGE, DEGENERATE, FAIL, PARTIAL, PASS, ExperimentConfig, GaugeLevel,
                                 PreconditionError, base_metric, continuous_dependence_sweep,
                                 convergence_experiment, convergence_stability_experiment,
                                 convergence_verdict, curvature_condition_scan, dependence_verdict,
                                 fit_decay, fit_window, gauge_verdict, refinement_order, stability_sweep,
                                 verdict_from_rows)
from ahricci.geometry import MetricPerturbation, from_profile
from ahricci.io import read_trajectory, write_trajectory
from ahricci.profiles import bump_perturbation, gaussian_profile, get_bump, get_profile

from conftest import gauss

FAST = ExperimentConfig(h=0.1, t_end=6.0)


# -- fits and verdicts on synthetic series -----------------------------------

@given(st.floats(0.2, 6.0), st.floats(1e-3, 10.0), st.floats(1e-14, 1e-10))
def test_fit_recovers_rate(omega, amp, floor):
    t = np.arange(0, 8.0, 0.05)
    d = amp * np.exp(-omega * t) + floor
    fit = fit_decay(t, d)
    assert fit is not None and fit.r_squared > 0.999
    assert fit.omega == pytest.approx(omega, rel=0.02)


def test_fit_window_stops_at_floor():
    t = np.arange(0, 10.0, 0.1)
    d = np.maximum(np.exp(-2 * t), 1e-6)
    idx = fit_window(t, d, 100.0)
    stop = np.flatnonzero(d <= 1e-4)[0]
    assert idx[-1] == stop and t[idx[0]] == pytest.approx(0.5 * t[stop], abs=0.1)


def test_fit_needs_three_points():
    assert fit_decay([0.0, 1.0], [1.0, 0.1]) is None


def _series(omega=2.0, t_end=8.0):
    t = np.arange(0, t_end + 1e-9, 0.1)
    return t, 0.3 * np.exp(-omega * t) + 1e-9


def test_verdict_converge_and_failures():
    t, d = _series()
    assert convergence_verdict(t, d, "completed").verdict == CONVERGE
    assert convergence_verdict(t, d, "degenerated").verdict == FAIL
    bumped = d.copy()
    bumped[-5] = 2e-3
    assert convergence_verdict(t, bumped, "completed").verdict == FAIL
    assert convergence_verdict(t, 0.3 + 0 * t, "completed").verdict == FAIL
    inside = convergence_verdict(t, 1e-9 + 0 * t, "completed")
    assert inside.verdict == CONVERGE and inside.entry_time == 0.0
    v = convergence_verdict(t, d, "completed")
    assert v.entry_time < v.half_entry_time


def test_verdict_is_function_of_csv(tmp_path):
    t, d = _series()

    class Traj:
        def rows(self):
            for i, (ti, di) in enumerate(zip(t, d)):
                yield {"t": ti, "norm_c0_mu": di, "norm_c2_mu": di, "min_secT": -1.0,
                       "einstein_residual": 0.0, "w_inf": 0.0,
                       "status": "completed" if i == len(t) - 1 else "running"}

    path = write_trajectory(tmp_path / "trajectory.csv", Traj(), {"case": "synthetic"})
    _, rows = read_trajectory(path)
    assert verdict_from_rows(rows) == convergence_verdict(t, d, "completed")


# -- flows -------------------------------------------------------------------

@pytest.fixture(scope="module")
def fast_run():
    return convergence_experiment(gauss, FAST, "gauss")


def test_convergence_experiment_converges(fast_run):
    r = fast_run
    assert r.verdict == CONVERGE and r.status == "completed"
    assert r.omega_fit > 0 and r.r_squared >= 0.99
    assert r.final_distance < 1e-3 < r.initial_distance
    assert r.min_sec_t_initial < 0
    assert r.summary()["verdict"] == CONVERGE


def test_zero_delta_reproduces_base_run(fast_run):
    bump = get_bump("rr-near")
    r = convergence_stability_experiment(gauss, lambda g: bump_perturbation(g, bump, FAST.mu),
                                         0.0, FAST, "gauss", "rr-near")
    a, b = r.trajectory, fast_run.trajectory
    assert a.times == b.times
    assert all(np.array_equal(x.phi, y.phi) and np.array_equal(x.psi, y.psi)
               for x, y in zip(a.metrics, b.metrics))


def test_base_metric_precondition():
    with pytest.raises(PreconditionError):
        base_metric(get_profile("2sinh"), FAST)
    assert curvature_condition_scan([0.0], FAST)[0].hypothesis_nodewise


def test_stability_sweep_small(fast_run):
    bumps = {n: (lambda g, b=get_bump(n): bump_perturbation(g, b, FAST.mu)) for n in ("rr-near", "sph-near")}
    sw = stability_sweep(gauss, bumps, [1e-2], FAST, "gauss")
    assert len(sw.reports) == 2 and sw.passed and sw.threshold == 1e-2
    assert all(r.delta == 1e-2 for r in sw.reports)


def test_dependence_zero_perturbation_degenerate():
    g0 = from_profile(FAST.grid(), gauss)
    z = MetricPerturbation(g0.grid, np.zeros(g0.grid.n_nodes), np.zeros(g0.grid.n_nodes))
    rep = continuous_dependence_sweep(g0, z, [1e-3], 0.5, FAST)
    assert rep.verdict == DEGENERATE and rep.ratios == []


def test_dependence_ratios_stable():
    cfg = ExperimentConfig(h=0.1)
    g0 = from_profile(cfg.grid(), gauss)
    p = bump_perturbation(g0, get_bump("rr-near"), cfg.mu)
    rep = continuous_dependence_sweep(g0, p, [1e-3, 1e-4], 0.5, cfg)
    assert rep.verdict == PASS, rep.reason
    assert all(0 < r < 10 for r in rep.ratios)


def test_scan_monotone_in_amplitude():
    rows = curvature_condition_scan([0.0, 0.5, 1.0, 2.0, 4.0], FAST)
    d = [r.distance for r in rows]
    assert d[0] < 1e-12 and all(b > a for a, b in zip(d, d[1:]))
    assert rows[0].min_sec_t == pytest.approx(-1.0, abs=1e-3)


# -- pure verdict helpers -----------------------------------------------------

def test_dependence_verdict_cases():
    assert dependence_verdict([], [], [])[0] == DEGENERATE
    assert dependence_verdict([1e-3, 1e-4], [1.0, 1.2], ["completed"] * 2)[0] == PASS
    assert dependence_verdict([1e-3, 1e-4], [1.0, 2.0], ["completed"] * 2)[0] == FAIL
    assert dependence_verdict([1e-3, 1e-4], [1.0, math.nan], ["completed"] * 2)[0] == FAIL
    assert dependence_verdict([1e-3], [1.0], ["degenerated"])[0] == PARTIAL


def _levels(errors, chained=None, hs=(0.04, 0.02, 0.01)):
    chained = chained or [None] * len(errors)
    return [GaugeLevel(h, 1e-4, e, c, "completed") for h, e, c in zip(hs, errors, chained)]


def test_refinement_order():
    assert refinement_order([0.04, 0.02, 0.01], [16e-4, 4e-4, 1e-4]) == pytest.approx(2.0)
    assert refinement_order([0.04], [1.0]) is None


def test_gauge_verdict_cases():
    assert gauge_verdict(_levels([16e-4, 4e-4, 1e-4]))[0] == PASS
    assert gauge_verdict(_levels([4e-4, 2e-4, 1e-4]))[0] == FAIL          # first order
    assert gauge_verdict(_levels([16e-4, 1e-4, 4e-4]))[0] == FAIL          # not monotone
    assert gauge_verdict(_levels([1e-12, 1e-13, 1e-12]))[0] == PASS        # floating-point floor
    assert gauge_verdict(_levels([16e-4, 4e-4, 1e-4], [1e-3, 1e-5, 1e-6]))[0] == PASS
    assert gauge_verdict(_levels([16e-4, 4e-4, 1e-4], [1e-2, 1e-5, 1e-6]))[0] == FAIL
    failed = _levels([16e-4, 4e-4, 1e-4])
    failed[1] = GaugeLevel(0.02, 1e-4, math.nan, None, "degenerated")
    assert gauge_verdict(failed)[0] == FAIL


def test_config_hash_stable():
    assert FAST.hash() == ExperimentConfig(h=0.1, t_end=6.0).hash() != ExperimentConfig().hash()
    with pytest.raises(ValueError):
        ExperimentConfig(gauge="chained")
    with pytest.raises(ValueError):
        ExperimentConfig(mu=2.5)
