import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ahricci.flow import (CFLViolation, FlowConfig, FlowState, GaugeFailure, GaugeMap, chained_rdtf,
                          deturck_vector, integrate_gauge, pullback, rdtf_rhs, rf_rhs, run_flow,
                          stable_dt, step, ungauged_trajectory)
from ahricci.geometry import (RadialGrid, RotSymMetric, WeightedNormParams, distance_to_hyperbolic,
                              flat_metric, from_profile, hyperbolic_metric, metric_difference,
                              sectional_radial, sectional_tangential, weighted_norm)
from ahricci.oracle import CoordinateOracle, sample_point

from conftest import gauss

C0 = WeightedNormParams(1.0, 0)


# -- right-hand sides --------------------------------------------------------

def test_rf_rhs_fixed_point_and_einstein(grid3, gh3):
    tol = 10 * grid3.h ** 2
    z = rf_rhs(gh3, normalized=True)
    assert np.max(np.abs(z.h_rr)) < tol and np.max(np.abs(z.h_sph / np.maximum(gh3.psi, 1) ** 2)) < tol
    u = rf_rhs(gh3, normalized=False)
    assert np.allclose(u.h_rr[1:-1], 4.0, atol=tol)
    assert np.allclose(u.h_sph[1:-1] / grid3.sinh[1:-1] ** 2, 4.0, atol=tol)


def test_rf_rhs_flat_is_zero(grid3):
    f = flat_metric(grid3)
    u = rf_rhs(f, normalized=False)
    tol = 10 * grid3.h ** 2
    assert np.max(np.abs(u.h_rr)) < tol
    assert np.max(np.abs(u.h_sph[1:-1] / grid3.nodes[1:-1] ** 2)) < tol


def test_deturck_vanishes_for_equal_metrics(gw3, gh3):
    assert np.max(np.abs(deturck_vector(gw3, gw3))) < 1e-12
    assert np.max(np.abs(deturck_vector(gh3, gh3))) < 1e-12
    assert np.allclose(rdtf_rhs(gw3, gw3).h_rr, rf_rhs(gw3).h_rr, atol=1e-12)
    assert np.allclose(rdtf_rhs(gw3, gw3).h_sph, rf_rhs(gw3).h_sph, atol=1e-9)


def test_rdtf_fixed_point(grid3, gh3):
    z = rdtf_rhs(gh3, gh3)
    assert np.max(np.abs(z.h_rr)) < 10 * grid3.h ** 2


@pytest.fixture(scope="module")
def oracle_setup():
    g = RadialGrid.from_spacing(3, 5.0, 0.005)
    m = from_profile(g, gauss)
    phi = lambda r: math.sqrt(1 + gauss(r) ** 2)
    o = CoordinateOracle(3, phi, math.sinh, lambda r: 1.0, math.sinh)
    return g, m, o, sample_point(3, 2.0), int(round(2.0 / g.h))


def test_deturck_matches_coordinate_oracle(oracle_setup):
    g, m, o, x, i = oracle_setup
    W = deturck_vector(m, hyperbolic_metric(g))
    assert W[i] == pytest.approx(o.deturck_radial(x), rel=1e-6)


@pytest.mark.parametrize("normalized", [False, True])
def test_rdtf_matches_coordinate_oracle(oracle_setup, normalized):
    g, m, o, x, i = oracle_setup
    rhs = rdtf_rhs(m, hyperbolic_metric(g), normalized)
    o_rr, o_sph = o.rdtf_components(x, normalized)
    assert rhs.h_rr[i] == pytest.approx(o_rr, rel=1e-5, abs=1e-7)
    assert rhs.h_sph[i] == pytest.approx(o_sph, rel=1e-5, abs=1e-7)


# -- stepping ----------------------------------------------------------------

def test_cfl_violation_raises(gh3):
    with pytest.raises(CFLViolation):
        run_flow(gh3, FlowConfig(dt=1.0, reference=gh3))
    with pytest.raises(CFLViolation):
        step(FlowState(0.0, gh3), FlowConfig(dt=1.0, reference=gh3))


def test_flow_config_validation(gh3):
    for kw in ({"dt": 0.0}, {"t_end": -1.0}, {"cfl_safety": 1.5}, {"integrator": "euler"},
               {"track_gauge": True}):
        with pytest.raises(ValueError):
            FlowConfig(**kw)


def test_stable_dt_matches_parabolic_bound(grid3, gh3):
    dt = stable_dt(gh3, 1.0)
    assert dt <= grid3.h ** 2 * np.min(gh3.phi ** 2) / 2 * 1.02


def test_hundred_steps_at_fixed_point(grid3, gh3):
    cfg = FlowConfig(reference=gh3)
    s = FlowState(0.0, gh3)
    for _ in range(100):
        s = step(s, cfg)
    assert distance_to_hyperbolic(s.metric, C0) < 10 * grid3.h ** 2
    assert s.W_r is not None and s.t > 0


def test_rk4_time_order():
    grid = RadialGrid.from_spacing(3, 10.0, 0.1)
    g0 = from_profile(grid, gauss)
    gh = hyperbolic_metric(grid)
    T = 0.016

    def final(dt):
        return run_flow(g0, FlowConfig(dt=dt, t_end=T, reference=gh, record_every=None)).final

    ref = final(T / 64)
    e1 = weighted_norm(gh, metric_difference(final(T / 4), ref), C0)
    e2 = weighted_norm(gh, metric_difference(final(T / 8), ref), C0)
    assert 10 < e1 / e2 < 24


def test_trajectory_records(gw3, gh3):
    tr = run_flow(gw3, FlowConfig(t_end=0.3, reference=gh3, record_every=0.1))
    assert tr.status == "completed"
    assert np.allclose(tr.times, [0.0, 0.1, 0.2, 0.3])
    assert np.all(np.diff(tr.times) > 0)
    for name in ("norm_c0_mu", "norm_c2_mu", "min_sec_t", "einstein_residual", "w_inf"):
        assert len(getattr(tr, name)) == len(tr.times)
    rows = list(tr.rows())
    assert rows[-1]["status"] == "completed" and rows[0]["status"] == "running"


def test_rdtf_distance_decreases(gw3, gh3):
    tr = run_flow(gw3, FlowConfig(t_end=2.5, reference=gh3, record_every=0.1))
    d = tr.series("norm_c0_mu")
    assert tr.status == "completed"
    assert np.all(np.diff(d[2:]) < 0)


def test_degenerate_initial_data_reported(grid3):
    psi = grid3.sinh.copy()
    psi[20] = -0.1
    bad = RotSymMetric(grid3, np.ones(grid3.n_nodes), psi, check=False)
    tr = run_flow(bad, FlowConfig(t_end=0.1))
    assert tr.status == "degenerated" and tr.bad_node == 20
    assert tr.metrics == []


def test_semi_implicit_fixed_point(grid3, gh3):
    for ref in (gh3, None):
        tr = run_flow(gh3, FlowConfig(t_end=1.0, reference=ref, integrator="semi-implicit"))
        assert tr.status == "completed"
        assert max(tr.norm_c0_mu) < 1e-8


# -- gauge maps --------------------------------------------------------------

def _smooth_map(grid, a=0.3):
    r = grid.nodes
    return GaugeMap(grid, r + a * r ** 2 * np.exp(-r ** 2 / 2))


def test_integrate_gauge_zero_field(grid3):
    W = [np.zeros(grid3.n_nodes)] * 5
    maps = integrate_gauge([0, 0.1, 0.2, 0.3, 0.4], W, grid3)
    for m in maps:
        assert np.allclose(m.Phi, grid3.nodes, atol=1e-14)


def test_integrate_gauge_constant_field(grid3):
    r = grid3.nodes
    c = 0.5
    W = c * np.clip(np.minimum(r - 1.0, 9.0 - r), 0, 1)  # plateau W = c on [2, 8]
    times = list(np.linspace(0, 2.0, 41))
    maps = integrate_gauge(times, [W] * len(times), grid3)
    i = int(round(5.0 / grid3.h))
    assert maps[-1].Phi[i] == pytest.approx(5.0 - c * 2.0, abs=1e-10)


def test_integrate_gauge_reports_failure(grid3):
    r = grid3.nodes
    W = 50 * np.sin(3 * r) * np.sin(np.pi * r / r[-1])
    with pytest.raises(GaugeFailure):
        integrate_gauge([0, 0.5, 1.0], [W, W, W], grid3)


def test_gauge_map_limit_exists(gw3, gh3):
    tr = run_flow(gw3, FlowConfig(t_end=10.0, reference=gh3, record_every=0.5, track_gauge=True))
    assert tr.status == "completed"
    late = [m.Phi for t, m in zip(tr.times, tr.gauge_maps) if t >= 5.0]
    assert max(np.max(np.abs(p - late[-1])) for p in late) < 1e-4


def test_in_kernel_gauge_matches_integrate_gauge(gw3, gh3):
    tr = run_flow(gw3, FlowConfig(t_end=0.5, reference=gh3, record_every=0.005, track_gauge=True))
    maps = integrate_gauge(tr.times, tr.W_history, gw3.grid)
    assert np.max(np.abs(maps[-1].Phi - tr.gauge_maps[-1].Phi)) < 1e-4


def test_pullback_identity(gw3):
    p = pullback(gw3, GaugeMap.identity(gw3.grid))
    assert np.allclose(p.phi, gw3.phi, atol=1e-12) and np.allclose(p.psi, gw3.psi, atol=1e-12)


def test_pullback_scaling_of_flat():
    grid = RadialGrid.from_spacing(3, 10.0, 0.05)
    f = flat_metric(grid)
    p = pullback(f, GaugeMap(grid, 2 * grid.nodes))
    r = grid.nodes
    inner = (r > 0) & (r < 4.0)
    assert np.allclose(p.phi[inner], 2.0, atol=1e-6)
    assert np.allclose(p.psi[inner], 2 * r[inner], atol=1e-6)
    sel = inner[1:-1]
    assert np.max(np.abs(sectional_radial(p)[sel])) < 10 * grid.h ** 2
    assert np.max(np.abs(sectional_tangential(p)[sel])) < 10 * grid.h ** 2


def test_pullback_inverse_law(gw3):
    grid = gw3.grid
    phi_map = _smooth_map(grid)
    back = pullback(pullback(gw3, phi_map), phi_map.inverse())
    tol = 10 * grid.h ** 2
    assert np.max(np.abs(back.phi - gw3.phi)) < tol
    assert np.max(np.abs(back.psi[1:] - gw3.psi[1:]) / gw3.psi[1:]) < tol


@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_pullback_composition_law(a, b):
    grid = RadialGrid.from_spacing(3, 10.0, 0.05)
    g = from_profile(grid, gauss)
    A, B = _smooth_map(grid, a), _smooth_map(grid, b)
    two = pullback(pullback(g, A), B)
    one = pullback(g, A.compose(B))
    assert np.max(np.abs(two.phi - one.phi)) < 10 * grid.h ** 2


def test_pullback_rejects_nonmonotone(gw3):
    P = gw3.grid.nodes.copy()
    P[10], P[11] = P[11], P[10]
    with pytest.raises(GaugeFailure):
        pullback(gw3, GaugeMap(gw3.grid, P))


# -- chaining ----------------------------------------------------------------

def test_single_segment_chain_is_gauge_recovery(gw3):
    cfg = FlowConfig(t_end=0.5, record_every=0.25)
    chained = chained_rdtf(gw3, [0.0, 0.5], cfg)
    gauged = run_flow(gw3, replace(cfg, reference=gw3, track_gauge=True))
    direct = ungauged_trajectory(gauged, cfg.norm)
    assert chained.times == direct.times
    assert np.allclose(chained.final.phi, direct.final.phi, rtol=1e-12, atol=1e-12)
    assert np.allclose(chained.final.psi, direct.final.psi, rtol=1e-12, atol=1e-12)


def test_chain_fixed_point(grid3, gh3):
    tr = chained_rdtf(gh3, [0, 0.25, 0.5, 0.75, 1.0], FlowConfig(record_every=0.25))
    assert tr.status == "completed"
    assert max(distance_to_hyperbolic(m, C0) for m in tr.metrics) < 10 * grid3.h ** 2


def test_chain_rejects_bad_partition(gh3):
    with pytest.raises(ValueError):
        chained_rdtf(gh3, [0, 0.5, 0.4], FlowConfig())
    with pytest.raises(ValueError):
        chained_rdtf(gh3, [0, 1.0], FlowConfig(t1_max=0.5))
