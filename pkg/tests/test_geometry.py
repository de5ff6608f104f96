import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ahricci.geometry import (BoundaryWeight, DegenerateMetricError, MetricPerturbation, RadialGrid,
                              RotSymMetric, WeightedNormParams, check_ah_admissible,
                              distance_to_hyperbolic, einstein_residual, flat_metric, from_profile,
                              hyperbolic_metric, metric_difference, perturb, ricci, sectional_radial,
                              sectional_tangential, tensor_norm_pointwise, weighted_norm)
from ahricci.oracle import CoordinateOracle, sample_point

from conftest import gauss


# -- grid and constructors ---------------------------------------------------

def test_grid_is_uniform():
    g = RadialGrid.from_spacing(3, 10.0, 0.03)
    d = np.diff(g.nodes)
    assert np.all(np.abs(d - g.h) < 1e-12 * g.h)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == g.r_max


@pytest.mark.parametrize("args", [(2, 10.0, 100), (3, 4.0, 100), (3, 10.0, 10)])
def test_grid_rejects_invalid(args):
    with pytest.raises(ValueError):
        RadialGrid(*args)


def test_hyperbolic_metric_values(grid3):
    g = hyperbolic_metric(grid3)
    assert g.phi[0] == 1.0 and g.psi[0] == 0.0
    i = int(round(1.0 / grid3.h))
    assert g.psi[i] == pytest.approx(1.1752, abs=1e-4)


def test_from_profile_values(grid3):
    g = from_profile(grid3, gauss)
    i = int(round(1.0 / grid3.h))
    assert g.phi[i] == pytest.approx(math.sqrt(1 + math.exp(-2)), abs=1e-12)
    assert g.phi[i] == pytest.approx(1.0655, abs=1e-4)
    assert gauss(1.0) ** 2 < math.sinh(1.0) ** 2
    zero = from_profile(grid3, lambda r: np.zeros_like(r))
    assert np.array_equal(zero.phi, hyperbolic_metric(grid3).phi)
    assert g.profile.even_parity and g.profile.decay_ok


def test_from_profile_rejects_nonzero_origin(grid3):
    with pytest.raises(ValueError):
        from_profile(grid3, lambda r: 1.0 + r)


def test_degenerate_metric_rejected(grid3):
    psi = grid3.sinh.copy()
    psi[7] = 0.0
    with pytest.raises(DegenerateMetricError) as exc:
        RotSymMetric(grid3, np.ones(grid3.n_nodes), psi)
    assert exc.value.node == 7


def test_origin_smoothness(grid3):
    assert hyperbolic_metric(grid3).origin_smooth
    cone = RotSymMetric(grid3, np.ones(grid3.n_nodes), 0.5 * grid3.sinh)
    assert not cone.origin_smooth


# -- curvature ---------------------------------------------------------------

def test_hyperbolic_curvature(grid3):
    g = hyperbolic_metric(grid3)
    tol = 10 * grid3.h ** 2
    assert np.max(np.abs(sectional_tangential(g) + 1)) < tol
    assert np.max(np.abs(sectional_radial(g) + 1)) < tol
    rrr, rs = ricci(g)
    assert np.max(np.abs(rrr + 2.0)) < tol
    assert np.max(np.abs(rs / grid3.sinh[1:-1] ** 2 + 2.0)) < tol
    assert np.max(einstein_residual(g)) < tol


def test_flat_curvature(grid3):
    g = flat_metric(grid3)
    tol = 10 * grid3.h ** 2
    assert np.max(np.abs(sectional_tangential(g))) < tol
    assert np.max(np.abs(sectional_radial(g))) < tol
    rrr, rs = ricci(g)
    assert np.max(np.abs(rrr)) < tol and np.max(np.abs(rs / grid3.nodes[1:-1] ** 2)) < tol


def test_sphere_patch_curvature():
    g = RadialGrid.from_spacing(3, 5.0, 0.01)
    m = int(round(1.4 / g.h))
    sub = RadialGrid(3, 5.0, g.n_nodes)
    psi = np.sin(sub.nodes)
    psi[m + 1:] = np.sinh(sub.nodes[m + 1:])  # keep positive beyond pi/2; only r < 1.4 is checked
    metric = RotSymMetric(sub, np.ones(sub.n_nodes), psi)
    sec = sectional_tangential(metric)[: m - 2]
    assert np.max(np.abs(sec - 1.0)) < 10 * g.h ** 2


@st.composite
def profiles(draw):
    k = draw(st.integers(1, 3))
    a = [draw(st.floats(-1.0, 1.0)) for _ in range(k)]
    b = [draw(st.floats(0.5, 2.0)) for _ in range(k)]
    return lambda r: sum(ai * r ** 2 * np.exp(-bi * r ** 2) for ai, bi in zip(a, b))


@given(profiles())
def test_frame_identities_hold(w):
    grid = RadialGrid.from_spacing(3, 10.0, 0.02)
    m = from_profile(grid, w)
    rrr, rs = ricci(m)
    sr, stg = sectional_radial(m), sectional_tangential(m)
    tol = 10 * grid.h ** 2
    assert np.max(np.abs(rrr - 2 * m.phi[1:-1] ** 2 * sr)) < tol
    assert np.max(np.abs(rs / m.psi[1:-1] ** 2 - (sr + stg))) < tol


@given(profiles())
def test_sec_t_negative_under_profile_bound(w):
    grid = RadialGrid.from_spacing(3, 10.0, 0.05)
    wv = w(grid.nodes)
    if np.all(wv ** 2 <= grid.sinh ** 2):
        assert np.all(sectional_tangential(from_profile(grid, w)) < 0)


def test_sec_t_sign_flag_for_large_profile(grid3):
    g = from_profile(grid3, lambda r: 2.0 * np.sinh(r))
    rep = check_ah_admissible(g)
    assert not rep.curvature_hypothesis
    assert np.any(sectional_tangential(g) >= 0)


def test_curvature_second_oracle():
    g = RadialGrid.from_spacing(3, 5.0, 0.005)
    m = from_profile(g, gauss)
    i = int(round(2.0 / g.h)) - 1
    phi = lambda r: math.sqrt(1 + gauss(r) ** 2)
    o = CoordinateOracle(3, phi, math.sinh)
    x = sample_point(3, 2.0)
    o_rr, o_sph = o.ricci_components(x)
    rrr, rs = ricci(m)
    assert rrr[i] == pytest.approx(o_rr, rel=1e-5)
    assert rs[i] == pytest.approx(o_sph, rel=1e-5)
    assert sectional_radial(m)[i] == pytest.approx(o.sectional_radial(x), rel=1e-6)
    assert sectional_tangential(m)[i] == pytest.approx(o.sectional_tangential(x), rel=1e-6)


def test_curvature_converges_under_refinement():
    errs = []
    for h in (0.1, 0.05):
        g = RadialGrid.from_spacing(3, 10.0, h)
        m = from_profile(g, gauss)
        r = g.nodes[1:-1]
        mask = (r > 0.99) & (r < 1.01)
        o = CoordinateOracle(3, lambda s: math.sqrt(1 + gauss(s) ** 2), math.sinh)
        exact = o.sectional_radial(sample_point(3, 1.0))
        errs.append(abs(sectional_radial(m)[mask][0] - exact))
    assert errs[0] / errs[1] > 3.5


# -- norms -------------------------------------------------------------------

def test_tensor_norm_examples(grid3, gh3):
    c = 0.3
    h = MetricPerturbation(grid3, c * gh3.phi ** 2, c * gh3.psi ** 2)
    assert np.allclose(tensor_norm_pointwise(gh3, h), abs(c) * math.sqrt(3))
    z = MetricPerturbation.zero(grid3)
    assert np.all(tensor_norm_pointwise(gh3, z) == 0)
    hr = MetricPerturbation(grid3, 0.1 * np.ones(grid3.n_nodes), np.zeros(grid3.n_nodes))
    i = int(round(1.0 / grid3.h)) - 1
    assert tensor_norm_pointwise(gh3, hr)[i] == pytest.approx(0.1)


def test_weighted_norm_weight_cancels(grid3, gh3):
    mu, c = 1.0, 0.7
    rho = BoundaryWeight.sech(grid3).rho
    h = MetricPerturbation(grid3, c * rho ** mu * gh3.phi ** 2, c * rho ** mu * gh3.psi ** 2)
    assert weighted_norm(gh3, h, WeightedNormParams(mu, 0)) == pytest.approx(c * math.sqrt(3))


def _random_pert(grid, seed):
    rng = np.random.default_rng(seed)
    r = grid.nodes
    a = rng.normal(size=3)
    return MetricPerturbation(grid, sum(a[j] * np.exp(-(r - j - 1) ** 2) for j in range(3)) * np.exp(-r),
                              grid.sinh ** 2 * a[0] * np.exp(-(r - 2) ** 2) * np.tanh(r) ** 2)


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6),
       st.floats(-5, 5).filter(lambda c: c == 0 or abs(c) > 1e-100), st.integers(0, 2))
def test_weighted_norm_is_a_norm(s1, s2, c, k):
    grid = RadialGrid.from_spacing(3, 10.0, 0.1)
    base = hyperbolic_metric(grid)
    p = WeightedNormParams(1.0, k)
    x, y = _random_pert(grid, s1), _random_pert(grid, s2)
    nx, ny = weighted_norm(base, x, p), weighted_norm(base, y, p)
    assert weighted_norm(base, x * c, p) == pytest.approx(abs(c) * nx, rel=1e-12, abs=1e-300)
    assert weighted_norm(base, x + y, p) <= nx + ny + 1e-12
    assert weighted_norm(base, MetricPerturbation.zero(grid), p) == 0.0


def test_weighted_norm_zero_only_for_zero(grid3, gh3):
    h = np.zeros(grid3.n_nodes)
    h[5] = 1e-8
    assert weighted_norm(gh3, MetricPerturbation(grid3, h, np.zeros_like(h)), WeightedNormParams(1, 0)) > 0


def test_weighted_params_range():
    WeightedNormParams(1.0, 2).require_admissible(3)
    with pytest.raises(ValueError):
        WeightedNormParams(5.0, 2).require_admissible(3)
    with pytest.raises(ValueError):
        WeightedNormParams(1.0, 3)


def test_boundary_weight_properties(grid3):
    rho = BoundaryWeight.sech(grid3).rho
    r = grid3.nodes
    assert np.all((rho > 0) & (rho <= 1))
    assert np.all(np.diff(rho[r >= 1]) < 0)
    tail = rho[-20:] * np.exp(r[-20:])
    assert np.ptp(tail) < 1e-6


def test_admissibility_examples(grid3, gh3, gw3):
    rep = check_ah_admissible(gh3)
    assert rep.admissible and rep.curvature_hypothesis and rep.min_sec_t == pytest.approx(-1, abs=1e-9)
    rep = check_ah_admissible(gw3)
    assert rep.admissible and rep.curvature_hypothesis and rep.min_sec_t < 0


def test_perturb_and_difference_roundtrip(gw3, gh3):
    d = metric_difference(gw3, gh3)
    back = perturb(gh3, d)
    assert np.allclose(back.phi, gw3.phi) and np.allclose(back.psi, gw3.psi)
    assert distance_to_hyperbolic(gh3) == 0.0
    with pytest.raises(DegenerateMetricError):
        perturb(gh3, d * -100.0)
