"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the status lines are written
to the terminal even when output capture is on.
"""

import math
import time

import numpy as np
import pytest

from ahricci.experiments import (CONVERGE, ExperimentConfig, base_metric, continuous_dependence_sweep,
                                 convergence_experiment, gauge_consistency_check, stability_sweep)
from ahricci.flow import FlowConfig, run_flow
from ahricci.geometry import (RadialGrid, from_profile, hyperbolic_metric, ricci, sectional_radial,
                              sectional_tangential)
from ahricci.profiles import BUMPS, bump_perturbation, get_bump
from ahricci.spectral import (empirical_indicial, hyperbolic_linearization, indicial_roots_scalar,
                              scalar_laplacian, sector_check, spectrum_bound)

pytestmark = pytest.mark.slow


def gauss(r):
    return r ** 2 * np.exp(-r ** 2)


@pytest.fixture
def report(request, pytestconfig):
    """``report(ok, detail, elapsed, limit)`` prints the criterion line and asserts it."""
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")
    label = request.node.name.replace("test_", "").replace("_", " ")

    def emit(ok, detail, elapsed, limit):
        in_time = elapsed < limit
        status = "PASS" if ok and in_time else "FAIL"
        line = f"[{status}] {label}: {detail}; runtime {elapsed:.1f} s (limit {limit:.0f} s)"
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
        assert ok, line
        assert in_time, line

    return emit


def test_criterion_01_curvature_oracles(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    grid = RadialGrid.from_spacing(3, 10.0, 0.02)
    tol = 10 * grid.h ** 2
    worst = 0.0
    for _ in range(10):
        a, b = rng.uniform(-1, 1, 3), rng.uniform(0.5, 2.0, 3)
        m = from_profile(grid, lambda r: sum(a[j] * r ** 2 * np.exp(-b[j] * r ** 2) for j in range(3)))
        rrr, rsph = ricci(m)
        sr, st = sectional_radial(m), sectional_tangential(m)
        worst = max(worst, np.max(np.abs(rrr - 2 * m.phi[1:-1] ** 2 * sr)),
                    np.max(np.abs(rsph - (sr + st) * m.psi[1:-1] ** 2)))
    hyp = float(np.max(np.abs(sectional_tangential(hyperbolic_metric(grid)) + 1)))
    report(worst < tol and hyp < tol,
           f"worst identity error {worst:.2e}, |sec_T(g_h)+1| {hyp:.2e} (tol {tol:.1e})",
           time.perf_counter() - t0, 10)


def test_criterion_02_fixed_point(report):
    t0 = time.perf_counter()
    grid = RadialGrid.from_spacing(3, 10.0, 0.01)
    gh = hyperbolic_metric(grid)
    worst = {}
    for name, ref in (("RF", None), ("RDTF", gh)):
        tr = run_flow(gh, FlowConfig(t_end=5.0, reference=ref, integrator="semi-implicit", record_every=0.5))
        worst[name] = max(tr.norm_c0_mu) if tr.status == "completed" else math.inf
    report(all(v < 1e-3 for v in worst.values()),
           ", ".join(f"{k} max distance {v:.2e}" for k, v in worst.items()) + " (limit 1e-3)",
           time.perf_counter() - t0, 120)


@pytest.fixture(scope="module")
def gauge_report():
    t0 = time.perf_counter()
    rep = gauge_consistency_check(gauss, 1.0, ExperimentConfig(), (0.04, 0.02, 0.01), segments=4)
    return rep, time.perf_counter() - t0


def test_criterion_03_gauge_consistency(report, gauge_report):
    rep, elapsed = gauge_report
    d = ", ".join(f"h={lv.h:g}: {lv.discrepancy:.2e}" for lv in rep.levels)
    report(rep.order is not None and rep.order >= 1.5 and all(lv.status == "completed" for lv in rep.levels),
           f"fitted order {rep.order:.2f} (min 1.5); {d}", elapsed, 600)


def test_criterion_04_convergence(report):
    t0 = time.perf_counter()
    cfg = ExperimentConfig()
    r = convergence_experiment(gauss, cfg, "gauss")
    ok = (r.verdict == CONVERGE and r.min_sec_t_initial < 0 and r.final_distance < 1e-3
          and r.r_squared >= 0.99 and r.omega_fit > 0)
    report(ok, f"min sec_T {r.min_sec_t_initial:.3f}, final distance {r.final_distance:.2e}, "
               f"omega {r.omega_fit}, R^2 {r.r_squared}", time.perf_counter() - t0, 300)


def test_criterion_05_convergence_stability(report):
    t0 = time.perf_counter()
    cfg = ExperimentConfig()
    assert len(BUMPS) == 5
    perts = {name: (lambda g, b=get_bump(name): bump_perturbation(g, b, cfg.mu)) for name in BUMPS}
    sweep = stability_sweep(gauss, perts, [1e-2], cfg, "gauss")
    detail = ", ".join(f"{r.perturbation_id}: {r.verdict} (omega {r.omega_fit})" for r in sweep.reports)
    report(sweep.passed and len(sweep.reports) == 5, detail, time.perf_counter() - t0, 900)


def test_criterion_06_continuous_dependence(report):
    t0 = time.perf_counter()
    cfg = ExperimentConfig()
    g0 = from_profile(cfg.grid(), gauss, cfg.mu)
    p = bump_perturbation(g0, get_bump("rr-near"), cfg.mu)
    rep = continuous_dependence_sweep(g0, p, [1e-3, 1e-4], 1.0, cfg)
    ratios = ", ".join(f"delta={d:g}: {r:.4f}" for d, r in zip(rep.deltas, rep.ratios))
    report(rep.passed and all(np.isfinite(rep.ratios)), f"{ratios}; {rep.reason}",
           time.perf_counter() - t0, 600)


def test_criterion_07_spectral_bound(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in (3, 4):
        J = hyperbolic_linearization(RadialGrid.from_spacing(n, 12.0, 0.02))
        Jf = hyperbolic_linearization(RadialGrid.from_spacing(n, 12.0, 0.01))
        sb = spectrum_bound(J, Jf)
        ok &= sb.min_real >= n - 2 - 0.1 and sb.relative_change < 0.02
        parts.append(f"n={n}: min Re {sb.min_real:.4f} (bound {n - 2.1:g}), h/2 change {100 * sb.relative_change:.3f}%")
    report(ok, "; ".join(parts), time.perf_counter() - t0, 300)


def test_criterion_08_sectoriality(report):
    t0 = time.perf_counter()
    J = hyperbolic_linearization(RadialGrid.from_spacing(3, 12.0, 0.1))
    good = sector_check(J, 0.5, math.pi / 3, 2048)
    bad = sector_check(J, 10.0, math.pi / 3, 2048)
    report(good.passed and np.isfinite(good.C) and len(good.samples) == 2048 and not bad.passed,
           f"omega=0.5: C={good.C:.4f} over {len(good.samples)} samples; omega=10: passed={bad.passed} "
           f"({bad.eigenvalues_inside} eigenvalues inside)", time.perf_counter() - t0, 300)


def test_criterion_09_indicial_roots(report):
    t0 = time.perf_counter()
    gammas = np.linspace(-0.25, 5.0, 85)
    worst_err, worst_sum = 0.0, 0.0
    for n in (3, 4):
        L = scalar_laplacian(RadialGrid.from_spacing(n, 12.0, 0.02))
        for lam in (0.0, -1.0, -3.0):
            exact = (n - 1) / 2 + math.sqrt((n - 1) ** 2 / 4 - lam)
            gp = empirical_indicial(L, gammas, lam).decaying_root
            worst_err = max(worst_err, abs(gp - exact) if gp is not None else math.inf)
            worst_sum = max(worst_sum, abs(indicial_roots_scalar(n, lam).root_sum - (n - 1)))
    report(worst_err <= 0.05 and worst_sum <= 1e-12,
           f"worst root error {worst_err:.2e} (tol 0.05), worst root-sum error {worst_sum:.1e} (tol 1e-12)",
           time.perf_counter() - t0, 120)


def test_criterion_10_chaining(report, gauge_report):
    rep, elapsed = gauge_report
    ok = all(lv.chained_discrepancy is not None and lv.chained_discrepancy <= 3 * lv.discrepancy
             for lv in rep.levels)
    d = ", ".join(f"h={lv.h:g}: N4-vs-N1 {lv.chained_discrepancy:.2e} vs 3x{lv.discrepancy:.2e}"
                  for lv in rep.levels)
    report(ok, d, elapsed, 300)
