"""Falsifiable numerical experiments on the normalized flows.

Each experiment runs one or more flows, records the diagnostic series of
:class:`~ahricci.flow.FlowTrajectory` and turns them into a verdict.  Verdicts
are computed by pure functions of the recorded series (times, weighted
distances, run status), so re-evaluating a saved trajectory CSV reproduces
them exactly.  Every report carries the hash of the experiment settings and
the grid metadata.

Convergence toward ``g_h`` is measured for the normalized Ricci-DeTurck flow
with reference ``g_h``; the plain Ricci flow only converges modulo radial
diffeomorphisms, and its distance to ``g_h`` in fixed coordinates need not
go to zero.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .flow import FlowConfig, FlowTrajectory, chained_rdtf, run_flow
from .geometry import (DegenerateMetricError, MetricPerturbation, RadialGrid, RotSymMetric,
                       WeightedNormParams, check_ah_admissible, distance_to_hyperbolic,
                       from_profile, hyperbolic_metric, metric_difference, perturb, weighted_norm)
from .profiles import Profile, gaussian_profile, scaled_perturbation

CONVERGE = "converge"
FAIL = "fail"
PASS = "pass"
DEGENERATE = "degenerate"
PARTIAL = "partial"


class ExperimentError(RuntimeError):
    pass


class PreconditionError(ExperimentError):
    """The initial data do not satisfy the hypothesis the experiment tests."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid, flow and verdict settings shared by the experiments.

    ``gauge`` is ``'deturck'`` (Ricci-DeTurck flow with reference ``g_h``)
    or ``'none'`` (plain normalized Ricci flow).  ``floor_ratio`` marks the
    discretization floor of a converging run: the fit window ends where the
    distance first drops below ``floor_ratio`` times its smallest value.
    """

    n: int = 3
    r_max: float = 10.0
    h: float = 0.05
    mu: float = 1.0
    t_end: float = 20.0
    record_every: float = 0.1
    eps_target: float = 1e-3
    integrator: str = "explicit-rk4"
    cfl_safety: float = 0.9
    gauge: str = "deturck"
    floor_ratio: float = 100.0
    r2_min: float = 0.99
    workers: int = 1

    def __post_init__(self):
        if self.gauge not in ("deturck", "none"):
            raise ValueError(f"gauge must be 'deturck' or 'none', got {self.gauge!r}")
        if not self.eps_target > 0:
            raise ValueError("eps_target must be positive")
        if not self.floor_ratio >= 1:
            raise ValueError("floor_ratio must be at least 1")
        if not 0 < self.r2_min <= 1:
            raise ValueError("r2_min must lie in (0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        WeightedNormParams(self.mu, 2).require_admissible(self.n)

    def grid(self, h: Optional[float] = None) -> RadialGrid:
        return RadialGrid.from_spacing(self.n, self.r_max, self.h if h is None else h)

    def norm(self, k: int = 0) -> WeightedNormParams:
        return WeightedNormParams(self.mu, k)

    def flow_config(self, grid: RadialGrid, t_end: Optional[float] = None) -> FlowConfig:
        ref = hyperbolic_metric(grid) if self.gauge == "deturck" else None
        return FlowConfig(normalized=True, t_end=self.t_end if t_end is None else t_end,
                          integrator=self.integrator, cfl_safety=self.cfl_safety,
                          reference=ref, record_every=self.record_every,
                          norm=WeightedNormParams(self.mu, 2))

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        """SHA-256 of the canonical JSON form of the settings."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# -- decay fits and verdicts ---------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit ``log d = log A - omega t`` over ``[t_start, t_stop]``."""

    omega: float
    log_amplitude: float
    r_squared: float
    t_start: float
    t_stop: float
    points: int


def fit_window(times: Sequence[float], distances: Sequence[float], floor_ratio: float = 100.0) -> np.ndarray:
    """Indices of the fit window: the last half (in time) of the pre-floor run.

    The pre-floor run ends at the first record whose distance is at most
    ``floor_ratio`` times the smallest recorded distance; past that point
    the series is dominated by the discretization floor and no longer
    reflects the decay of the flow.  A series that never exceeds
    ``floor_ratio`` times its smallest value shows no separate floor, and
    the whole run is used.
    """
    t = np.asarray(times, dtype=float)
    d = np.asarray(distances, dtype=float)
    if t.size == 0:
        return np.array([], dtype=int)
    floor = float(np.min(d))
    below = np.flatnonzero(d <= floor_ratio * floor)
    stop = int(below[0]) if below.size else t.size - 1
    if stop == 0:
        stop = t.size - 1
    t_mid = 0.5 * (t[0] + t[stop])
    return np.flatnonzero((t >= t_mid - 1e-12) & (np.arange(t.size) <= stop))


def fit_decay(times: Sequence[float], distances: Sequence[float],
              floor_ratio: float = 100.0) -> Optional[DecayFit]:
    """Log-linear decay fit over :func:`fit_window`; ``None`` when it has fewer than 3 points."""
    t = np.asarray(times, dtype=float)
    d = np.asarray(distances, dtype=float)
    idx = fit_window(t, d, floor_ratio)
    if idx.size < 3 or np.any(d[idx] <= 0) or not np.all(np.isfinite(d[idx])):
        return None
    x, y = t[idx], np.log(d[idx])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    return DecayFit(float(-slope), float(icpt), r2, float(x[0]), float(x[-1]), int(idx.size))


@dataclass(frozen=True)
class ConvergenceVerdict:
    verdict: str
    fit: Optional[DecayFit]
    entry_time: Optional[float]
    half_entry_time: Optional[float]
    reason: str


def convergence_verdict(times: Sequence[float], distances: Sequence[float], status: str,
                        eps_target: float = 1e-3, floor_ratio: float = 100.0,
                        r2_min: float = 0.99) -> ConvergenceVerdict:
    """Verdict of a convergence run from its recorded series alone.

    ``converge`` requires a completed run whose distance enters the
    ``eps_target`` ball, never leaves it and ends no larger than at entry,
    together with an exponential fit of ``R**2 >= r2_min`` and positive rate.
    A run that starts inside the ball is a fixed-point run and needs no fit.
    """
    t = np.asarray(times, dtype=float)
    d = np.asarray(distances, dtype=float)
    fit = fit_decay(t, d, floor_ratio)
    inside = np.flatnonzero(d < eps_target)
    half = np.flatnonzero(d < 0.5 * eps_target)
    entry = float(t[inside[0]]) if inside.size else None
    half_entry = float(t[half[0]]) if half.size else None
    if status != "completed":
        return ConvergenceVerdict(FAIL, fit, entry, half_entry, f"run ended with status {status}")
    if t.size == 0 or not np.all(np.isfinite(d)):
        return ConvergenceVerdict(FAIL, fit, entry, half_entry, "non-finite distance")
    if not inside.size:
        return ConvergenceVerdict(FAIL, fit, entry, half_entry,
                                  f"distance {d[-1]:.3g} never below {eps_target:g}")
    k = int(inside[0])
    if np.any(d[k:] >= eps_target) or d[-1] > d[k]:
        return ConvergenceVerdict(FAIL, fit, entry, half_entry, "distance left the target ball")
    if k == 0:
        return ConvergenceVerdict(CONVERGE, fit, entry, half_entry, "started inside the target ball")
    if fit is None:
        return ConvergenceVerdict(FAIL, fit, entry, half_entry, "too few points for a decay fit")
    if fit.r_squared < r2_min:
        return ConvergenceVerdict(FAIL, fit, entry, half_entry,
                                  f"decay fit R^2={fit.r_squared:.4f} below {r2_min}")
    if not fit.omega > 0:
        return ConvergenceVerdict(FAIL, fit, entry, half_entry, f"fitted rate {fit.omega:.3g} not positive")
    return ConvergenceVerdict(CONVERGE, fit, entry, half_entry, "exponential convergence")


def verdict_from_rows(rows: Iterable[dict], eps_target: float = 1e-3, floor_ratio: float = 100.0,
                      r2_min: float = 0.99) -> ConvergenceVerdict:
    """:func:`convergence_verdict` applied to trajectory CSV records."""
    rows = list(rows)
    if not rows:
        return convergence_verdict([], [], "empty", eps_target, floor_ratio, r2_min)
    t = [float(r["t"]) for r in rows]
    d = [float(r["norm_c0_mu"]) for r in rows]
    return convergence_verdict(t, d, str(rows[-1]["status"]), eps_target, floor_ratio, r2_min)


# -- convergence experiments -------------------------------------------------

@dataclass
class StabilityReport:
    """Outcome of one convergence run toward ``g_h``.

    ``omega_fit`` is set only when the decay fit reaches ``R**2 >= r2_min``.
    """

    base_id: str
    perturbation_id: str
    delta: float
    omega_fit: Optional[float]
    r_squared: Optional[float]
    fit_window: Optional[tuple]
    initial_distance: float
    final_distance: float
    entry_time: Optional[float]
    half_entry_time: Optional[float]
    min_sec_t_initial: float
    verdict: str
    reason: str
    status: str
    config_hash: str
    grid: dict
    trajectory: Optional[FlowTrajectory] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == CONVERGE

    def summary(self) -> dict:
        return {"experiment": f"convergence:{self.base_id}:{self.perturbation_id}:{self.delta:g}",
                "verdict": self.verdict,
                "key_metric": self.omega_fit if self.omega_fit is not None else self.final_distance}


def curvature_hypothesis_nodewise(grid: RadialGrid, w: Profile) -> bool:
    """``w**2 <= sinh(r)**2`` at every node."""
    wv = np.asarray(w(grid.nodes), dtype=float)
    return bool(np.all(wv ** 2 <= grid.sinh ** 2))


def _run_convergence(g0: RotSymMetric, cfg: ExperimentConfig, base_id: str, perturbation_id: str,
                     delta: float) -> StabilityReport:
    grid = g0.grid
    traj = run_flow(g0, cfg.flow_config(grid))
    d = traj.series("norm_c0_mu")
    v = convergence_verdict(traj.times, d, traj.status, cfg.eps_target, cfg.floor_ratio, cfg.r2_min)
    fit_ok = v.fit is not None and v.fit.r_squared >= cfg.r2_min
    return StabilityReport(
        base_id=base_id, perturbation_id=perturbation_id, delta=delta,
        omega_fit=v.fit.omega if fit_ok else None,
        r_squared=v.fit.r_squared if v.fit is not None else None,
        fit_window=(v.fit.t_start, v.fit.t_stop) if v.fit is not None else None,
        initial_distance=float(d[0]) if d.size else math.nan,
        final_distance=float(d[-1]) if d.size else math.nan,
        entry_time=v.entry_time, half_entry_time=v.half_entry_time,
        min_sec_t_initial=float(traj.min_sec_t[0]) if traj.min_sec_t else math.nan,
        verdict=v.verdict,
        reason=v.reason if traj.status == "completed" else f"{v.reason}: {traj.message}",
        status=traj.status, config_hash=cfg.hash(), grid=grid.metadata(), trajectory=traj)


def base_metric(w_profile: Profile, cfg: ExperimentConfig) -> RotSymMetric:
    """Metric of profile ``w`` on the configured grid, checked for the curvature hypothesis.

    Raises :class:`PreconditionError` unless the metric is AH-admissible and
    its tangential sectional curvature is negative at every node with r > 0.
    """
    grid = cfg.grid()
    g = from_profile(grid, w_profile, cfg.mu)
    rep = check_ah_admissible(g, cfg.norm(2))
    if not rep.admissible:
        raise PreconditionError(f"initial metric is not AH-admissible: {rep}")
    if not rep.curvature_hypothesis:
        raise PreconditionError(f"tangential curvature not negative (min sec_T = {rep.min_sec_t:.4g})")
    return g


def convergence_experiment(w_profile: Profile, cfg: ExperimentConfig = ExperimentConfig(),
                           profile_id: str = "w") -> StabilityReport:
    """Flow the metric of ``w`` toward ``g_h`` and fit the exponential decay of its distance."""
    return _run_convergence(base_metric(w_profile, cfg), cfg, profile_id, "none", 0.0)


def convergence_stability_experiment(w_star: Profile, perturbation: Callable[[RotSymMetric], MetricPerturbation],
                                     delta: float, cfg: ExperimentConfig = ExperimentConfig(),
                                     base_id: str = "w", perturbation_id: str = "p") -> StabilityReport:
    """Flow ``g_star + delta p`` with ``p`` scaled to unit weighted ``C^2`` size.

    ``perturbation`` maps the base metric to an (unscaled) perturbation.
    Only ``g_star`` has to satisfy the curvature hypothesis; the perturbed
    metric need not.  ``delta = 0`` runs exactly the flow of
    :func:`convergence_experiment`.
    """
    g_star = base_metric(w_star, cfg)
    if delta == 0:
        return _run_convergence(g_star, cfg, base_id, perturbation_id, 0.0)
    p = scaled_perturbation(g_star, perturbation(g_star), delta, cfg.norm(2))
    try:
        g0 = perturb(g_star, p)
    except DegenerateMetricError as exc:
        raise PreconditionError(f"perturbed metric is degenerate: {exc}") from exc
    return _run_convergence(g0, cfg, base_id, perturbation_id, float(delta))


def _map(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


@dataclass
class StabilitySweep:
    reports: List[StabilityReport]

    @property
    def deltas(self) -> List[float]:
        return sorted({r.delta for r in self.reports})

    @property
    def threshold(self) -> Optional[float]:
        """Largest ``delta`` such that every run with ``delta`` at most this value converged."""
        best = None
        for d in self.deltas:
            if all(r.passed for r in self.reports if r.delta <= d):
                best = d
        return best

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def stability_sweep(w_star: Profile, perturbations: Dict[str, Callable[[RotSymMetric], MetricPerturbation]],
                    deltas: Sequence[float], cfg: ExperimentConfig = ExperimentConfig(),
                    base_id: str = "w") -> StabilitySweep:
    """:func:`convergence_stability_experiment` over every perturbation and ``delta``."""
    jobs = [(name, p, d) for d in deltas for name, p in perturbations.items()]

    def one(job):
        name, p, d = job
        try:
            return convergence_stability_experiment(w_star, p, d, cfg, base_id, name)
        except PreconditionError as exc:
            return StabilityReport(base_id, name, float(d), None, None, None, math.nan, math.nan,
                                   None, None, math.nan, FAIL, str(exc), "not-run", cfg.hash(),
                                   cfg.grid().metadata())

    return StabilitySweep(_map(one, jobs, cfg.workers))


# -- continuous dependence ---------------------------------------------------

@dataclass
class DependenceReport:
    """Lipschitz-dependence ratios ``sup_{[tau/2, tau]} |g1(t) - g0(t)| / |g1 - g0|``."""

    tau: float
    deltas: List[float]
    ratios: List[float]
    statuses: List[str]
    verdict: str
    reason: str
    config_hash: str
    grid: dict

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def summary(self) -> dict:
        finite = [r for r in self.ratios if np.isfinite(r)]
        return {"experiment": f"dependence:tau={self.tau:g}", "verdict": self.verdict,
                "key_metric": max(finite) if finite else math.nan}


def dependence_verdict(deltas: Sequence[float], ratios: Sequence[float], statuses: Sequence[str],
                       spread: float = 0.5) -> tuple:
    """``pass`` iff all ratios are finite and the two smallest deltas agree within ``spread``."""
    if not deltas:
        return DEGENERATE, "no perturbation sizes"
    if any(s != "completed" for s in statuses):
        return PARTIAL, "a run ended before tau"
    r = np.asarray(ratios, dtype=float)
    if not np.all(np.isfinite(r)):
        return FAIL, "non-finite ratio"
    if len(deltas) < 2:
        return PASS, "single delta: ratio finite"
    order = np.argsort(deltas)
    a, b = r[order[0]], r[order[1]]
    rel = abs(a - b) / min(a, b) if min(a, b) > 0 else math.inf
    if rel < spread:
        return PASS, f"smallest-delta ratios differ by {100 * rel:.2f}%"
    return FAIL, f"smallest-delta ratios differ by {100 * rel:.1f}% (limit {100 * spread:.0f}%)"


def _sup_ratio(base: FlowTrajectory, pert: FlowTrajectory, tau: float, t0: float,
               norm: WeightedNormParams) -> float:
    g0, g1 = base.metrics[0], pert.metrics[0]
    denom = weighted_norm(g0, metric_difference(g1, g0), norm)
    best = 0.0
    for t, a, b in zip(base.times, base.metrics, pert.metrics):
        if t >= t0 + 0.5 * tau - 1e-12:
            best = max(best, weighted_norm(a, metric_difference(b, a), norm))
    return best / denom if denom > 0 else math.inf


def continuous_dependence_sweep(g0: RotSymMetric, perturbation: MetricPerturbation,
                                deltas: Sequence[float], tau: float,
                                cfg: ExperimentConfig = ExperimentConfig()) -> DependenceReport:
    """Flow ``g0`` and ``g0 + delta p`` (``p`` at unit weighted ``C^2`` size) over ``[0, tau]``.

    Each ratio compares the weighted ``C^2`` distance of the two solutions,
    measured with the unperturbed one, to the initial distance; the sup runs
    over the records in ``[tau/2, tau]``.
    """
    grid = g0.grid
    norm = cfg.norm(2)
    meta = dict(tau=float(tau), config_hash=cfg.hash(), grid=grid.metadata())
    if weighted_norm(g0, perturbation, norm) == 0.0:
        return DependenceReport(deltas=[], ratios=[], statuses=[], verdict=DEGENERATE,
                                reason="zero perturbation: ratios undefined", **meta)
    fcfg = cfg.flow_config(grid, t_end=tau)
    base = run_flow(g0, fcfg)
    if base.status != "completed":
        return DependenceReport(deltas=list(deltas), ratios=[math.nan] * len(deltas),
                                statuses=[base.status] * len(deltas), verdict=PARTIAL,
                                reason=f"unperturbed run: {base.message}", **meta)

    def one(delta):
        try:
            g1 = perturb(g0, scaled_perturbation(g0, perturbation, delta, norm))
        except DegenerateMetricError:
            return math.nan, "degenerated"
        tr = run_flow(g1, fcfg)
        if tr.status != "completed":
            return math.nan, tr.status
        return _sup_ratio(base, tr, tau, 0.0, norm), tr.status

    out = _map(one, list(deltas), cfg.workers)
    ratios = [r for r, _ in out]
    statuses = [s for _, s in out]
    verdict, reason = dependence_verdict(list(deltas), ratios, statuses)
    return DependenceReport(deltas=[float(d) for d in deltas], ratios=ratios, statuses=statuses,
                            verdict=verdict, reason=reason, **meta)


# -- gauge consistency -------------------------------------------------------

@dataclass(frozen=True)
class GaugeLevel:
    h: float
    dt: float
    discrepancy: float
    chained_discrepancy: Optional[float]
    status: str


@dataclass
class GaugeConsistencyReport:
    """Direct Ricci flow vs gauge-recovered Ricci-DeTurck flow under refinement.

    ``discrepancy`` compares the unchained recovery with the direct flow;
    ``chained_discrepancy`` compares the chained recovery with the unchained
    one.  Both are weighted ``C^0`` distances at ``t = tau``.
    """

    tau: float
    segments: int
    levels: List[GaugeLevel]
    order: Optional[float]
    monotone: bool
    chain_ratio: Optional[float]
    verdict: str
    reason: str
    config_hash: str

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def summary(self) -> dict:
        return {"experiment": f"gauge-check:tau={self.tau:g}", "verdict": self.verdict,
                "key_metric": self.order if self.order is not None else math.nan}


FLOOR_DISCREPANCY = 1e-9


def refinement_order(hs: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    h = np.asarray(hs, dtype=float)
    e = np.asarray(errors, dtype=float)
    if h.size < 2 or np.any(e <= 0) or not np.all(np.isfinite(e)):
        return None
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def gauge_verdict(levels: Sequence[GaugeLevel], min_order: float = 1.5, chain_factor: float = 3.0):
    """``(verdict, reason, order, monotone, chain_ratio)`` from the per-level discrepancies."""
    if any(lv.status != "completed" for lv in levels):
        return FAIL, "a run failed", None, False, None
    d = [lv.discrepancy for lv in sorted(levels, key=lambda lv: -lv.h)]
    hs = sorted((lv.h for lv in levels), reverse=True)
    order = refinement_order(hs, d)
    monotone = all(b < a for a, b in zip(d, d[1:]))
    ratios = [lv.chained_discrepancy / lv.discrepancy for lv in levels
              if lv.chained_discrepancy is not None and lv.discrepancy > 0]
    chain_ratio = max(ratios) if ratios else None
    if max(d) < FLOOR_DISCREPANCY:
        return PASS, "discrepancy at the floating-point floor", order, monotone, chain_ratio
    problems = []
    if order is None or order < min_order:
        problems.append(f"order {order} below {min_order}")
    if not monotone:
        problems.append("discrepancy not decreasing under refinement")
    if chain_ratio is not None and chain_ratio > chain_factor:
        problems.append(f"chained/unchained ratio {chain_ratio:.3g} above {chain_factor}")
    if problems:
        return FAIL, "; ".join(problems), order, monotone, chain_ratio
    return PASS, f"order {order:.2f}", order, monotone, chain_ratio


def gauge_consistency_check(w_profile: Profile, tau: float, cfg: ExperimentConfig = ExperimentConfig(),
                            levels: Sequence[float] = (0.04, 0.02, 0.01), segments: int = 4) -> GaugeConsistencyReport:
    """Compare direct Ricci flow with the Ricci flow recovered from Ricci-DeTurck flow.

    At every spacing in ``levels`` the direct normalized Ricci flow is run
    from the metric of ``w_profile``; its stable step is then shared by the
    unchained (one segment) and chained (``segments`` equal segments)
    recoveries, so ``h`` and ``dt`` are refined together.
    """
    norm = cfg.norm(0)

    def one(h):
        grid = cfg.grid(h)
        g0 = from_profile(grid, w_profile, cfg.mu)
        fcfg = replace(cfg.flow_config(grid, t_end=tau), reference=None, record_every=tau / 4)
        direct = run_flow(g0, fcfg)
        if direct.status != "completed":
            return GaugeLevel(h, direct.dt, math.nan, None, direct.status)
        shared = replace(fcfg, dt=direct.dt)
        single = chained_rdtf(g0, [0.0, tau], shared)
        if single.status != "completed":
            return GaugeLevel(h, direct.dt, math.nan, None, single.status)
        gh = hyperbolic_metric(grid)
        disc = weighted_norm(gh, metric_difference(single.final, direct.final), norm)
        chained = None
        if segments > 1:
            part = list(np.linspace(0.0, tau, segments + 1))
            multi = chained_rdtf(g0, part, shared)
            if multi.status != "completed":
                return GaugeLevel(h, direct.dt, disc, math.nan, multi.status)
            chained = weighted_norm(gh, metric_difference(multi.final, single.final), norm)
        return GaugeLevel(h, direct.dt, disc, chained, "completed")

    lv = _map(one, list(levels), cfg.workers)
    verdict, reason, order, monotone, chain_ratio = gauge_verdict(lv)
    return GaugeConsistencyReport(float(tau), segments, lv, order, monotone, chain_ratio,
                                  verdict, reason, cfg.hash())


# -- curvature condition scan ------------------------------------------------

@dataclass(frozen=True)
class ScanRow:
    amplitude: float
    min_sec_t: float
    distance: float
    hypothesis_nodewise: bool


def curvature_condition_scan(amplitudes: Sequence[float], cfg: ExperimentConfig = ExperimentConfig(),
                             family: Callable[[float], Profile] = gaussian_profile) -> List[ScanRow]:
    """``(A, min sec_T, weighted C^0 distance to g_h, w_A**2 <= sinh**2)`` for ``w_A = family(A)``."""
    grid = cfg.grid()
    rows = []
    for a in amplitudes:
        w = family(float(a))
        g = from_profile(grid, w, cfg.mu)
        rep = check_ah_admissible(g, cfg.norm(0))
        rows.append(ScanRow(float(a), rep.min_sec_t, distance_to_hyperbolic(g, cfg.norm(0)),
                            curvature_hypothesis_nodewise(grid, w)))
    return rows
