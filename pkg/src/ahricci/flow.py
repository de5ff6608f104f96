"""Ricci flow and Ricci-DeTurck flow of rotationally symmetric metrics.

Evolution equations (``h`` stands for a time derivative of the metric):

* Ricci flow: ``h = -2 Ric(g)``, normalized: ``h = -2 (Ric(g) + (n-1) g)``.
* Ricci-DeTurck flow with reference ``ref``: add ``L_W g`` with
  ``W^k = g^pq (Gamma(g)^k_pq - Gamma(ref)^k_pq)``.  By symmetry only the
  radial component ``W^r`` survives.

The ungauged flow is recovered from a gauged one by pulling back along the
radial maps ``d/dt Phi_t = -W o Phi_t``, ``Phi_0 = id``.

Boundary treatment: ``psi(0) = 0`` and ``phi`` even at the origin; the outer
node is pinned to the hyperbolic solution of the selected flow (``g_h`` for
the normalized flows, ``(1 + 2(n-1)t) g_h`` otherwise), and ``W`` vanishes
at both ends so that gauge maps fix ``0`` and ``r_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels
from .geometry import (BoundaryWeight, DegenerateMetricError, MetricPerturbation, RadialGrid,
                       RotSymMetric, WeightedNormParams, einstein_residual, hyperbolic_metric,
                       metric_difference, sectional_tangential, weighted_norm)

INTEGRATORS = ("explicit-rk4", "semi-implicit")

STATUS_NAMES = {
    _kernels.STATUS_OK: "completed",
    _kernels.STATUS_DEGENERATED: "degenerated",
    _kernels.STATUS_BLOWUP: "blow-up",
    _kernels.STATUS_GAUGE_FAILURE: "gauge-failure",
}


class FlowError(RuntimeError):
    pass


class CFLViolation(FlowError):
    """Explicit step requested above the parabolic stability bound."""


class GaugeFailure(FlowError):
    """A gauge map stopped being strictly increasing."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class FlowConfig:
    """Settings for one flow run.

    ``reference`` selects the Ricci-DeTurck flow; ``None`` runs the ungauged
    flow.  ``record_every`` is a time interval: steps are shortened slightly
    so snapshots land exactly on its multiples (and on ``t_end``).
    """

    normalized: bool = True
    dt: Optional[float] = None
    t_end: float = 1.0
    integrator: str = "explicit-rk4"
    cfl_safety: float = 0.9
    reference: Optional[RotSymMetric] = None
    record_every: Optional[float] = 0.05
    track_gauge: bool = False
    norm: WeightedNormParams = WeightedNormParams(mu=1.0, k=2)
    t1_max: float = math.inf
    dissipation: float = 0.5

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.record_every is not None and not self.record_every > 0:
            raise ValueError("record_every must be positive")
        if self.track_gauge and self.reference is None:
            raise ValueError("gauge tracking needs a reference metric")

    @property
    def gauged(self) -> bool:
        return self.reference is not None

    @property
    def phi_dissipation(self) -> float:
        """Coefficient of the ``-h**2 D^4 phi`` damping (ungauged runs only)."""
        return 0.0 if self.gauged else self.dissipation


@dataclass(frozen=True, eq=False)
class GaugeMap:
    """Strictly increasing radial map ``Phi`` with ``Phi(0) = 0``, sampled on the grid."""

    grid: RadialGrid
    Phi: np.ndarray

    def __post_init__(self):
        a = np.array(self.Phi, dtype=float)
        a.flags.writeable = False
        object.__setattr__(self, "Phi", a)

    @classmethod
    def identity(cls, grid: RadialGrid) -> "GaugeMap":
        return cls(grid, grid.nodes.copy())

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.Phi) > 0))

    def derivative(self) -> np.ndarray:
        """``Phi'`` on all nodes.

        Fourth-order differences with the odd extension ``Phi(-r) = -Phi(r)``
        behind the origin; second order at the last interior node and
        one-sided at ``r_max``.
        """
        P, h = np.asarray(self.Phi, dtype=float), self.grid.h
        d = np.empty_like(P)
        d[1:-1], _ = _kernels.derivatives4(P, h, -1.0)
        d[0] = (8 * P[1] - P[2]) / (6 * h)
        d[-1] = (3 * P[-1] - 4 * P[-2] + P[-3]) / (2 * h)
        return d

    def regularized(self) -> "GaugeMap":
        """The map with its first interior node made consistent with smoothness at 0.

        A smooth radial diffeomorphism has the form ``Phi = r exp(chi)`` with
        ``chi`` even.  ``chi`` at ``r = h`` is replaced by its even (in ``r``)
        quadratic-in-``r**2`` extrapolation from the next three nodes, which
        removes grid-scale defects at the origin that a later pullback would
        turn into curvature.
        """
        P = np.array(self.Phi, dtype=float)
        if P.size < 5 or np.any(P[1:5] <= 0):
            return self
        r = self.grid.nodes
        chi = np.log(P[2:5] / r[2:5])
        # Lagrange weights in x = r**2 for nodes 2,3,4 evaluated at node 1
        P[1] = r[1] * np.exp(2.0 * chi[0] - 9.0 / 7.0 * chi[1] + 2.0 / 7.0 * chi[2])
        return GaugeMap(self.grid, P)

    def __call__(self, x) -> np.ndarray:
        return monotone_interp(self.Phi, self.grid.h, x)

    def compose(self, inner: "GaugeMap") -> "GaugeMap":
        """``self o inner``."""
        return GaugeMap(self.grid, self(inner.Phi))

    def inverse(self) -> "GaugeMap":
        if not self.monotone:
            raise GaugeFailure("cannot invert a non-monotone gauge map")
        from scipy.interpolate import PchipInterpolator
        r = self.grid.nodes
        inv = PchipInterpolator(self.Phi, r, extrapolate=True)(r)
        inv[0] = 0.0
        return GaugeMap(self.grid, inv)


def monotone_interp(y: np.ndarray, h: float, x) -> np.ndarray:
    """Monotone cubic (pchip) interpolant of node values ``y`` evaluated at ``x``."""
    y = np.ascontiguousarray(y, dtype=float)
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=float)
    return _kernels.pchip_eval(y, _kernels.pchip_slopes(y, h), h, x)


@dataclass
class FlowState:
    t: float
    metric: RotSymMetric
    W_r: Optional[np.ndarray] = None
    gauge: Optional[GaugeMap] = None


@dataclass
class FlowTrajectory:
    """Recorded snapshots, diagnostics and termination status of a run."""

    grid: RadialGrid
    times: List[float] = field(default_factory=list)
    metrics: List[RotSymMetric] = field(default_factory=list)
    norm_c0_mu: List[float] = field(default_factory=list)
    norm_c2_mu: List[float] = field(default_factory=list)
    min_sec_t: List[float] = field(default_factory=list)
    einstein_residual: List[float] = field(default_factory=list)
    w_inf: List[float] = field(default_factory=list)
    W_history: List[np.ndarray] = field(default_factory=list)
    gauge_maps: List[GaugeMap] = field(default_factory=list)
    status: str = "completed"
    bad_node: Optional[int] = None
    message: str = ""
    steps: int = 0
    dt: float = float("nan")
    boundary_defect: float = 0.0

    @property
    def final(self) -> RotSymMetric:
        return self.metrics[-1]

    def series(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def record(self, t: float, g: RotSymMetric, W: Optional[np.ndarray], norm: WeightedNormParams,
               gauge: Optional[GaugeMap] = None):
        self.times.append(float(t))
        self.metrics.append(g)
        d = diagnostics(g, W, norm)
        self.norm_c0_mu.append(d["norm_c0_mu"])
        self.norm_c2_mu.append(d["norm_c2_mu"])
        self.min_sec_t.append(d["min_secT"])
        self.einstein_residual.append(d["einstein_residual"])
        self.w_inf.append(d["w_inf"])
        if W is not None:
            self.W_history.append(np.array(W))
        if gauge is not None:
            self.gauge_maps.append(gauge)

    def rows(self):
        """Trajectory CSV records, one per snapshot."""
        last = len(self.times) - 1
        for i, t in enumerate(self.times):
            yield {
                "t": t,
                "norm_c0_mu": self.norm_c0_mu[i],
                "norm_c2_mu": self.norm_c2_mu[i],
                "min_secT": self.min_sec_t[i],
                "einstein_residual": self.einstein_residual[i],
                "w_inf": self.w_inf[i],
                "status": self.status if i == last else "running",
            }


def diagnostics(g: RotSymMetric, W: Optional[np.ndarray], norm: WeightedNormParams) -> dict:
    gh = hyperbolic_metric(g.grid)
    diff = metric_difference(g, gh)
    wgt = BoundaryWeight.sech(g.grid)
    return {
        "norm_c0_mu": weighted_norm(gh, diff, replace(norm, k=0), wgt),
        "norm_c2_mu": weighted_norm(gh, diff, replace(norm, k=2), wgt),
        "min_secT": float(np.min(sectional_tangential(g))),
        "einstein_residual": float(np.max(einstein_residual(g))),
        "w_inf": float(np.max(np.abs(W))) if W is not None else 0.0,
    }


# -- right-hand sides --------------------------------------------------------

def _reference_terms(ref: Optional[RotSymMetric], grid: RadialGrid):
    if ref is None:
        return (np.zeros(grid.n_nodes - 1), np.zeros(grid.n_nodes - 2),
                np.zeros(grid.n_nodes - 2))
    if ref.grid != grid:
        raise ValueError("reference metric lives on a different grid")
    node = ref.degenerate_node()
    if node is not None:
        raise DegenerateMetricError(f"reference metric degenerate at node {node}", node)
    phi = ref.phi.copy()
    psi = ref.psi.copy()
    _kernels.origin_bc(phi, psi, grid.sinh)
    return _kernels.christoffel_trace_terms(phi, psi, grid.sinh, grid.cosh, grid.h)


def _as_perturbation(grid, h_rr, h_sph) -> MetricPerturbation:
    a = np.zeros(grid.n_nodes)
    b = np.zeros(grid.n_nodes)
    a[1:-1] = h_rr
    b[1:-1] = h_sph
    return MetricPerturbation(grid, a, b)


def rf_rhs(g: RotSymMetric, normalized: bool = True) -> MetricPerturbation:
    """``-2 Ric(g)`` (``-2(Ric + (n-1)g)`` when normalized); zero on the pinned end nodes."""
    gr = g.grid
    refs = _reference_terms(None, gr)
    h_rr, h_sph, _ = _kernels.flow_rhs(g.phi, g.psi, *refs, gr.sinh, gr.cosh, gr.h,
                                       gr.n_dim, normalized, False)
    return _as_perturbation(gr, h_rr, h_sph)


def deturck_vector(g: RotSymMetric, ref: RotSymMetric) -> np.ndarray:
    """Radial DeTurck component ``W^r`` on all nodes (zero at both ends).

    ``W^r = (phi_r/phi - ref_phi_r/ref_phi)/phi**2
            - (n-1)/psi**2 (psi psi_r/phi**2 - ref_psi ref_psi_r/ref_phi**2)``
    """
    gr = g.grid
    refs = _reference_terms(ref, gr)
    _, _, W = _kernels.flow_rhs(g.phi, g.psi, *refs, gr.sinh, gr.cosh, gr.h,
                                gr.n_dim, False, True)
    return W


def rdtf_rhs(g: RotSymMetric, ref: RotSymMetric, normalized: bool = True) -> MetricPerturbation:
    """Ricci-DeTurck right-hand side ``rf_rhs(g) + L_W g``.

    With ``W = W^r d/dr``: ``(L_W g)_rr = W (phi**2)' + 2 phi**2 W'`` and the
    angular coefficient is ``W (psi**2)'``.
    """
    gr = g.grid
    refs = _reference_terms(ref, gr)
    h_rr, h_sph, _ = _kernels.flow_rhs(g.phi, g.psi, *refs, gr.sinh, gr.cosh, gr.h,
                                       gr.n_dim, normalized, True)
    return _as_perturbation(gr, h_rr, h_sph)


# -- time stepping -----------------------------------------------------------

# real-axis extent of the stability regions of classical RK4 and forward Euler
_RK4_REAL_EXTENT = 2.78
_EULER_REAL_EXTENT = 2.0
_DIFFUSION_RATE = 5.5
_SEMI_IMPLICIT_FACTOR = 1.0


def stable_dt(g: RotSymMetric, cfl_safety: float, dissipation: float = 0.0,
              integrator: str = "explicit-rk4") -> float:
    """Largest admissible step.

    The fourth-order diffusion stencils have grid-scale rate about
    ``5.5/(h*phi)**2``; ungauged runs add the ``-dissipation * h**2 D^4 phi``
    damping with rate ``16 * dissipation / h**2``.  The sum must stay inside
    the real stability interval of the integrator.  The semi-implicit scheme
    treats a three-point diffusion implicitly; the explicit remainder (the
    gap to the fourth-order stencils and the origin terms) limits its step
    to about ``1.2 (h*phi)**2``, taken here as ``_SEMI_IMPLICIT_FACTOR``
    times ``(h*phi)**2``, and the damping adds its forward-Euler bound.
    """
    h2 = g.grid.h ** 2
    phi2 = float(np.min(g.phi ** 2))
    rate = 16.0 * dissipation
    if integrator == "explicit-rk4":
        return cfl_safety * _RK4_REAL_EXTENT * h2 / (rate + _DIFFUSION_RATE / phi2)
    dt = _SEMI_IMPLICIT_FACTOR * cfl_safety * h2 * phi2
    if rate > 0.0:
        dt = min(dt, cfl_safety * _EULER_REAL_EXTENT * h2 / rate)
    return dt


def _checked_dt(g: RotSymMetric, cfg: FlowConfig) -> float:
    dt_max = stable_dt(g, cfg.cfl_safety, cfg.phi_dissipation, cfg.integrator)
    if cfg.dt is None:
        return dt_max
    if cfg.dt > dt_max * (1 + 1e-12):
        raise CFLViolation(f"dt={cfg.dt:.3g} exceeds the {cfg.integrator} stability bound {dt_max:.3g}")
    return cfg.dt


def _advance(phi, psi, Phi, ref_terms, grid, cfg: FlowConfig, t, dt, nsteps):
    kern = _kernels.rk4_advance if cfg.integrator == "explicit-rk4" else _kernels.semi_implicit_advance
    Phi_in = Phi if Phi is not None else np.zeros(1)
    return kern(phi, psi, Phi_in, *ref_terms, grid.sinh, grid.cosh, grid.h,
                grid.n_dim, cfg.normalized, cfg.gauged, cfg.track_gauge, cfg.phi_dissipation,
                t, dt, nsteps)


def step(state: FlowState, cfg: FlowConfig) -> FlowState:
    """One accepted time step of size ``cfg.dt`` (or the stable step if unset)."""
    g = state.metric
    dt = _checked_dt(g, cfg)
    ref_terms = _reference_terms(cfg.reference, g.grid)
    Phi = state.gauge.Phi if (cfg.track_gauge and state.gauge is not None) else (
        g.grid.nodes.copy() if cfg.track_gauge else None)
    phi, psi, Phi, W, t, status, node, _ = _advance(g.phi, g.psi, Phi, ref_terms, g.grid, cfg,
                                                    state.t, dt, 1)
    if status == _kernels.STATUS_BLOWUP:
        raise FlowError(f"blow-up: non-finite value at node {node}")
    if status == _kernels.STATUS_DEGENERATED:
        raise DegenerateMetricError(f"metric degenerated at node {node}", node)
    if status == _kernels.STATUS_GAUGE_FAILURE:
        raise GaugeFailure(f"gauge map lost monotonicity at node {node}", node)
    gauge = GaugeMap(g.grid, Phi) if cfg.track_gauge else None
    return FlowState(t, RotSymMetric(g.grid, phi, psi), W if cfg.gauged else None, gauge)


def _targets(t0: float, t1: float, every: Optional[float]) -> List[float]:
    if every is None or every >= t1 - t0:
        return [t1]
    k = int(math.floor((t1 - t0) / every + 1e-9))
    out = [t0 + i * every for i in range(1, k + 1)]
    if t1 - out[-1] > 1e-9 * max(1.0, t1):
        out.append(t1)
    else:
        out[-1] = t1
    return out


def run_flow(g0: RotSymMetric, cfg: FlowConfig, t0: float = 0.0) -> FlowTrajectory:
    """Integrate from ``g0`` over ``[t0, t0 + t_end]``, recording diagnostics.

    Stops early with status ``degenerated``, ``blow-up`` or ``gauge-failure``
    (the offending node is kept in ``bad_node``).  The outer node of ``g0`` is
    overwritten by the pinned value; the size of that correction is kept in
    ``boundary_defect``.
    """
    grid = g0.grid
    traj = FlowTrajectory(grid)
    node = g0.degenerate_node()
    if node is not None:
        traj.status = "degenerated"
        traj.bad_node = node
        traj.message = f"initial metric degenerate at node {node}"
        return traj

    phi = g0.phi.copy()
    psi = g0.psi.copy()
    before = (phi[-1], psi[-1])
    _kernels.apply_bc(phi, psi, grid.sinh, t0, grid.n_dim, cfg.normalized)
    traj.boundary_defect = float(max(abs(phi[-1] - before[0]), abs(psi[-1] - before[1]) / psi[-1]))
    g = RotSymMetric(grid, phi, psi)

    dt = _checked_dt(g, cfg)
    traj.dt = dt

    ref_terms = _reference_terms(cfg.reference, grid)
    Phi = grid.nodes.copy() if cfg.track_gauge else None
    W0 = deturck_vector(g, cfg.reference) if cfg.gauged else None
    traj.record(t0, g, W0, cfg.norm, GaugeMap(grid, Phi) if cfg.track_gauge else None)

    t = t0
    for target in _targets(t0, t0 + cfg.t_end, cfg.record_every):
        nsteps = max(1, int(math.ceil((target - t) / dt - 1e-9)))
        dt_seg = (target - t) / nsteps
        phi, psi, Phi_new, W, t_new, status, node, done = _advance(
            phi, psi, Phi, ref_terms, grid, cfg, t, dt_seg, nsteps)
        traj.steps += int(done)
        if status != _kernels.STATUS_OK:
            traj.status = STATUS_NAMES[status]
            traj.bad_node = int(node)
            traj.message = f"{traj.status} at node {node} near t={t_new:.4g}"
            return traj
        t = target
        if cfg.track_gauge:
            Phi = Phi_new
        g = RotSymMetric(grid, phi, psi)
        traj.record(t, g, W if cfg.gauged else None, cfg.norm,
                    GaugeMap(grid, Phi) if cfg.track_gauge else None)
    return traj


# -- gauge recovery ----------------------------------------------------------

def integrate_gauge(times: Sequence[float], W_history: Sequence[np.ndarray],
                    grid: RadialGrid) -> List[GaugeMap]:
    """Integrate ``d/dt Phi = -W(Phi, t)``, ``Phi(t_0) = id``, through a recorded field history.

    RK4 in time with ``W`` linear in time between records and monotone cubic
    in ``r``.  Returns one map per recorded time; raises :class:`GaugeFailure`
    if a map stops being strictly increasing.
    """
    if len(times) != len(W_history):
        raise ValueError("times and W_history differ in length")
    h = grid.h
    N = grid.n_nodes
    Phi = grid.nodes.copy()
    maps = [GaugeMap(grid, Phi)]

    def vel(W, x):
        return -monotone_interp(W, h, x)

    for k in range(len(times) - 1):
        dt = times[k + 1] - times[k]
        Wa = np.asarray(W_history[k], dtype=float)
        Wb = np.asarray(W_history[k + 1], dtype=float)
        Wm = 0.5 * (Wa + Wb)
        k1 = vel(Wa, Phi)
        k2 = vel(Wm, Phi + 0.5 * dt * k1)
        k3 = vel(Wm, Phi + 0.5 * dt * k2)
        k4 = vel(Wb, Phi + dt * k3)
        Phi = Phi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        Phi[0] = 0.0
        Phi[N - 1] = grid.r_max
        gm = GaugeMap(grid, Phi)
        if not gm.monotone:
            bad = int(np.flatnonzero(np.diff(Phi) <= 0)[0]) + 1
            raise GaugeFailure(f"gauge map lost monotonicity at node {bad}, t={times[k + 1]:.4g}", bad)
        maps.append(gm)
    return maps


def pullback(g: RotSymMetric, Phi: GaugeMap) -> RotSymMetric:
    """``Phi^* g``: ``phi_hat(r) = phi(Phi(r)) Phi'(r)``, ``psi_hat(r) = psi(Phi(r))``.

    The warps are resampled through their regular parts (``psi = s sinh e^u``,
    ``phi = s e^(u+v)`` with ``u, v`` even), interpolated by cubic splines on
    the grid mirrored through the origin, so the pulled-back metric stays
    smooth at ``r = 0``.  The map itself passes through
    :meth:`GaugeMap.regularized` first.
    """
    if not Phi.monotone:
        raise GaugeFailure("pullback along a non-monotone map")
    if Phi.grid != g.grid:
        raise ValueError("gauge map and metric live on different grids")
    from scipy.interpolate import CubicSpline
    gr = g.grid
    Phi = Phi.regularized()
    phi = g.phi.copy()
    psi = g.psi.copy()
    _kernels.origin_bc(phi, psi, gr.sinh)
    s, u, v = _kernels.regular_parts(phi, psi, gr.sinh)
    r = gr.nodes
    rr = np.concatenate([-r[:0:-1], r])
    spl = CubicSpline(rr, np.column_stack([np.concatenate([u[:0:-1], u]),
                                           np.concatenate([v[:0:-1], v])]))
    x = Phi.Phi
    uv = spl(x)
    psi_hat = s * np.sinh(x) * np.exp(uv[:, 0])
    phi_hat = s * np.exp(uv[:, 0] + uv[:, 1]) * Phi.derivative()
    _kernels.origin_bc(phi_hat, psi_hat, gr.sinh)
    return RotSymMetric(gr, phi_hat, psi_hat)


def ungauged_trajectory(gauged: FlowTrajectory, norm: WeightedNormParams) -> FlowTrajectory:
    """Pull every snapshot of a gauge-tracked run back to the Ricci flow solution."""
    if len(gauged.gauge_maps) != len(gauged.metrics):
        raise ValueError("trajectory was not run with gauge tracking")
    out = FlowTrajectory(gauged.grid, status=gauged.status, bad_node=gauged.bad_node,
                         message=gauged.message, steps=gauged.steps, dt=gauged.dt,
                         boundary_defect=gauged.boundary_defect)
    for t, g, gm in zip(gauged.times, gauged.metrics, gauged.gauge_maps):
        out.record(t, pullback(g, gm), None, norm, gm)
    return out


def chained_rdtf(g0: RotSymMetric, partition: Sequence[float], cfg: FlowConfig) -> FlowTrajectory:
    """Ungauged flow on ``[t_0, t_N]`` assembled from Ricci-DeTurck segments.

    On ``[t_{i-1}, t_i]`` the Ricci-DeTurck flow is restarted from the
    ungauged metric ``g(t_{i-1})`` with that same metric as reference, and
    its gauge map ``Psi_i`` is integrated alongside.

    Each segment is integrated in the coordinates of the previous one: there
    ``g(t_{i-1})`` is represented by the gauged endpoint ``G_{i-1}`` of the
    previous segment, since ``g(t_{i-1}) = C_{i-1}^* G_{i-1}`` for the
    composite map ``C_{i-1} = Psi_{i-1} o ... o Psi_1``.  Both the flow and the
    DeTurck field are natural under diffeomorphisms, so the segment solution
    started from ``G_{i-1}`` with reference ``G_{i-1}`` is the push-forward of
    the one started from ``g(t_{i-1})``, and the ungauged metric on the
    segment is ``(Psi_i o C_{i-1})^* G_i(t)``.  Working this way never feeds a
    resampled metric back into the flow, where differentiating a sampled map
    would amplify grid-scale errors from segment to segment.

    The recorded ``gauge_maps`` are the composites ``Psi_i(t) o C_{i-1}``.
    """
    times = [float(t) for t in partition]
    if len(times) < 2 or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("partition must be strictly increasing with at least two points")
    for a, b in zip(times, times[1:]):
        if b - a >= cfg.t1_max:
            raise ValueError(f"segment [{a}, {b}] is not shorter than t1_max={cfg.t1_max}")
    grid = g0.grid
    out = FlowTrajectory(grid)
    G = g0
    composite = GaugeMap.identity(grid)
    for i, (a, b) in enumerate(zip(times, times[1:])):
        seg_cfg = replace(cfg, reference=G, track_gauge=True, t_end=b - a)
        seg = run_flow(G, seg_cfg, t0=a)
        out.steps += seg.steps
        out.dt = seg.dt
        if i == 0:
            out.boundary_defect = seg.boundary_defect
        start = 0 if i == 0 else 1
        for t, m, gm in list(zip(seg.times, seg.metrics, seg.gauge_maps))[start:]:
            total = gm.compose(composite)
            if not total.monotone:
                out.status = "gauge-failure"
                out.message = f"segment {i + 1}: composite gauge map lost monotonicity"
                return out
            out.record(t, pullback(m, total), None, cfg.norm, total)
        if seg.status != "completed":
            out.status = seg.status
            out.bad_node = seg.bad_node
            out.message = f"segment {i + 1}: {seg.message}"
            return out
        composite = seg.gauge_maps[-1].compose(composite)
        G = seg.final
    return out
