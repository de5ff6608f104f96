"""Rotationally symmetric metrics on the n-ball and their curvature.

A metric is stored through its warp functions sampled on a uniform radial
grid,

    g = phi(r)**2 dr**2 + psi(r)**2 g_{S^{n-1}},

and perturbations (symmetric 2-tensors with the same symmetry) through the
``rr`` component and the scalar coefficient of the round metric.  Pointwise
quantities are returned on the interior nodes ``1 .. N-2``; the origin is
excluded because ``psi`` vanishes there.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels


class DegenerateMetricError(ValueError):
    """A warp function vanished (or went non-finite) away from the origin."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid ``0 = r_0 < ... < r_{N-1} = r_max`` on the ball of dimension ``n_dim``."""

    n_dim: int
    r_max: float
    n_nodes: int

    def __post_init__(self):
        if int(self.n_dim) != self.n_dim or self.n_dim < 3:
            raise ValueError(f"n_dim must be an integer >= 3, got {self.n_dim}")
        if self.n_nodes < 16:
            raise ValueError(f"n_nodes must be >= 16, got {self.n_nodes}")
        if not self.r_max >= 5:
            raise ValueError(f"r_max must be >= 5, got {self.r_max}")

    @classmethod
    def from_spacing(cls, n_dim: int, r_max: float, h: float) -> "RadialGrid":
        """Grid with spacing as close to ``h`` as divides ``r_max`` evenly."""
        return cls(n_dim, float(r_max), int(round(r_max / h)) + 1)

    @property
    def h(self) -> float:
        return self.r_max / (self.n_nodes - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        r = np.arange(self.n_nodes) * self.h
        r[-1] = self.r_max
        r.flags.writeable = False
        return r

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @cached_property
    def sinh(self) -> np.ndarray:
        s = np.sinh(self.nodes)
        s.flags.writeable = False
        return s

    @cached_property
    def cosh(self) -> np.ndarray:
        c = np.cosh(self.nodes)
        c.flags.writeable = False
        return c

    def metadata(self) -> dict:
        return {"n": self.n_dim, "r_max": self.r_max, "nodes": self.n_nodes}


@dataclass(frozen=True)
class ProfileInfo:
    """What :func:`from_profile` learned about the profile ``w``."""

    w: np.ndarray
    even_parity: bool
    decay_ok: bool
    decay_constant: float
    mu: float


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class RotSymMetric:
    """``phi**2 dr**2 + psi**2 g_{S^{n-1}}`` sampled on ``grid``.

    Construction validates positivity (``phi > 0``, ``psi > 0`` off the
    origin, ``psi(0) = 0``) unless ``check=False``; origin smoothness is
    exposed as :attr:`origin_defect` rather than enforced.
    """

    grid: RadialGrid
    phi: np.ndarray
    psi: np.ndarray
    profile: Optional[ProfileInfo] = None
    check: InitVar[bool] = True

    def __post_init__(self, check):
        object.__setattr__(self, "phi", _frozen(self.phi))
        object.__setattr__(self, "psi", _frozen(self.psi))
        N = self.grid.n_nodes
        if self.phi.shape != (N,) or self.psi.shape != (N,):
            raise ValueError("phi and psi must be sampled on every grid node")
        if check:
            node = self.degenerate_node()
            if node is not None:
                raise DegenerateMetricError(
                    f"metric degenerated at node {node} (r={self.grid.nodes[node]:.4g})",
                    node)

    def degenerate_node(self) -> Optional[int]:
        """First node violating the invariants, or ``None``."""
        bad = ~(np.isfinite(self.phi) & np.isfinite(self.psi))
        bad |= self.phi <= 0
        bad[1:] |= self.psi[1:] <= 0
        if abs(self.psi[0]) > 1e-14:
            bad[0] = True
        idx = np.flatnonzero(bad)
        return int(idx[0]) if idx.size else None

    @property
    def n_dim(self) -> int:
        return self.grid.n_dim

    @property
    def origin_defect(self) -> float:
        """``|psi'(0) - phi(0)|`` with a one-sided second-order stencil."""
        h = self.grid.h
        dpsi0 = (-3 * self.psi[0] + 4 * self.psi[1] - self.psi[2]) / (2 * h)
        return abs(dpsi0 - self.phi[0])

    @property
    def origin_smooth(self) -> bool:
        return self.origin_defect <= 10 * self.grid.h ** 2

    def derivatives(self):
        """``(phi_r, psi_r, psi_rr)`` on interior nodes."""
        g = self.grid
        return _kernels.radial_derivatives(self.phi, self.psi, g.sinh, g.cosh, g.h)

    def components(self):
        """Coordinate components ``(g_rr, g_sph)``."""
        return self.phi ** 2, self.psi ** 2


@dataclass(frozen=True, eq=False)
class MetricPerturbation:
    """Diagonal symmetric 2-tensor ``h_rr dr**2 + h_sph g_{S^{n-1}}``."""

    grid: RadialGrid
    h_rr: np.ndarray
    h_sph: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h_rr", _frozen(self.h_rr))
        object.__setattr__(self, "h_sph", _frozen(self.h_sph))
        N = self.grid.n_nodes
        if self.h_rr.shape != (N,) or self.h_sph.shape != (N,):
            raise ValueError("perturbation must be sampled on every grid node")

    @classmethod
    def zero(cls, grid: RadialGrid) -> "MetricPerturbation":
        return cls(grid, np.zeros(grid.n_nodes), np.zeros(grid.n_nodes))

    def _same_grid(self, other):
        if other.grid != self.grid:
            raise ValueError("perturbations live on different grids")

    def __add__(self, other):
        self._same_grid(other)
        return MetricPerturbation(self.grid, self.h_rr + other.h_rr, self.h_sph + other.h_sph)

    def __sub__(self, other):
        self._same_grid(other)
        return MetricPerturbation(self.grid, self.h_rr - other.h_rr, self.h_sph - other.h_sph)

    def __mul__(self, c):
        return MetricPerturbation(self.grid, c * self.h_rr, c * self.h_sph)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


@dataclass(frozen=True)
class WeightedNormParams:
    """Weight exponent ``mu`` and highest derivative order ``k`` of the discrete weighted C^k norm.

    ``mu = 0`` is accepted as the unweighted limit; :meth:`require_admissible`
    enforces the range ``0 < mu < n - 1`` where the weighted theory needs it.
    """

    mu: float = 1.0
    k: int = 2

    def __post_init__(self):
        if self.k not in (0, 1, 2):
            raise ValueError(f"k must be 0, 1 or 2, got {self.k}")
        if not self.mu >= 0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")

    def require_admissible(self, n_dim: int) -> "WeightedNormParams":
        if not 0 < self.mu < n_dim - 1:
            raise ValueError(f"mu={self.mu} outside the admissible range (0, n-1) = (0, {n_dim - 1})")
        return self


@dataclass(frozen=True, eq=False)
class BoundaryWeight:
    """Sampled boundary defining function ``rho`` (``sech r`` by default)."""

    rho: np.ndarray

    @classmethod
    def sech(cls, grid: RadialGrid) -> "BoundaryWeight":
        return cls(_frozen(1.0 / grid.cosh))

    def inverse_weight(self, mu: float) -> np.ndarray:
        """``rho**(-mu)`` on all nodes."""
        return self.rho ** (-mu)


# -- constructors ------------------------------------------------------------

def hyperbolic_metric(grid: RadialGrid) -> RotSymMetric:
    """``dr**2 + sinh(r)**2 g_S`` in geodesic polar coordinates."""
    return RotSymMetric(grid, np.ones(grid.n_nodes), grid.sinh.copy())


def flat_metric(grid: RadialGrid) -> RotSymMetric:
    return RotSymMetric(grid, np.ones(grid.n_nodes), grid.nodes.copy())


ProfileLike = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def from_profile(grid: RadialGrid, w: ProfileLike, mu: float = 1.0) -> RotSymMetric:
    """Metric with ``psi = sinh r`` and ``phi = sqrt(1 + w**2)``.

    ``w`` is a callable evaluated on the nodes or an array of samples.  The
    returned metric carries a :class:`ProfileInfo` recording even parity at
    the origin (``|w'(0)| <= 10 h``) and whether ``|w| e^{mu r}`` stays
    bounded over the outer quarter of the grid.
    """
    r = grid.nodes
    wv = np.asarray(w(r) if callable(w) else w, dtype=float)
    if wv.shape != r.shape:
        raise ValueError("profile must be sampled on every grid node")
    h = grid.h
    if abs(wv[0]) > 1e-12:
        raise ValueError(f"profile must vanish at the origin, got w(0)={wv[0]:.3g}")
    dw0 = (-3 * wv[0] + 4 * wv[1] - wv[2]) / (2 * h)
    even = abs(dw0) <= 10 * h
    N = grid.n_nodes
    scaled = np.abs(wv) * np.exp(mu * r)
    outer = scaled[3 * N // 4:]
    third = scaled[N // 2: 3 * N // 4]
    decay_const = float(outer.max())
    decay_ok = bool(np.isfinite(decay_const)) and (
        decay_const <= 1e-12 or decay_const <= third.max() * (1 + 1e-9))
    info = ProfileInfo(_frozen(wv), bool(even), decay_ok, decay_const, mu)
    return RotSymMetric(grid, np.sqrt(1.0 + wv ** 2), grid.sinh.copy(), profile=info)


def metric_difference(g1: RotSymMetric, g0: RotSymMetric) -> MetricPerturbation:
    """``g1 - g0`` as a perturbation tensor."""
    if g1.grid != g0.grid:
        raise ValueError("metrics live on different grids")
    return MetricPerturbation(g1.grid, g1.phi ** 2 - g0.phi ** 2, g1.psi ** 2 - g0.psi ** 2)


def perturb(g: RotSymMetric, p: MetricPerturbation, check: bool = True) -> RotSymMetric:
    """``g + p``; raises :class:`DegenerateMetricError` if it stops being a metric."""
    grr = g.phi ** 2 + p.h_rr
    gss = g.psi ** 2 + p.h_sph
    bad = np.flatnonzero((grr <= 0) | np.r_[False, gss[1:] <= 0])
    if bad.size:
        raise DegenerateMetricError(f"perturbed metric not positive at node {bad[0]}", int(bad[0]))
    return RotSymMetric(g.grid, np.sqrt(grr), np.sqrt(np.maximum(gss, 0.0)), check=check)


# -- curvature ---------------------------------------------------------------

def sectional_tangential(g: RotSymMetric) -> np.ndarray:
    """Curvature of 2-planes tangent to the orbit spheres, ``(1 - psi_r**2/phi**2)/psi**2``."""
    _, dpsi, _ = g.derivatives()
    p = g.phi[1:-1]
    s = g.psi[1:-1]
    return (1.0 - dpsi ** 2 / p ** 2) / s ** 2


def sectional_radial(g: RotSymMetric) -> np.ndarray:
    """Curvature of 2-planes containing ``d/dr``.

    With arclength ``s`` (``ds = phi dr``) this is ``-psi_ss/psi``.
    """
    dphi, dpsi, ddpsi = g.derivatives()
    p = g.phi[1:-1]
    s = g.psi[1:-1]
    return -(ddpsi * p - dpsi * dphi) / (p ** 3 * s)


def ricci(g: RotSymMetric):
    """Coordinate Ricci components ``(Ric_rr, Ric_sph)`` on interior nodes.

    Evaluated from the closed coordinate expressions, not from the sectional
    curvatures, so the frame identities are a genuine check.
    """
    gr = g.grid
    return _kernels.ricci_core(g.phi, g.psi, gr.sinh, gr.cosh, gr.h, gr.n_dim)


def einstein_residual(g: RotSymMetric) -> np.ndarray:
    """Pointwise ``|Ric + (n-1) g|_g`` on interior nodes."""
    n = g.n_dim
    ric_rr, ric_sph = ricci(g)
    a = ric_rr / g.phi[1:-1] ** 2 + (n - 1)
    b = ric_sph / g.psi[1:-1] ** 2 + (n - 1)
    return np.sqrt(a ** 2 + (n - 1) * b ** 2)


# -- norms -------------------------------------------------------------------

def frame_components(base: RotSymMetric, h: MetricPerturbation):
    """Orthonormal-frame components ``(h_rr/phi**2, h_sph/psi**2)`` on interior nodes."""
    if base.grid != h.grid:
        raise ValueError("base metric and perturbation live on different grids")
    return h.h_rr[1:-1] / base.phi[1:-1] ** 2, h.h_sph[1:-1] / base.psi[1:-1] ** 2


def tensor_norm_pointwise(base: RotSymMetric, h: MetricPerturbation) -> np.ndarray:
    """``|h|_base`` on interior nodes for a diagonal radial 2-tensor."""
    a, b = frame_components(base, h)
    return np.sqrt(a ** 2 + (base.n_dim - 1) * b ** 2)


def weighted_norm(base: RotSymMetric, h: MetricPerturbation,
                  p: WeightedNormParams = WeightedNormParams(),
                  w: Optional[BoundaryWeight] = None) -> float:
    """Discrete surrogate of the ``rho**mu C^k`` norm of ``h``.

    Maximum over interior nodes and ``j <= k`` of ``rho**(-mu) |D^j h|_base``,
    where ``D^j`` is the ``j``-th centered difference of the frame
    components.  Derivatives are taken where the stencil stays inside the
    interior, i.e. on nodes ``2 .. N-3``.
    """
    if w is None:
        w = BoundaryWeight.sech(base.grid)
    n = base.n_dim
    hh = base.grid.h
    a, b = frame_components(base, h)
    weight = w.inverse_weight(p.mu)[1:-1]
    best = float(np.max(weight * np.sqrt(a ** 2 + (n - 1) * b ** 2)))
    if p.k >= 1:
        da = (a[2:] - a[:-2]) / (2 * hh)
        db = (b[2:] - b[:-2]) / (2 * hh)
        best = max(best, float(np.max(weight[1:-1] * np.sqrt(da ** 2 + (n - 1) * db ** 2))))
    if p.k >= 2:
        dda = (a[2:] - 2 * a[1:-1] + a[:-2]) / hh ** 2
        ddb = (b[2:] - 2 * b[1:-1] + b[:-2]) / hh ** 2
        best = max(best, float(np.max(weight[1:-1] * np.sqrt(dda ** 2 + (n - 1) * ddb ** 2))))
    return best


def distance_to_hyperbolic(g: RotSymMetric, p: WeightedNormParams = WeightedNormParams(),
                           w: Optional[BoundaryWeight] = None) -> float:
    """Weighted norm of ``g - g_h`` measured with ``g_h``."""
    gh = hyperbolic_metric(g.grid)
    return weighted_norm(gh, metric_difference(g, gh), p, w)


# -- admissibility -----------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityReport:
    positive: bool
    origin_smooth: bool
    origin_defect: float
    weighted_distance: float
    distance_finite: bool
    tail_decays: bool
    min_sec_t: float
    sec_t_negative: bool
    profile_even: Optional[bool] = None
    profile_decay_ok: Optional[bool] = None
    notes: list = field(default_factory=list)

    @property
    def admissible(self) -> bool:
        """AH-admissible data on this grid: positive, smooth at 0, finite decaying distance."""
        ok = self.positive and self.origin_smooth and self.distance_finite and self.tail_decays
        if self.profile_even is not None:
            ok = ok and self.profile_even and bool(self.profile_decay_ok)
        return ok

    @property
    def curvature_hypothesis(self) -> bool:
        """Tangential sectional curvatures strictly negative at every node with r > 0."""
        return self.sec_t_negative


def check_ah_admissible(g: RotSymMetric, p: WeightedNormParams = WeightedNormParams()) -> AdmissibilityReport:
    """Machine-checkable admissibility flags for ``g``.

    ``tail_decays`` asks that the weighted pointwise distance over the outer
    quarter of the grid stays below half its global maximum, i.e. the
    weighted norm is not set by the truncation radius.
    """
    notes = []
    positive = g.degenerate_node() is None
    gh = hyperbolic_metric(g.grid)
    diff = metric_difference(g, gh)
    dist = weighted_norm(gh, diff, p)
    finite = bool(np.isfinite(dist))
    pointwise = BoundaryWeight.sech(g.grid).inverse_weight(p.mu)[1:-1] * tensor_norm_pointwise(gh, diff)
    N = pointwise.size
    peak = float(pointwise.max()) if N else 0.0
    tail = float(pointwise[3 * N // 4:].max())
    tail_decays = peak <= 1e-12 or tail <= 0.5 * peak
    if not tail_decays:
        notes.append(f"weighted distance peaks near r_max (tail {tail:.3g} vs peak {peak:.3g})")
    sec_t = sectional_tangential(g) if positive else np.array([np.nan])
    min_sec = float(np.min(sec_t))
    info = g.profile
    return AdmissibilityReport(
        positive=positive,
        origin_smooth=g.origin_smooth,
        origin_defect=g.origin_defect,
        weighted_distance=dist,
        distance_finite=finite,
        tail_decays=tail_decays,
        min_sec_t=min_sec,
        sec_t_negative=bool(np.all(sec_t < 0)),
        profile_even=None if info is None else info.even_parity,
        profile_decay_ok=None if info is None else info.decay_ok,
        notes=notes,
    )
