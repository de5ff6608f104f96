"""Linearized Ricci-DeTurck operator at rotationally symmetric metrics.

The operator acts on diagonal radial 2-tensors ``h = h_rr dr**2 + h_sph g_S``
sampled at interior nodes, written in orthonormal-frame components
``(a, b) = (h_rr/phi**2, h_sph/psi**2)`` and stacked as ``[a_1..a_M, b_1..b_M]``.
Frame components are dimensionless, so a perturbation of size ``eps`` is a
relative perturbation of the metric, and they are the components in which
the weighted sup norms of the geometry module are measured.

The matrix is the central-difference Jacobian of the normalized
Ricci-DeTurck right-hand side, multiplied by the sign that makes its trace
nonnegative.  At ``g_h`` this is the elliptic operator whose spectrum is
expected in ``[n - 2, oo)``; the flow linearizes to ``d/dt h = -L h``.

Also provided: the scalar model operator ``-(u'' + (n-1) coth(r) u')`` on
radial functions, the closed-form indicial roots of that model, and an
empirical indicial-root finder that works for any assembled operator.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from . import _kernels
from .geometry import (BoundaryWeight, DegenerateMetricError, RadialGrid, RotSymMetric,
                       WeightedNormParams, hyperbolic_metric)

EPSILON = 1e-6
RCOND_SINGULAR = 1e-13


class SpectralError(RuntimeError):
    pass


class SingularResolventError(SpectralError):
    """``lambda I - L`` is numerically singular (``lambda`` is in the discrete spectrum)."""


class IndicialFitError(SpectralError):
    """The operator output on trial data ``rho**gamma`` is not exponential at large ``r``."""


@dataclass(frozen=True, eq=False)
class LinearOperatorMatrix:
    """Dense discretized operator on interior-node data.

    ``components`` is 2 for the frame-component tensor operator and 1 for
    scalar model operators.  ``sign`` is the factor applied to the raw
    right-hand-side Jacobian (``+1`` for operators assembled directly).
    """

    matrix: np.ndarray
    grid: RadialGrid
    components: int = 2
    sign: float = 1.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=float)
        m = self.components * (self.grid.n_nodes - 2)
        if A.shape != (m, m):
            raise ValueError(f"matrix shape {A.shape} does not match {self.components} x interior nodes ({m})")
        if not np.all(np.isfinite(A)):
            raise SpectralError("operator matrix has non-finite entries")
        object.__setattr__(self, "matrix", A)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_dim(self) -> int:
        return self.grid.n_dim

    @property
    def h(self) -> float:
        return self.grid.h

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def node_radii(self) -> np.ndarray:
        """Radius of every matrix row."""
        return np.tile(self.grid.nodes[1:-1], self.components)


# -- assembly ----------------------------------------------------------------

def _frame_rhs(phi: np.ndarray, psi: np.ndarray, base: RotSymMetric, ref_terms, normalized: bool):
    gr = base.grid
    phi = phi.copy()
    psi = psi.copy()
    _kernels.origin_bc(phi, psi, gr.sinh)
    h_rr, h_sph, _ = _kernels.flow_rhs(phi, psi, *ref_terms, gr.sinh, gr.cosh, gr.h,
                                       gr.n_dim, normalized, True)
    return np.concatenate([h_rr / base.phi[1:-1] ** 2, h_sph / base.psi[1:-1] ** 2])


def _perturbed(base: RotSymMetric, v: np.ndarray, eps: float):
    """Warps of ``base + eps*h`` for frame components ``v = [a, b]``."""
    M = base.grid.n_nodes - 2
    phi = base.phi.copy()
    psi = base.psi.copy()
    fa = 1.0 + eps * v[:M]
    fb = 1.0 + eps * v[M:]
    if np.any(fa <= 0) or np.any(fb <= 0):
        raise DegenerateMetricError("perturbation too large for a metric", None)
    phi[1:-1] *= np.sqrt(fa)
    psi[1:-1] *= np.sqrt(fb)
    return phi, psi


def directional_derivative(base: RotSymMetric, ref: RotSymMetric, v: np.ndarray,
                           eps: float = EPSILON, normalized: bool = True) -> np.ndarray:
    """Central difference of the frame right-hand side of ``base`` along ``v``."""
    from .flow import _reference_terms
    refs = _reference_terms(ref, base.grid)
    p1, s1 = _perturbed(base, v, eps)
    p0, s0 = _perturbed(base, v, -eps)
    return (_frame_rhs(p1, s1, base, refs, normalized) - _frame_rhs(p0, s0, base, refs, normalized)) / (2 * eps)


def assemble_linearized(base: RotSymMetric, ref: Optional[RotSymMetric] = None,
                        normalized: bool = True, eps: float = EPSILON) -> LinearOperatorMatrix:
    """Jacobian of the Ricci-DeTurck right-hand side at ``base`` in frame components.

    Column ``j`` is the central difference along the ``j``-th unit frame
    perturbation (``eps`` is relative to the metric).  The outer node stays
    pinned and the origin value of ``phi`` follows the regularity condition,
    so only interior rows and columns appear.  The sign is then fixed so
    that the trace is nonnegative; ``metadata['sign']`` records it.
    """
    if ref is None:
        ref = base
    node = base.degenerate_node()
    if node is not None:
        raise DegenerateMetricError(f"base metric degenerate at node {node}", node)
    from .flow import _reference_terms
    refs = _reference_terms(ref, base.grid)
    M = base.grid.n_nodes - 2
    J = np.empty((2 * M, 2 * M))
    e = np.zeros(2 * M)
    for j in range(2 * M):
        e[j] = 1.0
        p1, s1 = _perturbed(base, e, eps)
        p0, s0 = _perturbed(base, e, -eps)
        J[:, j] = (_frame_rhs(p1, s1, base, refs, normalized)
                   - _frame_rhs(p0, s0, base, refs, normalized)) / (2 * eps)
        e[j] = 0.0
    sign = -1.0 if np.trace(J) < 0 else 1.0
    meta = {
        "n_dim": base.n_dim,
        "h": base.grid.h,
        "r_max": base.grid.r_max,
        "eps": eps,
        "normalized": normalized,
        "sign": sign,
        "convention": "L = sign * d(rdtf_rhs)/dg in frame components; d/dt h = -L h when sign = -1",
    }
    return LinearOperatorMatrix(sign * J, base.grid, 2, sign, meta)


def hyperbolic_linearization(grid: RadialGrid, normalized: bool = True) -> LinearOperatorMatrix:
    """``DF_{g_h}``: the linearization at ``g_h`` with reference ``g_h``."""
    gh = hyperbolic_metric(grid)
    return assemble_linearized(gh, gh, normalized)


def scalar_laplacian(grid: RadialGrid) -> LinearOperatorMatrix:
    """``-(u'' + (n-1) coth(r) u')`` on interior nodes.

    Second-order centered differences; the origin is handled by the even
    reflection ``u_{-1} = u_1`` folded into node 1 through ``u_0`` from the
    regularity relation ``u_0 = (4 u_1 - u_2)/3``; the outer node carries a
    homogeneous Dirichlet condition.
    """
    n = grid.n_dim
    h = grid.h
    M = grid.n_nodes - 2
    r = grid.nodes[1:-1]
    c = (n - 1) * grid.cosh[1:-1] / grid.sinh[1:-1]
    lo = -(1.0 / h ** 2 - c / (2 * h))
    di = 2.0 / h ** 2 * np.ones(M)
    up = -(1.0 / h ** 2 + c / (2 * h))
    A = np.diag(di) + np.diag(lo[1:], -1) + np.diag(up[:-1], 1)
    # u_0 eliminated by the even-extension relation (exact for u = a + b r**2)
    A[0, 0] += lo[0] * 4.0 / 3.0
    A[0, 1] += -lo[0] / 3.0
    return LinearOperatorMatrix(A, grid, 1, 1.0, {"n_dim": n, "h": h, "r_max": grid.r_max,
                                                  "operator": "scalar hyperbolic Laplacian",
                                                  "sign": 1.0, "origin": "even", "outer": "Dirichlet"})


# -- spectrum ----------------------------------------------------------------

@dataclass
class SpectrumBound:
    """Bottom of the real spectrum with a grid-refinement error bar."""

    min_real: float
    eigenvalues: np.ndarray
    error_bar: float = float("nan")
    refined_min_real: float = float("nan")
    notes: List[str] = field(default_factory=list)

    def __iter__(self):
        yield self.min_real
        yield self.eigenvalues

    @property
    def relative_change(self) -> float:
        if not np.isfinite(self.refined_min_real):
            return float("nan")
        return abs(self.refined_min_real - self.min_real) / abs(self.min_real)


def eigenvalues(J: LinearOperatorMatrix) -> np.ndarray:
    try:
        ev = scipy.linalg.eigvals(J.matrix)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SpectralError(f"eigenvalue computation failed: {exc}") from exc
    return ev[np.argsort(ev.real)]


def spectrum_bound(J: LinearOperatorMatrix, J_refined: Optional[LinearOperatorMatrix] = None) -> SpectrumBound:
    """Eigenvalues of ``J`` and the smallest real part.

    If the same operator assembled on the grid with half the spacing is
    given, the change of the smallest real part is reported as the error bar.
    """
    ev = eigenvalues(J)
    lo = float(ev.real.min())
    out = SpectrumBound(lo, ev, notes=["outer Dirichlet truncation can only raise the discrete spectrum"])
    if J_refined is not None:
        fine = float(eigenvalues(J_refined).real.min())
        out.refined_min_real = fine
        out.error_bar = abs(fine - lo)
    return out


# -- resolvent ---------------------------------------------------------------

def _row_weights(J: LinearOperatorMatrix, p: WeightedNormParams, w: Optional[BoundaryWeight]) -> np.ndarray:
    if p.mu == 0:
        return np.ones(J.size)
    if w is None:
        w = BoundaryWeight.sech(J.grid)
    return np.tile(w.inverse_weight(p.mu)[1:-1], J.components)


def _weighted_inf_norm(R: np.ndarray, d: np.ndarray) -> float:
    """``|| D R D^{-1} ||_inf`` for ``D = diag(d)``."""
    return float(np.max(np.abs(R * (d[:, None] / d[None, :])).sum(axis=1)))


def resolvent_norm(J: LinearOperatorMatrix, lam: complex,
                   p: WeightedNormParams = WeightedNormParams(mu=1.0, k=0),
                   w: Optional[BoundaryWeight] = None) -> float:
    """Norm of ``(lam I - J)^{-1}`` in the weighted discrete sup norm.

    The weighted norm of data ``f`` is ``max |rho**(-mu) f|``, so the induced
    operator norm is the max-row-sum norm of ``D R D^{-1}`` with
    ``D = diag(rho**(-mu))``.  For ``mu = 0`` this is the plain induced
    infinity norm.  Raises :class:`SingularResolventError` when the
    reciprocal condition number of ``lam I - J`` falls below
    ``RCOND_SINGULAR``.
    """
    A = lam * np.eye(J.size) - J.matrix
    if np.iscomplexobj(A) and abs(np.imag(lam)) == 0:
        A = A.real
    try:
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularResolventError(f"lambda={lam} : factorization failed ({exc})") from exc
    gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
    anorm = np.abs(A).sum(axis=0).max()
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or not rcond > RCOND_SINGULAR:
        raise SingularResolventError(f"lambda={lam} is numerically in the spectrum (rcond={rcond:.2e})")
    R = scipy.linalg.lu_solve((lu, piv), np.eye(J.size))
    return _weighted_inf_norm(R, _row_weights(J, p, w))


# -- sectors -----------------------------------------------------------------

@dataclass
class SectorSample:
    lam: complex
    res_norm: float
    bound: float
    passed: bool
    note: str = ""


@dataclass
class SectorReport:
    """Sample-based certification of ``||R(lam)|| <= C/|lam - omega|`` on a sector."""

    omega: float
    theta: float
    C: float
    samples: List[SectorSample]
    eigenvalues_inside: int = 0
    singular_samples: int = 0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.C)) and self.singular_samples == 0 and self.eigenvalues_inside == 0

    def rows(self):
        for s in self.samples:
            yield {"re_lambda": s.lam.real, "im_lambda": s.lam.imag, "res_norm": s.res_norm,
                   "bound": s.bound, "pass": int(s.passed)}


def sector_points(omega: float, theta: float, rays: int = 32, magnitudes: int = 64,
                  rmin: float = 1e-2, rmax: float = 1e4) -> np.ndarray:
    """``lam = omega - t e^{i a}`` for ``rays`` angles strictly inside ``|a| < theta`` and log-spaced ``t``."""
    a = theta * (-1.0 + (2.0 * np.arange(rays) + 1.0) / rays)
    t = np.logspace(math.log10(rmin), math.log10(rmax), magnitudes)
    return (omega - t[None, :] * np.exp(1j * a)[:, None]).ravel()


def in_sector(lam, omega: float, theta: float) -> np.ndarray:
    z = omega - np.asarray(lam, dtype=complex)
    return (np.abs(z) > 0) & (np.abs(np.angle(z)) < theta)


def sector_check(J: LinearOperatorMatrix, omega: float, theta: float, sample_count: int = 2048,
                 p: WeightedNormParams = WeightedNormParams(mu=1.0, k=0),
                 w: Optional[BoundaryWeight] = None, workers: int = 1,
                 rmax: float = 1e4) -> SectorReport:
    """Certify the resolvent bound on ``{lam != omega : |arg(omega - lam)| < theta}``.

    Samples lie on 32 rays (or ``sample_count/64`` rays when that differs)
    times 64 logarithmically spaced distances out to ``|lam - omega| = rmax``.
    ``C`` is the largest sampled ``||R(lam)|| |lam - omega|``; it is infinite
    when a sample is numerically singular or when a computed eigenvalue of
    ``J`` lies inside the sector (the resolvent is then unbounded there,
    whether or not a sample lands on it).
    """
    if not 0 < theta < math.pi:
        raise ValueError("theta must lie in (0, pi)")
    magnitudes = 64
    rays = max(1, sample_count // magnitudes)
    lams = sector_points(omega, theta, rays, magnitudes, rmax=rmax)
    ev = eigenvalues(J)
    inside = int(np.count_nonzero(in_sector(ev, omega, theta)))

    def one(lam):
        try:
            return resolvent_norm(J, lam, p, w), ""
        except SingularResolventError as exc:
            return float("inf"), str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            norms = list(pool.map(one, lams))
    else:
        norms = [one(lam) for lam in lams]
    scaled = np.array([nm * abs(lam - omega) for (nm, _), lam in zip(norms, lams)])
    singular = int(np.count_nonzero(~np.isfinite(scaled)))
    C = float(np.max(scaled)) if singular == 0 and inside == 0 else float("inf")
    samples = []
    for (nm, note), lam in zip(norms, lams):
        bound = C / abs(lam - omega) if np.isfinite(C) else float("inf")
        ok = bool(np.isfinite(nm) and np.isfinite(C) and nm <= bound * (1 + 1e-12))
        samples.append(SectorSample(complex(lam), float(nm), float(bound), ok, note))
    return SectorReport(omega, theta, C, samples, inside, singular)


def scalar_sector_constant(a: float, omega: float, theta: float) -> float:
    """``sup |lam - omega|/|lam - a|`` over the sector, for ``J = a I`` with ``a`` outside it."""
    d = a - omega
    if d > 0 and theta <= math.pi / 2:
        return 1.0
    if d > 0:
        # the ray at angle theta passes closest to a at distance d sin(pi - theta)
        return 1.0 / math.sin(math.pi - theta)
    raise ValueError("a must lie to the right of omega")


# -- indicial roots ----------------------------------------------------------

@dataclass(frozen=True)
class IndicialPair:
    lam: complex
    gamma_minus: complex
    gamma_plus: complex
    beyond_threshold: bool

    @property
    def real(self) -> bool:
        return not self.beyond_threshold

    @property
    def root_sum(self) -> complex:
        return self.gamma_minus + self.gamma_plus


def indicial_roots_scalar(n: int, lam: Union[float, complex]) -> IndicialPair:
    """Roots of ``gamma**2 - (n-1) gamma + lam = 0``.

    Substituting ``u = exp(-gamma r)`` into ``-(u'' + (n-1) coth(r) u') - lam u``
    and using ``coth r -> 1`` leaves ``(-gamma**2 + (n-1) gamma - lam) u``
    plus terms of relative order ``exp(-2r)``.  Above the threshold
    ``lam = (n-1)**2/4`` the roots form a complex-conjugate pair with real
    part ``(n-1)/2``.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    mid = (n - 1) / 2.0
    disc = mid * mid - lam
    if isinstance(lam, complex) and lam.imag != 0:
        root = cmath.sqrt(disc)
        g1, g2 = mid - root, mid + root
        if g1.real > g2.real:
            g1, g2 = g2, g1
        return IndicialPair(lam, g1, g2, True)
    lam = float(np.real(lam))
    if disc >= 0:
        root = math.sqrt(disc)
        return IndicialPair(lam, mid - root, mid + root, False)
    root = math.sqrt(-disc)
    return IndicialPair(lam, complex(mid, -root), complex(mid, root), True)


@dataclass
class IndicialEstimate:
    """Empirical indicial roots of an operator."""

    lam: float
    roots: List[float]
    gamma_grid: np.ndarray
    leading: np.ndarray
    decay_gain: List[float]

    @property
    def decaying_root(self) -> Optional[float]:
        """Largest detected root (the decaying solution ``rho**gamma_+``)."""
        return max(self.roots) if self.roots else None


def _fit_window(grid: RadialGrid, skip: int = 6) -> np.ndarray:
    M = grid.n_nodes - 2
    r = grid.nodes[1:-1]
    idx = np.flatnonzero(r >= 0.5 * grid.r_max)
    return idx[idx < M - skip]


def _indicial_matrix(J: LinearOperatorMatrix, gamma: float, lam: float, idx: np.ndarray):
    """Leading coefficients ``P(gamma)`` and fitted decay exponents of ``(J - lam) rho**gamma``.

    ``rho**gamma`` is taken as ``exp(-gamma r)`` (the boundary defining
    function ``sech r`` up to a constant factor).
    """
    k = J.components
    M = J.grid.n_nodes - 2
    r = J.grid.nodes[1:-1]
    trial = np.exp(-gamma * r)
    P = np.empty((k, k))
    expo = np.empty((k, k))
    for c in range(k):
        v = np.zeros(k * M)
        v[c * M:(c + 1) * M] = trial
        out = J.apply(v) - lam * v
        for q in range(k):
            o = out[q * M:(q + 1) * M][idx]
            scaled = o * np.exp(gamma * r[idx])
            P[q, c] = float(np.median(scaled))
            mag = np.abs(o)
            good = mag > 0
            if np.count_nonzero(good) >= 3:
                expo[q, c] = -np.polyfit(r[idx][good], np.log(mag[good]), 1)[0]
            else:
                expo[q, c] = np.inf
    return P, expo


def empirical_indicial(J: LinearOperatorMatrix, gamma_grid: Sequence[float], lam: float,
                       tol: float = 1e-10) -> IndicialEstimate:
    """Locate the exponents ``gamma`` at which ``(J - lam) rho**gamma`` decays one order faster.

    For each ``gamma`` the operator is applied to ``rho**gamma`` in every
    component, and the leading coefficient matrix ``P(gamma)`` is read off
    over the outer half of the grid.  Roots are the sign changes of the
    eigenvalues of ``P(gamma)`` along ``gamma_grid``, refined with Brent's
    method and merged when several components share them; at
    each root the fitted decay exponent of the output is compared with
    ``gamma`` to record the gain.
    """
    if J.grid.r_max < 12 - 1e-9:
        raise ValueError("empirical indicial roots need r_max >= 12")
    idx = _fit_window(J.grid)
    if idx.size < 5:
        raise IndicialFitError("fit window too small")
    gammas = np.asarray(sorted(gamma_grid), dtype=float)

    def det(g):
        P, _ = _indicial_matrix(J, g, lam, idx)
        return float(np.linalg.det(P))

    vals = np.array([det(g) for g in gammas])
    # generic exponents must be reproduced by the fit: otherwise the output is not exponential
    mismatch = 0
    for g, dv in zip(gammas, vals):
        _, expo = _indicial_matrix(J, g, lam, idx)
        finite = expo[np.isfinite(expo)]
        if abs(dv) > 1e-3 and finite.size and np.min(np.abs(finite - g)) > 0.25:
            mismatch += 1
    if mismatch > len(gammas) // 2:
        raise IndicialFitError("operator output on rho**gamma is not exponential in the outer region")

    # Roots are sign changes of the (real parts of the sorted) eigenvalues of
    # P(gamma).  Tracking eigenvalues rather than det P also catches roots
    # shared by several components, where det P touches zero without a sign change.
    def eig(g, k):
        P, _ = _indicial_matrix(J, g, lam, idx)
        return float(np.sort(np.linalg.eigvals(P).real)[k])

    k_count = J.components
    ev = np.array([[eig(g, k) for k in range(k_count)] for g in gammas])
    roots: List[float] = []
    for k in range(k_count):
        for j in range(len(gammas) - 1):
            a, b = gammas[j], gammas[j + 1]
            fa, fb = ev[j, k], ev[j + 1, k]
            if fa == 0.0:
                roots.append(float(a))
            elif fa * fb < 0:
                roots.append(float(brentq(eig, a, b, args=(k,), xtol=tol)))
        if ev[-1, k] == 0.0:
            roots.append(float(gammas[-1]))
    roots = sorted(roots)
    roots = [r for i, r in enumerate(roots) if i == 0 or r - roots[i - 1] > 1e-6]
    gains = []
    for g in roots:
        _, expo = _indicial_matrix(J, g, lam, idx)
        finite = expo[np.isfinite(expo)]
        gains.append(float(np.min(finite) - g) if finite.size else float("inf"))
    return IndicialEstimate(lam, roots, gammas, vals, gains)
