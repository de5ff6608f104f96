"""Brute-force coordinate evaluation of curvature and gauge quantities.

The rotationally symmetric metric is written in Cartesian coordinates on
R^n,

    g_ij(x) = phi(r)**2 xh_i xh_j + (psi(r)/r)**2 (delta_ij - xh_i xh_j),

with ``xh = x/r``, and every derivative (Christoffel symbols, Riemann
tensor, DeTurck field, Lie derivative) is taken numerically with
fourth-order central differences.  Nothing here uses the reduced radial
formulas, which is the point: it is the independent side of the curvature
and gauge cross-checks.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

Warp = Callable[[float], float]

_STEP = 1e-3


def _d4(f, x, k, eps=_STEP):
    """Fourth-order central derivative of ``f`` along coordinate ``k``."""
    e = np.zeros_like(x)
    e[k] = eps
    return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * eps)


class CoordinateOracle:
    """Numerical tensor calculus for ``phi**2 dr**2 + psi**2 g_S`` in Cartesian coordinates."""

    def __init__(self, n: int, phi: Warp, psi: Warp,
                 ref_phi: Optional[Warp] = None, ref_psi: Optional[Warp] = None):
        self.n = n
        self.phi = phi
        self.psi = psi
        self.ref_phi = ref_phi
        self.ref_psi = ref_psi

    # metric and connection
    def _metric(self, phi, psi, x):
        r = np.linalg.norm(x)
        xh = x / r
        P = np.outer(xh, xh)
        return phi(r) ** 2 * P + (psi(r) / r) ** 2 * (np.eye(self.n) - P)

    def metric(self, x):
        return self._metric(self.phi, self.psi, x)

    def ref_metric(self, x):
        return self._metric(self.ref_phi, self.ref_psi, x)

    def _christoffel(self, metric, x):
        n = self.n
        g_inv = np.linalg.inv(metric(x))
        dg = np.array([_d4(metric, x, k) for k in range(n)])  # dg[k,i,j] = d_k g_ij
        # Gamma^c_ab = 1/2 g^cd (d_a g_bd + d_b g_ad - d_d g_ab)
        lower = np.empty((n, n, n))
        for a in range(n):
            for b in range(n):
                for d in range(n):
                    lower[d, a, b] = 0.5 * (dg[a, b, d] + dg[b, a, d] - dg[d, a, b])
        return np.einsum("cd,dab->cab", g_inv, lower)

    def christoffel(self, x):
        return self._christoffel(self.metric, x)

    def ref_christoffel(self, x):
        return self._christoffel(self.ref_metric, x)

    def riemann(self, x):
        """``R^a_bcd`` with ``R(X,Y)Z = nabla_X nabla_Y Z - ...`` convention."""
        G = self.christoffel(x)
        dG = np.array([_d4(self.christoffel, x, k) for k in range(self.n)])  # dG[k,a,b,c]
        # R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
        R = (np.einsum("cadb->abcd", dG) - np.einsum("dacb->abcd", dG)
             + np.einsum("ace,edb->abcd", G, G) - np.einsum("ade,ecb->abcd", G, G))
        return R

    def ricci(self, x):
        return np.einsum("abad->bd", self.riemann(x))

    def sectional(self, x, u, v):
        R = self.riemann(x)
        g = self.metric(x)
        R_low = np.einsum("ae,ebcd->abcd", g, R)
        num = np.einsum("abcd,a,b,c,d->", R_low, u, v, u, v)
        den = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
        return num / den

    def deturck(self, x):
        """Contravariant DeTurck field ``W^k = g^pq (Gamma^k_pq - ref Gamma^k_pq)``."""
        g_inv = np.linalg.inv(self.metric(x))
        dG = self.christoffel(x) - self.ref_christoffel(x)
        return np.einsum("pq,kpq->k", g_inv, dG)

    def lie_derivative_deturck(self, x):
        """``(L_W g)_ij = W^k d_k g_ij + g_kj d_i W^k + g_ik d_j W^k``."""
        n = self.n
        W = self.deturck(x)
        g = self.metric(x)
        dg = np.array([_d4(self.metric, x, k) for k in range(n)])
        dW = np.array([_d4(self.deturck, x, k) for k in range(n)])  # dW[i,k] = d_i W^k
        return np.einsum("k,kij->ij", W, dg) + np.einsum("kj,ik->ij", g, dW) + np.einsum("ik,jk->ij", g, dW)

    # projections onto the symmetry-adapted components
    @staticmethod
    def frame_at(x):
        """Unit radial direction and a unit Euclidean tangent at ``x``."""
        r = np.linalg.norm(x)
        xh = x / r
        trial = np.zeros_like(x)
        trial[np.argmin(np.abs(xh))] = 1.0
        t = trial - (trial @ xh) * xh
        return r, xh, t / np.linalg.norm(t)

    def radial_split(self, T, x):
        """``(T_rr, T_sph)`` for a symmetric 2-tensor ``T`` at ``x``."""
        r, xh, t = self.frame_at(x)
        return xh @ T @ xh, r ** 2 * (t @ T @ t)

    def ricci_components(self, x):
        return self.radial_split(self.ricci(x), x)

    def deturck_radial(self, x):
        _, xh, _ = self.frame_at(x)
        return float(xh @ self.deturck(x))

    def rdtf_components(self, x, normalized=False):
        T = -2 * self.ricci(x) + self.lie_derivative_deturck(x)
        if normalized:
            T = T - 2 * (self.n - 1) * self.metric(x)
        return self.radial_split(T, x)

    def sectional_radial(self, x):
        _, xh, t = self.frame_at(x)
        return self.sectional(x, xh, t)

    def sectional_tangential(self, x):
        _, xh, t = self.frame_at(x)
        t2 = np.cross(xh, t) if self.n == 3 else None
        if t2 is None:
            raise NotImplementedError("tangential planes are only built for n = 3")
        return self.sectional(x, t, t2)


def sample_point(n: int, r: float) -> np.ndarray:
    """A point at radius ``r`` away from the coordinate axes."""
    v = np.linspace(1.0, 1.7, n) * np.array([1.0, -0.8, 1.3, 0.6][:n] + [1.0] * max(0, n - 4))
    return r * v / np.linalg.norm(v)
