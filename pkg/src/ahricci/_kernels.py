"""Compiled inner loops shared by the geometry, flow and spectral layers.

Everything here works on raw arrays so that numba can compile it.  Arrays
hold values at all grid nodes ``r_i = i*h``; quantities returned "on the
interior" have length ``N - 2`` and correspond to nodes ``1 .. N-2``.

The warps are written relative to the scaled hyperbolic background
``s*sinh(r)`` with ``s = psi[-1]/sinh(r_max)``: the background is
differentiated exactly and only the remainder goes through the difference
stencils.  A scaled hyperbolic metric is therefore an exact discrete fixed
point, which matters once errors are multiplied by ``cosh(r)**mu`` weights.

Spatial stencils are fourth order, with the values behind the origin
supplied by the parity of each field.  This keeps the truncation error of
combinations such as ``u_rr - u_r/r`` vanishing at the origin, which is what
keeps the DeTurck field odd to discretization accuracy.
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_DEGENERATED = 1
STATUS_BLOWUP = 2
STATUS_GAUGE_FAILURE = 3


@njit(cache=True, nogil=True)
def _ghost(u, i, parity):
    """``u[i]`` with ``i >= -2`` read through the reflection ``u(-r) = parity*u(r)``."""
    if i < 0:
        return parity * u[-i]
    return u[i]


@njit(cache=True, nogil=True)
def derivatives4(u, h, parity):
    """First and second radial derivatives on interior nodes.

    Fourth-order centered stencils, with the values behind the origin taken
    from the reflection ``u(-r) = parity*u(r)`` (``parity = 1`` for even and
    ``-1`` for odd functions).  The last interior node, whose stencil would
    reach past ``r_max``, uses the second-order three-point rule.
    """
    N = u.shape[0]
    du = np.empty(N - 2)
    ddu = np.empty(N - 2)
    for j in range(N - 2):
        i = j + 1
        if i + 2 <= N - 1:
            um2 = _ghost(u, i - 2, parity)
            um1 = u[i - 1]
            up1 = u[i + 1]
            up2 = u[i + 2]
            du[j] = (um2 - 8.0 * um1 + 8.0 * up1 - up2) / (12.0 * h)
            ddu[j] = (-um2 + 16.0 * um1 - 30.0 * u[i] + 16.0 * up1 - up2) / (12.0 * h * h)
        else:
            du[j] = (u[i + 1] - u[i - 1]) / (2.0 * h)
            ddu[j] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h)
    return du, ddu


@njit(cache=True, nogil=True)
def radial_derivatives(phi, psi, S, C, h):
    """Return ``(phi_r, psi_r, psi_rr)`` on interior nodes.

    ``psi`` is differentiated as the exact background ``s*sinh(r)`` plus a
    remainder; both ``phi`` (even) and the remainder (odd) go through
    :func:`derivatives4`.
    """
    N = phi.shape[0]
    scale = psi[N - 1] / S[N - 1]
    q = psi - scale * S
    q[0] = 0.0
    dphi, _ = derivatives4(phi, h, 1.0)
    dq, ddq = derivatives4(q, h, -1.0)
    return dphi, scale * C[1:N - 1] + dq, scale * S[1:N - 1] + ddq


@njit(cache=True, nogil=True)
def regular_parts(phi, psi, S):
    """Split the warps as ``psi = s sinh(r) e^u`` and ``phi = s e^(u + v)``.

    ``s = psi[-1]/sinh(r_max)`` is constant, ``u`` and ``v`` are even
    functions of ``r``; ``v(0) = 0`` is the regularity condition
    ``psi_r(0) = phi(0)``.  ``u`` at the origin comes from the even
    extrapolation through the first three interior nodes (exact up to
    ``r**4``).  Returns ``(s, u, v)`` on all nodes.
    """
    N = phi.shape[0]
    s = psi[N - 1] / S[N - 1]
    u = np.empty(N)
    for i in range(1, N):
        u[i] = np.log(psi[i] / (s * S[i]))
    u[0] = (15.0 * u[1] - 6.0 * u[2] + u[3]) / 10.0
    v = np.log(phi / s) - u
    return s, u, v


@njit(cache=True, nogil=True)
def ricci_frame(phi, psi, S, C, h, n):
    """Frame Ricci components ``(Ric_rr/phi**2, Ric_sph/psi**2)`` on interior nodes.

    Evaluated through the regular variables of :func:`regular_parts`; every
    ``1/r``-type factor multiplies an odd function or a quantity vanishing
    to second order at the origin.  Also returns ``u_r`` and ``v_r``.
    """
    N = phi.shape[0]
    s, u, v = regular_parts(phi, psi, S)
    du, ddu = derivatives4(u, h, 1.0)
    dv, _ = derivatives4(v, h, 1.0)
    Si = S[1:N - 1]
    cot = C[1:N - 1] / Si
    vi = v[1:N - 1]
    e2v = np.exp(-2.0 * vi)
    inv_phi2 = 1.0 / (phi[1:N - 1] * phi[1:N - 1])
    # -psi_ss/psi (arclength s) without the 1/phi**2 factor
    radial = 1.0 + cot * (du - dv) + ddu - du * dv
    # (1 - psi_r**2/phi**2)/sinh(r)**2
    tang = (-np.expm1(-2.0 * vi)) / (Si * Si) - e2v * (1.0 + 2.0 * cot * du + du * du)
    inv_psi2_scaled = np.exp(-2.0 * u[1:N - 1]) / (s * s)
    ric_rr = -(n - 1) * radial * inv_phi2
    ric_sph = -radial * inv_phi2 + (n - 2) * tang * inv_psi2_scaled
    return ric_rr, ric_sph, du, dv


@njit(cache=True, nogil=True)
def ricci_core(phi, psi, S, C, h, n):
    """Coordinate Ricci components ``(Ric_rr, Ric_sph)`` on interior nodes."""
    N = phi.shape[0]
    a, b, _, _ = ricci_frame(phi, psi, S, C, h, n)
    return a * phi[1:N - 1] ** 2, b * psi[1:N - 1] ** 2


@njit(cache=True, nogil=True)
def half_log_derivative(phi, h):
    """``phi_r/phi`` at the half nodes ``r_{i+1/2}``, ``i = 0 .. N-2``.

    Fourth-order staggered differences of the even function ``log(phi)``;
    the last half node uses the two-point rule.
    """
    f = np.log(phi)
    N = f.shape[0]
    out = np.empty(N - 1)
    for k in range(N - 1):
        if k + 2 <= N - 1:
            out[k] = (27.0 * (f[k + 1] - f[k]) - (f[k + 2] - _ghost(f, k - 1, 1.0))) / (24.0 * h)
        else:
            out[k] = (f[k + 1] - f[k]) / h
    return out


@njit(cache=True, nogil=True)
def half_log_mean(phi):
    """``log(phi)`` interpolated to the half nodes (fourth order, two-point at the end)."""
    f = np.log(phi)
    N = f.shape[0]
    out = np.empty(N - 1)
    for k in range(N - 1):
        if k + 2 <= N - 1:
            out[k] = (9.0 * (f[k] + f[k + 1]) - (_ghost(f, k - 1, 1.0) + f[k + 2])) / 16.0
        else:
            out[k] = 0.5 * (f[k] + f[k + 1])
    return out


@njit(cache=True, nogil=True)
def half_to_nodes(a, h):
    """Value and derivative at interior nodes of an odd field given on half nodes.

    ``a[k]`` sits at ``r_{k+1/2}``; the reflection ``a(-r) = -a(r)`` supplies
    the value behind the origin.  Fourth-order staggered rules, two-point
    rules at the last interior node.
    """
    M = a.shape[0]
    N = M + 1
    val = np.empty(N - 2)
    der = np.empty(N - 2)
    for j in range(N - 2):
        i = j + 1
        if i + 1 <= M - 1:
            am = -a[0] if i - 2 < 0 else a[i - 2]
            val[j] = (9.0 * (a[i] + a[i - 1]) - (a[i + 1] + am)) / 16.0
            der[j] = (27.0 * (a[i] - a[i - 1]) - (a[i + 1] - am)) / (24.0 * h)
        else:
            val[j] = 0.5 * (a[i] + a[i - 1])
            der[j] = (a[i] - a[i - 1]) / h
    return val, der


@njit(cache=True, nogil=True)
def christoffel_trace_terms(phi, psi, S, C, h):
    """Reference-metric terms entering ``g^pq Gamma^r_pq``.

    Returns ``phi_r/phi`` at half nodes (length ``N-1``), and ``exp(-2v)``
    and ``u_r`` on interior nodes (see :func:`regular_parts`).
    """
    N = phi.shape[0]
    _, u, v = regular_parts(phi, psi, S)
    du, _ = derivatives4(u, h, 1.0)
    return half_log_derivative(phi, h), np.exp(-2.0 * v[1:N - 1]), du


@njit(cache=True, nogil=True)
def flow_rhs(phi, psi, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged):
    """Right-hand side ``(d/dt g_rr, d/dt g_sph, W^r)``.

    ``ref_a, ref_b, ref_c`` are the reference terms from
    :func:`christoffel_trace_terms` (ignored unless ``gauged``).  The first
    two outputs are on interior nodes, ``W^r`` is on all nodes with
    ``W[0] = W[-1] = 0``.
    """
    N = phi.shape[0]
    A, B, du, dv = ricci_frame(phi, psi, S, C, h, n)
    A = -2.0 * A
    B = -2.0 * B
    W = np.zeros_like(phi)
    if gauged:
        s = psi[N - 1] / S[N - 1]
        _, u, v = regular_parts(phi, psi, S)
        cot = C[1:N - 1] / S[1:N - 1]
        e2v = np.exp(-2.0 * v[1:N - 1])
        # W = Wa + Wb.  Wa carries phi_r and lives on half nodes so that its
        # derivative is a compact staggered difference; Wb carries psi_r.
        Wa = (half_log_derivative(phi, h) - ref_a) * np.exp(-2.0 * half_log_mean(phi))
        Wb = np.zeros_like(phi)
        Wb[1:N - 1] = -(n - 1) * np.exp(-2.0 * u[1:N - 1]) / (s * s) * (
            cot * (e2v - ref_b) + du * e2v - ref_c * ref_b)
        Wa_i, dWa = half_to_nodes(Wa, h)
        dWb, _ = derivatives4(Wb, h, -1.0)
        Wi = Wa_i + Wb[1:N - 1]
        W[1:N - 1] = Wi
        dW = dWa + dWb
        A = A + 2.0 * dW + 2.0 * (du + dv) * Wi
        B = B + 2.0 * (cot + du) * Wi
    if normalized:
        A = A - 2.0 * (n - 1)
        B = B - 2.0 * (n - 1)
    return A * phi[1:N - 1] ** 2, B * psi[1:N - 1] ** 2, W


@njit(cache=True, nogil=True)
def boundary_scale(t, n, normalized):
    """Scale of the hyperbolic solution the outer node is pinned to."""
    if normalized:
        return 1.0
    return np.sqrt(1.0 + 2.0 * (n - 1) * t)


@njit(cache=True, nogil=True)
def apply_bc(phi, psi, S, t, n, normalized):
    """Impose the origin and outer-node conditions in place.

    The outer node is pinned to the hyperbolic solution of the flow; at the
    origin ``psi = 0`` and ``phi`` is set by regularity, ``phi(0) =
    psi_r(0)``, i.e. ``v(0) = 0`` with ``u(0)`` extended evenly.
    """
    N = phi.shape[0]
    a = boundary_scale(t, n, normalized)
    phi[N - 1] = a
    psi[N - 1] = a * S[N - 1]
    origin_bc(phi, psi, S)


@njit(cache=True, nogil=True)
def origin_bc(phi, psi, S):
    """``psi(0) = 0`` and ``phi(0) = psi_r(0)``, the latter from the even extension of ``log(psi/sinh)``."""
    psi[0] = 0.0
    phi[0] = np.exp((15.0 * np.log(psi[1] / S[1]) - 6.0 * np.log(psi[2] / S[2])
                     + np.log(psi[3] / S[3])) / 10.0)


@njit(cache=True, nogil=True)
def pchip_slopes(y, h):
    """Fritsch-Carlson slopes on a uniform grid (same rule as scipy's pchip)."""
    N = y.shape[0]
    d = np.zeros(N)
    delta = (y[1:] - y[:-1]) / h
    for k in range(1, N - 1):
        a = delta[k - 1]
        b = delta[k]
        if a * b > 0.0:
            d[k] = 2.0 / (1.0 / a + 1.0 / b)
    d[0] = _pchip_end(delta[0], delta[1])
    d[N - 1] = _pchip_end(delta[N - 2], delta[N - 3])
    return d


@njit(cache=True, nogil=True)
def _pchip_end(d0, d1):
    m = (3.0 * d0 - d1) / 2.0
    if np.sign(m) != np.sign(d0):
        return 0.0
    if np.sign(d0) != np.sign(d1) and abs(m) > abs(3.0 * d0):
        return 3.0 * d0
    return m


@njit(cache=True, nogil=True)
def pchip_eval(y, d, h, x):
    """Evaluate the monotone cubic through ``y`` (node spacing ``h``) at ``x``."""
    N = y.shape[0]
    out = np.empty(x.shape[0])
    for j in range(x.shape[0]):
        xj = x[j]
        k = int(np.floor(xj / h))
        if k < 0:
            k = 0
        elif k > N - 2:
            k = N - 2
        t = (xj - k * h) / h
        t2 = t * t
        t3 = t2 * t
        out[j] = ((2 * t3 - 3 * t2 + 1) * y[k] + (t3 - 2 * t2 + t) * h * d[k]
                  + (-2 * t3 + 3 * t2) * y[k + 1] + (t3 - t2) * h * d[k + 1])
    return out


@njit(cache=True, nogil=True)
def _gauge_velocity(W, Phi, h):
    d = pchip_slopes(W, h)
    return -pchip_eval(W, d, h, Phi)


@njit(cache=True, nogil=True)
def _check_state(phi, psi, Phi, track_gauge):
    """Return ``(status, node)`` for the current state."""
    N = phi.shape[0]
    for i in range(N):
        if not (np.isfinite(phi[i]) and np.isfinite(psi[i])):
            return STATUS_BLOWUP, i
    for i in range(N):
        if phi[i] <= 0.0:
            return STATUS_DEGENERATED, i
    for i in range(1, N):
        if psi[i] <= 0.0:
            return STATUS_DEGENERATED, i
    if track_gauge:
        for i in range(N):
            if not np.isfinite(Phi[i]):
                return STATUS_GAUGE_FAILURE, i
        for i in range(1, N):
            if Phi[i] <= Phi[i - 1]:
                return STATUS_GAUGE_FAILURE, i
    return STATUS_OK, -1


@njit(cache=True, nogil=True)
def fourth_difference(u, h):
    """``h**2 * D^4 u`` on interior nodes (even extension at 0, linear beyond r_max)."""
    N = u.shape[0]
    out = np.zeros(N - 2)
    for j in range(N - 2):
        i = j + 1
        um2 = u[abs(i - 2)]
        um1 = u[i - 1]
        up1 = u[i + 1]
        up2 = u[i + 2] if i + 2 < N else 2.0 * u[N - 1] - u[N - 2]
        out[j] = (um2 - 4.0 * um1 + 6.0 * u[i] - 4.0 * up1 + up2) / (h * h)
    return out


@njit(cache=True, nogil=True)
def _stage(phi, psi, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged, diss):
    N = phi.shape[0]
    h_rr, h_sph, W = flow_rhs(phi, psi, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged)
    kphi = np.zeros(N)
    kpsi = np.zeros(N)
    kphi[1:N - 1] = h_rr / (2.0 * phi[1:N - 1])
    kpsi[1:N - 1] = h_sph / (2.0 * psi[1:N - 1])
    if diss > 0.0:
        kphi[1:N - 1] -= diss * fourth_difference(phi, h)
    return kphi, kpsi, W


@njit(cache=True, nogil=True)
def rk4_advance(phi, psi, Phi, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged,
                track_gauge, diss, t, dt, nsteps):
    """Advance ``nsteps`` classical RK4 steps; the gauge map rides along.

    Returns ``(phi, psi, Phi, W, t, status, node, steps_done)`` where ``W`` is
    the DeTurck field of the final state.
    """
    phi = phi.copy()
    psi = psi.copy()
    Phi = Phi.copy()
    N = phi.shape[0]
    W = np.zeros(N)
    for step in range(nsteps):
        k1p, k1s, W1 = _stage(phi, psi, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged, diss)
        p2 = phi + 0.5 * dt * k1p
        s2 = psi + 0.5 * dt * k1s
        apply_bc(p2, s2, S, t + 0.5 * dt, n, normalized)
        k2p, k2s, W2 = _stage(p2, s2, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged, diss)
        p3 = phi + 0.5 * dt * k2p
        s3 = psi + 0.5 * dt * k2s
        apply_bc(p3, s3, S, t + 0.5 * dt, n, normalized)
        k3p, k3s, W3 = _stage(p3, s3, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged, diss)
        p4 = phi + dt * k3p
        s4 = psi + dt * k3s
        apply_bc(p4, s4, S, t + dt, n, normalized)
        k4p, k4s, W4 = _stage(p4, s4, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged, diss)
        if track_gauge:
            g1 = _gauge_velocity(W1, Phi, h)
            g2 = _gauge_velocity(W2, Phi + 0.5 * dt * g1, h)
            g3 = _gauge_velocity(W3, Phi + 0.5 * dt * g2, h)
            g4 = _gauge_velocity(W4, Phi + dt * g3, h)
            Phi = Phi + dt / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
            Phi[0] = 0.0
            Phi[N - 1] = h * (N - 1)
        phi = phi + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        psi = psi + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        t = t + dt
        apply_bc(phi, psi, S, t, n, normalized)
        status, node = _check_state(phi, psi, Phi, track_gauge)
        if status != STATUS_OK:
            return phi, psi, Phi, W, t, status, node, step + 1
    if gauged:
        _, _, W = flow_rhs(phi, psi, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged)
    return phi, psi, Phi, W, t, STATUS_OK, -1, nsteps


@njit(cache=True, nogil=True)
def _thomas(a, b, c, d):
    """Solve a tridiagonal system (sub ``a``, diag ``b``, super ``c``)."""
    m = b.shape[0]
    cp = np.empty(m)
    dp = np.empty(m)
    cp[0] = c[0] / b[0]
    dp[0] = d[0] / b[0]
    for i in range(1, m):
        den = b[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / den
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den
    x = np.empty(m)
    x[m - 1] = dp[m - 1]
    for i in range(m - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


@njit(cache=True, nogil=True)
def _implicit_solve(u, rate, coef, dt, h, u_in, u_out):
    """Backward-Euler correction on ``coef * u_rr`` with lagged ``coef``.

    End values ``u_in`` (origin, lagged) and ``u_out`` (outer node) enter as
    Dirichlet data.
    """
    N = u.shape[0]
    m = N - 2
    sig = dt * coef / (h * h)
    a = -sig.copy()
    b = 1.0 + 2.0 * sig
    c = -sig.copy()
    lap = (u[2:N] - 2.0 * u[1:N - 1] + u[0:N - 2]) / (h * h)
    rhs = u[1:N - 1] + dt * (rate - coef * lap)
    rhs[0] = rhs[0] + sig[0] * u_in
    a[0] = 0.0
    rhs[m - 1] = rhs[m - 1] + sig[m - 1] * u_out
    c[m - 1] = 0.0
    return _thomas(a, b, c, rhs)


@njit(cache=True, nogil=True)
def semi_implicit_advance(phi, psi, Phi, ref_a, ref_b, ref_c, S, C, h, n, normalized,
                          gauged, track_gauge, diss, t, dt, nsteps):
    """First-order IMEX steps: second-derivative terms implicit, rest explicit."""
    phi = phi.copy()
    psi = psi.copy()
    Phi = Phi.copy()
    N = phi.shape[0]
    W = np.zeros(N)
    for step in range(nsteps):
        kp, ks, W = _stage(phi, psi, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged, diss)
        p = phi[1:N - 1]
        coef_psi = 1.0 / (p * p)
        if gauged:
            coef_phi = 1.0 / (p * p)
        else:
            coef_phi = np.zeros(N - 2)
        a_new = boundary_scale(t + dt, n, normalized)
        new_phi = _implicit_solve(phi, kp[1:N - 1], coef_phi, dt, h, phi[0], a_new)
        new_psi = _implicit_solve(psi, ks[1:N - 1], coef_psi, dt, h, 0.0, a_new * S[N - 1])
        if track_gauge:
            Phi = Phi + dt * _gauge_velocity(W, Phi, h)
            Phi[0] = 0.0
            Phi[N - 1] = h * (N - 1)
        phi[1:N - 1] = new_phi
        psi[1:N - 1] = new_psi
        t = t + dt
        apply_bc(phi, psi, S, t, n, normalized)
        status, node = _check_state(phi, psi, Phi, track_gauge)
        if status != STATUS_OK:
            return phi, psi, Phi, W, t, status, node, step + 1
    if gauged:
        _, _, W = flow_rhs(phi, psi, ref_a, ref_b, ref_c, S, C, h, n, normalized, gauged)
    return phi, psi, Phi, W, t, STATUS_OK, -1, nsteps
