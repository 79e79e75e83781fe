"""Independent classical-heat-equation reference implementation.

For a constant diffusivity c the operator du/dt - c*lap(u) has the
classical heat kernel, and every potential can be written directly in the
elapsed time s = c*(t - tau) without the time-change machinery of the
package.  This module implements the same quadrature *structure* (graded
time panels, closed-form panel integrals of the kernel in s, product-
Gaussian Hermite rules) from scratch on top of numpy/scipy only, so that
agreement with the package is a genuine cross-check of the time-change
reduction and of both implementations.

It is used by the test suite only and never imports package internals
(geometry node tables are passed in as plain arrays).
"""

from __future__ import annotations

import numpy as np
from scipy.special import exp1

EULER_GAMMA = 0.5772156649015328606


def heat_kernel(n, r2, s):
    """(4 pi s)^(-n/2) exp(-r2 / (4 s)) for s > 0."""
    r2 = np.asarray(r2, dtype=float)
    with np.errstate(under="ignore"):
        return (4.0 * np.pi * s) ** (-0.5 * n) * np.exp(-r2 / (4.0 * s))


# ---------------------------------------------------------------------------
# Poisson integral (spatial convolution at elapsed diffusion time s)


def poisson(phi, pts, s, order=32):
    """Convolution of the heat kernel at diffusion value s with phi, by
    Gauss-Hermite nodes on the product Gaussian kernel*phi_gauss."""
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[1]
    if s <= 0.0:
        return np.asarray(phi(pts), dtype=float)
    y1, w1 = np.polynomial.hermite.hermgauss(order)
    grids = np.meshgrid(*([y1] * n), indexing="ij")
    y = np.stack([g.ravel() for g in grids], axis=1)
    w = np.ones(y.shape[0])
    for g in np.meshgrid(*([w1] * n), indexing="ij"):
        w *= g.ravel()
    w /= np.pi ** (0.5 * n)
    c0, sg = phi.gaussian_split()
    c0 = np.asarray(c0, dtype=float)
    h = s * sg / (s + sg)
    mu = (sg * pts + s * c0[None, :]) / (sg + s)
    r2 = np.sum((pts - c0[None, :]) ** 2, axis=1)
    with np.errstate(under="ignore"):
        C = (sg / (sg + s)) ** (0.5 * n) * np.exp(-r2 / (4.0 * (sg + s)))
    arg = mu[:, None, :] + 2.0 * np.sqrt(h) * y[None, :, :]
    with np.errstate(over="ignore"):
        expo = np.exp(np.sum((arg - c0) ** 2, axis=2) / (4.0 * sg))
    return C * ((np.asarray(phi(arg), dtype=float) * expo) @ w)


# ---------------------------------------------------------------------------
# volume potential


def _box_rule(box, order, n):
    lo, hi = (np.asarray(e, dtype=float) for e in box)
    g, w = np.polynomial.legendre.leggauss(order)
    axes = [0.5 * (hi[j] + lo[j]) + 0.5 * (hi[j] - lo[j]) * g for j in range(n)]
    wts1d = [0.5 * (hi[j] - lo[j]) * w for j in range(n)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gg.ravel() for gg in grids], axis=1)
    wts = np.ones(pts.shape[0])
    for wg in np.meshgrid(*wts1d, indexing="ij"):
        wts *= wg.ravel()
    return pts, wts


def volume(source, pts, t, c=1.0, m_time=32, q=3.0, order=48, gl_order=6,
           box_order=160):
    """Volume potential for a(t) = c: graded panels in the elapsed
    diffusion time s = c*(t - tau), Gauss-Legendre in tau per panel, and
    the same box-rule/Hermite hybrid for the spatial integral."""
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[1]
    t = float(t)
    acc = np.zeros(pts.shape[0])
    if t <= 0.0:
        return acc
    j = np.arange(m_time + 1, dtype=float)
    s_grid = (c * t) * (j / m_time) ** q        # ascending elapsed times
    tau_edges = t - s_grid / c                  # descending tau
    gl_x, gl_w = np.polynomial.legendre.leggauss(gl_order)
    box = source.quad_box()
    qpts, qwts = _box_rule(box, box_order, n)
    width = float(np.max(np.asarray(box[1]) - np.asarray(box[0])))
    b_star = (3.0 * width / box_order) ** 2

    class _Slice:
        def __init__(self, tau):
            self.tau = tau

        def __call__(self, x):
            return source.source(x, self.tau)

        def gaussian_split(self):
            return source.gaussian_split()

    for p in range(m_time):
        lo, hi = tau_edges[p + 1], tau_edges[p]
        if hi - lo <= 0.0:
            continue
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        for xg, wg in zip(gl_x, gl_w):
            tauv = mid + half * xg
            s = c * (t - tauv)
            sl = _Slice(tauv)
            if s <= 0.0:
                inner = np.asarray(sl(pts), dtype=float)
            elif s <= b_star:
                inner = poisson(sl, pts, s, order=order)
            else:
                d2 = np.sum((pts[:, None, :] - qpts[None, :, :]) ** 2, axis=2)
                inner = (heat_kernel(n, d2, s) * np.asarray(sl(qpts), dtype=float)[None, :]) @ qwts
            acc += (wg * half) * inner
    return acc


# ---------------------------------------------------------------------------
# layer potentials (n = 2, density sampled at panel-midpoint times)
#
# With u = d^2/(4 s) the s-panel integrals of the kernel and of its normal
# derivative have the closed forms
#   int kernel ds            = (E1(u_hi) - E1(u_lo)) / (4 pi)   (u_hi < u_lo)
#   int d(kernel)/d(nu) ds   = ratio/(2 pi) * (exp(-u_hi) - exp(-u_lo)),
# where ratio = <x - xi, nu(xi)>/d^2.


def _panel_grid(t, c, m_time, q):
    j = np.arange(m_time + 1, dtype=float)
    s_edges = (c * t) * (j / m_time) ** q
    s_mid = 0.5 * (s_edges[:-1] + s_edges[1:])
    tau_mid = t - s_mid / c
    return s_edges, tau_mid


def _single_panel(d2, s_lo, s_hi):
    """Closed-form s-panel integral of the kernel (n = 2); d2 > 0."""
    hi = exp1(d2 / (4.0 * s_hi))
    lo = exp1(d2 / (4.0 * s_lo)) if s_lo > 0.0 else 0.0
    return (hi - lo) / (4.0 * np.pi)


def _double_panel(d2, ratio, s_lo, s_hi):
    with np.errstate(under="ignore"):
        hi = np.exp(-d2 / (4.0 * s_hi))
        lo = np.exp(-d2 / (4.0 * s_lo)) if s_lo > 0.0 else np.zeros_like(d2)
    return ratio / (2.0 * np.pi) * (hi - lo)


def single_layer(points, weights, dens_func, x, t, c=1.0, m_time=32, q=3.0):
    """Off-boundary single layer; density a(tau)-weighted, a = c folds into
    the s-substitution (a dtau = ds)."""
    x = np.asarray(x, dtype=float)
    pts = x[None, :] if x.ndim == 1 else x
    s_edges, tau_mid = _panel_grid(t, c, m_time, q)
    d2 = np.sum((pts[:, None, :] - points[None, :, :]) ** 2, axis=2)
    acc = np.zeros(pts.shape[0])
    for p in range(m_time):
        phi = np.asarray(dens_func(tau_mid[p]), dtype=float)
        acc += _single_panel(d2, s_edges[p], s_edges[p + 1]) @ (weights * phi)
    return acc if x.ndim > 1 else float(acc[0])


def double_layer(points, normals, weights, dens_func, x, t, c=1.0,
                 m_time=32, q=3.0):
    x = np.asarray(x, dtype=float)
    pts = x[None, :] if x.ndim == 1 else x
    s_edges, tau_mid = _panel_grid(t, c, m_time, q)
    d = pts[:, None, :] - points[None, :, :]
    d2 = np.sum(d * d, axis=2)
    ratio = np.sum(d * normals[None, :, :], axis=2) / d2
    acc = np.zeros(pts.shape[0])
    for p in range(m_time):
        phi = np.asarray(dens_func(tau_mid[p]), dtype=float)
        acc += _double_panel(d2, ratio, s_edges[p], s_edges[p + 1]) @ (weights * phi)
    return acc if x.ndim > 1 else float(acc[0])


# ---------------------------------------------------------------------------
# trace functional (boundary collocation at every node simultaneously)


def log_quadrature_weights(n_half):
    """Weights R_j for int_0^{2pi} ln(4 sin^2(theta/2)) f(theta) dtheta on a
    uniform 2*n_half grid (trigonometric exactness), derived from the
    Fourier series ln(4 sin^2(theta/2)) = -2 sum_{m>=1} cos(m theta)/m."""
    m = 2 * n_half
    j = np.arange(m)
    R = np.zeros(m)
    for k in range(1, n_half):
        R -= (2.0 * np.pi / n_half) * np.cos(k * j * np.pi / n_half) / k
    R -= (np.pi / n_half**2) * np.cos(n_half * j * np.pi / n_half)
    return R


def trace_functional(params, points, normals, speeds, curvatures, uspl, unspl,
                     t, c=1.0, m_time=32, q=3.0):
    """B[u] at every boundary node: -u/2 + (double layer of u) - (single
    layer of du/dnu), with the boundary data given as time splines."""
    ms = points.shape[0]
    weights = speeds * (2.0 * np.pi / ms)
    s_edges, tau_mid = _panel_grid(t, c, m_time, q)
    d = points[:, None, :] - points[None, :, :]
    d2 = np.sum(d * d, axis=2)
    num = np.sum(d * normals[None, :, :], axis=2)
    ratio = np.divide(num, d2, out=np.zeros_like(num), where=d2 > 0)
    np.fill_diagonal(ratio, -0.5 * curvatures)
    np.fill_diagonal(d2, 0.0)
    dens_u = uspl(tau_mid)      # (ms, m_time)
    dens_un = unspl(tau_mid)

    # double-layer term: trapezoid with the curvature diagonal
    dterm = np.zeros(ms)
    off = d2 > 0.0
    for p in range(m_time):
        blk = np.zeros_like(d2)
        blk[off] = _double_panel(d2[off], ratio[off], s_edges[p], s_edges[p + 1])
        if s_edges[p] == 0.0:
            np.fill_diagonal(blk, np.diag(ratio) / (2.0 * np.pi))
        dterm += (blk * weights[None, :] * dens_u[None, :, p]).sum(axis=1)

    # single-layer term: log-splitting quadrature
    K = np.zeros((ms, ms))
    for p in range(m_time):
        blk = np.zeros_like(d2)
        blk[off] = _single_panel(d2[off], s_edges[p], s_edges[p + 1])
        K += blk * dens_un[None, :, p]
    Ktil = K * speeds[None, :]
    G = -speeds * dens_un[:, 0] / (4.0 * np.pi)
    dth = params[:, None] - params[None, :]
    fours = 4.0 * np.sin(dth / 2.0) ** 2
    H = np.zeros_like(Ktil)
    offm = ~np.eye(ms, dtype=bool)
    H[offm] = Ktil[offm] - (np.broadcast_to(G[None, :], (ms, ms))[offm]
                            * np.log(fours[offm]))
    diag = dens_un[:, 0] * (-EULER_GAMMA + np.log(4.0 * s_edges[1])
                            - 2.0 * np.log(speeds))
    if m_time > 1:
        diag += dens_un[:, 1:] @ np.log(s_edges[2:] / s_edges[1:-1])
    H[np.eye(ms, dtype=bool)] = speeds / (4.0 * np.pi) * diag
    R = log_quadrature_weights(ms // 2)
    idx = (np.arange(ms)[None, :] - np.arange(ms)[:, None]) % ms
    sterm = (R[idx] * G[None, :]).sum(axis=1) + (2.0 * np.pi / ms) * H.sum(axis=1)

    return -0.5 * uspl(t) + dterm - sterm
