"""Nonlocal lateral boundary functional and its verification.

For a candidate solution u, the functional is

    B[u](xi0, t) = -u(xi0, t)/2
                   + int_0^t int_bd  d(eps)/d(nu(xi)) a(tau) u(xi, tau) dS dtau
                   - int_0^t int_bd  eps a(tau) du/dnu(xi, tau) dS dtau,

which vanishes identically when u is the volume potential of an interior
source or the Poisson integral of interior initial data.  Both boundary
integrals are evaluated exactly like the direct boundary values of the
double and single layer (z-substitution, z-exact panels, curvature
diagonal / log-splitting quadrature); u and du/dnu on the lateral
boundary are tabulated once on a time grid and spline-interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import backend
from .bie import _pair_arrays, solve_ibvp
from .errors import SupportError
from .geometry import Curve, GeometryError
from .potentials import (
    EULER_GAMMA,
    PotentialField,
    _panel_times,
    _poisson_raw,
    _volume_raw,
    _z_grid,
    eval_poisson,
    kress_log_weights,
)

__all__ = [
    "TraceResidualReport",
    "boundary_normal_derivative",
    "trace_residual",
    "representation_identity_check",
    "verify_uniqueness",
]


@dataclass
class TraceResidualReport:
    points: np.ndarray        # (ms, 2) boundary nodes
    times: np.ndarray         # (nt,) slab midpoints
    residual: np.ndarray      # (ms, nt)
    sup_norm: float
    l2_norm: float
    scale: float              # sup |u| over the tabulated lateral boundary
    resolution: dict


def _require_vp(u: PotentialField):
    if u.kind not in ("V", "P"):
        raise SupportError(
            f"the trace functional is defined for V- and P-kind fields, got {u.kind}"
        )


def _field_values(u: PotentialField, pts, t, grad=False, light=False):
    """Field values (or gradients) by direct quadrature.  light=True uses
    a reduced volume rule, adequate for lateral-boundary tabulation where
    the kernel-to-support distance keeps the integrand mild."""
    n = u.geometry.dimension
    if u.kind == "P":
        order = int(min(64, max(24, u.m_space)))
        return _poisson_raw(u.coeff, u.density.data, pts, t, n, order, use_grad=grad)
    order = int(min(64, max(40, u.m_space // 2)))
    if light:
        return _volume_raw(u.coeff, u.density.data, pts, t, n,
                           min(u.m_time, 16), u.q, 40, gl_order=4,
                           box_order=96, use_grad=grad)
    return _volume_raw(u.coeff, u.density.data, pts, t, n, u.m_time, u.q,
                       order, use_grad=grad)


def boundary_normal_derivative(u: PotentialField, xi0, t) -> float:
    """<grad u(xi0, t), nu(xi0)> by differentiation under the integral;
    valid because the density is supported strictly inside the domain."""
    _require_vp(u)
    margin = u.density.support_margin(u.geometry)
    if margin <= 0:
        raise SupportError("density support must be strictly interior")
    xi0 = np.asarray(xi0, dtype=float)
    nu0 = u.geometry.normal_at(xi0)
    g = _field_values(u, xi0[None, :], float(t), grad=True)
    return float(g[0] @ nu0)


def _boundary_tables(u: PotentialField, nodes, horizon, n_times=25):
    """Cubic splines in time of u and du/dnu at the boundary nodes."""
    tgrid = np.linspace(0.0, horizon, n_times)
    U = np.zeros((nodes.points.shape[0], n_times))
    Un = np.zeros_like(U)
    for i, tv in enumerate(tgrid):
        if tv <= 0.0 and u.kind == "V":
            continue  # volume potential and its gradient vanish at t = 0
        U[:, i] = np.atleast_1d(_field_values(u, nodes.points, tv, light=True))
        gv = _field_values(u, nodes.points, tv, grad=True, light=True)
        Un[:, i] = np.sum(np.atleast_2d(gv) * nodes.normals, axis=1)
    return tgrid, CubicSpline(tgrid, U, axis=1), CubicSpline(tgrid, Un, axis=1)


def _field_scale(u: PotentialField) -> float:
    """sup of the reference quantity: the initial data for P, the solution
    over the space-time cylinder (sampled on probes) for V."""
    geo = u.geometry
    c = np.mean(geo.nodes(64 if geo.dimension == 2 else (8, 16)).points, axis=0)
    if u.kind == "P":
        lo, hi = u.density.data.quad_box()
        axes = [np.linspace(lo[j], hi[j], 21) for j in range(len(lo))]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        return float(np.max(np.abs(u.density.data(pts))))
    ring = geo.nodes(8).points
    probes = np.concatenate([c[None, :], c[None, :] + 0.45 * (ring - c[None, :])])
    T = float(u.coeff.horizon)
    vals = [np.atleast_1d(_field_values(u, probes, tv, light=True))
            for tv in (0.5 * T, T)]
    return float(np.max(np.abs(np.concatenate(vals))))


def _double_all_nodes(coeff, nodes, dens, z):
    d2, ratio = _pair_arrays(nodes)
    return backend.dlayer_sum(2, d2, ratio, nodes.weights, z, dens)


def _single_all_nodes(coeff, nodes, dens, z):
    """Direct boundary single-layer values at every node simultaneously
    (circulant log-splitting quadrature on the uniform parameter grid)."""
    ms = nodes.points.shape[0]
    speed = nodes.speeds
    d = nodes.points[:, None, :] - nodes.points[None, :, :]
    d2 = np.sum(d * d, axis=2)
    np.fill_diagonal(d2, 0.0)
    panels = backend.slayer_panels(2, d2, np.ones(ms), z)      # (M, ms, ms)
    K = np.einsum("pil,lp->il", panels, dens)
    Ktil = K * speed[None, :]
    G = -speed * dens[:, 0] / (4.0 * np.pi)
    dth = nodes.params[:, None] - nodes.params[None, :]
    fours = 4.0 * np.sin(dth / 2.0) ** 2
    H = np.zeros_like(Ktil)
    off = ~np.eye(ms, dtype=bool)
    H[off] = Ktil[off] - (np.broadcast_to(G[None, :], (ms, ms))[off]
                          * np.log(fours[off]))
    diag = dens[:, 0] * (-EULER_GAMMA + np.log(4.0 * z[1]) - 2.0 * np.log(speed))
    if z.shape[0] > 2:
        diag += dens[:, 1:] @ np.log(z[2:] / z[1:-1])
    H[np.eye(ms, dtype=bool)] = speed / (4.0 * np.pi) * diag
    R = kress_log_weights(ms // 2)
    idx = (np.arange(ms)[None, :] - np.arange(ms)[:, None]) % ms
    return (R[idx] * G[None, :]).sum(axis=1) + (2.0 * np.pi / ms) * H.sum(axis=1)


def trace_residual(u: PotentialField, m_space=None, m_time=None,
                   n_table=None, tables=None, scale=None) -> TraceResidualReport:
    """B[u] at all boundary nodes and time-slab midpoints.

    tables=(uspl, unspl) lets refinement studies reuse boundary splines
    built at a finer resolution (splines evaluate at any (node, time))."""
    _require_vp(u)
    geo = u.geometry
    if not isinstance(geo, Curve):
        raise GeometryError("the trace functional is implemented for curves (n = 2)")
    ms = int(m_space or u.m_space)
    if ms % 2:
        ms += 1
    mt = int(m_time or u.m_time)
    if n_table is None:
        n_table = min(65, 2 * mt + 1)
    T = float(u.coeff.horizon)
    nodes = geo.nodes(ms)
    if tables is None:
        _, uspl, unspl = _boundary_tables(u, nodes, T, n_times=n_table)
    else:
        uspl, unspl = tables
    stride = uspl(0.0).shape[0] // ms
    if stride * ms != uspl(0.0).shape[0]:
        raise ValueError("table resolution must be a multiple of m_space")
    times = (np.arange(mt) + 0.5) * T / mt
    residual = np.zeros((ms, mt))
    for i, t in enumerate(times):
        z = _z_grid(u.coeff, t, mt, u.q)
        tau = _panel_times(u.coeff, t, z)
        dens_u = uspl(tau)[::stride]      # (ms, M)
        dens_un = unspl(tau)[::stride]
        dterm = _double_all_nodes(u.coeff, nodes, dens_u, z)
        sterm = _single_all_nodes(u.coeff, nodes, dens_un, z)
        residual[:, i] = -0.5 * uspl(t)[::stride] + dterm - sterm
    if scale is None:
        scale = _field_scale(u)
    if scale == 0.0:
        scale = 1.0
    res = TraceResidualReport(
        points=nodes.points,
        times=times,
        residual=residual,
        sup_norm=float(np.max(np.abs(residual))),
        l2_norm=float(np.sqrt(np.mean(residual**2))),
        scale=scale,
        resolution={"m_space": ms, "m_time": mt, "n_table": n_table},
    )
    return res


def representation_identity_check(u: PotentialField, x, t) -> dict:
    """Numerical decomposition of the interior representation identity.

    Returns the five terms (keyed I1..I5 for a volume potential, J1..J5
    for a Poisson integral): the short-time limit term, the initial-data
    term, the two lateral boundary integrals, and the closure residual.
    """
    _require_vp(u)
    geo = u.geometry
    x = np.asarray(x, dtype=float)
    t = float(t)
    T = float(u.coeff.horizon)
    n = geo.dimension
    # short-time term by delta-extrapolation
    deltas = np.array([1e-2, 5e-3, 2.5e-3]) * T
    vals = []
    for dl in deltas:
        b = float(u.coeff.b(t, t - dl))
        if b <= 0.0:
            vals.append(float(np.atleast_1d(_field_values(u, x[None, :], t - dl))[0]))
            continue
        y, wts = np.polynomial.hermite.hermgauss(24)
        grids = np.meshgrid(*([y] * n), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        w = np.ones(pts.shape[0])
        for g in np.meshgrid(*([wts] * n), indexing="ij"):
            w *= g.ravel()
        arg = x[None, :] + 2.0 * np.sqrt(b) * pts
        uv = np.atleast_1d(_field_values(u, arg, t - dl))
        vals.append(float(uv @ w) / np.pi ** (0.5 * n))
    # two-step first-order Richardson in delta
    v01 = 2.0 * vals[1] - vals[0]
    v12 = 2.0 * vals[2] - vals[1]
    term1 = (4.0 * v12 - v01) / 3.0
    # initial-data term
    if u.kind == "V":
        term2 = 0.0
    else:
        term2 = float(eval_poisson(u, x, t))
    # lateral boundary terms via boundary tables
    ms = u.m_space if u.m_space % 2 == 0 else u.m_space + 1
    nodes = geo.nodes(ms)
    _, uspl, unspl = _boundary_tables(u, nodes, T)
    z = _z_grid(u.coeff, t, u.m_time, u.q)
    tau = _panel_times(u.coeff, t, z)
    dens_u = uspl(tau)
    dens_un = unspl(tau)
    d = x[None, None, :] - nodes.points[None, :, :]
    d2 = np.sum(d * d, axis=2)
    ratio = np.sum(d * nodes.normals[None, :, :], axis=2) / np.maximum(d2, 1e-300)
    term3 = float(backend.dlayer_sum(2, d2, ratio, nodes.weights, z, dens_u)[0])
    term4 = float(backend.slayer_sum(2, d2, nodes.weights, z, dens_un)[0])
    value = float(np.atleast_1d(_field_values(u, x[None, :], t))[0])
    # for a volume potential the five terms sum to the field value; for a
    # Poisson integral the field solves the homogeneous equation, so the
    # chain starts from zero and the terms sum to zero
    target = value if u.kind == "V" else 0.0
    term5 = target - (term1 - term2 + term3 - term4)
    pre = "I" if u.kind == "V" else "J"
    return {
        f"{pre}1": term1,
        f"{pre}2": term2,
        f"{pre}3": term3,
        f"{pre}4": term4,
        f"{pre}5": term5,
        "value": value,
    }


def verify_uniqueness(geometry, coeff, m_space=32, m_time=16,
                      probes=None) -> dict:
    """Discrete homogeneous problem: zero boundary data must produce the
    zero density and the zero solution."""
    zero = lambda th, tt: np.zeros_like(np.asarray(th, dtype=float))
    sol = solve_ibvp(geometry, coeff, zero, m_space=m_space, m_time=m_time)
    phi_norm = float(np.max(np.abs(sol.phi)))
    if probes is None:
        c = np.mean(sol.system.nodes.points, axis=0)
        probes = c[None, :] + 0.3 * (sol.system.nodes.points[:4] - c[None, :])
    T = sol.system.horizon
    u_vals = [np.atleast_1d(sol.eval(probes, tv)) for tv in (0.5 * T, T)]
    u_norm = float(np.max(np.abs(np.concatenate(u_vals))))
    return {
        "phi_sup": phi_norm,
        "u_sup": u_norm,
        "m_space": m_space,
        "m_time": m_time,
    }
