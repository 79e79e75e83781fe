"""Boundary integral equation (-1/2 I + D) phi = g for the Dirichlet
initial-boundary value problem, discretized by collocation in space
(boundary nodes, curvature-corrected diagonal) and piecewise-constant
densities on time slabs.

The kernel is integrated exactly in the transformed variable z = b(t, tau)
over each slab image, so the only time discretization error is the
piecewise-constant density ansatz; causality makes the slab coupling
lower-triangular and the system solvable by forward substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import backend
from .errors import (
    AssumptionError,
    CompatibilityError,
    ConvergenceError,
    GeometryError,
    SolverError,
)
from .geometry import Curve

__all__ = [
    "BieSystem",
    "assemble",
    "apply_operator",
    "solve_march",
    "solve_picard",
    "solve_ibvp",
    "IbvpSolution",
]

COMPAT_TOL = 1e-10


@dataclass
class BieSystem:
    """Assembled lower-triangular-in-time collocation system."""

    geometry: object
    coeff: object
    m_space: int
    m_time: int
    q: float
    gamma_eff: float
    horizon: float
    t_grid: np.ndarray          # (m_time + 1,) slab edges, t_0 = 0
    colloc_times: np.ndarray    # (m_time,) slab midpoints s_k
    nodes: object               # BoundaryNodes at the collocation points
    blocks: list                # blocks[k-1][j-1]: (ms, ms) slab couplings, j <= k

    def block(self, k: int, j: int) -> np.ndarray:
        """Coupling of slab j onto collocation time t_k (1-based)."""
        if j > k:
            return np.zeros((self.m_space, self.m_space))
        return self.blocks[k - 1][j - 1]

    def diagonal_condition_numbers(self) -> np.ndarray:
        return np.array([
            np.linalg.cond(-0.5 * np.eye(self.m_space) + self.blocks[k][k])
            for k in range(self.m_time)
        ])

    def diagonal_min_singular(self) -> np.ndarray:
        return np.array([
            np.linalg.svd(-0.5 * np.eye(self.m_space) + self.blocks[k][k],
                          compute_uv=False)[-1]
            for k in range(self.m_time)
        ])

    def sample_boundary(self, func) -> np.ndarray:
        """Sample func(theta, t) at (slab k, node l) -> (m_time, ms),
        at the collocation (slab midpoint) times."""
        th = self.nodes.params
        return np.array([
            np.broadcast_to(np.asarray(func(th, tk), dtype=float), th.shape)
            for tk in self.colloc_times
        ])


def _pair_arrays(nodes):
    d = nodes.points[:, None, :] - nodes.points[None, :, :]
    d2 = np.sum(d * d, axis=2)
    num = np.sum(d * nodes.normals[None, :, :], axis=2)
    ratio = np.divide(num, d2, out=np.zeros_like(num), where=d2 > 0)
    np.fill_diagonal(ratio, -0.5 * nodes.curvatures)
    np.fill_diagonal(d2, 0.0)
    return d2, ratio


def assemble(geometry, coeff, g, m_space=64, m_time=32, q=3.0,
             gamma_eff=0.75, horizon=None) -> BieSystem:
    """Build all slab-coupling blocks; validates the compatibility
    condition g(., 0) = 0 required for a continuous solution."""
    if not isinstance(geometry, Curve):
        raise GeometryError("the boundary solver is implemented for curves (n = 2)")
    if coeff.classify() != "A":
        raise AssumptionError("the boundary solver requires a class-A coefficient")
    T = float(horizon if horizon is not None else coeff.horizon)
    if T <= 0:
        raise ValueError("horizon must be positive")
    nodes = geometry.nodes(m_space)
    if g is not None:
        g0 = np.max(np.abs(np.asarray(g(nodes.params, 0.0), dtype=float)))
        if g0 > COMPAT_TOL:
            raise CompatibilityError(
                f"boundary data must vanish at t = 0 (max |g(.,0)| = {g0:.3g})"
            )
    t_grid = np.linspace(0.0, T, m_time + 1)
    # collocate at slab midpoints: the piecewise-constant ansatz then acts
    # as a midpoint rule on the smooth part of the kernel (near-second-
    # order recovery in practice, vs first order at slab endpoints)
    colloc = t_grid[1:] - 0.5 * T / m_time
    d2, ratio = _pair_arrays(nodes)
    blocks = []
    for k in range(1, m_time + 1):
        sk = colloc[k - 1]
        # tau edges 0 = t_0 < ... < t_{k-1} < s_k mapped to ascending z
        taus = np.concatenate([t_grid[:k], [sk]])
        z_edges = np.array([coeff.b(sk, tv) for tv in taus[::-1]])
        z_edges = np.maximum.accumulate(np.maximum(z_edges, 0.0))
        panels = backend.dlayer_panels(2, d2, ratio, nodes.weights, z_edges)
        # panel p (z in [z_p, z_{p+1}]) couples slab j = k - p
        blocks.append([panels[k - j] for j in range(1, k + 1)])
    return BieSystem(geometry, coeff, m_space, m_time, q, gamma_eff, T,
                     t_grid, colloc, nodes, blocks)


def apply_operator(sys: BieSystem, phi: np.ndarray) -> np.ndarray:
    """(D phi) at all collocation times; phi has shape (m_time, ms)."""
    out = np.zeros_like(phi)
    for k in range(1, sys.m_time + 1):
        for j in range(1, k + 1):
            out[k - 1] += sys.blocks[k - 1][j - 1] @ phi[j - 1]
    return out


def solve_march(sys: BieSystem, g: np.ndarray) -> np.ndarray:
    """Forward substitution over slabs with a dense LU per diagonal block."""
    g = np.asarray(g, dtype=float)
    ms = sys.m_space
    phi = np.zeros((sys.m_time, ms))
    eye = np.eye(ms)
    for k in range(1, sys.m_time + 1):
        rhs = g[k - 1].copy()
        for j in range(1, k):
            rhs -= sys.blocks[k - 1][j - 1] @ phi[j - 1]
        A = -0.5 * eye + sys.blocks[k - 1][k - 1]
        try:
            phi[k - 1] = lu_solve(lu_factor(A), rhs)
        except Exception as exc:  # singular diagonal block
            raise SolverError(f"diagonal block {k} is singular: {exc}") from exc
        if not np.all(np.isfinite(phi[k - 1])):
            raise SolverError(f"diagonal block {k} produced non-finite values")
    return phi


def solve_picard(sys: BieSystem, g: np.ndarray, max_iters: int = 400,
                 tol: float = 1e-10):
    """Fixed-point iteration phi <- -2 g + 2 D phi; the Volterra structure
    makes some power of the update contractive, which the returned
    increment history must exhibit."""
    g = np.asarray(g, dtype=float)
    phi = np.zeros_like(g)
    history = []
    for _ in range(max_iters):
        nxt = -2.0 * (g - apply_operator(sys, phi))
        inc = float(np.max(np.abs(nxt - phi)))
        history.append(inc)
        phi = nxt
        if inc <= tol:
            return phi, history
    raise ConvergenceError(
        f"Picard iteration did not reach tol={tol:g} in {max_iters} steps; "
        f"last increments {history[-5:]}"
    )


def double_layer_from_slabs(sys: BieSystem, phi: np.ndarray, x, t,
                            ms_eval=None):
    """Evaluate the double layer of a slab-wise-constant density at
    off-boundary points."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    t = float(t)
    if t <= 0.0 or sys.coeff.a1(t) <= 0.0:
        out = np.zeros(pts.shape[0])
        return float(out[0]) if single else out
    # slab edges at or below t, then t itself
    K = int(np.searchsorted(sys.t_grid, t - 1e-14))
    K = max(1, min(K, sys.m_time))
    tau_edges = np.concatenate([sys.t_grid[:K], [t]])  # ascending, len K+1
    z_edges = np.array([sys.coeff.b(t, tv) for tv in tau_edges[::-1]])
    z_edges = np.maximum.accumulate(np.maximum(z_edges, 0.0))
    if ms_eval is None:
        ref = sys.nodes.points
        dist = float(np.min(np.linalg.norm(pts[:, None, :] - ref[None, :, :], axis=2)))
        need = int(20.0 * sys.geometry.diameter / dist) if dist > 0 else sys.m_space
        ms_eval = int(min(6144, max(sys.m_space, need)))
    nodes = sys.geometry.nodes(ms_eval)
    d = pts[:, None, :] - nodes.points[None, :, :]
    d2 = np.sum(d * d, axis=2)
    ratio = np.sum(d * nodes.normals[None, :, :], axis=2) / np.maximum(d2, 1e-300)
    # density per z-panel: panel p covers slab K - p
    dens_t = np.empty((ms_eval, K))
    base = np.arange(ms_eval) * sys.m_space / ms_eval
    idx = np.floor(base).astype(int)
    frac = base - idx
    nxt = (idx + 1) % sys.m_space
    for p in range(K):
        slab = K - p  # 1-based
        row = phi[slab - 1]
        dens_t[:, p] = (1 - frac) * row[idx] + frac * row[nxt]
    vals = backend.dlayer_sum(2, d2, ratio, nodes.weights, z_edges, dens_t)
    return float(vals[0]) if single else vals


@dataclass
class IbvpSolution:
    """Double-layer representation u = D phi of the Dirichlet problem."""

    system: BieSystem
    phi: np.ndarray            # (m_time, ms)
    g: np.ndarray              # (m_time, ms) boundary data samples

    def eval(self, x, t):
        return double_layer_from_slabs(self.system, self.phi, x, t)

    def boundary_trace(self) -> np.ndarray:
        """-1/2 phi + D phi at the collocation nodes (the jump-corrected
        boundary values of u); equals g up to solver residual."""
        return -0.5 * self.phi + apply_operator(self.system, self.phi)


def solve_ibvp(geometry, coeff, g, m_space=64, m_time=32, q=3.0,
               gamma_eff=0.75, horizon=None) -> IbvpSolution:
    sys = assemble(geometry, coeff, g, m_space, m_time, q, gamma_eff, horizon)
    g_arr = sys.sample_boundary(g)
    phi = solve_march(sys, g_arr)
    return IbvpSolution(sys, phi, g_arr)
