"""Pure-numpy implementations of the hot kernels.

Same contracts as the compiled module degpot._corex; the package selects one
of the two at import time (degpot.backend).  Every routine works in the
time-substituted variables, where the kernel argument is the accumulated
diffusion value z, and integrates each z-panel in closed form:

    int_{z0}^{z1} (4 pi z)^(-n/2) e^(-d^2/(4z)) dz              (single layer)
    int_{z0}^{z1} (q / (2z)) (4 pi z)^(-n/2) e^(-d^2/(4z)) dz   (double layer)

via exponential-integral / incomplete-gamma closed forms for n in {2, 3}.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf, erfc, exp1

BACKEND_NAME = "numpy"

_SQRT_PI = np.sqrt(np.pi)


def heat_kernel(r2, s, n: int):
    """Gaussian kernel (4 pi s)^(-n/2) exp(-r2/(4 s)); zero for s <= 0.

    r2 and s broadcast; underflow of the exponential is deliberate (deep
    tails evaluate to exact 0).
    """
    r2 = np.asarray(r2, dtype=float)
    s = np.asarray(s, dtype=float)
    shape = np.broadcast_shapes(r2.shape, s.shape)
    out = np.zeros(shape)
    pos = np.broadcast_to(s > 0, shape)
    s_pos = np.broadcast_to(s, shape)[pos]
    r2_pos = np.broadcast_to(r2, shape)[pos]
    with np.errstate(under="ignore"):
        out[pos] = np.exp(-r2_pos / (4.0 * s_pos)) / (4.0 * np.pi * s_pos) ** (0.5 * n)
    return out


def _dlayer_edge(n: int, d2, z):
    """P(n/2, d2/(4 z)) with the z = 0 edge set to its z -> 0+ limit (1)."""
    if z <= 0.0:
        return np.ones_like(d2)
    with np.errstate(under="ignore"):
        u = d2 / (4.0 * z)
        if n == 2:
            return -np.expm1(-u)
        if n == 3:
            su = np.sqrt(u)
            return erf(su) - 2.0 * su * np.exp(-u) / _SQRT_PI
    raise ValueError("only n = 2 and n = 3 are supported")


def _dlayer_scale(n: int, d2, ratio):
    """Prefactor q Gamma(n/2) / (2 pi^{n/2} d^n), written via ratio = q/d2.

    For n = 2 the diagonal (d2 = 0) limit is finite: ratio / (2 pi).  For
    n = 3 the kernel is unbounded on the diagonal and those entries are
    zeroed; on-boundary 3-d evaluation is handled (or rejected) upstream.
    """
    pref = 1.0 / (2.0 * np.pi) if n == 2 else _SQRT_PI / (4.0 * np.pi**1.5)
    if n == 2:
        return pref * ratio
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = pref * ratio / np.sqrt(d2)
    return np.where(d2 > 0.0, scale, 0.0)


def _slayer_edge(n: int, d2, z):
    """Antiderivative-in-z of the single-layer kernel, normalized to 0 at
    z = 0; diagonal entries (d2 = 0) come out as +inf for n = 2 and are the
    caller's responsibility."""
    if z <= 0.0:
        return np.zeros_like(d2)
    with np.errstate(divide="ignore", under="ignore"):
        u = d2 / (4.0 * z)
        if n == 2:
            return exp1(u) / (4.0 * np.pi)
        if n == 3:
            return erfc(np.sqrt(u)) / (4.0 * np.pi * np.sqrt(d2))
    raise ValueError("only n = 2 and n = 3 are supported")


def dlayer_sum(n: int, d2, ratio, w, z_edges, dens):
    """Double-layer-type pair sum with exact z-panel integration.

    d2 : (nt, ms) squared target-source distances.
    ratio : (nt, ms) <x - xi, nu> / d2 (diagonal: curvature limit -kappa/2).
    w : (ms,) surface quadrature weights.
    z_edges : (M+1,) nondecreasing, z_edges[0] >= 0.
    dens : (ms, M) density per source node and z-panel.

    Returns (nt,) values of sum_l w_l sum_p dens[l,p] K_panel_p(d_il).
    """
    d2 = np.asarray(d2, dtype=float)
    z_edges = np.asarray(z_edges, dtype=float)
    dens = np.asarray(dens, dtype=float)
    w = np.asarray(w, dtype=float)
    scale = _dlayer_scale(n, d2, np.asarray(ratio, dtype=float))
    acc = np.zeros(d2.shape[0])
    prev = _dlayer_edge(n, d2, z_edges[0])
    for p in range(z_edges.size - 1):
        cur = _dlayer_edge(n, d2, z_edges[p + 1])
        acc += (scale * (prev - cur)) @ (w * dens[:, p])
        prev = cur
    return acc


def slayer_sum(n: int, d2, w, z_edges, dens):
    """Single-layer-type pair sum; same conventions as dlayer_sum.

    Diagonal entries d2 = 0 would be infinite and must not occur (targets
    off the source set); on-boundary quadrature uses the log-split path.
    """
    d2 = np.asarray(d2, dtype=float)
    z_edges = np.asarray(z_edges, dtype=float)
    dens = np.asarray(dens, dtype=float)
    w = np.asarray(w, dtype=float)
    diag = d2 <= 0.0
    acc = np.zeros(d2.shape[0])
    prev = _slayer_edge(n, d2, z_edges[0])
    for p in range(z_edges.size - 1):
        cur = _slayer_edge(n, d2, z_edges[p + 1])
        val = cur - prev
        if np.any(diag):
            val = np.where(diag, 0.0, val)
        acc += val @ (w * dens[:, p])
        prev = cur
    return acc


def dlayer_panels(n: int, d2, ratio, w, z_edges):
    """Per-panel double-layer matrices: returns (M, nt, ms) with entry
    [p, i, l] = w_l * K_panel_p(d_il); used for block assembly."""
    d2 = np.asarray(d2, dtype=float)
    z_edges = np.asarray(z_edges, dtype=float)
    w = np.asarray(w, dtype=float)
    scale = _dlayer_scale(n, d2, np.asarray(ratio, dtype=float))
    out = np.empty((z_edges.size - 1, d2.shape[0], d2.shape[1]))
    prev = _dlayer_edge(n, d2, z_edges[0])
    for p in range(z_edges.size - 1):
        cur = _dlayer_edge(n, d2, z_edges[p + 1])
        out[p] = scale * (prev - cur) * w[None, :]
        prev = cur
    return out


def slayer_panels(n: int, d2, w, z_edges):
    """Per-panel single-layer matrices, (M, nt, ms); diagonal d2 = 0
    entries are set to 0 and must be corrected by the caller."""
    d2 = np.asarray(d2, dtype=float)
    z_edges = np.asarray(z_edges, dtype=float)
    w = np.asarray(w, dtype=float)
    diag = d2 <= 0.0
    out = np.empty((z_edges.size - 1, d2.shape[0], d2.shape[1]))
    prev = _slayer_edge(n, d2, z_edges[0])
    for p in range(z_edges.size - 1):
        cur = _slayer_edge(n, d2, z_edges[p + 1])
        val = (cur - prev) * w[None, :]
        val[np.broadcast_to(diag, val.shape)] = 0.0
        out[p] = val
        prev = cur
    return out
