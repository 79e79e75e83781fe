"""The four potentials of the operator du/dt - a(t) lap(u).

Every time integral is computed in the transformed variable z = b(t, tau):
the factor a(tau) dtau becomes -dz exactly, the kernel becomes the
classical heat kernel at diffusion value z, and the weak singularity sits
at z = 0 regardless of how a degenerates.  Within each graded z-panel the
kernel factor is integrated in closed form (incomplete-gamma family, see
the backend), so only the density is approximated (by its value at the
panel's z-midpoint time).

On-boundary values in 2-D use the punctured trapezoid rule with the
analytic curvature diagonal for the double-layer kernel, and a
logarithm-splitting quadrature (spectral trigonometric weights for the
log part) for the single-layer kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import backend
from .errors import (
    AssumptionError,
    ConvergenceError,
    GeometryError,
    SupportError,
)
from .geometry import ON_BOUNDARY, Curve

EULER_GAMMA = 0.5772156649015328606

VOLUME = "volume"
INITIAL = "initial"
BOUNDARY = "boundary"

_FIELD_DENSITY_KIND = {"V": VOLUME, "P": INITIAL, "S": BOUNDARY, "D": BOUNDARY}


@dataclass(frozen=True)
class SpaceTimeDensity:
    """A density together with where it lives: a volume source f(x, t),
    initial data phi(x), or a lateral boundary density phi(xi, t)."""

    kind: str
    data: object

    def __post_init__(self):
        if self.kind not in (VOLUME, INITIAL, BOUNDARY):
            raise ValueError(f"unknown density kind {self.kind!r}")

    def support_margin(self, geometry) -> float:
        if self.kind == BOUNDARY:
            raise SupportError("boundary densities have no interior support margin")
        obj = self.data
        bump = getattr(obj, "bump", obj)
        return float(bump.support_margin(geometry))


@dataclass
class PotentialField:
    """One of the potentials V, P, S, D with its quadrature resolution."""

    kind: str
    coeff: object
    geometry: object
    density: SpaceTimeDensity
    m_space: int = 64
    m_time: int = 32
    q: float = 3.0

    def eval(self, x, t):
        return _EVAL[self.kind](self, x, t)


def make_field(kind, coeff, geometry, density, m_space=64, m_time=32, q=3.0):
    """Validated constructor: checks the density kind against the potential
    kind, the coefficient class, and interior support where required."""
    if kind not in _FIELD_DENSITY_KIND:
        raise ValueError(f"unknown potential kind {kind!r}")
    if not isinstance(density, SpaceTimeDensity):
        density = SpaceTimeDensity(_FIELD_DENSITY_KIND[kind], density)
    if density.kind != _FIELD_DENSITY_KIND[kind]:
        raise ValueError(
            f"potential {kind} needs a {_FIELD_DENSITY_KIND[kind]} density, got {density.kind}"
        )
    if kind in ("V", "S", "D") and coeff.classify() != "A":
        raise AssumptionError(
            f"potential {kind} requires a nonnegative coefficient (class A), "
            f"got class {coeff.classify()!r}"
        )
    if kind in ("V", "P"):
        margin = density.support_margin(geometry)
        if margin <= 0:
            raise SupportError(
                f"density support must lie strictly inside the domain (margin {margin:.3g})"
            )
    return PotentialField(kind, coeff, geometry, density, m_space, m_time, q)


# ---------------------------------------------------------------------------
# shared pieces


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.shape[-1] != n:
        raise GeometryError(f"points have dimension {pts.shape[-1]}, expected {n}")
    return pts, single


def _ret(vals, single):
    return float(vals[0]) if single else vals


def _z_grid(coeff, t, m, q):
    a1t = float(coeff.a1(t))
    j = np.arange(m + 1, dtype=float)
    return a1t * (j / m) ** q


def _panel_times(coeff, t, z_edges):
    z_mid = 0.5 * (z_edges[:-1] + z_edges[1:])
    return np.atleast_1d(coeff.invert_b(t, z_mid))


@lru_cache(maxsize=64)
def _hermite_rule(n, order):
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    grids = np.meshgrid(*([nodes] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.ones(pts.shape[0])
    for g in np.meshgrid(*([weights] * n), indexing="ij"):
        wts *= g.ravel()
    return pts, wts / np.pi ** (0.5 * n)


@lru_cache(maxsize=64)
def kress_log_weights(n_half: int) -> np.ndarray:
    """Quadrature weights R_j for int_0^{2pi} ln(4 sin^2((s - s_j)/2)) f(s) ds
    on the uniform 2*n_half-point grid (trigonometric-degree exactness)."""
    j = np.arange(2 * n_half)[:, None]
    m = np.arange(1, n_half)[None, :]
    R = -(2.0 * np.pi / n_half) * np.sum(np.cos(j * m * np.pi / n_half) / m, axis=1)
    R -= (np.pi / n_half**2) * np.where(j[:, 0] % 2 == 0, 1.0, -1.0)
    return R


def _boundary_frame(geometry, theta0, ms):
    if not isinstance(geometry, Curve):
        raise GeometryError("on-boundary layer values are implemented for curves (n = 2) only")
    theta = theta0 + 2.0 * np.pi * np.arange(ms) / ms
    p, normal, speed, kappa = geometry._frame(theta)
    return theta, p, normal, speed, kappa


def _sample_boundary_density(dens, where, tau):
    """Evaluate a boundary density on the (node, panel-time) grid."""
    where = np.asarray(where)
    if where.ndim == 1:  # curve parameters
        vals = dens(where[:, None], tau[None, :])
    else:  # surface points
        vals = np.stack([np.asarray(dens(where, tk), dtype=float) for tk in tau], axis=1)
    return np.broadcast_to(np.asarray(vals, dtype=float), (where.shape[0], tau.shape[0]))


# ---------------------------------------------------------------------------
# off-boundary layer evaluation


def _upsampled_ms(geometry, base_ms, dist):
    """Node count resolving kernel features of spatial scale `dist`."""
    if not np.isfinite(dist) or dist <= 0:
        return base_ms
    need = int(20.0 * geometry.diameter / dist)
    return int(min(6144, max(base_ms, need)))


def offboundary_double_layer(coeff, geometry, dens, x, t, ms, m_time, q,
                             direction=None):
    """Double-layer-type value at strictly off-boundary points.

    direction=None gives the standard kernel (normal derivative in the
    integration variable); a fixed unit vector v gives instead the
    directional derivative <grad_x, v> of the single-layer kernel, used
    for gradient limits and the adjoint-kernel boundary operator.
    """
    n = geometry.dimension
    pts, single = _as_points(x, n)
    t = float(t)
    if coeff.a1(t) <= 0.0:
        return _ret(np.zeros(pts.shape[0]), single)
    nodes = geometry.nodes(ms)
    d = pts[:, None, :] - nodes.points[None, :, :]
    d2 = np.sum(d * d, axis=2)
    if direction is None:
        num = np.sum(d * nodes.normals[None, :, :], axis=2)
    else:
        num = -np.sum(d * np.asarray(direction, dtype=float), axis=2)
    ratio = num / np.maximum(d2, 1e-300)
    z = _z_grid(coeff, t, m_time, q)
    tau = _panel_times(coeff, t, z)
    where = nodes.params if nodes.params is not None else nodes.points
    phi = _sample_boundary_density(dens, where, tau)
    vals = backend.dlayer_sum(n, d2, ratio, nodes.weights, z, phi)
    return _ret(vals, single)


def offboundary_single_layer(coeff, geometry, dens, x, t, ms, m_time, q):
    n = geometry.dimension
    pts, single = _as_points(x, n)
    t = float(t)
    if coeff.a1(t) <= 0.0:
        return _ret(np.zeros(pts.shape[0]), single)
    nodes = geometry.nodes(ms)
    d = pts[:, None, :] - nodes.points[None, :, :]
    d2 = np.sum(d * d, axis=2)
    z = _z_grid(coeff, t, m_time, q)
    tau = _panel_times(coeff, t, z)
    where = nodes.params if nodes.params is not None else nodes.points
    phi = _sample_boundary_density(dens, where, tau)
    vals = backend.slayer_sum(n, d2, nodes.weights, z, phi)
    return _ret(vals, single)


# ---------------------------------------------------------------------------
# on-boundary layer values (curves)


def boundary_double_layer(coeff, geometry, dens, xi0, t, ms, m_time, q,
                          direction=None):
    """Direct boundary value of the double-layer-type integral at xi0.

    The spatial rule is the trapezoid rule with the diagonal replaced by
    its analytic limit <x0 - xi, nu(xi)>/|x0 - xi|^2 -> -curvature/2."""
    t = float(t)
    if coeff.a1(t) <= 0.0:
        return 0.0
    xi0 = np.asarray(xi0, dtype=float)
    theta, p, normal, speed, kappa = _boundary_frame(geometry, geometry.param_of(xi0), ms)
    w = speed * (2.0 * np.pi / ms)
    d = xi0[None, :] - p
    d2 = np.sum(d * d, axis=1)
    if direction is None:
        num = np.sum(d * normal, axis=1)
    else:
        num = -d @ np.asarray(direction, dtype=float)
    ratio = num / np.maximum(d2, 1e-300)
    ratio[0] = -0.5 * kappa[0]
    d2[0] = 0.0
    z = _z_grid(coeff, t, m_time, q)
    tau = _panel_times(coeff, t, z)
    phi = _sample_boundary_density(dens, theta % (2.0 * np.pi), tau)
    vals = backend.dlayer_sum(2, d2[None, :], ratio[None, :], w, z, phi)
    return float(vals[0])


def boundary_single_layer(coeff, geometry, dens, xi0, t, ms, m_time, q):
    """Direct boundary value of the single-layer integral at xi0.

    The z-exact kernel sum K(theta) carries a log singularity whose
    coefficient comes only from the z=0 panel; the split
    K*speed = G(theta) ln(4 sin^2((theta-theta0)/2)) + H(theta)
    is integrated by the spectral log rule (G) plus the trapezoid (H),
    with the diagonal value of H evaluated analytically.
    """
    t = float(t)
    if coeff.a1(t) <= 0.0:
        return 0.0
    if ms % 2:
        ms += 1
    xi0 = np.asarray(xi0, dtype=float)
    theta, p, normal, speed, kappa = _boundary_frame(geometry, geometry.param_of(xi0), ms)
    d = xi0[None, :] - p
    d2 = np.sum(d * d, axis=1)
    d2[0] = 0.0
    z = _z_grid(coeff, t, m_time, q)
    tau = _panel_times(coeff, t, z)
    phi = _sample_boundary_density(dens, theta % (2.0 * np.pi), tau)
    panels = backend.slayer_panels(2, d2[None, :], np.ones(ms), z)  # (M, 1, ms)
    K = np.sum(panels[:, 0, :] * phi.T, axis=0)
    Ktil = K * speed
    G = -speed * phi[:, 0] / (4.0 * np.pi)
    dth = 2.0 * np.pi * np.arange(ms) / ms
    log_sin = np.zeros(ms)
    log_sin[1:] = np.log(4.0 * np.sin(dth[1:] / 2.0) ** 2)
    H = Ktil - G * log_sin
    z1 = z[1]
    diag = phi[0, 0] * (-EULER_GAMMA + np.log(4.0 * z1) - 2.0 * np.log(speed[0]))
    if z.shape[0] > 2:
        diag += np.sum(phi[0, 1:] * np.log(z[2:] / z[1:-1]))
    H[0] = speed[0] / (4.0 * np.pi) * diag
    R = kress_log_weights(ms // 2)
    return float(R @ G + (2.0 * np.pi / ms) * np.sum(H))


# ---------------------------------------------------------------------------
# volume and Poisson


def _gauss_convolve(phi, pts, s, n, order, use_grad=False):
    """Convolution of the heat kernel at diffusion value s with phi.

    When phi exposes a Gaussian factor g(center, sigma) the Gauss-Hermite
    nodes are placed on the product Gaussian kernel*g (center mu, width
    h = s*sigma/(s+sigma)), which resolves the integrand at every ratio
    of kernel width to density width; the residual phi/g is bounded and
    smooth for the presets.  Without a factor, nodes center on the kernel.
    """
    y, wts = _hermite_rule(n, order)
    split = getattr(phi, "gaussian_split", None)
    if split is None:
        arg = pts[:, None, :] + 2.0 * np.sqrt(s) * y[None, :, :]
        if use_grad:
            return np.einsum("kgj,g->kj", phi.grad(arg), wts)
        return np.asarray(phi(arg), dtype=float) @ wts
    c0, sg = split()
    c0 = np.asarray(c0, dtype=float)
    h = s * sg / (s + sg)
    mu = (sg * pts + s * c0[None, :]) / (sg + s)
    r2 = np.sum((pts - c0[None, :]) ** 2, axis=1)
    with np.errstate(under="ignore"):
        C = (sg / (sg + s)) ** (0.5 * n) * np.exp(-r2 / (4.0 * (sg + s)))
    arg = mu[:, None, :] + 2.0 * np.sqrt(h) * y[None, :, :]
    expo = np.exp(np.sum((arg - c0) ** 2, axis=2) / (4.0 * sg))
    if use_grad:
        vals = np.einsum("kgj,kg,g->kj", phi.grad(arg), expo, wts)
        return C[:, None] * vals
    vals = (np.asarray(phi(arg), dtype=float) * expo) @ wts
    return C * vals


def _poisson_raw(coeff, phi, x, t, n, order, use_grad=False):
    pts, single = _as_points(x, n)
    s = float(coeff.a1(t))
    if s <= 0.0:
        vals = phi.grad(pts) if use_grad else np.asarray(phi(pts), dtype=float)
        return vals[0] if single else vals
    vals = _gauss_convolve(phi, pts, s, n, order, use_grad=use_grad)
    if use_grad:
        return vals[0] if single else vals
    return _ret(vals, single)


class _FrozenSource:
    """Adapter viewing a space-time source at a fixed time as a spatial
    density, so the convolution quadrature can be reused."""

    def __init__(self, source, tau):
        self._source = source
        self._tau = tau

    def __call__(self, x):
        return self._source.source(x, self._tau)

    def grad(self, x):
        return self._source.source_grad(x, self._tau)

    def _delegate(self, name):
        inner = getattr(self._source, name, None)
        if inner is None:
            bump = getattr(self._source, "bump", None)
            inner = getattr(bump, name, None)
        return inner

    @property
    def gaussian_split(self):
        return self._delegate("gaussian_split")

    @property
    def quad_box(self):
        return self._delegate("quad_box")


def _box_rule(box, order, n):
    lo, hi = (np.asarray(e, dtype=float) for e in box)
    g, w = np.polynomial.legendre.leggauss(order)
    axes, wts1d = [], []
    for j in range(n):
        axes.append(0.5 * (hi[j] + lo[j]) + 0.5 * (hi[j] - lo[j]) * g)
        wts1d.append(0.5 * (hi[j] - lo[j]) * w)
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gg.ravel() for gg in grids], axis=1)
    wts = np.ones(pts.shape[0])
    for wg in np.meshgrid(*wts1d, indexing="ij"):
        wts *= wg.ravel()
    return pts, wts


def _volume_raw(coeff, source, x, t, n, m_time, q, order, gl_order=6,
                box_order=160, use_grad=False):
    """Outer integral: Gauss-Legendre on time panels graded (through the
    z = b(t, tau) image) toward tau = t.  Inner integral: Gauss-Legendre
    over the support box once the kernel width sqrt(b) is resolvable on
    it, else the Gaussian-split Hermite rule (which handles b -> 0)."""
    pts, single = _as_points(x, n)
    t = float(t)
    shape = (pts.shape[0], n) if use_grad else (pts.shape[0],)
    acc = np.zeros(shape)
    if t <= 0.0 or coeff.a1(t) <= 0.0:
        return (acc[0] if use_grad else float(acc[0])) if single else acc
    z = _z_grid(coeff, t, m_time, q)
    tau_edges = np.atleast_1d(coeff.invert_b(t, z))  # decreasing: t ... 0
    gl_x, gl_w = np.polynomial.legendre.leggauss(gl_order)
    frozen0 = _FrozenSource(source, t)
    box = frozen0.quad_box() if frozen0.quad_box is not None else None
    box_rule = None
    b_star = -1.0
    pts_norm2 = np.sum(pts * pts, axis=1)
    if box is not None:
        box_rule = _box_rule((box[0], box[1]), box_order, n)
        width = float(np.max(np.asarray(box[1]) - np.asarray(box[0])))
        b_star = (3.0 * width / box_order) ** 2
        q_norm2 = np.sum(box_rule[0] ** 2, axis=1)
    for j in range(m_time):
        lo, hi = tau_edges[j + 1], tau_edges[j]
        if hi - lo <= 0.0:
            continue
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        for xg, wg in zip(gl_x, gl_w):
            tauv = mid + half * xg
            b = float(coeff.b(t, tauv))
            frozen = _FrozenSource(source, tauv)
            if b <= 0.0:
                inner = frozen.grad(pts) if use_grad else np.asarray(frozen(pts), dtype=float)
            elif b <= b_star or box_rule is None:
                inner = _gauss_convolve(frozen, pts, b, n, order, use_grad=use_grad)
            else:
                qpts, qwts = box_rule
                d2 = pts_norm2[:, None] + q_norm2[None, :] - 2.0 * (pts @ qpts.T)
                ker = backend.heat_kernel(np.maximum(d2, 0.0), b, n)
                if use_grad:
                    inner = np.einsum("kg,gj,g->kj", ker, frozen.grad(qpts), qwts)
                else:
                    inner = (ker * np.asarray(frozen(qpts), dtype=float)[None, :]) @ qwts
            acc += (wg * half) * inner
    return (acc[0] if use_grad else float(acc[0])) if single else acc


# ---------------------------------------------------------------------------
# the public field evaluators


def _require_kind(field_obj, kind):
    if field_obj.kind != kind:
        raise ValueError(f"expected a {kind}-kind field, got {field_obj.kind}")


def eval_poisson(P: PotentialField, x, t):
    """Poisson integral of the initial data; at t = 0 it returns the data
    itself (the initial condition)."""
    _require_kind(P, "P")
    n = P.geometry.dimension
    order = int(min(64, max(24, P.m_space)))
    return _poisson_raw(P.coeff, P.density.data, x, t, n, order)


def eval_volume(V: PotentialField, x, t):
    """Volume potential of the source; zero at t = 0."""
    _require_kind(V, "V")
    n = V.geometry.dimension
    order = int(min(64, max(48, V.m_space // 2)))
    return _volume_raw(V.coeff, V.density.data, x, t, n, V.m_time, V.q, order)


def _layer_eval(field_obj, x, t, direction=None):
    geo = field_obj.geometry
    n = geo.dimension
    pts, single = _as_points(x, n)
    out = np.empty(pts.shape[0])
    dens = field_obj.density.data
    off_idx, off_dists = [], []
    for i, p in enumerate(pts):
        if geo.locate(p) == ON_BOUNDARY:
            if field_obj.kind == "S":
                out[i] = boundary_single_layer(
                    field_obj.coeff, geo, dens, p, t, field_obj.m_space,
                    field_obj.m_time, field_obj.q)
            else:
                out[i] = boundary_double_layer(
                    field_obj.coeff, geo, dens, p, t, field_obj.m_space,
                    field_obj.m_time, field_obj.q, direction=direction)
        else:
            off_idx.append(i)
    if off_idx:
        sub = pts[off_idx]
        ref = geo.nodes(256 if n == 2 else (16, 32)).points
        dist = float(np.min(np.linalg.norm(sub[:, None, :] - ref[None, :, :], axis=2)))
        ms = _upsampled_ms(geo, field_obj.m_space, dist)
        if field_obj.kind == "S":
            vals = offboundary_single_layer(
                field_obj.coeff, geo, dens, sub, t, ms, field_obj.m_time, field_obj.q)
        else:
            vals = offboundary_double_layer(
                field_obj.coeff, geo, dens, sub, t, ms, field_obj.m_time,
                field_obj.q, direction=direction)
        out[np.asarray(off_idx)] = np.atleast_1d(vals)
    return _ret(out, single)


def eval_single_layer(S: PotentialField, x, t):
    _require_kind(S, "S")
    return _layer_eval(S, x, t)


def eval_double_layer(D: PotentialField, x, t):
    _require_kind(D, "D")
    return _layer_eval(D, x, t)


# ---------------------------------------------------------------------------
# nontangential limits


def _richardson(vals, contraction=0.9, atol=1e-13):
    """First-order Richardson ladder on offsets h, h/2, h/4, ... with a
    contraction check on successive differences."""
    vals = np.asarray(vals, dtype=float)
    d = np.abs(np.diff(vals))
    for k in range(len(d) - 1):
        if d[k + 1] > contraction * d[k] + atol:
            raise ConvergenceError(
                f"offset extrapolation not contracting: increments {d.tolist()}"
            )
    T = [vals]
    for j in range(1, len(vals)):
        prev = T[-1]
        fac = 2.0**j
        T.append((fac * prev[1:] - prev[:-1]) / (fac - 1.0))
    return float(T[-1][0])


def _offset_ladder(geometry, num=4):
    h0 = 0.05 * geometry.diameter
    while h0 >= geometry.reach:
        h0 /= 2.0
    return h0 * 0.5 ** np.arange(num)


def single_layer_gradient_limit(S: PotentialField, xi0, t, side="interior"):
    """Limit of <grad(S phi)(x, t), nu(xi0)> as x -> xi0 along the normal."""
    _require_kind(S, "S")
    if side not in ("interior", "exterior"):
        raise ValueError("side must be 'interior' or 'exterior'")
    geo = S.geometry
    xi0 = np.asarray(xi0, dtype=float)
    nu0 = geo.normal_at(xi0)
    sgn = -1.0 if side == "interior" else 1.0
    hs = _offset_ladder(geo)
    vals = []
    for h in hs:
        x = geo.offset_along_normal(xi0, sgn * h)
        ms = _upsampled_ms(geo, S.m_space, h)
        vals.append(offboundary_double_layer(
            S.coeff, geo, S.density.data, x, t, ms, S.m_time, S.q, direction=nu0))
    return _richardson(vals)


def adjoint_double_layer_boundary(S: PotentialField, xi0, t):
    """Direct boundary value of the adjoint kernel operator D*: the
    single-layer kernel differentiated along nu(xi0) in the target."""
    _require_kind(S, "S")
    geo = S.geometry
    xi0 = np.asarray(xi0, dtype=float)
    nu0 = geo.normal_at(xi0)
    return boundary_double_layer(S.coeff, geo, S.density.data, xi0, t,
                                 S.m_space, S.m_time, S.q, direction=nu0)


def double_layer_boundary_limit(D: PotentialField, xi0, t):
    """Interior nontangential limit of the double layer at xi0."""
    _require_kind(D, "D")
    geo = D.geometry
    xi0 = np.asarray(xi0, dtype=float)
    hs = _offset_ladder(geo)
    vals = []
    for h in hs:
        x = geo.offset_along_normal(xi0, -h)
        ms = _upsampled_ms(geo, D.m_space, h)
        vals.append(offboundary_double_layer(
            D.coeff, geo, D.density.data, x, t, ms, D.m_time, D.q))
    return _richardson(vals)


_EVAL = {
    "V": eval_volume,
    "P": eval_poisson,
    "S": eval_single_layer,
    "D": eval_double_layer,
}
