"""Bounded domains with smooth parametric boundaries.

Curves (n = 2) are parametrized over [0, 2*pi) and discretized with the
uniform-in-parameter trapezoid rule, which is spectrally accurate for the
smooth periodic integrands arising here.  The sphere (n = 3) uses a product
Gauss-Legendre (polar) x uniform (azimuth) rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ResolutionError

INSIDE = "inside"
OUTSIDE = "outside"
ON_BOUNDARY = "on-boundary"

_BD_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryNodes:
    """Quadrature rule on the boundary: points, outward unit normals,
    weights, and (for curves) the parameter values and curvatures."""

    points: np.ndarray     # (m, n)
    normals: np.ndarray    # (m, n)
    weights: np.ndarray    # (m,)
    params: np.ndarray | None = None      # (m,) curve parameter
    curvatures: np.ndarray | None = None  # (m,) curves only
    speeds: np.ndarray | None = None      # (m,) |x'(theta)|, curves only


class BoundaryGeometry:
    """Base class; subclasses fix the shape."""

    dimension: int
    holder_exponent: float = 0.99  # metadata only; shapes here are smooth

    def nodes(self, m) -> BoundaryNodes:
        raise NotImplementedError

    def locate(self, x) -> str:
        raise NotImplementedError

    def contains(self, x) -> bool:
        return self.locate(x) == INSIDE

    def normal_at(self, x) -> np.ndarray:
        raise NotImplementedError

    def offset_along_normal(self, xi0, h: float) -> np.ndarray:
        """xi0 + h * nu(xi0); h < 0 moves inside, h > 0 outside."""
        if abs(h) >= self.reach:
            raise GeometryError(f"|h| = {abs(h)} exceeds the boundary reach {self.reach}")
        xi0 = np.asarray(xi0, dtype=float)
        return xi0 + h * self.normal_at(xi0)

    @property
    def reach(self) -> float:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError


class Curve(BoundaryGeometry):
    """Closed planar curve given by point(theta) with analytic derivatives."""

    dimension = 2

    def point(self, theta):
        raise NotImplementedError

    def dpoint(self, theta):
        raise NotImplementedError

    def d2point(self, theta):
        raise NotImplementedError

    def _frame(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        p = self.point(theta)
        dp = self.dpoint(theta)
        d2p = self.d2point(theta)
        speed = np.hypot(dp[:, 0], dp[:, 1])
        if np.any(speed < 1e-14):
            raise GeometryError("degenerate parametrization (zero speed)")
        normal = np.stack([dp[:, 1], -dp[:, 0]], axis=1) / speed[:, None]
        kappa = (dp[:, 0] * d2p[:, 1] - dp[:, 1] * d2p[:, 0]) / speed**3
        return p, normal, speed, kappa

    def nodes(self, m) -> BoundaryNodes:
        m = int(m)
        if m < 8:
            raise ResolutionError("need at least 8 boundary nodes")
        theta = 2.0 * np.pi * np.arange(m) / m
        p, normal, speed, kappa = self._frame(theta)
        w = speed * (2.0 * np.pi / m)
        return BoundaryNodes(p, normal, w, params=theta, curvatures=kappa, speeds=speed)

    def param_of(self, x) -> float:
        raise NotImplementedError

    def point_at(self, theta) -> np.ndarray:
        """Boundary point at a single parameter value."""
        return self.point(np.atleast_1d(float(theta)))[0]

    def normal_at(self, x):
        th = self.param_of(x)
        _, normal, _, _ = self._frame(th)
        return normal[0]

    def curvature_at(self, x) -> float:
        th = self.param_of(x)
        return float(self._frame(th)[3][0])

    @property
    def reach(self) -> float:
        theta = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
        kappa = self._frame(theta)[3]
        return float(1.0 / np.max(np.abs(kappa)))


class Circle(Curve):
    def __init__(self, center=(0.0, 0.0), radius=1.0):
        if radius <= 0:
            raise GeometryError("radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def point(self, theta):
        theta = np.atleast_1d(theta)
        return self.center + self.radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)

    def dpoint(self, theta):
        theta = np.atleast_1d(theta)
        return self.radius * np.stack([-np.sin(theta), np.cos(theta)], axis=1)

    def d2point(self, theta):
        theta = np.atleast_1d(theta)
        return self.radius * np.stack([-np.cos(theta), -np.sin(theta)], axis=1)

    def param_of(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return float(np.arctan2(d[1], d[0]) % (2.0 * np.pi))

    def locate(self, x):
        r = float(np.linalg.norm(np.asarray(x, dtype=float) - self.center))
        if abs(r - self.radius) <= _BD_TOL:
            return ON_BOUNDARY
        return INSIDE if r < self.radius else OUTSIDE

    def normal_at(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return d / np.linalg.norm(d)

    @property
    def reach(self):
        return self.radius

    @property
    def diameter(self):
        return 2.0 * self.radius


class Ellipse(Curve):
    def __init__(self, center=(0.0, 0.0), semi_axes=(2.0, 1.0)):
        a, b = semi_axes
        if a <= 0 or b <= 0:
            raise GeometryError("semi-axes must be positive")
        self.center = np.asarray(center, dtype=float)
        self.a = float(a)
        self.b = float(b)

    def point(self, theta):
        theta = np.atleast_1d(theta)
        return self.center + np.stack([self.a * np.cos(theta), self.b * np.sin(theta)], axis=1)

    def dpoint(self, theta):
        theta = np.atleast_1d(theta)
        return np.stack([-self.a * np.sin(theta), self.b * np.cos(theta)], axis=1)

    def d2point(self, theta):
        theta = np.atleast_1d(theta)
        return np.stack([-self.a * np.cos(theta), -self.b * np.sin(theta)], axis=1)

    def param_of(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return float(np.arctan2(d[1] / self.b, d[0] / self.a) % (2.0 * np.pi))

    def locate(self, x):
        d = np.asarray(x, dtype=float) - self.center
        s = np.hypot(d[0] / self.a, d[1] / self.b)
        if abs(s - 1.0) * min(self.a, self.b) <= _BD_TOL:
            return ON_BOUNDARY
        return INSIDE if s < 1.0 else OUTSIDE

    @property
    def diameter(self):
        return 2.0 * max(self.a, self.b)


class StarCurve(Curve):
    """Radial graph r(theta) = r0 + sum_k (c_k cos k th + s_k sin k th)."""

    def __init__(self, center=(0.0, 0.0), r0=1.0, cos_coeffs=(), sin_coeffs=()):
        self.center = np.asarray(center, dtype=float)
        self.r0 = float(r0)
        self.c = np.asarray(cos_coeffs, dtype=float)
        self.s = np.asarray(sin_coeffs, dtype=float)
        rmin = float(np.min(self._radius(np.linspace(0, 2 * np.pi, 1440))))
        if rmin <= 0:
            raise GeometryError("radial function must stay positive")

    def _harmonics(self, theta, deriv=0):
        theta = np.atleast_1d(theta)
        out = np.zeros_like(theta)
        for k, ck in enumerate(self.c, start=1):
            if deriv == 0:
                out += ck * np.cos(k * theta)
            elif deriv == 1:
                out += -ck * k * np.sin(k * theta)
            else:
                out += -ck * k * k * np.cos(k * theta)
        for k, sk in enumerate(self.s, start=1):
            if deriv == 0:
                out += sk * np.sin(k * theta)
            elif deriv == 1:
                out += sk * k * np.cos(k * theta)
            else:
                out += -sk * k * k * np.sin(k * theta)
        return out

    def _radius(self, theta, deriv=0):
        base = self.r0 if deriv == 0 else 0.0
        return base + self._harmonics(theta, deriv)

    def point(self, theta):
        theta = np.atleast_1d(theta)
        r = self._radius(theta)
        return self.center + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)

    def dpoint(self, theta):
        theta = np.atleast_1d(theta)
        r, dr = self._radius(theta), self._radius(theta, 1)
        return np.stack(
            [dr * np.cos(theta) - r * np.sin(theta), dr * np.sin(theta) + r * np.cos(theta)],
            axis=1,
        )

    def d2point(self, theta):
        theta = np.atleast_1d(theta)
        r, dr, d2r = self._radius(theta), self._radius(theta, 1), self._radius(theta, 2)
        return np.stack(
            [
                (d2r - r) * np.cos(theta) - 2 * dr * np.sin(theta),
                (d2r - r) * np.sin(theta) + 2 * dr * np.cos(theta),
            ],
            axis=1,
        )

    def param_of(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return float(np.arctan2(d[1], d[0]) % (2.0 * np.pi))

    def locate(self, x):
        d = np.asarray(x, dtype=float) - self.center
        r = float(np.hypot(d[0], d[1]))
        rb = float(self._radius(self.param_of(x))[0])
        if abs(r - rb) <= _BD_TOL:
            return ON_BOUNDARY
        return INSIDE if r < rb else OUTSIDE

    @property
    def diameter(self):
        theta = np.linspace(0, 2 * np.pi, 1440)
        return 2.0 * float(np.max(self._radius(theta)))


class Sphere(BoundaryGeometry):
    dimension = 3

    def __init__(self, center=(0.0, 0.0, 0.0), radius=1.0):
        if radius <= 0:
            raise GeometryError("radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def nodes(self, m) -> BoundaryNodes:
        if np.ndim(m) == 0:
            n_pol, n_az = int(m), 2 * int(m)
        else:
            n_pol, n_az = int(m[0]), int(m[1])
        if n_pol < 4 or n_az < 8:
            raise ResolutionError("sphere rule too coarse")
        mu, wmu = np.polynomial.legendre.leggauss(n_pol)  # mu = cos(polar)
        phi = 2.0 * np.pi * np.arange(n_az) / n_az
        mu_g, phi_g = np.meshgrid(mu, phi, indexing="ij")
        sin_pol = np.sqrt(1.0 - mu_g**2)
        nx = sin_pol * np.cos(phi_g)
        ny = sin_pol * np.sin(phi_g)
        nz = mu_g
        normals = np.stack([nx.ravel(), ny.ravel(), nz.ravel()], axis=1)
        points = self.center + self.radius * normals
        w = (wmu[:, None] * np.full(n_az, 2.0 * np.pi / n_az)[None, :]).ravel()
        weights = w * self.radius**2
        return BoundaryNodes(points, normals, weights)

    def locate(self, x):
        r = float(np.linalg.norm(np.asarray(x, dtype=float) - self.center))
        if abs(r - self.radius) <= _BD_TOL:
            return ON_BOUNDARY
        return INSIDE if r < self.radius else OUTSIDE

    def normal_at(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return d / np.linalg.norm(d)

    @property
    def reach(self):
        return self.radius

    @property
    def diameter(self):
        return 2.0 * self.radius


def make_geometry(spec: dict) -> BoundaryGeometry:
    """Build a geometry from a config table like
    {"shape": "circle", "center": [0, 0], "radius": 1.0}."""
    shape = spec.get("shape")
    if shape == "circle":
        return Circle(spec.get("center", (0.0, 0.0)), spec.get("radius", 1.0))
    if shape == "ellipse":
        return Ellipse(spec.get("center", (0.0, 0.0)), spec.get("semi_axes", (2.0, 1.0)))
    if shape == "star":
        return StarCurve(
            spec.get("center", (0.0, 0.0)),
            spec.get("r0", 1.0),
            spec.get("cos_coeffs", ()),
            spec.get("sin_coeffs", ()),
        )
    if shape == "sphere":
        return Sphere(spec.get("center", (0.0, 0.0, 0.0)), spec.get("radius", 1.0))
    raise GeometryError(f"unknown shape {shape!r}")
