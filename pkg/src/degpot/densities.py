"""Preset densities with analytic derivatives.

Spatial presets (Gaussian, smooth bump) carry gradients and Laplacians in
closed form so that manufactured-solution tests have no differentiation
error.  Boundary densities are thin wrappers around callables of
(parameter-or-point, time).
"""

from __future__ import annotations

import numpy as np

from .errors import SupportError


class GaussianDensity:
    """phi(x) = exp(-|x - c|^2 / (4 sigma)).

    Convolving with the Gaussian kernel at diffusion value s gives the
    closed form (sigma/(sigma+s))^(n/2) * exp(-|x-c|^2 / (4 (sigma+s))),
    used as an exact oracle for the Poisson integral.
    """

    def __init__(self, center, sigma: float):
        self.center = np.asarray(center, dtype=float)
        self.sigma = float(sigma)
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum((x - self.center) ** 2, axis=-1)
        with np.errstate(under="ignore"):
            return np.exp(-r2 / (4.0 * self.sigma))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.center
        return -d / (2.0 * self.sigma) * self(x)[..., None]

    def lap(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.center
        r2 = np.sum(d * d, axis=-1)
        n = x.shape[-1]
        return (r2 / (4.0 * self.sigma**2) - n / (2.0 * self.sigma)) * self(x)

    def convolved(self, x, s: float):
        """Exact Gaussian-Gaussian convolution with kernel value s >= 0."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        r2 = np.sum((x - self.center) ** 2, axis=-1)
        c = self.sigma + s
        with np.errstate(under="ignore"):
            return (self.sigma / c) ** (0.5 * n) * np.exp(-r2 / (4.0 * c))

    def support_margin(self, geometry, tail=1e-12) -> float:
        """Distance from the effective support (value > tail) to the
        boundary, measured along rays; negative means it pokes out."""
        r_tail = np.sqrt(-4.0 * self.sigma * np.log(tail))
        return _margin_of_ball(geometry, self.center, r_tail)

    def gaussian_split(self):
        """(center, sigma) of a Gaussian factor phi = g * r with smooth,
        moderate residual r; lets convolution quadratures center and scale
        their nodes on the product Gaussian."""
        return self.center, self.sigma

    def quad_box(self):
        r = np.sqrt(-4.0 * self.sigma * np.log(1e-18))
        return self.center - r, self.center + r


class BumpDensity:
    """C-infinity bump: exp(1 - 1/(1 - rho)) for rho = |x-c|^2/R^2 < 1."""

    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    # g(rho) = exp(1 - 1/(1-rho)) and its rho-derivatives
    @staticmethod
    def _g(rho, order=0):
        rho = np.asarray(rho, dtype=float)
        inside = rho < 1.0
        out = np.zeros_like(rho)
        r = rho[inside]
        one = 1.0 - r
        with np.errstate(under="ignore"):
            g = np.exp(1.0 - 1.0 / one)
        if order == 0:
            out[inside] = g
        elif order == 1:
            out[inside] = -g / one**2
        elif order == 2:
            out[inside] = g * (1.0 / one**4 - 2.0 / one**3)
        elif order == 3:
            out[inside] = g * (-1.0 / one**6 + 6.0 / one**5 - 6.0 / one**4)
        else:
            raise ValueError("order must be 0..3")
        return out

    def _rho(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum((x - self.center) ** 2, axis=-1) / self.radius**2

    def __call__(self, x):
        return self._g(self._rho(x))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        rho = self._rho(x)
        return self._g(rho, 1)[..., None] * 2.0 * (x - self.center) / self.radius**2

    def lap(self, x):
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        rho = self._rho(x)
        return self._g(rho, 2) * 4.0 * rho / self.radius**2 + self._g(rho, 1) * 2.0 * n / self.radius**2

    def grad_lap(self, x):
        """Gradient of the Laplacian (needed for gradients of manufactured
        volume sources)."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        rho = self._rho(x)
        dlap_drho = (
            self._g(rho, 3) * 4.0 * rho / self.radius**2
            + self._g(rho, 2) * (4.0 + 2.0 * n) / self.radius**2
        )
        return dlap_drho[..., None] * 2.0 * (x - self.center) / self.radius**2

    @property
    def lipschitz_bound(self) -> float:
        """max |grad| over a dense radial sample (radial profile is exact)."""
        r = np.linspace(0.0, self.radius * (1 - 1e-9), 20001)
        rho = (r / self.radius) ** 2
        grad_mag = np.abs(self._g(rho, 1)) * 2.0 * r / self.radius**2
        return float(np.max(grad_mag))

    def support_margin(self, geometry) -> float:
        return _margin_of_ball(geometry, self.center, self.radius)

    def gaussian_split(self):
        return self.center, (self.radius / 4.0) ** 2

    def quad_box(self):
        return self.center - self.radius, self.center + self.radius


def _margin_of_ball(geometry, center, r_support) -> float:
    """Distance from a support ball to the boundary along a dense sample."""
    nodes = geometry.nodes(256 if geometry.dimension == 2 else (24, 48))
    d = np.min(np.linalg.norm(nodes.points - np.asarray(center), axis=1))
    return float(d - r_support)


def require_interior_support(density, geometry) -> float:
    margin = density.support_margin(geometry)
    if margin <= 0:
        raise SupportError(
            f"density support must lie strictly inside the domain (margin {margin:.3g})"
        )
    return margin


class ManufacturedVolume:
    """Source f = a(t) [beta - a1(t) lap(beta)] whose exact Cauchy solution
    is u(x, t) = a1(t) beta(x) for any interior bump beta."""

    def __init__(self, coeff, bump: BumpDensity):
        self.coeff = coeff
        self.bump = bump

    def source(self, x, tau):
        a = self.coeff.a(tau)
        a1 = self.coeff.a1(tau)
        return np.asarray(a) * (self.bump(x) - np.asarray(a1) * self.bump.lap(x))

    def source_grad(self, x, tau):
        a = np.asarray(self.coeff.a(tau))
        a1 = np.asarray(self.coeff.a1(tau))
        return a[..., None] * (self.bump.grad(x) - a1[..., None] * self.bump.grad_lap(x))

    def support_margin(self, geometry) -> float:
        return self.bump.support_margin(geometry)

    def quad_box(self):
        return self.bump.quad_box()

    def gaussian_split(self):
        return self.bump.gaussian_split()

    def exact(self, x, t):
        return np.asarray(self.coeff.a1(t)) * self.bump(x)

    def exact_grad(self, x, t):
        return np.asarray(self.coeff.a1(t))[..., None] * self.bump.grad(x)


class TimeModulatedSource:
    """Volume source f(x, t) = profile(t) * spatial(x) with analytic
    spatial derivatives; profile defaults to 1."""

    def __init__(self, spatial, profile=None):
        self.spatial = spatial
        self.profile = profile if profile is not None else (lambda t: 1.0)

    def source(self, x, tau):
        return self.profile(tau) * np.asarray(self.spatial(x), dtype=float)

    def source_grad(self, x, tau):
        return self.profile(tau) * np.asarray(self.spatial.grad(x), dtype=float)

    def support_margin(self, geometry):
        return self.spatial.support_margin(geometry)

    def gaussian_split(self):
        return self.spatial.gaussian_split()

    def quad_box(self):
        return self.spatial.quad_box()

    def sup_bound(self) -> float:
        """sup |spatial| (profiles used here are bounded by 1)."""
        return 1.0


class BoundaryDensity:
    """Density on the lateral boundary, phi(theta-or-point, tau).

    func receives the curve parameter array (n = 2) or points (n = 3) and a
    time array, broadcasting to a common shape.
    """

    def __init__(self, func, initial_zero: bool = True):
        self.func = func
        self.initial_zero = initial_zero

    def __call__(self, where, tau):
        return np.asarray(self.func(where, tau), dtype=float)


def smooth_boundary_preset(name: str) -> BoundaryDensity:
    """Named presets used by tests and the CLI."""
    if name == "t_cos":
        return BoundaryDensity(lambda th, tau: np.asarray(tau) * np.cos(th))
    if name == "t_sin2":
        return BoundaryDensity(lambda th, tau: np.asarray(tau) * np.sin(th) ** 2)
    if name == "tsq_cos2":
        return BoundaryDensity(lambda th, tau: np.asarray(tau) ** 2 * np.cos(2 * th))
    if name == "one":
        return BoundaryDensity(lambda th, tau: np.ones(np.broadcast_shapes(np.shape(th), np.shape(tau))), initial_zero=False)
    raise ValueError(f"unknown boundary preset {name!r}")
