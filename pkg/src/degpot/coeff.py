"""Time coefficient a(t), its antiderivative and the lag function b(t, tau).

The diffusion coefficient is a function of time only.  Everything downstream
works with its antiderivative a1(t) = int_0^t a and with
b(t, tau) = a1(t) - a1(tau), so both are exposed with closed forms wherever
the coefficient kind allows it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionError, DomainError

_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class TimeCoefficient:
    """Immutable coefficient on [0, T] with one of a few preset shapes.

    kind is one of "constant", "power", "affine", "piecewise_poly",
    "tabulated"; params holds the kind-specific data.
    """

    kind: str
    horizon: float
    params: tuple = field(default=())

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        if self.kind == "power" and self.params[0] < 0:
            raise DomainError("power exponent must be >= 0 so that a is in L1[0,T]")

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, c: float, horizon: float) -> "TimeCoefficient":
        return cls("constant", float(horizon), (float(c),))

    @classmethod
    def power(cls, p: float, horizon: float) -> "TimeCoefficient":
        """a(t) = t**p with p >= 0."""
        return cls("power", float(horizon), (float(p),))

    @classmethod
    def affine(cls, alpha: float, beta: float, horizon: float) -> "TimeCoefficient":
        """a(t) = alpha + beta*t."""
        return cls("affine", float(horizon), (float(alpha), float(beta)))

    @classmethod
    def piecewise_poly(cls, breakpoints, coeff_rows, horizon: float) -> "TimeCoefficient":
        """Polynomial pieces; row k gives coefficients (ascending powers)
        in the local variable t - breakpoints[k]."""
        bp = np.asarray(breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2 or np.any(np.diff(bp) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        if abs(bp[0]) > _ZERO_TOL or abs(bp[-1] - horizon) > _ZERO_TOL:
            raise DomainError("breakpoints must span [0, horizon]")
        rows = [np.asarray(r, dtype=float) for r in coeff_rows]
        if len(rows) != bp.size - 1:
            raise DomainError("need one coefficient row per interval")
        # accumulated antiderivative offsets so that a1 is continuous
        offsets = np.zeros(len(rows))
        acc = 0.0
        for k, row in enumerate(rows):
            offsets[k] = acc
            width = bp[k + 1] - bp[k]
            powers = np.arange(1, row.size + 1)
            acc += float(np.sum(row * width**powers / powers))
        return cls("piecewise_poly", float(horizon), (bp, tuple(rows), offsets))

    @classmethod
    def tabulated(cls, grid, values) -> "TimeCoefficient":
        """Piecewise-linear interpolant of sampled (t, a) data; horizon is
        the last grid point."""
        g = np.asarray(grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
            raise DomainError("grid must be strictly increasing")
        if abs(g[0]) > _ZERO_TOL:
            raise DomainError("grid must start at t = 0")
        if v.shape != g.shape:
            raise DomainError("values must match the grid shape")
        # exact antiderivative of the interpolant at the grid points
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(g))))
        return cls("tabulated", float(g[-1]), (g, v, cum))

    # -- evaluation -------------------------------------------------------

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -_ZERO_TOL) or np.any(t > self.horizon + _ZERO_TOL):
            raise DomainError(f"t outside [0, {self.horizon}]")
        return np.clip(t, 0.0, self.horizon)

    def a(self, t):
        """a(t); vectorized over t."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(self._check_t(t))
        if self.kind == "constant":
            out = np.full_like(t, self.params[0])
        elif self.kind == "power":
            out = t ** self.params[0]
        elif self.kind == "affine":
            al, be = self.params
            out = al + be * t
        elif self.kind == "piecewise_poly":
            bp, rows, _ = self.params
            idx = np.clip(np.searchsorted(bp, t, side="right") - 1, 0, len(rows) - 1)
            out = np.zeros_like(t)
            for k, row in enumerate(rows):
                sel = idx == k
                if np.any(sel):
                    out[sel] = np.polynomial.polynomial.polyval(t[sel] - bp[k], row)
        elif self.kind == "tabulated":
            g, v, _ = self.params
            out = np.interp(t, g, v)
        else:
            raise AssumptionError(f"unknown kind {self.kind}")
        return float(out[0]) if scalar else out

    def a1(self, t):
        """Antiderivative int_0^t a(z) dz; closed form for every kind."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(self._check_t(t))
        if self.kind == "constant":
            out = self.params[0] * t
        elif self.kind == "power":
            p = self.params[0]
            out = t ** (p + 1.0) / (p + 1.0)
        elif self.kind == "affine":
            al, be = self.params
            out = al * t + 0.5 * be * t * t
        elif self.kind == "piecewise_poly":
            bp, rows, offsets = self.params
            idx = np.clip(np.searchsorted(bp, t, side="right") - 1, 0, len(rows) - 1)
            out = np.zeros_like(t)
            for k, row in enumerate(rows):
                sel = idx == k
                if np.any(sel):
                    anti = np.concatenate(([0.0], row / np.arange(1, row.size + 1)))
                    out[sel] = offsets[k] + np.polynomial.polynomial.polyval(t[sel] - bp[k], anti)
        elif self.kind == "tabulated":
            g, v, cum = self.params
            idx = np.clip(np.searchsorted(g, t, side="right") - 1, 0, g.size - 2)
            t0 = g[idx]
            v0 = v[idx]
            slope = (v[idx + 1] - v0) / (g[idx + 1] - t0)
            loc = t - t0
            out = cum[idx] + v0 * loc + 0.5 * slope * loc * loc
        else:
            raise AssumptionError(f"unknown kind {self.kind}")
        return float(out[0]) if scalar else out

    def b(self, t, tau):
        """b(t, tau) = a1(t) - a1(tau) for 0 <= tau <= t <= T."""
        t_arr = np.asarray(t, dtype=float)
        tau_arr = np.asarray(tau, dtype=float)
        if np.any(tau_arr > t_arr + _ZERO_TOL):
            raise DomainError("b(t, tau) requires tau <= t")
        return self.a1(t) - self.a1(tau)

    # -- classification ---------------------------------------------------

    def classify(self, grid_size: int = 256) -> str:
        """Return "A", "B" or "neither".

        "A": a >= 0 on a uniform sample with only isolated zeros (the
        special case of "B").  "B": a1 > 0 at all sampled t > 0.
        """
        if grid_size < 64:
            raise DomainError("grid_size must be >= 64")
        cached = getattr(self, "_classify_cache", None)
        if cached is not None and cached[0] == grid_size:
            return cached[1]
        ts = np.linspace(0.0, self.horizon, grid_size)
        av = np.atleast_1d(np.asarray(self.a(ts), dtype=float))
        scale = max(1.0, float(np.max(np.abs(av))))
        result = "neither"
        if np.all(av >= -1e-12 * scale):
            near_zero = np.abs(av) <= 1e-12 * scale
            # zeros must be isolated: no two adjacent sampled zeros except
            # possibly the endpoint t = 0 itself
            interior = near_zero[1:]
            if not np.any(interior[:-1] & interior[1:]):
                result = "A"
        if result == "neither":
            a1v = np.atleast_1d(np.asarray(self.a1(ts[1:]), dtype=float))
            if np.all(a1v > 0.0):
                result = "B"
        object.__setattr__(self, "_classify_cache", (grid_size, result))
        return result

    # -- inversion of b ---------------------------------------------------

    def invert_b(self, t: float, z):
        """Solve b(t, tau) = z for tau in [0, t]; z in [0, a1(t)].

        Requires assumption (a) so that a1 is nondecreasing; vectorized
        bisection with absolute tolerance 1e-12 in z.
        """
        if self.classify() != "A":
            raise AssumptionError("invert_b requires a coefficient of class A")
        z_arr = np.atleast_1d(np.asarray(z, dtype=float))
        top = float(self.a1(t))
        if np.any(z_arr < -1e-12) or np.any(z_arr > top + 1e-12):
            raise DomainError(f"z outside [0, a1(t)] = [0, {top}]")
        target = top - np.clip(z_arr, 0.0, top)  # a1(tau) = a1(t) - z
        lo = np.zeros_like(target)
        hi = np.full_like(target, float(t))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            val = np.atleast_1d(np.asarray(self.a1(mid), dtype=float))
            high = val > target
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
        tau = 0.5 * (lo + hi)
        return tau if np.ndim(z) else float(tau[0])
