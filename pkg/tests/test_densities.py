"""Preset densities: analytic derivatives vs finite differences, the
Gaussian semigroup oracle, support margins, manufactured solutions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degpot.coeff import TimeCoefficient
from degpot.densities import (
    BoundaryDensity,
    BumpDensity,
    GaussianDensity,
    ManufacturedVolume,
    TimeModulatedSource,
    require_interior_support,
    smooth_boundary_preset,
)
from degpot.errors import SupportError
from degpot.geometry import Circle

pts2 = st.tuples(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4)).map(np.array)


def _fd_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _fd_lap(f, x, h=1e-4):
    out = 0.0
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        out += (f(x + e) - 2 * f(x) + f(x - e)) / h**2
    return out


@settings(max_examples=25, deadline=None)
@given(x=pts2)
def test_gaussian_derivatives(x):
    phi = GaussianDensity([0.1, -0.05], 0.07)
    assert np.allclose(phi.grad(x), _fd_grad(phi, x), atol=1e-7)
    assert phi.lap(x) == pytest.approx(_fd_lap(phi, x), abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(x=pts2)
def test_bump_derivatives(x):
    b = BumpDensity([0.0, 0.0], 0.6)
    assert np.allclose(b.grad(x), _fd_grad(b, x), atol=1e-6)
    assert b.lap(x) == pytest.approx(_fd_lap(b, x), abs=1e-4)
    fd_gl = _fd_grad(b.lap, x, h=1e-5)
    assert np.allclose(b.grad_lap(x), fd_gl, atol=1e-3)


def test_bump_compact_support():
    b = BumpDensity([0.0, 0.0], 0.5)
    far = np.array([[0.6, 0.0], [0.5, 0.01], [3.0, 3.0]])
    assert np.all(b(far) == 0.0)
    assert np.all(b.grad(far) == 0.0)
    assert np.all(b.lap(far) == 0.0)


def test_gaussian_semigroup_oracle():
    """convolved(x, s) composed twice equals one step at the summed s
    (semigroup property of Gaussian convolution, checked in closed form)."""
    phi = GaussianDensity([0.2, 0.1], 0.03)
    x = np.array([[0.4, -0.3]])
    s1, s2 = 0.11, 0.27
    one = GaussianDensity([0.2, 0.1], 0.03 + s1).convolved(x, s2)
    ratio = (0.03 / (0.03 + s1)) ** 1.0   # amplitude factor absorbed
    assert phi.convolved(x, s1 + s2)[0] == pytest.approx(one[0] * ratio, rel=1e-13)


def test_support_margin_and_validation():
    geo = Circle((0, 0), 1.0)
    ok = BumpDensity([0.1, -0.05], 0.5)
    assert require_interior_support(ok, geo) > 0
    bad = BumpDensity([0.5, 0.0], 0.7)
    with pytest.raises(SupportError):
        require_interior_support(bad, geo)
    wide = GaussianDensity([0.1, -0.05], 0.02)   # 1e-12 tail pokes out
    with pytest.raises(SupportError):
        require_interior_support(wide, geo)


def test_manufactured_volume_consistency():
    """f = a (beta - a1 lap beta) means d/dt [a1 beta] - a lap [a1 beta] = f."""
    coeff = TimeCoefficient.power(2.0, 0.8)
    bump = BumpDensity([0.1, -0.05], 0.5)
    mv = ManufacturedVolume(coeff, bump)
    x = np.array([[0.2, 0.05]])
    t = 0.6
    h = 1e-5
    dudt = (mv.exact(x, t + h) - mv.exact(x, t - h)) / (2 * h)
    lap_u = float(coeff.a1(t)) * bump.lap(x)
    resid = dudt - float(coeff.a(t)) * lap_u - mv.source(x, t)
    assert abs(resid[0]) < 1e-8
    g = mv.source_grad(x, t)
    fd = _fd_grad(lambda y: float(mv.source(y[None, :], t)[0]), x[0])
    assert np.allclose(g[0], fd, atol=1e-4)


def test_time_modulated_source():
    src = TimeModulatedSource(GaussianDensity([0.0, 0.0], 0.01),
                              profile=lambda t: np.sin(t))
    x = np.array([[0.05, 0.0]])
    assert src.source(x, 0.3)[0] == pytest.approx(
        np.sin(0.3) * float(GaussianDensity([0.0, 0.0], 0.01)(x)[0]), rel=1e-14)
    assert src.sup_bound() == 1.0


def test_boundary_presets():
    for name in ["t_cos", "t_sin2", "tsq_cos2", "one"]:
        d = smooth_boundary_preset(name)
        v = d(np.array([0.0, 1.0]), 0.5)
        assert v.shape == (2,)
    # compatibility flag: presets scaling with t vanish at t = 0
    assert np.all(smooth_boundary_preset("t_cos")(np.linspace(0, 6, 5), 0.0) == 0)
    with pytest.raises(ValueError):
        smooth_boundary_preset("nope")
    custom = BoundaryDensity(lambda th, tau: np.cos(th) * tau**2)
    assert custom(0.0, 2.0) == pytest.approx(4.0)
