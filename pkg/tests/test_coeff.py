"""Time coefficient: antiderivative exactness, classification, inversion."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from degpot.coeff import TimeCoefficient
from degpot.errors import AssumptionError, DomainError


def test_constant_a1():
    c = TimeCoefficient.constant(2.5, 1.0)
    ts = np.linspace(0, 1, 11)
    assert np.allclose(c.a1(ts), 2.5 * ts, atol=1e-15)


def test_power_a1_matches_quadrature():
    c = TimeCoefficient.power(2.0, 0.9)
    for t in [0.1, 0.4, 0.9]:
        ref, _ = quad(lambda s: s**2, 0.0, t)
        assert abs(c.a1(t) - ref) < 1e-13


@settings(max_examples=40, deadline=None)
@given(
    al=st.floats(-2, 2, allow_nan=False),
    be=st.floats(-2, 2, allow_nan=False),
    t=st.floats(0.01, 0.8),
)
def test_affine_a1_matches_quadrature(al, be, t):
    c = TimeCoefficient.affine(al, be, 0.8)
    ref, _ = quad(lambda s: al + be * s, 0.0, t)
    assert abs(c.a1(t) - ref) < 1e-12


@settings(max_examples=25, deadline=None)
@given(rows=st.lists(
    st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=4),
    min_size=2, max_size=3,
))
def test_piecewise_poly_a1_continuous_and_exact(rows):
    bp = np.linspace(0.0, 1.0, len(rows) + 1)
    c = TimeCoefficient.piecewise_poly(bp, rows, 1.0)
    # a1 continuity across breakpoints
    for b in bp[1:-1]:
        assert abs(c.a1(b - 1e-9) - c.a1(b + 1e-9)) < 1e-7
    # exactness against adaptive quadrature
    ref = sum(
        quad(lambda s, k=k: np.polynomial.polynomial.polyval(s - bp[k], rows[k]),
             bp[k], bp[k + 1])[0]
        for k in range(len(rows))
    )
    assert abs(c.a1(1.0) - ref) < 1e-10


def test_tabulated_a1_exact_for_piecewise_linear():
    # the antiderivative of the linear interpolant is integrated exactly
    grid = np.array([0.0, 0.2, 0.5, 1.0])
    vals = np.array([1.0, 3.0, 0.5, 2.0])
    c = TimeCoefficient.tabulated(grid, vals)
    # exact integral of the linear interpolant up to 0.77 by hand:
    # trapezoids over [0,.2], [.2,.5], then [.5,.77] with v(.77) interpolated
    v77 = np.interp(0.77, grid, vals)
    ref = (0.2 * (1 + 3) / 2 + 0.3 * (3 + 0.5) / 2 + 0.27 * (0.5 + v77) / 2)
    assert abs(c.a1(0.77) - ref) < 1e-14


def test_b_antisymmetry_and_positivity():
    c = TimeCoefficient.power(1.0, 1.0)
    assert c.b(0.8, 0.3) == pytest.approx(0.8**2 / 2 - 0.3**2 / 2, abs=1e-15)
    with pytest.raises(DomainError):
        c.b(0.3, 0.8)


def test_classify_examples():
    assert TimeCoefficient.constant(1.0, 1.0).classify() == "A"
    assert TimeCoefficient.power(2.0, 1.0).classify() == "A"
    # a = 1 - 2t changes sign; a1 = t - t^2 > 0 on (0, 0.9]
    assert TimeCoefficient.affine(1.0, -2.0, 0.9).classify() == "B"
    # a1(1.2) = 1.2 - 1.44 < 0: neither assumption holds
    assert TimeCoefficient.affine(1.0, -2.0, 1.2).classify() == "neither"


def test_classify_isolated_zero_is_class_a():
    # a(t) = t^2 vanishes only at t = 0
    assert TimeCoefficient.power(2.0, 1.0).classify() == "A"


@settings(max_examples=30, deadline=None)
@given(z=st.floats(0.0, 1.0), p=st.floats(0.0, 3.0))
def test_invert_b_roundtrip(z, p):
    c = TimeCoefficient.power(p, 1.0)
    t = 0.9
    ztop = float(c.a1(t))
    zv = z * ztop
    tau = c.invert_b(t, zv)
    assert 0.0 <= tau <= t
    assert abs(c.b(t, tau) - zv) < 1e-10


def test_invert_b_requires_class_a():
    c = TimeCoefficient.affine(1.0, -2.0, 0.9)  # class B
    with pytest.raises(AssumptionError):
        c.invert_b(0.5, 0.1)


def test_domain_checks():
    c = TimeCoefficient.constant(1.0, 0.5)
    with pytest.raises(DomainError):
        c.a(0.6)
    with pytest.raises(DomainError):
        TimeCoefficient.power(-0.5, 1.0)
    with pytest.raises(DomainError):
        TimeCoefficient.constant(1.0, -1.0)
