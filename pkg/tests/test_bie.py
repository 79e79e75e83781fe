"""Boundary integral solver: causality, synthetic inverse, Picard,
uniqueness, compatibility."""

import numpy as np
import pytest

from degpot import bie
from degpot.coeff import TimeCoefficient
from degpot.errors import (
    AssumptionError,
    CompatibilityError,
    GeometryError,
)
from degpot.geometry import Circle, Ellipse, Sphere

CONST = TimeCoefficient.constant(1.0, 0.5)
CIRCLE = Circle((0.0, 0.0), 1.0)


def g_cos(th, t):
    return np.asarray(t) * np.cos(th)


def test_assemble_validation():
    with pytest.raises(CompatibilityError):
        bie.assemble(CIRCLE, CONST, lambda th, t: np.cos(th), m_space=16, m_time=4)
    cb = TimeCoefficient.affine(1.0, -2.0, 0.9)
    with pytest.raises(AssumptionError):
        bie.assemble(CIRCLE, cb, g_cos, m_space=16, m_time=4)
    with pytest.raises(GeometryError):
        bie.assemble(Sphere((0, 0, 0), 1.0), CONST, g_cos, m_space=16, m_time=4)


def test_blocks_causal_and_solver_self_consistent():
    sys_ = bie.assemble(CIRCLE, CONST, g_cos, m_space=16, m_time=6)
    # strict causality: block(k, j) = 0 for j > k
    assert np.all(sys_.block(2, 5) == 0.0)
    # solve then re-apply: (-1/2 + D) phi reproduces g to rounding
    g = sys_.sample_boundary(g_cos)
    phi = bie.solve_march(sys_, g)
    back = -0.5 * phi + bie.apply_operator(sys_, phi)
    assert np.max(np.abs(back - g)) < 1e-12


def test_zero_data_zero_solution_and_uniqueness():
    from degpot.trace import verify_uniqueness

    report = verify_uniqueness(CIRCLE, CONST, m_space=24, m_time=8)
    assert report["phi_sup"] <= 1e-10
    assert report["u_sup"] <= 1e-10
    # diagonal blocks stay uniformly invertible across a resolution ladder
    for ms, mt in [(16, 4), (32, 8), (64, 16)]:
        sys_ = bie.assemble(CIRCLE, CONST, None, m_space=ms, m_time=mt)
        assert np.min(sys_.diagonal_min_singular()) > 0.3


def test_causality_of_solution():
    """Data supported in late times produces zero density at early times."""
    T = CONST.horizon
    late = lambda th, t: np.where(np.asarray(t) > 0.6 * T,
                                  (np.asarray(t) - 0.6 * T) * np.cos(th), 0.0)
    sys_ = bie.assemble(CIRCLE, CONST, late, m_space=16, m_time=10)
    phi = bie.solve_march(sys_, sys_.sample_boundary(late))
    early = sys_.colloc_times <= 0.6 * T
    assert np.max(np.abs(phi[early])) == 0.0
    assert np.max(np.abs(phi[~early])) > 0.0


def fine_forward_data(sys_, density, m_fine=512, q=3.0):
    """Boundary data (-1/2 + D) density at the collocation nodes computed
    with a near-continuous time quadrature (m_fine graded panels), so the
    inverse problem is solved against the continuous operator."""
    from degpot import backend
    from degpot.bie import _pair_arrays
    from degpot.potentials import _panel_times, _z_grid

    nodes = sys_.nodes
    d2, ratio = _pair_arrays(nodes)
    g = np.zeros((sys_.m_time, sys_.m_space))
    for k, sk in enumerate(sys_.colloc_times):
        z = _z_grid(sys_.coeff, float(sk), m_fine, q)
        tau = _panel_times(sys_.coeff, float(sk), z)
        dens = density(nodes.params[:, None], tau[None, :])
        D = backend.dlayer_sum(2, d2, ratio, nodes.weights, z, dens)
        g[k] = -0.5 * density(nodes.params, sk) + D
    return g


def test_synthetic_inverse_and_time_order():
    """Recover a known smooth density from boundary data generated by a
    near-continuous forward map."""
    errs = []
    for ms, mt in [(64, 8), (64, 16), (64, 32)]:
        sys_ = bie.assemble(CIRCLE, CONST, None, m_space=ms, m_time=mt)
        g = fine_forward_data(sys_, g_cos)
        phi = bie.solve_march(sys_, g)
        star = sys_.sample_boundary(g_cos)
        errs.append(np.max(np.abs(phi - star)) / np.max(np.abs(star)))
    assert errs[-1] <= 1e-3
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.0)


def test_picard_agrees_with_march():
    sys_ = bie.assemble(CIRCLE, CONST, g_cos, m_space=16, m_time=8)
    g = sys_.sample_boundary(g_cos)
    phi_m = bie.solve_march(sys_, g)
    phi_p, history = bie.solve_picard(sys_, g, tol=1e-10)
    assert np.max(np.abs(phi_p - phi_m)) <= 1e-9
    # increments eventually contract
    assert history[-1] < history[0]


def test_ibvp_solution_properties():
    sol = bie.solve_ibvp(CIRCLE, CONST, g_cos, m_space=32, m_time=16)
    # boundary trace equals the data (jump-corrected)
    assert np.max(np.abs(sol.boundary_trace() - sol.g)) <= 1e-12
    # interior values at t = 0 vanish
    assert sol.eval(np.array([0.3, 0.2]), 0.0) == 0.0
    # interior sup bounded by data sup (maximum principle, discrete slack)
    pts = np.array([[0.3, 0.2], [-0.4, 0.1], [0.0, 0.0]])
    vals = np.atleast_1d(sol.eval(pts, 0.45))
    assert np.max(np.abs(vals)) <= np.max(np.abs(sol.g)) * (1 + 1e-6)


def test_ibvp_on_ellipse_and_power_coefficient():
    geo = Ellipse((0, 0), (2.0, 1.0))
    coeff = TimeCoefficient.power(2.0, 0.5)
    sol = bie.solve_ibvp(geo, coeff, g_cos, m_space=48, m_time=12)
    assert np.max(np.abs(sol.boundary_trace() - sol.g)) <= 1e-12
    assert np.isfinite(sol.eval(np.array([0.5, 0.2]), 0.4))
