"""Fundamental solution: normalization, Fourier identity, delta limit,
gradients, and the spectral log-quadrature weights."""

import numpy as np
import pytest
from scipy.integrate import quad

from degpot.coeff import TimeCoefficient
from degpot.densities import BumpDensity
from degpot.errors import AssumptionError, SupportError
from degpot.kernel import (
    check_delta_limit,
    check_fourier,
    check_normalization,
    eval_kernel,
    eval_kernel_gradient,
    eval_normal_derivative,
)
from degpot.potentials import kress_log_weights

COEFFS = [
    TimeCoefficient.constant(1.0, 0.9),
    TimeCoefficient.power(1.0, 0.9),
    TimeCoefficient.power(2.0, 0.9),
    TimeCoefficient.affine(1.0, -2.0, 0.9),
]


@pytest.mark.parametrize("coeff", COEFFS, ids=lambda c: c.kind + str(c.params))
@pytest.mark.parametrize("n", [2, 3])
def test_normalization(coeff, n):
    for t in np.linspace(0.15, 0.9, 5):
        if float(coeff.a1(t)) <= 0:
            continue
        assert check_normalization(coeff, float(t), n) <= 1e-10


def test_fourier_identity():
    coeff = TimeCoefficient.power(2.0, 0.9)
    rng = np.random.default_rng(3)
    for _ in range(10):
        t = 0.2 + 0.7 * rng.random()
        xi = rng.normal(size=2)
        assert check_fourier(coeff, t, xi) <= 1e-8


def test_delta_limit_bound_and_decrease():
    """|int kernel psi - psi(0)| <= 2 A sqrt(a1(t)) for Lipschitz psi,
    and the error decreases along dyadic times."""
    coeff = TimeCoefficient.constant(1.0, 0.9)
    psi = BumpDensity([0.0, 0.0], 0.8)
    A = psi.lipschitz_bound
    times = 0.8 * 0.5 ** np.arange(8)
    errs = [check_delta_limit(coeff, float(t), psi) for t in times]
    for t, e in zip(times, errs):
        # first-moment bound: |E k(x) (psi(x) - psi(0)) dx| <= A*E|x| with
        # E|x| <= 2 sqrt(a1) for the Gaussian in any dimension n <= 4
        assert e <= 2.0 * A * np.sqrt(float(coeff.a1(t))) + 1e-12
    assert all(errs[k + 1] < errs[k] for k in range(len(errs) - 1))


def test_kernel_zero_branch_and_gradient():
    assert eval_kernel(2, np.array([0.3, 0.1]), 0.0) == 0.0
    with pytest.raises(SupportError):
        eval_kernel_gradient(2, np.array([0.3, 0.1]), 0.0)
    x = np.array([0.3, -0.2])
    s = 0.17
    h = 1e-6
    g = eval_kernel_gradient(2, x, s)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (eval_kernel(2, x + e, s) - eval_kernel(2, x - e, s)) / (2 * h)
        assert g[j] == pytest.approx(fd, abs=1e-8)


def test_normal_derivative_matches_directional_fd():
    x = np.array([0.4, 0.1])
    xi = np.array([-0.2, 0.3])
    nu = np.array([0.6, 0.8])
    s = 0.22
    h = 1e-6
    fd = (eval_kernel(2, x - (xi + h * nu), s) - eval_kernel(2, x - (xi - h * nu), s)) / (2 * h)
    assert eval_normal_derivative(2, x, xi, nu, s) == pytest.approx(fd, abs=1e-9)


def test_normalization_rejects_degenerate_time():
    coeff = TimeCoefficient.power(2.0, 0.9)
    with pytest.raises(AssumptionError):
        check_normalization(coeff, 0.0)


def test_kress_log_weights_fourier_oracle():
    """int_0^{2pi} ln(4 sin^2(th/2)) cos(k th) dth = -2 pi / k (0 for k=0),
    reproduced exactly by the quadrature up to trig degree n_half."""
    n_half = 16
    R = kress_log_weights(n_half)
    th = np.pi * np.arange(2 * n_half) / n_half
    assert R @ np.ones_like(th) == pytest.approx(0.0, abs=1e-12)
    for k in range(1, n_half):
        assert R @ np.cos(k * th) == pytest.approx(-2 * np.pi / k, abs=1e-12)
    # independent adaptive-quadrature cross-check for one mode
    ref, _ = quad(lambda s: np.log(4 * np.sin(s / 2) ** 2) * np.cos(3 * s),
                  0, 2 * np.pi, points=[0, 2 * np.pi], limit=400)
    assert R @ np.cos(3 * th) == pytest.approx(ref, abs=1e-9)
