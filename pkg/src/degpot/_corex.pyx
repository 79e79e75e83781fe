# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pair-sum kernels (see degpot._fallback for the contracts)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport erf, erfc, exp, expm1, fabs, log, sqrt

cnp.import_array()

BACKEND_NAME = "cython"

cdef double PI = 3.141592653589793238462643383279502884
cdef double SQRT_PI = 1.7724538509055160272981674833411452
cdef double EULER_GAMMA = 0.57721566490153286060651209008240243


cdef double _exp1(double x) nogil:
    """Exponential integral E1(x), x > 0; series for x < 1, Lentz
    continued fraction otherwise (double precision)."""
    cdef double s, term, ans, b, c, d, h, delta, a
    cdef int k
    if x < 1.0:
        ans = -EULER_GAMMA - log(x)
        term = 1.0
        s = 0.0
        for k in range(1, 60):
            term *= -x / k
            delta = -term / k
            s += delta
            if fabs(delta) < 1e-18 * (fabs(s) + 1e-300):
                break
        return ans + s
    b = x + 1.0
    c = 1e300
    d = 1.0 / b
    h = d
    for k in range(1, 200):
        a = -k * <double>k
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if fabs(delta - 1.0) < 1e-16:
            break
    return h * exp(-x)


cdef inline double _dlayer_edge(int n, double d2, double z) nogil:
    cdef double u, su
    if z <= 0.0:
        return 1.0
    u = d2 / (4.0 * z)
    if n == 2:
        return -expm1(-u)
    su = sqrt(u)
    return erf(su) - 2.0 * su * exp(-u) / SQRT_PI


cdef inline double _slayer_edge(int n, double d2, double z) nogil:
    cdef double u
    if z <= 0.0:
        return 0.0
    u = d2 / (4.0 * z)
    if n == 2:
        return _exp1(u) / (4.0 * PI)
    return erfc(sqrt(u)) / (4.0 * PI * sqrt(d2))


cdef inline double _dlayer_scale(int n, double d2, double ratio) nogil:
    if n == 2:
        return ratio / (2.0 * PI)
    if d2 <= 0.0:
        return 0.0
    return ratio / (4.0 * PI * sqrt(d2))


def dlayer_sum(int n, double[:, ::1] d2, double[:, ::1] ratio, double[::1] w,
               double[::1] z_edges, double[:, ::1] dens):
    cdef Py_ssize_t nt = d2.shape[0], ms = d2.shape[1], M = z_edges.shape[0] - 1
    cdef Py_ssize_t i, l, p
    cdef double acc, prev, cur, scale, dd
    out = np.zeros(nt)
    cdef double[::1] ov = out
    with nogil:
        for i in range(nt):
            acc = 0.0
            for l in range(ms):
                dd = d2[i, l]
                scale = _dlayer_scale(n, dd, ratio[i, l]) * w[l]
                prev = _dlayer_edge(n, dd, z_edges[0])
                for p in range(M):
                    cur = _dlayer_edge(n, dd, z_edges[p + 1])
                    acc += scale * (prev - cur) * dens[l, p]
                    prev = cur
            ov[i] = acc
    return out


def slayer_sum(int n, double[:, ::1] d2, double[::1] w,
               double[::1] z_edges, double[:, ::1] dens):
    cdef Py_ssize_t nt = d2.shape[0], ms = d2.shape[1], M = z_edges.shape[0] - 1
    cdef Py_ssize_t i, l, p
    cdef double acc, prev, cur, dd
    out = np.zeros(nt)
    cdef double[::1] ov = out
    with nogil:
        for i in range(nt):
            acc = 0.0
            for l in range(ms):
                dd = d2[i, l]
                if dd <= 0.0:
                    continue
                prev = _slayer_edge(n, dd, z_edges[0])
                for p in range(M):
                    cur = _slayer_edge(n, dd, z_edges[p + 1])
                    acc += (cur - prev) * w[l] * dens[l, p]
                    prev = cur
            ov[i] = acc
    return out


def dlayer_panels(int n, double[:, ::1] d2, double[:, ::1] ratio, double[::1] w,
                  double[::1] z_edges):
    cdef Py_ssize_t nt = d2.shape[0], ms = d2.shape[1], M = z_edges.shape[0] - 1
    cdef Py_ssize_t i, l, p
    cdef double prev, cur, scale, dd
    out = np.empty((M, nt, ms))
    cdef double[:, :, ::1] ov = out
    with nogil:
        for i in range(nt):
            for l in range(ms):
                dd = d2[i, l]
                scale = _dlayer_scale(n, dd, ratio[i, l]) * w[l]
                prev = _dlayer_edge(n, dd, z_edges[0])
                for p in range(M):
                    cur = _dlayer_edge(n, dd, z_edges[p + 1])
                    ov[p, i, l] = scale * (prev - cur)
                    prev = cur
    return out


def slayer_panels(int n, double[:, ::1] d2, double[::1] w, double[::1] z_edges):
    cdef Py_ssize_t nt = d2.shape[0], ms = d2.shape[1], M = z_edges.shape[0] - 1
    cdef Py_ssize_t i, l, p
    cdef double prev, cur, dd
    out = np.zeros((M, nt, ms))
    cdef double[:, :, ::1] ov = out
    with nogil:
        for i in range(nt):
            for l in range(ms):
                dd = d2[i, l]
                if dd <= 0.0:
                    continue
                prev = _slayer_edge(n, dd, z_edges[0])
                for p in range(M):
                    cur = _slayer_edge(n, dd, z_edges[p + 1])
                    ov[p, i, l] = (cur - prev) * w[l]
                    prev = cur
    return out
