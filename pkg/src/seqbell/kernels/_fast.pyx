# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``_reference.expand`` and ``_reference.quantize``."""

import numpy as np
from libc.math cimport INFINITY, atan2, cos, fabs, hypot, sin, sqrt

BACKEND = "cython"


cdef inline double _sign(double x) nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


cdef inline void _child(double k00, double k01, double k10, double k11, double detk,
                        double c, double s, const double[:, :] p, double zero,
                        double* theta_out, double* prob_out, double[:, :] u_out) noexcept nogil:
    cdef double a = k00 * c
    cdef double b = k01 * s
    cdef double cc = k10 * c
    cdef double d = k11 * s
    cdef double det = detk * c * s
    cdef double e = 0.5 * (a + d)
    cdef double f = 0.5 * (a - d)
    cdef double g = 0.5 * (cc + b)
    cdef double h = 0.5 * (cc - b)
    cdef double sx = hypot(e, h) + hypot(f, g)
    cdef double sy = det / sx if sx > 0.0 else 0.0
    cdef double rot_v = 0.5 * (atan2(h, e) - atan2(g, f))
    cdef double cv = cos(rot_v)
    cdef double sv = sin(rot_v)
    cdef double u00 = p[0, 0] * cv - p[0, 1] * sv
    cdef double u10 = p[1, 0] * cv - p[1, 1] * sv
    cdef double u01 = p[0, 0] * sv + p[0, 1] * cv
    cdef double u11 = p[1, 0] * sv + p[1, 1] * cv
    cdef double f0 = _sign(u00) if fabs(u00) > zero else _sign(u10)
    cdef double f1 = _sign(u01) if fabs(u01) > zero else _sign(u11)
    if f0 == 0.0:
        f0 = 1.0
    if f1 == 0.0:
        f1 = 1.0
    u_out[0, 0] = u00 * f0
    u_out[1, 0] = u10 * f0
    u_out[0, 1] = u01 * f1
    u_out[1, 1] = u11 * f1
    theta_out[0] = atan2(fabs(sy), sx)
    prob_out[0] = a * a + b * b + cc * cc + d * d


def expand(theta, ub, mu, double zero=1e-12):
    cdef const double[:] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[:, :, :] u = np.ascontiguousarray(ub, dtype=np.float64)
    cdef const double[:] m = np.ascontiguousarray(mu, dtype=np.float64)
    cdef Py_ssize_t n = th.shape[0]
    out_theta_arr = np.empty(4 * n, dtype=np.float64)
    out_ub_arr = np.empty((4 * n, 2, 2), dtype=np.float64)
    out_prob_arr = np.empty(4 * n, dtype=np.float64)
    cdef double[:] out_theta = out_theta_arr
    cdef double[:, :, :] out_ub = out_ub_arr
    cdef double[:] out_prob = out_prob_arr
    cdef Py_ssize_t i, j
    cdef double c, s, cm, sm, hp, hm, detk
    with nogil:
        for i in range(n):
            c = cos(th[i])
            s = sin(th[i])
            cm = cos(m[i])
            sm = sin(m[i])
            detk = cm * sm
            hp = 0.5 * (cm + sm)
            hm = 0.5 * (cm - sm)
            j = 4 * i
            _child(cm, 0.0, 0.0, sm, detk, c, s, u[i], zero,
                   &out_theta[j], &out_prob[j], out_ub[j])
            _child(sm, 0.0, 0.0, cm, detk, c, s, u[i], zero,
                   &out_theta[j + 1], &out_prob[j + 1], out_ub[j + 1])
            _child(hp, hm, hm, hp, detk, c, s, u[i], zero,
                   &out_theta[j + 2], &out_prob[j + 2], out_ub[j + 2])
            _child(hp, -hm, -hm, hp, detk, c, s, u[i], zero,
                   &out_theta[j + 3], &out_prob[j + 3], out_ub[j + 3])
    return out_theta_arr, out_ub_arr, out_prob_arr


cdef inline double _cost(const double[:, :] r, const double[:] p, Py_ssize_t k,
                         Py_ssize_t j) noexcept nogil:
    cdef double dx = r[j, 0] - r[k, 0]
    cdef double dy = r[j, 1] - r[k, 1]
    cdef double dz = r[j, 2] - r[k, 2]
    return p[k] * p[j] / (p[k] + p[j]) * (0.5 * sqrt(dx * dx + dy * dy + dz * dz))


cdef inline void _rescan(const double[:, :] r, const double[:] p, const unsigned char[:] alive,
                         unsigned char[:] stale, double[:] best, long long[:] arg,
                         Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t j, n = alive.shape[0]
    cdef double c
    stale[k] = 0
    best[k] = INFINITY
    arg[k] = -1
    for j in range(k + 1, n):
        if alive[j]:
            c = _cost(r, p, k, j)
            if arg[k] < 0 or c < best[k]:
                best[k] = c
                arg[k] = j


cdef inline Py_ssize_t _argmin(const double[:] best) noexcept nogil:
    cdef Py_ssize_t k, i = 0
    for k in range(1, best.shape[0]):
        if best[k] < best[i]:
            i = k
    return i


def quantize(bloch, probability, Py_ssize_t m):
    r_arr = np.array(bloch, dtype=np.float64, order="C")
    p_arr = np.array(probability, dtype=np.float64)
    cdef Py_ssize_t n = r_arr.shape[0]
    into_arr = np.arange(n, dtype=np.int64)
    if n <= m:
        return into_arr
    alive_arr = np.ones(n, dtype=np.uint8)
    stale_arr = np.zeros(n, dtype=np.uint8)
    best_arr = np.empty(n, dtype=np.float64)
    arg_arr = np.empty(n, dtype=np.int64)
    cdef double[:, :] r = r_arr
    cdef double[:] p = p_arr
    cdef unsigned char[:] alive = alive_arr
    cdef unsigned char[:] stale = stale_arr
    cdef double[:] best = best_arr
    cdef long long[:] arg = arg_arr
    cdef long long[:] into = into_arr
    cdef Py_ssize_t step, k, i, j
    cdef double total, c
    with nogil:
        for k in range(n):
            _rescan(r, p, alive, stale, best, arg, k)
        for step in range(n - m):
            i = _argmin(best)
            while stale[i]:
                _rescan(r, p, alive, stale, best, arg, i)
                i = _argmin(best)
            j = arg[i]
            total = p[i] + p[j]
            r[i, 0] = (p[i] * r[i, 0] + p[j] * r[j, 0]) / total
            r[i, 1] = (p[i] * r[i, 1] + p[j] * r[j, 1]) / total
            r[i, 2] = (p[i] * r[i, 2] + p[j] * r[j, 2]) / total
            p[i] = total
            alive[j] = 0
            stale[j] = 0
            best[j] = INFINITY
            arg[j] = -1
            into[j] = i
            _rescan(r, p, alive, stale, best, arg, i)
            for k in range(i):
                if not alive[k]:
                    continue
                c = _cost(r, p, k, i)
                if stale[k]:
                    if c < best[k]:
                        best[k] = c
                elif arg[k] == i:
                    if c <= best[k]:
                        best[k] = c
                    else:
                        stale[k] = 1
                elif arg[k] == j:
                    if c < best[k]:
                        best[k] = c
                    stale[k] = 1
                elif c < best[k] or (c == best[k] and i < arg[k]):
                    best[k] = c
                    arg[k] = i
            for k in range(i + 1, j):
                if alive[k] and arg[k] == j:
                    stale[k] = 1
        for k in range(n):
            into[k] = into[into[k]]
    return into_arr
