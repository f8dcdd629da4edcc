# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_pykernels``; same signatures, same loop order."""
from libc.math cimport INFINITY, pow

import numpy as np


cdef inline void _pair_terms(const double[:, ::1] d, const long long[::1] m, int mode,
                             Py_ssize_t i, Py_ssize_t j, double* num, double* den) noexcept nogil:
    cdef long long ti = m[i]
    cdef long long tj = m[j]
    num[0] = d[ti, tj]
    if mode == 0:
        den[0] = d[i, j]
    elif mode == 1:
        den[0] = d[i, ti] + d[j, tj]
    else:
        den[0] = d[i, tj] + d[j, ti]


cdef inline void _perimeters(const double[:, ::1] d, const long long[::1] m, Py_ssize_t i,
                             Py_ssize_t j, Py_ssize_t k, double* num, double* den) noexcept nogil:
    cdef long long ti = m[i]
    cdef long long tj = m[j]
    cdef long long tk = m[k]
    num[0] = d[ti, tj] + d[tj, tk] + d[ti, tk]
    den[0] = d[i, j] + d[j, k] + d[i, k]


def ratio_constant(const double[:, ::1] d, const long long[::1] m, int mode):
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j, bi = -1, bj = -1
    cdef double num = 0.0, den = 0.0, r, best = 0.0, bnum = 0.0, bden = 0.0
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                _pair_terms(d, m, mode, i, j, &num, &den)
                if num == 0.0:
                    continue
                r = num / den if den > 0.0 else INFINITY
                if r > best:
                    best = r; bi = i; bj = j; bnum = num; bden = den
    return best, bi, bj, bnum, bden


def coefficient_excess(const double[:, ::1] d, const long long[::1] m, int mode, double c):
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j, k, wi = -1, wj = -1, wk = -1
    cdef double num = 0.0, den = 0.0, e, best = -INFINITY
    with nogil:
        if mode == 3:
            for i in range(n):
                for j in range(i + 1, n):
                    for k in range(j + 1, n):
                        _perimeters(d, m, i, j, k, &num, &den)
                        e = num - c * den
                        if e > best:
                            best = e; wi = i; wj = j; wk = k
        else:
            for i in range(n):
                for j in range(i + 1, n):
                    _pair_terms(d, m, mode, i, j, &num, &den)
                    e = num - c * den
                    if e > best:
                        best = e; wi = i; wj = j
    return best, wi, wj, wk


def perimeter_constant(const double[:, ::1] d, const long long[::1] m):
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j, k, wi = -1, wj = -1, wk = -1
    cdef double num = 0.0, den = 0.0, r, best = 0.0, bnum = 0.0, bden = 0.0
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    _perimeters(d, m, i, j, k, &num, &den)
                    if num == 0.0:
                        continue
                    r = num / den if den > 0.0 else INFINITY
                    if r > best:
                        best = r; wi = i; wj = j; wk = k; bnum = num; bden = den
    return best, wi, wj, wk, bnum, bden


def crr_excess(const double[:, ::1] d, const long long[::1] m, double a, double b, double g):
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t i, j, bi = -1, bj = -1
    cdef double num, rhs, e, best = -INFINITY
    with nogil:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                num = d[m[i], m[j]]
                rhs = a * d[i, j] + b * d[i, m[i]] + g * d[j, m[j]]
                e = num - rhs
                if e > best:
                    best = e; bi = i; bj = j
    return best, bi, bj


cdef inline double _phi(int code, double K, double q, double u, double v) noexcept nogil:
    cdef double mx
    if code == 0:
        return u + v
    if code == 1:
        return u if u >= v else v
    if code == 2:
        return K * (u + v)
    mx = u if u >= v else v
    if mx == 0.0:
        return 0.0
    return mx * pow(pow(u / mx, q) + pow(v / mx, q), 1.0 / q)


def tr_excess(const double[:, ::1] d, int code, double K, double q):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t x, y, z, wx = -1, wy = -1, wz = -1
    cdef double dxy, e, best = -INFINITY
    with nogil:
        for x in range(n):
            for y in range(n):
                dxy = d[x, y]
                for z in range(n):
                    e = dxy - _phi(code, K, q, d[x, z], d[z, y])
                    if e > best:
                        best = e; wx = x; wy = y; wz = z
    return best, wx, wy, wz


def tr_ratio(const double[:, ::1] d):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t x, y, z
    cdef double den, r, best = 0.0
    with nogil:
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    den = d[x, z] + d[z, y]
                    if den > 0.0:
                        r = d[x, y] / den
                        if r > best:
                            best = r
    return best
