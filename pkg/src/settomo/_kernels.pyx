# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled measurement-map kernel.

The accumulation is split into real and imaginary planes with four-way
unrolled partial sums so the inner loop pipelines; the summation order is
fixed by construction, keeping results run-to-run identical.
"""

import numpy as np

from libc.math cimport cos, sin

BACKEND = "cython"


def map_points(w, ks, ki, q1, q2):
    w = np.ascontiguousarray(w, dtype=np.complex128)
    ks = np.ascontiguousarray(ks, dtype=np.float64)
    ki = np.ascontiguousarray(ki, dtype=np.float64)
    q1 = np.ascontiguousarray(q1, dtype=np.float64)
    q2 = np.ascontiguousarray(q2, dtype=np.float64)
    if q1.shape[0] != q2.shape[0]:
        raise ValueError("q1 and q2 must have the same length")
    if w.shape[0] != ks.shape[0] or w.shape[1] != ki.shape[0]:
        raise ValueError("kernel shape does not match coordinate arrays")
    wr = np.ascontiguousarray(w.real)
    wi = np.ascontiguousarray(w.imag)
    out = np.empty(q1.shape[0], dtype=np.complex128)
    vr = np.empty(ki.shape[0], dtype=np.float64)
    vi = np.empty(ki.shape[0], dtype=np.float64)
    _map_points_impl(wr, wi, ks, ki, q1, q2, out, vr, vi)
    return out


cdef void _map_points_impl(
    double[:, ::1] wr,
    double[:, ::1] wi,
    double[::1] ks,
    double[::1] ki,
    double[::1] q1,
    double[::1] q2,
    double complex[::1] out,
    double[::1] vr,
    double[::1] vi,
) noexcept nogil:
    cdef Py_ssize_t npts = q1.shape[0]
    cdef Py_ssize_t ns = ks.shape[0]
    cdef Py_ssize_t ni = ki.shape[0]
    cdef Py_ssize_t ni4 = ni - (ni & 3)
    cdef Py_ssize_t p, i, j
    cdef double ph, c, s, acc_r, acc_i, tr, ti
    cdef double t0, t1, t2, t3, u0, u1, u2, u3
    for p in range(npts):
        for j in range(ni):
            ph = ki[j] * q2[p]
            vr[j] = cos(ph)
            vi[j] = sin(ph)
        acc_r = 0.0
        acc_i = 0.0
        for i in range(ns):
            t0 = t1 = t2 = t3 = 0.0
            u0 = u1 = u2 = u3 = 0.0
            for j in range(0, ni4, 4):
                t0 = t0 + wr[i, j] * vr[j] - wi[i, j] * vi[j]
                u0 = u0 + wr[i, j] * vi[j] + wi[i, j] * vr[j]
                t1 = t1 + wr[i, j + 1] * vr[j + 1] - wi[i, j + 1] * vi[j + 1]
                u1 = u1 + wr[i, j + 1] * vi[j + 1] + wi[i, j + 1] * vr[j + 1]
                t2 = t2 + wr[i, j + 2] * vr[j + 2] - wi[i, j + 2] * vi[j + 2]
                u2 = u2 + wr[i, j + 2] * vi[j + 2] + wi[i, j + 2] * vr[j + 2]
                t3 = t3 + wr[i, j + 3] * vr[j + 3] - wi[i, j + 3] * vi[j + 3]
                u3 = u3 + wr[i, j + 3] * vi[j + 3] + wi[i, j + 3] * vr[j + 3]
            tr = (t0 + t1) + (t2 + t3)
            ti = (u0 + u1) + (u2 + u3)
            for j in range(ni4, ni):
                tr = tr + wr[i, j] * vr[j] - wi[i, j] * vi[j]
                ti = ti + wr[i, j] * vi[j] + wi[i, j] * vr[j]
            ph = ks[i] * q1[p]
            c = cos(ph)
            s = sin(ph)
            acc_r = acc_r + c * tr - s * ti
            acc_i = acc_i + c * ti + s * tr
        out[p] = acc_r + 1j * acc_i
