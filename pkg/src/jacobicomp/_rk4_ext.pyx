# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 stepping for Y'' = -R(t) Y with R sampled on the half-step grid."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _matmul_neg(const double[:, :] R, double[:, :] Y, double[:, :] out,
                             Py_ssize_t m, Py_ssize_t c) noexcept nogil:
    # out = -R @ Y
    cdef Py_ssize_t i, j, q
    cdef double acc
    for i in range(m):
        for j in range(c):
            acc = 0.0
            for q in range(m):
                acc = acc + R[i, q] * Y[q, j]
            out[i, j] = -acc


cdef void _step(const double[:, :] R0, const double[:, :] Rh, const double[:, :] R1,
                double[:, :] Y, double[:, :] P, double h,
                double[:, :] k1y, double[:, :] k1p, double[:, :] k2y, double[:, :] k2p,
                double[:, :] k3y, double[:, :] k3p, double[:, :] k4y, double[:, :] k4p,
                double[:, :] tmp, Py_ssize_t m, Py_ssize_t c) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double hh = 0.5 * h
    cdef double h6 = h / 6.0

    for i in range(m):
        for j in range(c):
            k1y[i, j] = P[i, j]
    _matmul_neg(R0, Y, k1p, m, c)

    for i in range(m):
        for j in range(c):
            tmp[i, j] = Y[i, j] + hh * k1y[i, j]
            k2y[i, j] = P[i, j] + hh * k1p[i, j]
    _matmul_neg(Rh, tmp, k2p, m, c)

    for i in range(m):
        for j in range(c):
            tmp[i, j] = Y[i, j] + hh * k2y[i, j]
            k3y[i, j] = P[i, j] + hh * k2p[i, j]
    _matmul_neg(Rh, tmp, k3p, m, c)

    for i in range(m):
        for j in range(c):
            tmp[i, j] = Y[i, j] + h * k3y[i, j]
            k4y[i, j] = P[i, j] + h * k3p[i, j]
    _matmul_neg(R1, tmp, k4p, m, c)

    for i in range(m):
        for j in range(c):
            Y[i, j] = Y[i, j] + h6 * (k1y[i, j] + 2.0 * k2y[i, j] + 2.0 * k3y[i, j] + k4y[i, j])
            P[i, j] = P[i, j] + h6 * (k1p[i, j] + 2.0 * k2p[i, j] + 2.0 * k3p[i, j] + k4p[i, j])


def rk4_trajectory(double[:, :, ::1] R, double h, Y0, P0):
    """Integrate and return the states at every full step, shapes (N+1, m, c)."""
    cdef Py_ssize_t n_half = R.shape[0]
    cdef Py_ssize_t N = (n_half - 1) // 2
    cdef double[:, ::1] Y = np.array(Y0, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] P = np.array(P0, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t m = Y.shape[0]
    cdef Py_ssize_t c = Y.shape[1]
    cdef double[:, :, ::1] Ys = np.empty((N + 1, m, c), dtype=np.float64)
    cdef double[:, :, ::1] Ps = np.empty((N + 1, m, c), dtype=np.float64)
    cdef double[:, :, ::1] work = np.empty((9, m, c), dtype=np.float64)
    cdef Py_ssize_t s
    Ys[0, :, :] = Y
    Ps[0, :, :] = P
    with nogil:
        for s in range(N):
            _step(R[2 * s], R[2 * s + 1], R[2 * s + 2], Y, P, h,
                  work[0], work[1], work[2], work[3], work[4], work[5], work[6], work[7],
                  work[8], m, c)
            Ys[s + 1, :, :] = Y
            Ps[s + 1, :, :] = P
    return np.asarray(Ys), np.asarray(Ps)


def rk4_endpoint(double[:, :, ::1] R, double h, Y0, P0):
    """Integrate and return only the final state."""
    cdef Py_ssize_t n_half = R.shape[0]
    cdef Py_ssize_t N = (n_half - 1) // 2
    cdef double[:, ::1] Y = np.array(Y0, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] P = np.array(P0, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t m = Y.shape[0]
    cdef Py_ssize_t c = Y.shape[1]
    cdef double[:, :, ::1] work = np.empty((9, m, c), dtype=np.float64)
    cdef Py_ssize_t s
    with nogil:
        for s in range(N):
            _step(R[2 * s], R[2 * s + 1], R[2 * s + 2], Y, P, h,
                  work[0], work[1], work[2], work[3], work[4], work[5], work[6], work[7],
                  work[8], m, c)
    return np.asarray(Y), np.asarray(P)
