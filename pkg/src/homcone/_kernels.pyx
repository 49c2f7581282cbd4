# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the Monte Carlo hot loop."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def wishart_coords(const double[:, :, ::1] Z, const double[:, :, ::1] basis):
    """Coordinates ``sum_j z_j^T e_a z_j`` of ``sum_j z_j z_j^T`` for each sample.

    Z has shape (M, k, N), basis (d, N, N); returns (M, d).
    """
    cdef Py_ssize_t M = Z.shape[0], k = Z.shape[1], N = Z.shape[2], d = basis.shape[0]
    cdef Py_ssize_t m, j, a, p, q
    cdef double acc, row
    out = np.zeros((M, d))
    cdef double[:, ::1] o = out
    G_arr = np.empty((N, N))
    cdef double[:, ::1] G = G_arr
    with nogil:
        for m in range(M):
            for p in range(N):
                for q in range(p + 1):
                    acc = 0.0
                    for j in range(k):
                        acc = acc + Z[m, j, p] * Z[m, j, q]
                    G[p, q] = acc
                    G[q, p] = acc
            for a in range(d):
                acc = 0.0
                for p in range(N):
                    row = 0.0
                    for q in range(N):
                        row = row + basis[a, p, q] * G[p, q]
                    acc = acc + row
                o[m, a] = acc
    return out


def centered_moments(const double[:, ::1] C, const double[::1] mean):
    """Sums of centered products: ``S2[a,b] = sum y_a y_b`` and ``S4[a,b] = sum (y_a y_b)^2``."""
    cdef Py_ssize_t M = C.shape[0], d = C.shape[1]
    cdef Py_ssize_t m, a, b
    cdef double prod
    S2_arr = np.zeros((d, d))
    S4_arr = np.zeros((d, d))
    y_arr = np.empty(d)
    cdef double[:, ::1] S2 = S2_arr
    cdef double[:, ::1] S4 = S4_arr
    cdef double[::1] y = y_arr
    with nogil:
        for m in range(M):
            for a in range(d):
                y[a] = C[m, a] - mean[a]
            for a in range(d):
                for b in range(a + 1):
                    prod = y[a] * y[b]
                    S2[a, b] += prod
                    S4[a, b] += prod * prod
        for a in range(d):
            for b in range(a):
                S2[b, a] = S2[a, b]
                S4[b, a] = S4[a, b]
    return S2_arr, S4_arr
