# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, hypot, atan2, acos, cos, sin, fabs, INFINITY

cnp.import_array()

BACKEND = "cython"


def chain_products(stack, inv_stack, idx):
    cdef const double[:, :, ::1] S = np.ascontiguousarray(stack, dtype=np.float64)
    cdef const double[:, :, ::1] Si = np.ascontiguousarray(inv_stack, dtype=np.float64)
    cdef const cnp.intp_t[::1] ix = np.ascontiguousarray(idx, dtype=np.intp)
    cdef Py_ssize_t d = S.shape[1]
    cdef Py_ssize_t n = ix.shape[0]
    P_arr = np.empty((n + 1, d, d))
    Q_arr = np.empty((n + 1, d, d))
    cdef double[:, :, ::1] P = P_arr
    cdef double[:, :, ::1] Q = Q_arr
    cdef Py_ssize_t t, i, j, k
    cdef cnp.intp_t g
    cdef double acc, acc2
    with nogil:
        for i in range(d):
            for j in range(d):
                P[0, i, j] = 1.0 if i == j else 0.0
                Q[0, i, j] = 1.0 if i == j else 0.0
        for t in range(n):
            g = ix[t]
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    acc2 = 0.0
                    for k in range(d):
                        acc += S[g, i, k] * P[t, k, j]
                        acc2 += Q[t, i, k] * Si[g, k, j]
                    P[t + 1, i, j] = acc
                    Q[t + 1, i, j] = acc2
    return P_arr, Q_arr


def batch_products(stack, inv_stack, idx2d):
    cdef const double[:, :, ::1] S = np.ascontiguousarray(stack, dtype=np.float64)
    cdef const double[:, :, ::1] Si = np.ascontiguousarray(inv_stack, dtype=np.float64)
    cdef const cnp.intp_t[:, ::1] ix = np.ascontiguousarray(idx2d, dtype=np.intp)
    cdef Py_ssize_t N = ix.shape[0]
    cdef Py_ssize_t n = ix.shape[1]
    cdef Py_ssize_t d = S.shape[1]
    P_arr = np.empty((N, d, d))
    Q_arr = np.empty((N, d, d))
    cdef double[:, :, ::1] P = P_arr
    cdef double[:, :, ::1] Q = Q_arr
    cdef double[:, ::1] tp = np.empty((d, d))
    cdef double[:, ::1] tq = np.empty((d, d))
    cdef Py_ssize_t w, t, i, j, k
    cdef cnp.intp_t g
    cdef double acc, acc2
    with nogil:
        for w in range(N):
            for i in range(d):
                for j in range(d):
                    P[w, i, j] = 1.0 if i == j else 0.0
                    Q[w, i, j] = 1.0 if i == j else 0.0
            for t in range(n):
                g = ix[w, t]
                for i in range(d):
                    for j in range(d):
                        acc = 0.0
                        acc2 = 0.0
                        for k in range(d):
                            acc += S[g, i, k] * P[w, k, j]
                            acc2 += Q[w, i, k] * Si[g, k, j]
                        tp[i, j] = acc
                        tq[i, j] = acc2
                for i in range(d):
                    for j in range(d):
                        P[w, i, j] = tp[i, j]
                        Q[w, i, j] = tq[i, j]
    return P_arr, Q_arr


cdef inline double _norm2x2(double a, double b, double c, double e) noexcept nogil:
    # plain sqrt: hypot's overflow guard dominates the inner loops
    cdef double s = a + e, t = b - c, u = a - e, v = b + c
    return 0.5 * (sqrt(s * s + t * t) + sqrt(u * u + v * v))


def spectral_norms(A):
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.shape[0] == 0:
        return np.zeros(0)
    if A.shape[1] != 2:
        return np.linalg.norm(A, ord=2, axis=(1, 2))
    cdef const double[:, :, ::1] M = A
    cdef Py_ssize_t N = M.shape[0], w
    out_arr = np.empty(N)
    cdef double[::1] out = out_arr
    with nogil:
        for w in range(N):
            out[w] = _norm2x2(M[w, 0, 0], M[w, 0, 1], M[w, 1, 0], M[w, 1, 1])
    return out_arr


def gl_distances(A, Ainv, B, Binv):
    A = np.ascontiguousarray(A, dtype=np.float64)
    Ainv = np.ascontiguousarray(Ainv, dtype=np.float64)
    if A.shape[1] != 2:
        return (np.linalg.norm(A - B, ord=2, axis=(1, 2))
                + np.linalg.norm(Ainv - Binv, ord=2, axis=(1, 2)))
    cdef const double[:, :, ::1] X = A
    cdef const double[:, :, ::1] Xi = Ainv
    cdef const double[:, ::1] Y = np.ascontiguousarray(B, dtype=np.float64)
    cdef const double[:, ::1] Yi = np.ascontiguousarray(Binv, dtype=np.float64)
    cdef Py_ssize_t N = X.shape[0], w
    out_arr = np.empty(N)
    cdef double[::1] out = out_arr
    with nogil:
        for w in range(N):
            out[w] = (_norm2x2(X[w, 0, 0] - Y[0, 0], X[w, 0, 1] - Y[0, 1],
                               X[w, 1, 0] - Y[1, 0], X[w, 1, 1] - Y[1, 1])
                      + _norm2x2(Xi[w, 0, 0] - Yi[0, 0], Xi[w, 0, 1] - Yi[0, 1],
                                 Xi[w, 1, 0] - Yi[1, 0], Xi[w, 1, 1] - Yi[1, 1]))
    return out_arr


def min_gl_distances(A, Ainv, B, Binv):
    A = np.ascontiguousarray(A, dtype=np.float64)
    Ainv = np.ascontiguousarray(Ainv, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    Binv = np.ascontiguousarray(Binv, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0]
    if A.shape[1] != 2:
        from ._pykernels import min_gl_distances as _slow
        return _slow(A, Ainv, B, Binv)
    cdef const double[:, :, ::1] X = A
    cdef const double[:, :, ::1] Xi = Ainv
    cdef const double[:, :, ::1] Y = B
    cdef const double[:, :, ::1] Yi = Binv
    cdef Py_ssize_t m = Y.shape[0], w, l
    dmin_arr = np.full(n, np.inf)
    arg_arr = np.full(n, -1, dtype=np.intp)
    cdef double[::1] dmin = dmin_arr
    cdef cnp.intp_t[::1] arg = arg_arr
    cdef double dist
    with nogil:
        for w in range(n):
            for l in range(m):
                dist = (_norm2x2(X[w, 0, 0] - Y[l, 0, 0], X[w, 0, 1] - Y[l, 0, 1],
                                 X[w, 1, 0] - Y[l, 1, 0], X[w, 1, 1] - Y[l, 1, 1])
                        + _norm2x2(Xi[w, 0, 0] - Yi[l, 0, 0], Xi[w, 0, 1] - Yi[l, 0, 1],
                                   Xi[w, 1, 0] - Yi[l, 1, 0], Xi[w, 1, 1] - Yi[l, 1, 1]))
                if dist < dmin[w]:
                    dmin[w] = dist
                    arg[w] = l
    return dmin_arr, arg_arr


def farthest_point_net(A, Ainv, double eps):
    A = np.ascontiguousarray(A, dtype=np.float64)
    Ainv = np.ascontiguousarray(Ainv, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.intp)
    if A.shape[1] != 2:
        from ._pykernels import farthest_point_net as _slow
        return _slow(A, Ainv, eps)
    cdef const double[:, :, ::1] X = A
    cdef const double[:, :, ::1] Xi = Ainv
    dmin_arr = np.full(n, np.inf)
    cdef double[::1] dmin = dmin_arr
    chosen = []
    cdef Py_ssize_t far = 0, last, w
    cdef double best, dist
    while True:
        chosen.append(far)
        last = far
        best = -1.0
        with nogil:
            for w in range(n):
                dist = (_norm2x2(X[w, 0, 0] - X[last, 0, 0], X[w, 0, 1] - X[last, 0, 1],
                                 X[w, 1, 0] - X[last, 1, 0], X[w, 1, 1] - X[last, 1, 1])
                        + _norm2x2(Xi[w, 0, 0] - Xi[last, 0, 0], Xi[w, 0, 1] - Xi[last, 0, 1],
                                   Xi[w, 1, 0] - Xi[last, 1, 0], Xi[w, 1, 1] - Xi[last, 1, 1]))
                if dist < dmin[w]:
                    dmin[w] = dist
                if dmin[w] > best:
                    best = dmin[w]
                    far = w
        if best <= eps:
            break
    return np.asarray(chosen, dtype=np.intp)


cdef inline double _env(const double[:, ::1] f, double cb, double sb) noexcept nogil:
    cdef Py_ssize_t i
    cdef double best = -INFINITY, v
    for i in range(f.shape[0]):
        v = f[i, 0] + cb * f[i, 1] + sb * f[i, 2]
        if v > best:
            best = v
    return best


cdef inline double _ratio_at(const double[:, ::1] f1, const double[:, ::1] f2, double b) noexcept nogil:
    cdef double cb = cos(b), sb = sin(b)
    return _env(f1, cb, sb) / _env(f2, cb, sb)


cdef inline double _try_roots(const double[:, ::1] f1, const double[:, ::1] f2,
                              double A, double B, double E, double best) noexcept nogil:
    cdef double R = hypot(A, B), phi, t, r
    if R <= 0.0 or fabs(E) > R:
        return best
    phi = atan2(A, B)
    r = -E / R
    if r > 1.0:
        r = 1.0
    elif r < -1.0:
        r = -1.0
    t = acos(r)
    r = _ratio_at(f1, f2, phi + t)
    if r > best:
        best = r
    r = _ratio_at(f1, f2, phi - t)
    if r > best:
        best = r
    return best


def sup_ratio_2d(f1, f2):
    cdef const double[:, ::1] F1 = np.ascontiguousarray(f1, dtype=np.float64)
    cdef const double[:, ::1] F2 = np.ascontiguousarray(f2, dtype=np.float64)
    cdef Py_ssize_t n1 = F1.shape[0], n2 = F2.shape[0], i, j
    cdef double best
    with nogil:
        best = _ratio_at(F1, F2, 0.0)
        for i in range(n1):
            for j in range(n2):
                best = _try_roots(F1, F2,
                                  F1[i, 0] * F2[j, 1] - F1[i, 1] * F2[j, 0],
                                  F1[i, 2] * F2[j, 0] - F1[i, 0] * F2[j, 2],
                                  F1[i, 2] * F2[j, 1] - F1[i, 1] * F2[j, 2],
                                  best)
        for i in range(n2):
            for j in range(i + 1, n2):
                best = _try_roots(F1, F2,
                                  F2[i, 2] - F2[j, 2],
                                  F2[i, 1] - F2[j, 1],
                                  F2[i, 0] - F2[j, 0],
                                  best)
    return best
