# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the hot kernels in _kernels_py.

Same signatures and semantics as the numpy versions; plain C loops with the
GIL released, avoiding the large temporaries of the vectorised path.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, fabs, log, sin, sqrt

cnp.import_array()

ctypedef double complex dcomplex

cdef extern from "complex.h" nogil:
    dcomplex cexp(dcomplex)


def uniaxial_log_factors(A, N, double p, t_M, t_I):
    """See _kernels_py.uniaxial_log_factors."""
    cdef double[::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] Nv = np.ascontiguousarray(N, dtype=np.float64)
    cdef double[::1] tMv = np.ascontiguousarray(t_M, dtype=np.float64)
    cdef double[::1] tIv = np.ascontiguousarray(t_I, dtype=np.float64)
    cdef Py_ssize_t npts = tMv.shape[0], nc = Av.shape[0]
    if tIv.shape[0] != npts:
        raise ValueError("t_M and t_I must have equal length")
    if Nv.shape[0] != nc:
        raise ValueError("A and N must have equal length")

    L1a = np.empty(npts, dtype=np.float64)
    P1a = np.empty(npts, dtype=np.float64)
    L2a = np.empty(npts, dtype=np.float64)
    P2a = np.empty(npts, dtype=np.float64)
    cdef double[::1] L1 = L1a, P1 = P1a, L2 = L2a, P2 = P2a

    cdef Py_ssize_t i, j
    cdef double x, cx, sx, c2, br_re, br_im
    cdef double a_re, a_im, z_re, z_im, mag
    cdef double l1, p1, l2, p2, q
    cdef double NEG_INF = -float("inf")

    with nogil:
        for i in range(npts):
            l1 = 0.0; p1 = 0.0; l2 = 0.0; p2 = 0.0
            for j in range(nc):
                x = 0.5 * tMv[i] * Av[j]
                cx = cos(x); sx = sin(x)
                q = cos(0.25 * tIv[i] * Av[j])
                c2 = q * q
                # bracket = -2i sin(x) cos^2 + exp(ix)
                br_re = cx
                br_im = sx - 2.0 * sx * c2
                # a1 = exp(-ix) * bracket, a2 = exp(ix) * bracket
                a_re = cx * br_re + sx * br_im
                a_im = cx * br_im - sx * br_re
                z_re = a_re
                z_im = (2.0 * p - 1.0) * a_im
                mag = sqrt(z_re * z_re + z_im * z_im)
                if mag == 0.0:
                    l1 = NEG_INF
                else:
                    l1 += Nv[j] * log(mag)
                    p1 += Nv[j] * atan2(z_im, z_re)
                a_re = cx * br_re - sx * br_im
                a_im = cx * br_im + sx * br_re
                z_re = a_re
                z_im = (2.0 * p - 1.0) * a_im
                mag = sqrt(z_re * z_re + z_im * z_im)
                if mag == 0.0:
                    l2 = NEG_INF
                else:
                    l2 += Nv[j] * log(mag)
                    p2 += Nv[j] * atan2(z_im, z_re)
            L1[i] = l1; P1[i] = p1; L2[i] = l2; P2[i] = p2
    return L1a, P1a, L2a, P2a


cdef inline dcomplex _window_filter_one(double u, double duration,
                                        double* starts, double* ends,
                                        double* signs, Py_ssize_t nseg,
                                        double m0, double m1, double m2) nogil:
    cdef dcomplex acc = 0
    cdef Py_ssize_t k
    if fabs(u) * duration < 1e-8:
        return m0 + 1j * u * m1 - 0.5 * u * u * m2
    for k in range(nseg):
        acc = acc + signs[k] * (cexp(1j * u * ends[k]) - cexp(1j * u * starts[k])) / (1j * u)
    return acc


def window_filter(u, starts, ends, signs, moments):
    """See _kernels_py.window_filter."""
    ua = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef double[::1] uv = ua
    cdef double[::1] sv = np.ascontiguousarray(starts, dtype=np.float64)
    cdef double[::1] ev = np.ascontiguousarray(ends, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(signs, dtype=np.float64)
    cdef Py_ssize_t nseg = sv.shape[0], npts = uv.shape[0], i
    cdef double m0 = moments[0], m1 = moments[1], m2 = moments[2]
    cdef double duration = ev[nseg - 1] if nseg else 0.0
    out = np.empty(npts, dtype=np.complex128)
    cdef dcomplex[::1] ov = out
    with nogil:
        for i in range(npts):
            ov[i] = _window_filter_one(uv[i], duration, &sv[0] if nseg else NULL,
                                       &ev[0] if nseg else NULL,
                                       &gv[0] if nseg else NULL, nseg, m0, m1, m2)
    return out.reshape(np.shape(u))


def semiclassical_matrices(b_rms, omega, A, domega, double coupling_scale,
                           double t_M, double t_I, double sigma_flip,
                           starts, ends, signs, moments):
    """See _kernels_py.semiclassical_matrices."""
    cdef double[::1] bv = np.ascontiguousarray(b_rms, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(omega, dtype=np.float64)
    cdef double[::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    dom = np.atleast_2d(np.ascontiguousarray(domega, dtype=np.float64))
    cdef double[:, ::1] dv = dom
    cdef Py_ssize_t ns = dv.shape[0], n = dv.shape[1]
    if bv.shape[0] != n or wv.shape[0] != n or Av.shape[0] != n:
        raise ValueError("component arrays must match domega's second axis")

    cdef double[::1] sv = np.ascontiguousarray(starts, dtype=np.float64)
    cdef double[::1] ev = np.ascontiguousarray(ends, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(signs, dtype=np.float64)
    cdef Py_ssize_t nseg = sv.shape[0]
    cdef double m0 = moments[0], m1 = moments[1], m2 = moments[2]
    cdef double duration = ev[nseg - 1] if nseg else 0.0

    H = np.empty((ns, 2, 2, n, n), dtype=np.complex128)
    cdef dcomplex[:, :, :, :, ::1] Hv = H
    cdef Py_ssize_t i, k, l
    cdef double u, akl, th
    cdef dcomplex K, EF, EFc, val

    # each of the four matrices is Hermitian: fill the lower triangle and
    # mirror the conjugates
    with nogil:
        for i in range(ns):
            for k in range(n):
                for l in range(k + 1):
                    u = (wv[k] + dv[i, k]) - (wv[l] + dv[i, l])
                    K = coupling_scale * bv[k] * bv[l] * _window_filter_one(
                        u, duration, &sv[0] if nseg else NULL,
                        &ev[0] if nseg else NULL, &gv[0] if nseg else NULL,
                        nseg, m0, m1, m2)
                    akl = Av[k] - Av[l]
                    th = u * (t_M + t_I) + 0.5 * akl * sigma_flip
                    EF = cos(th) + 1j * sin(th)
                    th = u * (t_M + t_I) - 0.5 * akl * sigma_flip
                    EFc = cos(th) + 1j * sin(th)
                    val = K * (1.0 + EF)
                    Hv[i, 0, 0, k, l] = val
                    Hv[i, 0, 0, l, k] = val.conjugate()
                    val = K * (1.0 + EFc)
                    Hv[i, 0, 1, k, l] = val
                    Hv[i, 0, 1, l, k] = val.conjugate()
                    val = K * (1.0 - EF)
                    Hv[i, 1, 0, k, l] = val
                    Hv[i, 1, 0, l, k] = val.conjugate()
                    val = K * (1.0 - EFc)
                    Hv[i, 1, 1, k, l] = val
                    Hv[i, 1, 1, l, k] = val.conjugate()
    return H
