# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled quadrature kernels; see ``_pykernels`` for the layout.

Per mode, ``exp(i omega offset)`` is tabulated once for the in-panel
offsets, so each panel costs one ``sincos`` plus complex multiply-adds.
"""
import numpy as np


cdef extern from *:
    """
    #ifndef _GNU_SOURCE
    #define _GNU_SOURCE
    #endif
    #include <math.h>
    static inline void mf_sincos(double x, double *s, double *c) { sincos(x, s, c); }
    """
    void mf_sincos(double x, double *s, double *c) nogil


def phase_integrals(const double[::1] starts, const double[::1] off_out,
                    const double[:, ::1] wg_out, const double[::1] omega,
                    const double[::1] phase):
    cdef Py_ssize_t n_panels = starts.shape[0], order = off_out.shape[0]
    cdef Py_ssize_t m = omega.shape[0], p, a, q
    cdef double w, s, c, re_p, im_p, re, im
    cdef double[::1] tab_c = np.empty(order), tab_s = np.empty(order)
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] res = out
    for p in range(m):
        w = omega[p]
        for q in range(order):
            mf_sincos(w * off_out[q], &tab_s[q], &tab_c[q])
        re = 0.0
        im = 0.0
        for a in range(n_panels):
            re_p = 0.0
            im_p = 0.0
            for q in range(order):
                re_p += wg_out[a, q] * tab_c[q]
                im_p += wg_out[a, q] * tab_s[q]
            mf_sincos(w * starts[a] + phase[p], &s, &c)
            re += c * re_p - s * im_p
            im += s * re_p + c * im_p
        res[p] = re + 1j * im
    return out


def ordered_double_integrals(const double[::1] starts, const double[::1] off_out,
                             const double[:, ::1] off_in, const double[:, ::1] wg_out,
                             const double[:, :, ::1] wg_in, const double[::1] omega):
    cdef Py_ssize_t n_panels = starts.shape[0], order = off_out.shape[0]
    cdef Py_ssize_t m = omega.shape[0], p, a, q, r
    cdef double w, sa, ca, c_start, s_start, c_panel, s_panel
    cdef double re, im, ci, si, cx, sx, acc
    cdef double[::1] out_c = np.empty(order), out_s = np.empty(order)
    cdef double[:, ::1] in_c = np.empty((order, order)), in_s = np.empty((order, order))
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    for p in range(m):
        w = omega[p]
        for q in range(order):
            mf_sincos(w * off_out[q], &out_s[q], &out_c[q])
            for r in range(order):
                mf_sincos(w * off_in[q, r], &in_s[q, r], &in_c[q, r])
        c_start = 0.0
        s_start = 0.0
        acc = 0.0
        for a in range(n_panels):
            mf_sincos(w * starts[a], &sa, &ca)
            c_panel = 0.0
            s_panel = 0.0
            for q in range(order):
                re = 0.0
                im = 0.0
                for r in range(order):
                    re += wg_in[a, q, r] * in_c[q, r]
                    im += wg_in[a, q, r] * in_s[q, r]
                ci = ca * re - sa * im
                si = sa * re + ca * im
                cx = ca * out_c[q] - sa * out_s[q]
                sx = sa * out_c[q] + ca * out_s[q]
                acc += wg_out[a, q] * (sx * (c_start + ci) - cx * (s_start + si))
                c_panel += wg_out[a, q] * cx
                s_panel += wg_out[a, q] * sx
            c_start += c_panel
            s_start += s_panel
        res[p] = acc
    return out
