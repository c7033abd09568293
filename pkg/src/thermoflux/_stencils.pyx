# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled periodic stencil kernels.

Every expression mirrors the NumPy fallback in _stencils_py.py term for term
and in the same association order, so both backends produce bit-identical
output (the extension is compiled with FP contraction disabled).
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def lap1(double[::1] f, double h):
    cdef Py_ssize_t n = f.shape[0]
    cdef double inv_h2 = 1.0 / (h * h)
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, im, ip
    for i in range(n):
        im = i - 1 if i > 0 else n - 1
        ip = i + 1 if i < n - 1 else 0
        out[i] = ((f[im] - 2.0 * f[i]) + f[ip]) * inv_h2
    return out_arr


def lap2(double[:, ::1] f, double h):
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1]
    cdef double inv_h2 = 1.0 / (h * h)
    out_arr = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, im, ip, jm, jp
    cdef double sx, sy
    for i in range(n0):
        im = i - 1 if i > 0 else n0 - 1
        ip = i + 1 if i < n0 - 1 else 0
        for j in range(n1):
            jm = j - 1 if j > 0 else n1 - 1
            jp = j + 1 if j < n1 - 1 else 0
            sx = ((f[im, j] - 2.0 * f[i, j]) + f[ip, j]) * inv_h2
            sy = ((f[i, jm] - 2.0 * f[i, j]) + f[i, jp]) * inv_h2
            out[i, j] = sx + sy
    return out_arr


def dagb1(double[::1] a, double[::1] b, double h):
    cdef Py_ssize_t n = a.shape[0]
    cdef double inv_h = 1.0 / h
    flux_arr = np.empty(n, dtype=np.float64)
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] flux = flux_arr
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, im, ip
    for i in range(n):
        ip = i + 1 if i < n - 1 else 0
        flux[i] = (0.5 * (a[i] + a[ip])) * (b[ip] - b[i]) * inv_h
    for i in range(n):
        im = i - 1 if i > 0 else n - 1
        out[i] = (flux[i] - flux[im]) * inv_h
    return out_arr


def dagb2(double[:, ::1] a, double[:, ::1] b, double h):
    cdef Py_ssize_t n0 = a.shape[0], n1 = a.shape[1]
    cdef double inv_h = 1.0 / h
    fx_arr = np.empty((n0, n1), dtype=np.float64)
    fy_arr = np.empty((n0, n1), dtype=np.float64)
    out_arr = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] fx = fx_arr
    cdef double[:, ::1] fy = fy_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, im, ip, jm, jp
    cdef double dx, dy
    for i in range(n0):
        ip = i + 1 if i < n0 - 1 else 0
        for j in range(n1):
            jp = j + 1 if j < n1 - 1 else 0
            fx[i, j] = (0.5 * (a[i, j] + a[ip, j])) * (b[ip, j] - b[i, j]) * inv_h
            fy[i, j] = (0.5 * (a[i, j] + a[i, jp])) * (b[i, jp] - b[i, j]) * inv_h
    for i in range(n0):
        im = i - 1 if i > 0 else n0 - 1
        for j in range(n1):
            jm = j - 1 if j > 0 else n1 - 1
            dx = (fx[i, j] - fx[im, j]) * inv_h
            dy = (fy[i, j] - fy[i, jm]) * inv_h
            out[i, j] = dx + dy
    return out_arr


def grad1(double[::1] f, double h):
    cdef Py_ssize_t n = f.shape[0]
    cdef double inv_2h = 1.0 / (2.0 * h)
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, im, ip
    for i in range(n):
        im = i - 1 if i > 0 else n - 1
        ip = i + 1 if i < n - 1 else 0
        out[i] = (f[ip] - f[im]) * inv_2h
    return out_arr


def grad2(double[:, ::1] f, double h):
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1]
    cdef double inv_2h = 1.0 / (2.0 * h)
    gx_arr = np.empty((n0, n1), dtype=np.float64)
    gy_arr = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] gx = gx_arr
    cdef double[:, ::1] gy = gy_arr
    cdef Py_ssize_t i, j, im, ip, jm, jp
    for i in range(n0):
        im = i - 1 if i > 0 else n0 - 1
        ip = i + 1 if i < n0 - 1 else 0
        for j in range(n1):
            jm = j - 1 if j > 0 else n1 - 1
            jp = j + 1 if j < n1 - 1 else 0
            gx[i, j] = (f[ip, j] - f[im, j]) * inv_2h
            gy[i, j] = (f[i, jp] - f[i, jm]) * inv_2h
    return gx_arr, gy_arr
