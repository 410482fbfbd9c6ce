# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled path-enumeration kernels; see ``_pykernels`` for the contract."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

BACKEND = "cython"


def neumaier_sum(values):
    cdef double[::1] x = np.ascontiguousarray(values, dtype=np.float64)
    cdef double s = 0.0, c = 0.0, t, v
    cdef Py_ssize_t i
    with nogil:
        for i in range(x.shape[0]):
            v = x[i]
            t = s + v
            if fabs(s) >= fabs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s + c


def path_block(us_re, us_im, psi0_re, psi0_im, psif_re, psif_im, Py_ssize_t q0):
    cdef double[:, :, ::1] ur = np.ascontiguousarray(us_re, dtype=np.float64)
    cdef double[:, :, ::1] ui = np.ascontiguousarray(us_im, dtype=np.float64)
    cdef double[::1] fr = np.ascontiguousarray(psif_re, dtype=np.float64)
    cdef double[::1] fi = np.ascontiguousarray(psif_im, dtype=np.float64)
    cdef Py_ssize_t n = ur.shape[0]
    cdef Py_ssize_t d = ur.shape[1]
    cdef double p0r = float(psi0_re[q0])
    cdef double p0i = float(psi0_im[q0])
    cdef Py_ssize_t total = d ** n
    out_r_arr = np.zeros(total)
    out_i_arr = np.zeros(total)
    out_w_arr = np.zeros(total)
    cdef double[::1] out_r = out_r_arr
    cdef double[::1] out_i = out_i_arr
    cdef double[::1] out_w = out_w_arr
    cdef Py_ssize_t[::1] q = np.zeros(n + 1, dtype=np.intp)
    cdef double[::1] pre_r = np.zeros(n + 1)
    cdef double[::1] pre_i = np.zeros(n + 1)
    cdef Py_ssize_t idx, k, j, start = 0, qf
    cdef double a, b, c, e, ar, ai, tr, ti
    q[0] = q0
    pre_r[0] = 1.0
    with nogil:
        for idx in range(total):
            for k in range(start, n):
                a = pre_r[k]
                b = pre_i[k]
                c = ur[k, q[k + 1], q[k]]
                e = ui[k, q[k + 1], q[k]]
                pre_r[k + 1] = a * c - b * e
                pre_i[k + 1] = a * e + b * c
            ar = pre_r[n]
            ai = pre_i[n]
            tr = ar * p0r - ai * p0i
            ti = ar * p0i + ai * p0r
            qf = q[n]
            out_r[idx] = ar
            out_i[idx] = ai
            out_w[idx] = fr[qf] * tr + fi[qf] * ti
            j = n
            while j >= 1:
                q[j] += 1
                if q[j] < d:
                    break
                q[j] = 0
                j -= 1
            start = j - 1 if j >= 1 else 0
    return out_r_arr, out_i_arr, out_w_arr


def class_block(us_re, us_im, Py_ssize_t q0, time_step, node_cell, node_child,
                node_last, Py_ssize_t n_classes):
    cdef double[:, :, ::1] ur = np.ascontiguousarray(us_re, dtype=np.float64)
    cdef double[:, :, ::1] ui = np.ascontiguousarray(us_im, dtype=np.float64)
    cdef Py_ssize_t[::1] tstep = np.ascontiguousarray(time_step, dtype=np.intp)
    cdef Py_ssize_t[:, ::1] ncell = np.ascontiguousarray(node_cell, dtype=np.intp)
    cdef Py_ssize_t[:, ::1] nchild = np.ascontiguousarray(node_child, dtype=np.intp)
    cdef Py_ssize_t[::1] nlast = np.ascontiguousarray(node_last, dtype=np.intp)
    cdef Py_ssize_t n = ur.shape[0]
    cdef Py_ssize_t d = ur.shape[1]
    cdef Py_ssize_t total = d ** n
    cdef double[::1] s_r = np.zeros(n_classes * d)
    cdef double[::1] c_r = np.zeros(n_classes * d)
    cdef double[::1] s_i = np.zeros(n_classes * d)
    cdef double[::1] c_i = np.zeros(n_classes * d)
    cdef Py_ssize_t[::1] q = np.zeros(n + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] state = np.zeros(n + 1, dtype=np.intp)
    cdef double[::1] pre_r = np.zeros(n + 1)
    cdef double[::1] pre_i = np.zeros(n + 1)
    cdef Py_ssize_t it, k, j, start = 0, st, cell, nxt, cls, pos
    cdef double a, b, c, e, x, s, t
    q[0] = q0
    pre_r[0] = 1.0
    with nogil:
        for it in range(total):
            for k in range(start, n):
                a = pre_r[k]
                b = pre_i[k]
                c = ur[k, q[k + 1], q[k]]
                e = ui[k, q[k + 1], q[k]]
                pre_r[k + 1] = a * c - b * e
                pre_i[k + 1] = a * e + b * c
                st = state[k]
                if tstep[k + 1] and st >= 0:
                    cell = ncell[st, q[k + 1]]
                    nxt = nchild[st, cell]
                    st = -(nxt + 1) if nlast[st] else nxt
                state[k + 1] = st
            cls = -state[n] - 1
            pos = cls * d + q[n]
            x = pre_r[n]
            s = s_r[pos]
            t = s + x
            if fabs(s) >= fabs(x):
                c_r[pos] += (s - t) + x
            else:
                c_r[pos] += (x - t) + s
            s_r[pos] = t
            x = pre_i[n]
            s = s_i[pos]
            t = s + x
            if fabs(s) >= fabs(x):
                c_i[pos] += (s - t) + x
            else:
                c_i[pos] += (x - t) + s
            s_i[pos] = t
            j = n
            while j >= 1:
                q[j] += 1
                if q[j] < d:
                    break
                q[j] = 0
                j -= 1
            start = j - 1 if j >= 1 else 0
    re = (np.asarray(s_r) + np.asarray(c_r)).reshape(n_classes, d)
    im = (np.asarray(s_i) + np.asarray(c_i)).reshape(n_classes, d)
    return re, im
