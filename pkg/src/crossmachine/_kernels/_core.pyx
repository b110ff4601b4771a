# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled leave-two-out counting kernel (see ``_reference.py``)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def leave_two_out_counts(scores, runtimes, gammas, double rel_slack):
    cdef const double[::1] s = np.ascontiguousarray(scores, dtype=np.float64)
    cdef const double[:, ::1] r = np.ascontiguousarray(runtimes, dtype=np.float64)
    cdef const double[::1] g = np.ascontiguousarray(gammas, dtype=np.float64)
    cdef Py_ssize_t n_mach = r.shape[0]
    cdef Py_ssize_t n_proc = r.shape[1]
    cdef Py_ssize_t n_gamma = g.shape[0]
    counts_arr = np.zeros(n_gamma, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    rowsum_arr = np.zeros(n_mach, dtype=np.float64)
    cdef double[::1] rowsum = rowsum_arr

    cdef Py_ssize_t c1, c2, m, p, j
    cdef double n_train = <double>(n_mach - 2)
    cdef double s_acc, y_acc, s_bar, y_bar, sxx, sxy, ds, y
    cdef double slope, intercept, pole, ratio, base, limit

    with nogil:
        for p in range(n_proc):
            for m in range(n_mach):
                rowsum[m] += r[m, p]

        for c1 in range(n_mach):
            for c2 in range(n_mach):
                if c2 == c1:
                    continue
                for p in range(n_proc):
                    s_acc = 0.0
                    y_acc = 0.0
                    for m in range(n_mach):
                        if m == c1 or m == c2:
                            continue
                        s_acc += s[m]
                        y_acc += rowsum[m] - r[m, p]
                    s_bar = s_acc / n_train
                    y_bar = y_acc / n_train
                    sxx = 0.0
                    sxy = 0.0
                    for m in range(n_mach):
                        if m == c1 or m == c2:
                            continue
                        ds = s[m] - s_bar
                        y = rowsum[m] - r[m, p]
                        sxx += ds * ds
                        sxy += ds * (y - y_bar)
                    slope = sxy / sxx
                    intercept = y_bar - slope * s_bar
                    pole = -intercept / slope
                    ratio = (pole - s[c2]) / (pole - s[c1])
                    base = r[c1, p] * ratio
                    limit = r[c2, p] * (1.0 + rel_slack)
                    for j in range(n_gamma):
                        if base * g[j] > limit:
                            counts[j] += 1

    return counts_arr, n_proc * n_mach * (n_mach - 1)
