# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-timestep edge builders.

Drop-in replacement for _reference.py: same signatures, same float
semantics (compiled with -ffp-contract=off so comparisons at threshold
boundaries agree bit-for-bit with the numpy fallback). These iterate
source cells and scan their candidate window directly, which avoids the
fallback's per-offset array temporaries.
"""

from libc.math cimport ceil, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _imax(Py_ssize_t a, Py_ssize_t b) noexcept:
    return a if a > b else b


cdef inline Py_ssize_t _imin(Py_ssize_t a, Py_ssize_t b) noexcept:
    return a if a < b else b


def shadow_edges(cnp.int64_t[:, :] category, double[:, :] reach, double un,
                 double ue, double cth, long building_code):
    cdef Py_ssize_t rows = category.shape[0]
    cdef Py_ssize_t cols = category.shape[1]
    cdef Py_ssize_t r, c, tr, tc, box, n = 0
    cdef double li, d, cosdev
    cdef double rmax = 0.0
    for r in range(rows):
        for c in range(cols):
            if reach[r, c] > rmax:
                rmax = reach[r, c]
    if rmax <= 0.0:
        return np.zeros((0, 2), dtype=np.int64)
    box = <Py_ssize_t> ceil(rmax)

    out = np.empty((rows * cols * 4, 2), dtype=np.int64)
    cdef cnp.int64_t[:, :] buf = out
    cdef Py_ssize_t cap = buf.shape[0]

    for r in range(rows):
        for c in range(cols):
            li = reach[r, c]
            if li <= 0.0:
                continue
            for tr in range(_imax(0, r - box), _imin(rows, r + box + 1)):
                for tc in range(_imax(0, c - box), _imin(cols, c + box + 1)):
                    if tr == r and tc == c:
                        continue
                    if category[tr, tc] == building_code:
                        continue
                    d = sqrt(<double> ((tr - r) * (tr - r) + (tc - c) * (tc - c)))
                    if d > li:
                        continue
                    cosdev = (-(tr - r) * un + (tc - c) * ue) / d
                    if cosdev >= cth:
                        if n == cap:
                            out = _grow(out)
                            buf = out
                            cap = buf.shape[0]
                        buf[n, 0] = r * cols + c
                        buf[n, 1] = tr * cols + tc
                        n += 1
    return out[:n].copy()


def vegetation_edges(cnp.int64_t[:, :] category, double radius, long tree_code):
    cdef Py_ssize_t rows = category.shape[0]
    cdef Py_ssize_t cols = category.shape[1]
    cdef Py_ssize_t r, c, tr, tc, n = 0
    cdef Py_ssize_t box = <Py_ssize_t> ceil(radius)
    cdef double d

    out = np.empty((rows * cols * 4, 2), dtype=np.int64)
    cdef cnp.int64_t[:, :] buf = out
    cdef Py_ssize_t cap = buf.shape[0]

    for r in range(rows):
        for c in range(cols):
            if category[r, c] != tree_code:
                continue
            for tr in range(_imax(0, r - box), _imin(rows, r + box + 1)):
                for tc in range(_imax(0, c - box), _imin(cols, c + box + 1)):
                    if tr == r and tc == c:
                        continue
                    d = sqrt(<double> ((tr - r) * (tr - r) + (tc - c) * (tc - c)))
                    if d <= radius:
                        if n == cap:
                            out = _grow(out)
                            buf = out
                            cap = buf.shape[0]
                        buf[n, 0] = r * cols + c
                        buf[n, 1] = tr * cols + tc
                        n += 1
    return out[:n].copy()


def wind_edges(cnp.int64_t[:, :] category, double r_local, double wn, double we,
               double lam, double vratio, long building_code):
    cdef Py_ssize_t rows = category.shape[0]
    cdef Py_ssize_t cols = category.shape[1]
    cdef Py_ssize_t r, c, tr, tc, n = 0
    cdef Py_ssize_t box = <Py_ssize_t> ceil(r_local * (1.0 + lam))
    cdef double d, cosdev, alpha

    out = np.empty((rows * cols * 8, 2), dtype=np.int64)
    cdef cnp.int64_t[:, :] buf = out
    cdef Py_ssize_t cap = buf.shape[0]

    for r in range(rows):
        for c in range(cols):
            if category[r, c] == building_code:
                continue
            for tr in range(_imax(0, r - box), _imin(rows, r + box + 1)):
                for tc in range(_imax(0, c - box), _imin(cols, c + box + 1)):
                    if tr == r and tc == c:
                        continue
                    if category[tr, tc] == building_code:
                        continue
                    d = sqrt(<double> ((tr - r) * (tr - r) + (tc - c) * (tc - c)))
                    cosdev = (-(tr - r) * wn + (tc - c) * we) / d
                    alpha = 1.0 + lam * cosdev * vratio
                    if d / alpha <= r_local:
                        if n == cap:
                            out = _grow(out)
                            buf = out
                            cap = buf.shape[0]
                        buf[n, 0] = r * cols + c
                        buf[n, 1] = tr * cols + tc
                        n += 1
    return out[:n].copy()


def _grow(arr):
    bigger = np.empty((arr.shape[0] * 2, 2), dtype=np.int64)
    bigger[:arr.shape[0]] = arr
    return bigger
