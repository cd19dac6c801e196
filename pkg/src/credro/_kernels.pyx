# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot numerical kernels.

Mirrors ``credro._kernels_py`` function for function; keep the two in
semantic lockstep (entropy in nats, 0 * ln 0 == 0, same return shapes).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double _LEVEL_TOL = 1e-12
cdef int _LEVEL_MAX_ITER = 200


cdef inline double _xlogx(double x) nogil:
    if x > 0.0:
        return x * log(x)
    return 0.0


cdef double _entropy_mv(const double[::1] p) nogil:
    cdef Py_ssize_t k
    cdef double h = 0.0
    for k in range(p.shape[0]):
        h -= _xlogx(p[k])
    return h


def shannon_entropy(p) -> float:
    """Shannon entropy in nats of a probability vector."""
    cdef const double[::1] v = np.ascontiguousarray(p, dtype=np.float64)
    return _entropy_mv(v)


def entropy_rows(rows):
    """Per-row Shannon entropy of an (N, C) array of probability vectors."""
    cdef const double[:, ::1] r = np.ascontiguousarray(rows, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0], c = r.shape[1], i, k
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double h
    with nogil:
        for i in range(n):
            h = 0.0
            for k in range(c):
                h -= _xlogx(r[i, k])
            o[i] = h
    return out


def waterfill_box(lo, hi):
    """Maximize entropy over {lo <= p <= hi, sum(p) = 1}.

    Bisection on the water level c of p_k = clip(c, lo_k, hi_k), with an
    exact refinement once the clamp pattern is known.  Returns
    ``(entropy, argmax)``.
    """
    cdef const double[::1] l = np.ascontiguousarray(lo, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(hi, dtype=np.float64)
    cdef Py_ssize_t c_len = l.shape[0], k
    p_arr = np.empty(c_len, dtype=np.float64)
    cdef double[::1] p = p_arr
    cdef double a = l[0], b = u[0], c = 0.0, g, v, residual, level
    cdef Py_ssize_t n_free
    cdef bint ok
    cdef int it
    with nogil:
        for k in range(c_len):
            if l[k] < a:
                a = l[k]
            if u[k] > b:
                b = u[k]
        for it in range(_LEVEL_MAX_ITER):
            c = 0.5 * (a + b)
            g = -1.0
            for k in range(c_len):
                v = c
                if v < l[k]:
                    v = l[k]
                elif v > u[k]:
                    v = u[k]
                g += v
            if fabs(g) <= _LEVEL_TOL:
                break
            if g < 0.0:
                a = c
            else:
                b = c
        for k in range(c_len):
            v = c
            if v < l[k]:
                v = l[k]
            elif v > u[k]:
                v = u[k]
            p[k] = v
        # exact level on the identified clamp pattern
        residual = 1.0
        n_free = 0
        for k in range(c_len):
            if u[k] <= c:
                residual -= u[k]
            elif l[k] >= c:
                residual -= l[k]
            else:
                n_free += 1
        if n_free > 0:
            level = residual / n_free
            ok = True
            for k in range(c_len):
                if u[k] <= c:
                    if u[k] > level:
                        ok = False
                        break
                elif l[k] >= c:
                    if l[k] < level:
                        ok = False
                        break
                else:
                    if l[k] > level or level > u[k]:
                        ok = False
                        break
            if ok:
                for k in range(c_len):
                    if u[k] <= c:
                        p[k] = u[k]
                    elif l[k] >= c:
                        p[k] = l[k]
                    else:
                        p[k] = level
    return _entropy_mv(p), p_arr


def box_lower_vertices(lo, hi):
    """Minimize entropy over {lo <= p <= hi, sum(p) = 1} by enumerating
    the extreme points (one free coordinate, the rest pinned to bounds).

    Returns ``(entropy, argmin)``.
    """
    cdef const double[::1] l = np.ascontiguousarray(lo, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(hi, dtype=np.float64)
    cdef Py_ssize_t c_len = l.shape[0]
    cdef Py_ssize_t f, k, j
    cdef unsigned long mask, n_masks = 1UL << (c_len - 1)
    cdef double s, h, res, best_h = np.inf
    cdef unsigned long best_mask = 0
    cdef Py_ssize_t best_f = -1
    # bound values and their x*ln(x) terms, tabulated once
    t_lo_arr = np.empty(c_len, dtype=np.float64)
    t_hi_arr = np.empty(c_len, dtype=np.float64)
    cdef double[::1] t_lo = t_lo_arr
    cdef double[::1] t_hi = t_hi_arr
    with nogil:
        for k in range(c_len):
            t_lo[k] = _xlogx(l[k])
            t_hi[k] = _xlogx(u[k])
        for f in range(c_len):
            for mask in range(n_masks):
                s = 0.0
                h = 0.0
                j = 0
                for k in range(c_len):
                    if k == f:
                        continue
                    if (mask >> j) & 1UL:
                        s += u[k]
                        h -= t_hi[k]
                    else:
                        s += l[k]
                        h -= t_lo[k]
                    j += 1
                res = 1.0 - s
                if res < l[f] - 1e-12 or res > u[f] + 1e-12:
                    continue
                if res < l[f]:
                    res = l[f]
                elif res > u[f]:
                    res = u[f]
                h -= _xlogx(res)
                if h < best_h:
                    best_h = h
                    best_mask = mask
                    best_f = f
    if best_f < 0:
        return np.inf, None
    p_arr = np.empty(c_len, dtype=np.float64)
    cdef double[::1] p = p_arr
    s = 0.0
    j = 0
    for k in range(c_len):
        if k == best_f:
            continue
        if (best_mask >> j) & 1UL:
            p[k] = u[k]
        else:
            p[k] = l[k]
        s += p[k]
        j += 1
    res = 1.0 - s
    if res < l[best_f]:
        res = l[best_f]
    elif res > u[best_f]:
        res = u[best_f]
    p[best_f] = res
    return best_h, p_arr


def hull_upper_cg(P, double improve_tol=1e-10, long max_iter=10000):
    """Maximize H(w @ P) over the weight simplex by pairwise conditional
    gradient with exact 1-D line search (weight moves from the worst
    active member to the best).  Returns ``(entropy, weights, iterations)``.
    """
    cdef const double[:, ::1] pm = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t m = pm.shape[0], c = pm.shape[1], i, k, best, worst
    w_arr = np.full(m, 1.0 / m)
    cdef double[::1] w = w_arr
    q_arr = np.zeros(c, dtype=np.float64)
    cdef double[::1] q = q_arr
    d_arr = np.empty(c, dtype=np.float64)
    cdef double[::1] d = d_arr
    scores_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] scores = scores_arr
    grad_arr = np.empty(c, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef double h, h_new, gap, t, t_max, a, b, mid, sl, qt
    cdef double tiny = 1e-300
    cdef long it = 0
    cdef int bi
    with nogil:
        for i in range(m):
            for k in range(c):
                q[k] += w[i] * pm[i, k]
        h = 0.0
        for k in range(c):
            h -= _xlogx(q[k])
    if m == 1:
        return h, w_arr, 0
    with nogil:
        for it in range(1, max_iter + 1):
            for k in range(c):
                qt = q[k]
                if qt < tiny:
                    qt = tiny
                grad[k] = -log(qt) - 1.0
            best = 0
            for i in range(m):
                scores[i] = 0.0
                for k in range(c):
                    scores[i] += pm[i, k] * grad[k]
                if scores[i] > scores[best]:
                    best = i
            # optimality certificate: value gap <= max score - current slope
            gap = scores[best]
            for k in range(c):
                gap -= q[k] * grad[k]
            if gap <= 1e-12:
                break
            worst = -1
            for i in range(m):
                if w[i] > 0.0 and (worst < 0 or scores[i] < scores[worst]):
                    worst = i
            if worst == best:
                break
            for k in range(c):
                d[k] = pm[best, k] - pm[worst, k]
            t_max = w[worst]
            sl = 0.0
            for k in range(c):
                qt = q[k] + t_max * d[k]
                if qt < tiny:
                    qt = tiny
                sl += d[k] * (-log(qt) - 1.0)
            if sl >= 0.0:
                t = t_max
            else:
                a = 0.0
                b = t_max
                for bi in range(60):
                    mid = 0.5 * (a + b)
                    sl = 0.0
                    for k in range(c):
                        qt = q[k] + mid * d[k]
                        if qt < tiny:
                            qt = tiny
                        sl += d[k] * (-log(qt) - 1.0)
                    if sl > 0.0:
                        a = mid
                    else:
                        b = mid
                t = 0.5 * (a + b)
            h_new = 0.0
            for k in range(c):
                h_new -= _xlogx(q[k] + t * d[k])
            if h_new <= h:
                break
            for k in range(c):
                q[k] = q[k] + t * d[k]
            if t >= t_max:
                w[worst] = 0.0
            else:
                w[worst] = w[worst] - t
            w[best] += t
            if h_new - h < improve_tol and gap <= 1e-9:
                h = h_new
                break
            h = h_new
    return h, w_arr, it
