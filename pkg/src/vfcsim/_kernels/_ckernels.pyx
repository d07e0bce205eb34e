# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""
from libc.math cimport sqrt, log, exp, fmin, fmax
from libc.stdlib cimport malloc, free
import numpy as np

cdef double BISECT_RTOL = 1e-10
cdef int BISECT_MAX_ITER = 200


cdef inline double _clip(double x, double a, double b) nogil:
    return fmin(fmax(x, a), b)


def sp1_kkt(cycles, lo, hi, double f_max):
    cdef double[::1] c = np.ascontiguousarray(cycles, dtype=np.float64)
    cdef double[::1] l = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[::1] h = np.ascontiguousarray(hi, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], i, it
    out = np.zeros(n)
    cdef double[::1] f = out
    if n == 0:
        return out, 0.0
    cdef double sum_hi = 0.0
    for i in range(n):
        sum_hi += h[i]
    if sum_hi <= f_max:
        for i in range(n):
            f[i] = h[i]
        return out, 0.0

    cdef double lam_a = c[0] / (h[0] * h[0]), lam_b = c[0] / (l[0] * l[0])
    cdef double r
    for i in range(1, n):
        r = c[i] / (h[i] * h[i])
        if r < lam_a:
            lam_a = r
        r = c[i] / (l[i] * l[i])
        if r > lam_b:
            lam_b = r
    cdef double log_a = log(lam_a), log_b = log(lam_b), log_m, lam_m, total, inv
    for it in range(BISECT_MAX_ITER):
        if lam_b - lam_a <= BISECT_RTOL * lam_b:
            break
        log_m = 0.5 * (log_a + log_b)
        lam_m = exp(log_m)
        inv = 1.0 / sqrt(lam_m)
        total = 0.0
        for i in range(n):
            total += _clip(sqrt(c[i]) * inv, l[i], h[i])
        if total > f_max:
            log_a = log_m
            lam_a = lam_m
        else:
            log_b = log_m
            lam_b = lam_m

    inv = 1.0 / sqrt(lam_b)
    cdef double clamped = 0.0, sq_free = 0.0, raw, s
    cdef int n_free = 0
    for i in range(n):
        raw = sqrt(c[i]) * inv
        if raw <= l[i]:
            f[i] = l[i]
            clamped += l[i]
        elif raw >= h[i]:
            f[i] = h[i]
            clamped += h[i]
        else:
            f[i] = raw
            sq_free += sqrt(c[i])
            n_free += 1
    if n_free == 0:
        return out, lam_b
    s = (f_max - clamped) / sq_free
    if s <= 0:
        return out, lam_b
    for i in range(n):
        raw = sqrt(c[i]) * inv
        if l[i] < raw < h[i]:
            r = s * sqrt(c[i])
            if r < l[i] or r > h[i]:
                return out, lam_b
    for i in range(n):
        raw = sqrt(c[i]) * inv
        if l[i] < raw < h[i]:
            f[i] = s * sqrt(c[i])
    return out, 1.0 / (s * s)


cdef inline double _block_value(double sw, double swt, double st, Py_ssize_t size, double cap):
    cdef double m = swt / sw if sw > 0.0 else st / size
    return fmin(fmax(m, 0.0), cap)


def pava_clip(target, weight, upper):
    cdef double[::1] t = np.ascontiguousarray(target, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weight, dtype=np.float64)
    cdef double[::1] u = np.ascontiguousarray(upper, dtype=np.float64)
    cdef Py_ssize_t n = t.shape[0], i, b, k, pos
    out = np.empty(n)
    cdef double[::1] o = out
    if n == 0:
        return out
    cdef double* sw = <double*> malloc(n * sizeof(double))
    cdef double* swt = <double*> malloc(n * sizeof(double))
    cdef double* st = <double*> malloc(n * sizeof(double))
    cdef double* cap = <double*> malloc(n * sizeof(double))
    cdef double* vals = <double*> malloc(n * sizeof(double))
    cdef Py_ssize_t* sizes = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t top = -1
    try:
        for i in range(n):
            top += 1
            sw[top] = w[i]
            swt[top] = w[i] * t[i]
            st[top] = t[i]
            cap[top] = u[i]
            sizes[top] = 1
            vals[top] = _block_value(sw[top], swt[top], st[top], 1, cap[top])
            while top > 0 and vals[top - 1] > vals[top]:
                sw[top - 1] += sw[top]
                swt[top - 1] += swt[top]
                st[top - 1] += st[top]
                cap[top - 1] = fmin(cap[top - 1], cap[top])
                sizes[top - 1] += sizes[top]
                top -= 1
                vals[top] = _block_value(sw[top], swt[top], st[top], sizes[top], cap[top])
        pos = 0
        for b in range(top + 1):
            for k in range(sizes[b]):
                o[pos] = vals[b]
                pos += 1
    finally:
        free(sw)
        free(swt)
        free(st)
        free(cap)
        free(vals)
        free(sizes)
    return out


def deferred_acceptance(prefs, rank, demand, cap, count_cap):
    cdef long long[:, ::1] P = np.ascontiguousarray(prefs, dtype=np.int64).reshape(len(prefs), -1)
    cdef long long[:, ::1] R = np.ascontiguousarray(rank, dtype=np.int64).reshape(len(rank), -1)
    cdef double[:, ::1] D = np.ascontiguousarray(demand, dtype=np.float64).reshape(len(prefs), -1)
    cdef double[::1] Q = np.ascontiguousarray(cap, dtype=np.float64)
    cdef long long[::1] K = np.ascontiguousarray(count_cap, dtype=np.int64)
    cdef Py_ssize_t n_tv = P.shape[0], n_srv = R.shape[0], width = P.shape[1]
    cdef Py_ssize_t n, s, i, j, cnt, key_t
    match_arr = np.full(n_tv, -1, dtype=np.int64)
    cdef long long[::1] match = match_arr
    nxt_arr = np.zeros(n_tv, dtype=np.int64)
    cdef long long[::1] nxt = nxt_arr
    # per-server pool, ordered by (rank, id); pool_len[s] counts entries
    pool_arr = np.empty((max(n_srv, 1), max(n_tv, 1)), dtype=np.int64)
    cdef long long[:, ::1] pool = pool_arr
    pool_len_arr = np.zeros(max(n_srv, 1), dtype=np.int64)
    cdef long long[::1] pool_len = pool_len_arr
    touched_arr = np.zeros(max(n_srv, 1), dtype=np.int8)
    cdef signed char[::1] touched = touched_arr
    cdef long long proposals = 0
    cdef bint any_prop
    cdef double used
    cdef long long limit, t, r_new, r_cur
    while True:
        any_prop = False
        for s in range(n_srv):
            touched[s] = 0
        for n in range(n_tv):
            if match[n] >= 0 or nxt[n] >= width:
                continue
            s = P[n, nxt[n]]
            if s < 0:
                nxt[n] = width
                continue
            nxt[n] += 1
            proposals += 1
            any_prop = True
            touched[s] = 1
            # insertion into the ordered pool
            j = pool_len[s]
            r_new = R[s, n]
            while j > 0:
                t = pool[s, j - 1]
                r_cur = R[s, t]
                if r_cur < r_new or (r_cur == r_new and t < n):
                    break
                pool[s, j] = t
                j -= 1
            pool[s, j] = n
            pool_len[s] += 1
            match[n] = s
        if not any_prop:
            break
        for s in range(n_srv):
            if not touched[s]:
                continue
            used = 0.0
            limit = K[s]
            cnt = 0
            for i in range(pool_len[s]):
                t = pool[s, i]
                if used + D[t, s] > Q[s] or (limit > 0 and cnt >= limit):
                    match[t] = -1
                    continue
                used += D[t, s]
                pool[s, cnt] = t
                cnt += 1
            pool_len[s] = cnt
    return match_arr, proposals
