# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled modular evaluation and Luxemburg bisection.

Same bracket-and-bisect as ``_kernels_py``, different modular evaluation for
the piecewise families.  Bracketing uses a plain pass over the atoms.  Once
the norm is bracketed in ``[lo, hi]``, the atoms are partitioned into those
on the upper piece for every ``k`` in the bracket, those on the quadratic
piece for every such ``k``, and a band in between, which alone is sorted by
``ln|f|``.  For any ``k`` in the bracket the upper-piece atoms are then a
prefix found by binary search inside the band, the quadratic piece is a
precomputed suffix sum and, when the log exponent is 1, the upper piece is two
prefix sums; other exponents loop over the prefix only.  All sums are
Neumaier-compensated.
"""
import numpy as np

from libc.math cimport fabs, log, pow, sqrt
from libc.stdlib cimport free, malloc, qsort

cdef enum:
    POWER = 0
    CLOSE2 = 1
    RYOU = 2
    KASHIN = 3
    MAX_BRACKET_STEPS = 200

cdef double E = 2.718281828459045

OK = 0
BRACKET_FAILED = 1


cdef struct Atom:
    double key    # ln |f_j|
    double x      # |f_j|
    double w
    double wf2    # w |f|^2
    double wfq    # w |f|^q


cdef struct Prepared:
    int code
    Py_ssize_t n
    double alpha, q, beta, log_u0, c
    double lp          # power family: ||f||_p
    Atom *atoms        # nonzero atoms; once narrowed: upper | band (key descending) | lower
    bint narrowed
    Py_ssize_t band_lo, band_hi
    double *low        # low[j] = sum_{i >= j} w_i |f_i|^2
    double *pa         # pa[j]  = sum_{i < j} w_i |f_i|^q ln|f_i|
    double *pb         # pb[j]  = sum_{i < j} w_i |f_i|^q


cdef inline void _acc(double *s, double *comp, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        comp[0] += (s[0] - t) + x
    else:
        comp[0] += (x - t) + s[0]
    s[0] = t


cdef int _cmp_desc(const void *a, const void *b) noexcept nogil:
    cdef double ka = (<const Atom *> a).key
    cdef double kb = (<const Atom *> b).key
    return (ka < kb) - (ka > kb)


cdef double _modular(Prepared *P, double k) noexcept nogil:
    cdef double s = 0.0, comp = 0.0, lk, thr, kq, u
    cdef Py_ssize_t j, lo, hi, mid, cnt
    if P.code == POWER:
        return pow(P.lp / k, P.q)
    if P.code == KASHIN:
        for j in range(P.n):
            u = P.atoms[j].x / k
            _acc(&s, &comp, P.atoms[j].w * u * u * pow(log(E + u) / log(E + 1.0 / u), P.alpha))
        return s + comp
    lk = log(k)
    thr = lk + P.log_u0
    if not P.narrowed:
        return _modular_plain(P, k, lk, thr)
    lo = P.band_lo
    hi = P.band_hi
    while lo < hi:
        mid = (lo + hi) // 2
        if P.atoms[mid].key >= thr:
            lo = mid + 1
        else:
            hi = mid
    cnt = lo
    kq = pow(k, -P.q)
    if P.beta == 1.0:
        s = (P.pa[cnt] - lk * P.pb[cnt]) * kq
    else:
        for j in range(cnt):
            _acc(&s, &comp, P.atoms[j].wfq * pow(P.atoms[j].key - lk, P.beta))
        s = (s + comp) * kq
    return s + P.c * P.low[cnt] / (k * k)


cdef double _modular_plain(Prepared *P, double k, double lk, double thr) noexcept nogil:
    cdef double su = 0.0, cu = 0.0, sl = 0.0, cl = 0.0, t
    cdef Py_ssize_t j
    for j in range(P.n):
        if P.atoms[j].key >= thr:
            t = P.atoms[j].key - lk
            if P.beta != 1.0:
                t = pow(t, P.beta)
            _acc(&su, &cu, P.atoms[j].wfq * t)
        else:
            _acc(&sl, &cl, P.atoms[j].wf2)
    return (su + cu) * pow(k, -P.q) + P.c * (sl + cl) / (k * k)


cdef inline void _swap(Atom *a, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Atom t = a[i]
    a[i] = a[j]
    a[j] = t


cdef void _narrow(Prepared *P, double lo, double hi) noexcept nogil:
    """Partition for the bracket ``[lo, hi]``, sort the band, build the sums."""
    cdef double t_lo = log(lo) + P.log_u0, t_hi = log(hi) + P.log_u0
    cdef double s = 0.0, comp = 0.0
    cdef Py_ssize_t i = 0, a = 0, b = P.n, j, m = P.n
    # three-way partition: key >= t_hi | t_lo <= key < t_hi | key < t_lo
    while i < b:
        if P.atoms[i].key >= t_hi:
            _swap(P.atoms, i, a)
            a += 1
            i += 1
        elif P.atoms[i].key < t_lo:
            b -= 1
            _swap(P.atoms, i, b)
        else:
            i += 1
    qsort(&P.atoms[a], b - a, sizeof(Atom), _cmp_desc)
    P.band_lo = a
    P.band_hi = b
    P.low[m] = 0.0
    for j in range(m - 1, -1, -1):
        _acc(&s, &comp, P.atoms[j].wf2)
        P.low[j] = s + comp
    s = 0.0
    comp = 0.0
    P.pb[0] = 0.0
    for j in range(m):
        _acc(&s, &comp, P.atoms[j].wfq)
        P.pb[j + 1] = s + comp
    s = 0.0
    comp = 0.0
    P.pa[0] = 0.0
    for j in range(m):
        _acc(&s, &comp, P.atoms[j].wfq * P.atoms[j].key)
        P.pa[j + 1] = s + comp
    P.narrowed = True


cdef int _prepare(Prepared *P, Py_ssize_t M, int code, double alpha, double p,
                  double u0, double c) except -1:
    P.code = code
    P.alpha = alpha
    P.c = c
    P.n = 0
    P.lp = 0.0
    P.log_u0 = 0.0
    P.atoms = NULL
    P.narrowed = False
    P.low = NULL
    P.pa = NULL
    P.pb = NULL
    if code == POWER:
        P.q, P.beta = p, 0.0
        return 0
    if code == CLOSE2:
        P.q, P.beta = 2.0, alpha
    elif code == RYOU:
        P.q, P.beta = p, alpha * p
    elif code == KASHIN:
        P.q, P.beta = 2.0, 1.0
    else:
        raise ValueError(f"unknown family code {code}")
    if code != KASHIN:
        P.log_u0 = log(u0)
    # sized for every atom so the buffers can be refilled row by row
    P.atoms = <Atom *> malloc((M + 1) * sizeof(Atom))
    P.low = <double *> malloc((M + 1) * sizeof(double))
    P.pa = <double *> malloc((M + 1) * sizeof(double))
    P.pb = <double *> malloc((M + 1) * sizeof(double))
    if not (P.atoms and P.low and P.pa and P.pb):
        _release(P)
        raise MemoryError()
    return 0


cdef void _fill(Prepared *P, const double[::1] absf, const double[::1] w) noexcept nogil:
    cdef Py_ssize_t j, m = 0
    cdef double x, s = 0.0, comp = 0.0
    if P.code == POWER:
        for j in range(absf.shape[0]):
            _acc(&s, &comp, w[j] * pow(absf[j], P.q))
        P.lp = pow(s + comp, 1.0 / P.q)
        return
    for j in range(absf.shape[0]):
        x = absf[j]
        if x > 0:
            P.atoms[m].key = log(x)
            P.atoms[m].x = x
            P.atoms[m].w = w[j]
            P.atoms[m].wf2 = w[j] * x * x
            P.atoms[m].wfq = P.atoms[m].wf2 if P.q == 2.0 else w[j] * pow(x, P.q)
            m += 1
    P.n = m
    P.narrowed = False


cdef void _release(Prepared *P) noexcept nogil:
    free(P.atoms)
    free(P.low)
    free(P.pa)
    free(P.pb)
    P.atoms = NULL
    P.low = NULL
    P.pa = NULL
    P.pb = NULL


cdef double _l2(const double[::1] absf, const double[::1] w) noexcept nogil:
    cdef double s = 0.0, comp = 0.0
    cdef Py_ssize_t j
    for j in range(absf.shape[0]):
        _acc(&s, &comp, w[j] * absf[j] * absf[j])
    return sqrt(s + comp)


cdef int _bisect(Prepared *P, double k, double rel_tol, int max_iter, double *out) noexcept nogil:
    """out = (value, modular, iterations, lo, hi); returns a status code."""
    cdef double lo, hi, m, m_hi = 0.0, m_lo, mid
    cdef int i, it = 0
    if k == 0.0:
        out[0] = 0.0; out[1] = 0.0; out[2] = 0.0; out[3] = 0.0; out[4] = 0.0
        return 0
    m = _modular(P, k)
    if m <= 1.0:
        hi = k; m_hi = m; lo = 0.5 * k
        for i in range(MAX_BRACKET_STEPS + 1):
            if i == MAX_BRACKET_STEPS:
                out[0] = hi; out[1] = m_hi; out[2] = 0; out[3] = lo; out[4] = hi
                return 1
            m_lo = _modular(P, lo)
            if m_lo > 1.0:
                break
            hi = lo; m_hi = m_lo; lo = 0.5 * lo
    else:
        lo = k; hi = 2.0 * k
        for i in range(MAX_BRACKET_STEPS + 1):
            if i == MAX_BRACKET_STEPS:
                out[0] = hi; out[1] = m_hi; out[2] = 0; out[3] = lo; out[4] = hi
                return 1
            m_hi = _modular(P, hi)
            if m_hi <= 1.0:
                break
            lo = hi; hi = 2.0 * hi
    if P.code == CLOSE2 or P.code == RYOU:
        _narrow(P, lo, hi)
    while it < max_iter and hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        it += 1
        m = _modular(P, mid)
        if m <= 1.0:
            hi = mid; m_hi = m
        else:
            lo = mid
    out[0] = hi; out[1] = m_hi; out[2] = it; out[3] = lo; out[4] = hi
    return 0


def modular_abs(const double[::1] absf, const double[::1] w, int code, double alpha,
                double p, double u0, double c, double k):
    cdef Prepared P
    cdef double r
    _prepare(&P, absf.shape[0], code, alpha, p, u0, c)
    with nogil:
        _fill(&P, absf, w)
        r = _modular(&P, k)
    _release(&P)
    return r


def luxemburg_abs(const double[::1] absf, const double[::1] w, int code, double alpha,
                  double p, double u0, double c, double rel_tol, int max_iter):
    cdef Prepared P
    cdef double out[5]
    cdef int status
    _prepare(&P, absf.shape[0], code, alpha, p, u0, c)
    with nogil:
        _fill(&P, absf, w)
        status = _bisect(&P, _l2(absf, w), rel_tol, max_iter, out)
    _release(&P)
    return out[0], out[1], int(out[2]), out[3], out[4], status


def luxemburg_rows(const double[:, ::1] absF, const double[::1] w, int code, double alpha,
                   double p, double u0, double c, double rel_tol, int max_iter):
    cdef Py_ssize_t r, B = absF.shape[0]
    cdef Prepared P
    cdef double out[5]
    values = np.empty(B)
    status = np.zeros(B, dtype=np.int32)
    cdef double[::1] v = values
    cdef int[::1] st = status
    if B == 0:
        return values, status
    _prepare(&P, absF.shape[1], code, alpha, p, u0, c)
    try:
        with nogil:
            for r in range(B):
                _fill(&P, absF[r], w)
                st[r] = _bisect(&P, _l2(absF[r], w), rel_tol, max_iter, out)
                v[r] = out[0]
    finally:
        _release(&P)
    return values, status
