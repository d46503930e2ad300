"""numba-compiled kernels; same signatures and results as ``numpy_impl``."""

import numpy as np
from numba import njit

_SPLITTER = 134217729.0


@njit(cache=True, inline="always")
def _add_down(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    if e < 0:
        return np.nextafter(s, -np.inf)
    return s


@njit(cache=True, inline="always")
def _add_up(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    if e > 0:
        return np.nextafter(s, np.inf)
    return s


@njit(cache=True, inline="always")
def _prod_err(a, b):
    p = a * b
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, inline="always")
def _mul_down(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p, e = _prod_err(a, b)
    if e < 0:
        return np.nextafter(p, -np.inf)
    return p


@njit(cache=True, inline="always")
def _mul_up(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    p, e = _prod_err(a, b)
    if e > 0:
        return np.nextafter(p, np.inf)
    return p


@njit(cache=True, inline="always")
def _imul(a, b, c, d):
    lo = min(min(_mul_down(a, c), _mul_down(a, d)), min(_mul_down(b, c), _mul_down(b, d)))
    hi = max(max(_mul_up(a, c), _mul_up(a, d)), max(_mul_up(b, c), _mul_up(b, d)))
    return lo, hi


@njit(cache=True)
def _add_down_arr(a, b):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = _add_down(a[i], b[i])
    return out


@njit(cache=True)
def _add_up_arr(a, b):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = _add_up(a[i], b[i])
    return out


@njit(cache=True)
def _mul_down_arr(a, b):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = _mul_down(a[i], b[i])
    return out


@njit(cache=True)
def _mul_up_arr(a, b):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = _mul_up(a[i], b[i])
    return out


@njit(cache=True)
def _imul_arr(alo, ahi, blo, bhi):
    n = alo.shape[0]
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        lo[i], hi[i] = _imul(alo[i], ahi[i], blo[i], bhi[i])
    return lo, hi


def _vec(x, n):
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        return np.full(n, float(a))
    return np.ascontiguousarray(a)


def _shape(*xs):
    return max((np.size(x) for x in xs), default=1)


def add_down(a, b):
    n = _shape(a, b)
    return _add_down_arr(_vec(a, n), _vec(b, n))


def add_up(a, b):
    n = _shape(a, b)
    return _add_up_arr(_vec(a, n), _vec(b, n))


@njit(cache=True)
def _mul_down_sc(a, s):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = _mul_down(a[i], s)
    return out


@njit(cache=True)
def _mul_up_sc(a, s):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = _mul_up(a[i], s)
    return out


def _is_vec(x):
    return type(x) is np.ndarray and x.ndim == 1 and x.dtype == np.float64


def mul_down(a, b):
    # the planner mostly scales a probability column by one branch probability
    if _is_vec(a) and type(b) is float:
        return _mul_down_sc(a, b)
    n = _shape(a, b)
    return _mul_down_arr(_vec(a, n), _vec(b, n))


def mul_up(a, b):
    if _is_vec(a) and type(b) is float:
        return _mul_up_sc(a, b)
    n = _shape(a, b)
    return _mul_up_arr(_vec(a, n), _vec(b, n))


def imul(alo, ahi, blo, bhi):
    n = _shape(alo, ahi, blo, bhi)
    return _imul_arr(_vec(alo, n), _vec(ahi, n), _vec(blo, n), _vec(bhi, n))


@njit(cache=True, nogil=True)
def _affine_row(lo, hi, r, c_lo, c_hi, m_lo, m_hi):
    acc_lo = c_lo
    acc_hi = c_hi
    for j in range(lo.shape[1]):
        a = m_lo[j]
        b = m_hi[j]
        if a == 0.0 and b == 0.0:
            continue
        if a == 1.0 and b == 1.0:
            t_lo = lo[r, j]
            t_hi = hi[r, j]
        else:
            t_lo, t_hi = _imul(lo[r, j], hi[r, j], a, b)
        acc_lo = _add_down(acc_lo, t_lo)
        acc_hi = _add_up(acc_hi, t_hi)
    return acc_lo, acc_hi


@njit(cache=True, nogil=True)
def _affine_eval(lo, hi, c_lo, c_hi, m_lo, m_hi):
    n = lo.shape[0]
    out_lo = np.empty(n)
    out_hi = np.empty(n)
    for r in range(n):
        out_lo[r], out_hi[r] = _affine_row(lo, hi, r, c_lo, c_hi, m_lo, m_hi)
    return out_lo, out_hi


def affine_eval(lo, hi, c_lo, c_hi, m_lo, m_hi):
    return _affine_eval(
        np.ascontiguousarray(lo, dtype=np.float64), np.ascontiguousarray(hi, dtype=np.float64),
        float(c_lo), float(c_hi),
        np.ascontiguousarray(m_lo, dtype=np.float64), np.ascontiguousarray(m_hi, dtype=np.float64),
    )


@njit(cache=True, nogil=True)
def _affine_apply(lo, hi, targets, c_lo, c_hi, m_lo, m_hi):
    n = lo.shape[0]
    out_lo = lo.copy()
    out_hi = hi.copy()
    for r in range(n):
        for t in range(targets.shape[0]):
            out_lo[r, targets[t]], out_hi[r, targets[t]] = _affine_row(
                lo, hi, r, c_lo[t], c_hi[t], m_lo[t], m_hi[t])
    return out_lo, out_hi


def affine_apply(lo, hi, targets, c_lo, c_hi, m_lo, m_hi):
    return _affine_apply(
        np.ascontiguousarray(lo, dtype=np.float64), np.ascontiguousarray(hi, dtype=np.float64),
        np.asarray(targets, dtype=np.int64),
        np.asarray(c_lo, dtype=np.float64), np.asarray(c_hi, dtype=np.float64),
        np.ascontiguousarray(m_lo, dtype=np.float64), np.ascontiguousarray(m_hi, dtype=np.float64),
    )


@njit(cache=True, nogil=True)
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, nogil=True)
def _group_sum(inverse, n_groups, vals, up):
    s = np.zeros(n_groups)
    c = np.zeros(n_groups)
    lost = np.zeros(n_groups, dtype=np.bool_)
    for i in range(inverse.shape[0]):
        g = inverse[i]
        t, e = _two_sum(s[g], vals[i])
        c2, e2 = _two_sum(c[g], e)
        s[g] = t
        c[g] = c2
        if e2 != 0.0:
            lost[g] = True
    out = np.empty(n_groups)
    for g in range(n_groups):
        r, e3 = _two_sum(s[g], c[g])
        if lost[g] or e3 != 0.0:
            r = np.nextafter(r, np.inf) if up else np.nextafter(r, -np.inf)
        out[g] = r
    return out


def group_sum(inverse, n_groups, v_lo, v_hi):
    inv = np.asarray(inverse, dtype=np.int64)
    return (_group_sum(inv, int(n_groups), np.ascontiguousarray(v_lo, dtype=np.float64), False),
            _group_sum(inv, int(n_groups), np.ascontiguousarray(v_hi, dtype=np.float64), True))


@njit(cache=True)
def _water_fill(key, p_lo, p_hi, mass):
    order = np.argsort(-key, kind="mergesort")
    p = p_lo.copy()
    for i in order:
        if mass <= 0.0:
            break
        cap = p_hi[i] - p_lo[i]
        add = cap if cap < mass else mass
        p[i] += add
        mass -= add
    return p


def water_fill(key, p_lo, p_hi, mass):
    return _water_fill(np.asarray(key, dtype=np.float64), p_lo, p_hi, float(mass))
