"""Pure-numpy kernels.  Reference path and fallback for the numba backend.

Elementwise functions return arrays of at least one dimension, as the numba
backend does, so a scalar call is indexed with ``[0]`` on either path.
"""

import numpy as np

_SPLITTER = 134217729.0


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def add_down(a, b):
    s, e = _two_sum(a, b)
    return np.atleast_1d(np.where(e < 0, np.nextafter(s, -np.inf), s))


def add_up(a, b):
    s, e = _two_sum(a, b)
    return np.atleast_1d(np.where(e > 0, np.nextafter(s, np.inf), s))


def mul_down(a, b):
    p, e = _two_prod(a, b)
    with np.errstate(invalid="ignore"):
        out = np.where(e < 0, np.nextafter(p, -np.inf), p)
    return np.atleast_1d(np.where((a == 0) | (b == 0), 0.0, out))


def mul_up(a, b):
    p, e = _two_prod(a, b)
    with np.errstate(invalid="ignore"):
        out = np.where(e > 0, np.nextafter(p, np.inf), p)
    return np.atleast_1d(np.where((a == 0) | (b == 0), 0.0, out))


def imul(alo, ahi, blo, bhi):
    """Outward-rounded interval product, elementwise."""
    lo = np.minimum(
        np.minimum(mul_down(alo, blo), mul_down(alo, bhi)),
        np.minimum(mul_down(ahi, blo), mul_down(ahi, bhi)),
    )
    hi = np.maximum(
        np.maximum(mul_up(alo, blo), mul_up(alo, bhi)),
        np.maximum(mul_up(ahi, blo), mul_up(ahi, bhi)),
    )
    return lo, hi


def affine_eval(lo, hi, c_lo, c_hi, m_lo, m_hi):
    """Evaluate one affine expression (coefficient row ``m``) on every state row."""
    n = lo.shape[0]
    acc_lo = np.full(n, float(c_lo))
    acc_hi = np.full(n, float(c_hi))
    for j in np.flatnonzero((m_lo != 0) | (m_hi != 0)):
        a, b = m_lo[j], m_hi[j]
        if a == 1.0 and b == 1.0:
            t_lo, t_hi = lo[:, j], hi[:, j]
        else:
            t_lo, t_hi = imul(lo[:, j], hi[:, j], a, b)
        acc_lo = add_down(acc_lo, t_lo)
        acc_hi = add_up(acc_hi, t_hi)
    return acc_lo, acc_hi


def affine_apply(lo, hi, targets, c_lo, c_hi, m_lo, m_hi):
    """Simultaneous affine assignment over a batch of interval states.

    ``lo``/``hi`` are ``(n, A)``; row ``t`` of ``m_lo``/``m_hi`` holds the
    coefficient intervals of the expression assigned to column ``targets[t]``.
    Right-hand sides read the pre-state only.
    """
    out_lo = lo.copy()
    out_hi = hi.copy()
    for t in range(len(targets)):
        out_lo[:, targets[t]], out_hi[:, targets[t]] = affine_eval(
            lo, hi, c_lo[t], c_hi[t], m_lo[t], m_hi[t])
    return out_lo, out_hi


def group_sum(inverse, n_groups, v_lo, v_hi):
    """Per-group sums of ``v_lo`` rounded down and ``v_hi`` rounded up.

    Compensated (Neumaier) accumulation in order of appearance; a result is
    nudged one ulp outward only if some step lost bits, so exact sums stay
    exact.  All groups advance together, one member per pass.
    """
    inverse = np.asarray(inverse, dtype=np.int64)
    order = np.argsort(inverse, kind="stable")
    counts = np.bincount(inverse, minlength=n_groups)
    starts = np.cumsum(counts) - counts
    out = []
    for vals, up in ((v_lo, False), (v_hi, True)):
        s = np.zeros(n_groups)
        c = np.zeros(n_groups)
        lost = np.zeros(n_groups, dtype=bool)
        for j in range(int(counts.max()) if n_groups else 0):
            g = np.flatnonzero(counts > j)
            x = vals[order[starts[g] + j]]
            t, e = _two_sum(s[g], x)
            c2, e2 = _two_sum(c[g], e)
            s[g] = t
            c[g] = c2
            lost[g] |= e2 != 0
        r, e3 = _two_sum(s, c)
        lost |= e3 != 0
        nudged = np.nextafter(r, np.inf if up else -np.inf)
        out.append(np.where(lost, nudged, r))
    return out[0], out[1]


def water_fill(key, p_lo, p_hi, mass):
    """Start every weight at its lower bound and pour ``mass`` into the
    items with the largest ``key`` first, each up to its upper bound."""
    order = np.argsort(-key, kind="stable")
    cap = (p_hi - p_lo)[order]
    before = np.cumsum(cap) - cap
    add = np.clip(mass - before, 0.0, cap)
    p = p_lo.copy()
    p[order] += add
    return p
