"""Projection of plans into chronicle sets and expected-utility intervals.

A chronicle set is stored column-wise: ``lo``/``hi`` of shape ``(n, A)`` hold
the end-state intervals and ``plo``/``phi`` the path probabilities.  States are
advanced branch by branch with the compiled guards and effects below, and rows
with identical states are merged by exact interval addition of their
probabilities.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .abstraction import Describer, GroupGuard, SeqGuard
from .errors import InfeasibleBoxError, ModelError, UnknownAttributeError
from .interval import Interval, two_prod
from .model import (
    ActionKind, AffineExpr, Branch, Condition, Domain, Effect, Rel, UtilityModel, WorldState,
)

FEAS_TOL = 1e-9
_EPS = 2.0 ** -52

# ----------------------------------------------------------------- compiled pieces

Guard = Callable[[np.ndarray, np.ndarray], tuple]


def _atom_masks(lo, hi, col, rel, t):
    x_lo, x_hi = lo[:, col], hi[:, col]
    if rel is Rel.GE:
        return x_lo >= t, x_hi >= t
    if rel is Rel.GT:
        return x_lo > t, x_hi > t
    if rel is Rel.LE:
        return x_hi <= t, x_lo <= t
    if rel is Rel.LT:
        return x_hi < t, x_lo < t
    return (x_lo == t) & (x_hi == t), (x_lo <= t) & (t <= x_hi)


@dataclass(frozen=True)
class CompiledEffect:
    targets: np.ndarray
    c_lo: np.ndarray
    c_hi: np.ndarray
    m_lo: np.ndarray
    m_hi: np.ndarray
    clip: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))  # boolean targets

    def apply(self, lo, hi):
        if self.targets.size == 0 or lo.shape[0] == 0:
            return lo, hi
        return kernels.affine_apply(lo, hi, self.targets, self.c_lo, self.c_hi, self.m_lo, self.m_hi)


@dataclass(frozen=True)
class CompiledExpr:
    c_lo: float
    c_hi: float
    m_lo: np.ndarray
    m_hi: np.ndarray

    def eval(self, lo, hi):
        return kernels.affine_eval(lo, hi, self.c_lo, self.c_hi, self.m_lo, self.m_hi)


@dataclass(frozen=True)
class CompiledBranch:
    guard: Guard
    plo: float
    phi: float
    effect: CompiledEffect
    source: Branch


def _memo_last(fn: Guard) -> Guard:
    """Remember the result for the last ``(lo, hi)`` pair, matched by identity.

    One projection step tests every branch against the same state arrays,
    and branches of abstract actions share member conditions, so most guard
    evaluations within a step are repeats.  Results are made read-only since
    they are handed out more than once.
    """
    last = [None]

    def wrapped(lo, hi):
        hit = last[0]
        if hit is not None and hit[0] is lo and hit[1] is hi:
            return hit[2]
        out = fn(lo, hi)
        for a in out:
            if a is not lo and a is not hi:  # an effect with no targets passes inputs through
                a.flags.writeable = False
        last[0] = (lo, hi, out)
        return out

    return wrapped


class Compiler:
    """Turns conditions, guards and affine expressions into array code.

    Compiled guards are shared: equal conditions, and composite guards that
    are the same object, compile once (see :func:`_memo_last`).
    """

    def __init__(self, names: Sequence[str], params: Mapping[str, float] | None = None,
                 booleans: Sequence[str] = ()):
        self.names = tuple(names)
        self.index = {n: i for i, n in enumerate(self.names)}
        self.params = dict(params or {})
        self.booleans = frozenset(booleans)
        self._conditions: dict[Condition, Guard] = {}
        self._composites: dict[int, tuple[object, Guard]] = {}
        self._moves: dict[int, tuple[Effect, Guard]] = {}
        self._branches: dict[int, tuple[Branch, CompiledBranch]] = {}
        self._lock = threading.RLock()

    def col(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UnknownAttributeError(name) from None

    def condition(self, c: Condition) -> Guard:
        got = self._conditions.get(c)
        if got is None:
            got = self._condition(c)
            with self._lock:
                got = self._conditions.setdefault(c, got)
        return got

    def _condition(self, c: Condition) -> Guard:
        if c.is_true():
            return lambda lo, hi: (np.ones(lo.shape[0], bool), np.ones(lo.shape[0], bool))
        if c.is_false():
            return lambda lo, hi: (np.zeros(lo.shape[0], bool), np.zeros(lo.shape[0], bool))
        disjuncts = [[(self.col(a.attr), a.rel, a.threshold) for a in d] for d in c.disjuncts]

        def conjunction(lo, hi, conj):
            if not conj:
                return np.ones(lo.shape[0], bool), np.ones(lo.shape[0], bool)
            must, may = _atom_masks(lo, hi, *conj[0])
            for col, rel, t in conj[1:]:
                m, y = _atom_masks(lo, hi, col, rel, t)
                must = must & m
                may = may & y
            return must, may

        def guard(lo, hi):
            must_any, may_any = conjunction(lo, hi, disjuncts[0])
            for conj in disjuncts[1:]:
                m, y = conjunction(lo, hi, conj)
                must_any = must_any | m
                may_any = may_any | y
            return must_any, may_any

        return _memo_last(guard)

    def guard(self, g) -> Guard:
        if g is None:
            return lambda lo, hi: (np.zeros(lo.shape[0], bool), np.zeros(lo.shape[0], bool))
        if isinstance(g, Condition):
            return self.condition(g)
        got = self._composites.get(id(g))
        if got is None:
            fn = self._composite(g)
            with self._lock:
                # the guard object is kept alongside so its id stays reserved
                got = self._composites.setdefault(id(g), (g, fn))
        return got[1]

    def _move(self, eff: Effect) -> Guard:
        """Effect application for use inside guards, shared per effect object."""
        got = self._moves.get(id(eff))
        if got is None:
            fn = _memo_last(self.effect(eff).apply)
            with self._lock:
                got = self._moves.setdefault(id(eff), (eff, fn))
        return got[1]

    def _composite(self, g) -> Guard:
        if isinstance(g, GroupGuard):
            parts = [self.guard(m) for m in g.members]

            real = [p for m, p in zip(g.members, parts) if m is not None]
            padded = len(real) < len(parts)

            def group(lo, hi):
                if not real:
                    return np.zeros(lo.shape[0], bool), np.zeros(lo.shape[0], bool)
                must, may = real[0](lo, hi)
                for p in real[1:]:
                    m, y = p(lo, hi)
                    must = must & m
                    may = may | y
                if padded:
                    # a padding member never applies, so the group is never certain
                    must = np.zeros(lo.shape[0], bool)
                return must, may

            return _memo_last(group)
        if isinstance(g, SeqGuard):
            first, second = self.guard(g.first), self.guard(g.second)
            move = self._move(g.effect)

            def seq(lo, hi):
                m1, y1 = first(lo, hi)
                plo, phi = move(lo, hi)
                m2, y2 = second(plo, phi)
                return m1 & m2, y1 & y2

            return _memo_last(seq)
        raise TypeError(f"unknown guard {g!r}")

    def expr(self, e: AffineExpr) -> CompiledExpr:
        e = e.substitute(self.params)
        m_lo = np.zeros(len(self.names))
        m_hi = np.zeros(len(self.names))
        for c, n in e.terms:
            j = self.col(n)
            m_lo[j], m_hi[j] = c.lo, c.hi
        return CompiledExpr(e.constant.lo, e.constant.hi, m_lo, m_hi)

    def effect(self, eff: Effect) -> CompiledEffect:
        k, a = len(eff.assignments), len(self.names)
        targets = np.empty(k, dtype=np.int64)
        c_lo, c_hi = np.empty(k), np.empty(k)
        m_lo, m_hi = np.zeros((k, a)), np.zeros((k, a))
        for t, (attr, rhs) in enumerate(eff.assignments):
            targets[t] = self.col(attr)
            ce = self.expr(rhs)
            c_lo[t], c_hi[t] = ce.c_lo, ce.c_hi
            m_lo[t], m_hi[t] = ce.m_lo, ce.m_hi
        clip = np.array([self.index[a] for a, _ in eff.assignments if a in self.booleans],
                        dtype=np.int64)
        return CompiledEffect(targets, c_lo, c_hi, m_lo, m_hi, clip)

    def branch(self, b: Branch) -> CompiledBranch:
        got = self._branches.get(id(b))
        if got is None:
            cb = CompiledBranch(self.guard(b.applicability), b.prob.lo, b.prob.hi,
                                self.effect(b.effect), b)
            with self._lock:
                got = self._branches.setdefault(id(b), (b, cb))
        return got[1]


# ----------------------------------------------------------------- chronicle sets


@dataclass
class ChronicleSet:
    names: tuple[str, ...]
    lo: np.ndarray
    hi: np.ndarray
    plo: np.ndarray
    phi: np.ndarray
    trace: Optional[np.ndarray] = None  # (n, steps) branch indices, unmerged sets only

    @classmethod
    def initial(cls, names: Sequence[str], s: Mapping[str, Interval], trace: bool = False):
        lo = np.array([[s[n].lo for n in names]], dtype=np.float64)
        hi = np.array([[s[n].hi for n in names]], dtype=np.float64)
        tr = np.zeros((1, 0), dtype=np.int64) if trace else None
        return cls(tuple(names), lo, hi, np.ones(1), np.ones(1), tr)

    def __len__(self):
        return self.lo.shape[0]

    def state(self, i: int) -> WorldState:
        return WorldState({n: Interval(self.lo[i, j], self.hi[i, j]) for j, n in enumerate(self.names)})

    def prob(self, i: int) -> Interval:
        return Interval(self.plo[i], self.phi[i])

    def entries(self) -> list[tuple[WorldState, Interval, tuple]]:
        out = []
        for i in range(len(self)):
            tr = tuple(int(x) for x in self.trace[i]) if self.trace is not None else ()
            out.append((self.state(i), self.prob(i), tr))
        return out

    def prob_bounds(self) -> tuple[float, float]:
        return math.fsum(self.plo), math.fsum(self.phi)


def merge_rows(lo, hi, plo, phi):
    """Merge rows with identical states; probabilities add with outward rounding."""
    n = lo.shape[0]
    if n <= 1:
        return lo, hi, plo, phi
    keys = np.concatenate([lo, hi], axis=1) + 0.0  # folds -0.0 into 0.0
    # rows in lexicographic order (first column primary), as np.unique(axis=0) would give
    order = np.lexsort(keys.T[::-1])
    ordered = keys[order]
    new = np.empty(n, bool)
    new[0] = True
    np.any(ordered[1:] != ordered[:-1], axis=1, out=new[1:])
    if new.all():
        return lo, hi, plo, phi
    uniq = ordered[new]
    inverse = np.empty(n, np.int64)
    inverse[order] = np.cumsum(new) - 1
    a = lo.shape[1]
    s_lo, s_hi = kernels.group_sum(inverse, uniq.shape[0], plo, phi)
    return (np.ascontiguousarray(uniq[:, :a]), np.ascontiguousarray(uniq[:, a:]),
            np.minimum(s_lo, 1.0), np.minimum(s_hi, 1.0))


def step(cs: ChronicleSet, branches: Sequence[CompiledBranch], bool_cols: np.ndarray,
         merge: bool = True, with_parents: bool = False):
    """Advance every chronicle through one action description."""
    if len(cs) and not (cs.phi > 0).all():
        live = np.flatnonzero(cs.phi > 0)
        cs = ChronicleSet(cs.names, cs.lo[live], cs.hi[live], cs.plo[live], cs.phi[live],
                          None if cs.trace is None else cs.trace[live])
    else:
        live = None
    # probabilities stay positive from here on: a positive number times a
    # positive branch probability, rounded up, is positive
    need_rows = with_parents or cs.trace is not None
    n = len(cs)
    parts_lo, parts_hi, parts_plo, parts_phi, parents, bidx, musts = [], [], [], [], [], [], []
    for bi, b in enumerate(branches):
        if b.phi == 0.0 or n == 0:
            continue
        must, may = b.guard(cs.lo, cs.hi)
        if may.all():
            rows = None
            lo, hi = b.effect.apply(cs.lo, cs.hi)
            m, plo_in, phi_in = must, cs.plo, cs.phi
        else:
            rows = np.flatnonzero(may)
            if rows.size == 0:
                continue
            lo, hi = b.effect.apply(cs.lo[rows], cs.hi[rows])
            m, plo_in, phi_in = must[rows], cs.plo[rows], cs.phi[rows]
        parts_lo.append(lo)
        parts_hi.append(hi)
        parts_plo.append(np.where(m, kernels.mul_down(plo_in, b.plo), 0.0))
        parts_phi.append(kernels.mul_up(phi_in, b.phi))
        if need_rows:
            parents.append(np.arange(n) if rows is None else rows)
            bidx.append(np.full(lo.shape[0], bi, dtype=np.int64))
            musts.append(m)
    width = len(cs.names)
    if not parts_lo:
        empty = ChronicleSet(cs.names, np.zeros((0, width)), np.zeros((0, width)),
                             np.zeros(0), np.zeros(0),
                             None if cs.trace is None else np.zeros((0, cs.trace.shape[1] + 1), np.int64))
        return (empty, np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, bool)) \
            if with_parents else empty
    lo = np.concatenate(parts_lo)
    hi = np.concatenate(parts_hi)
    if bool_cols.any():
        lo[:, bool_cols] = np.clip(lo[:, bool_cols], 0.0, 1.0)
        hi[:, bool_cols] = np.clip(hi[:, bool_cols], 0.0, 1.0)
    plo = np.concatenate(parts_plo)
    phi = np.concatenate(parts_phi)
    trace = None
    if need_rows:
        parent = np.concatenate(parents)
        branch = np.concatenate(bidx)
        if cs.trace is not None:
            trace = np.concatenate([cs.trace[parent], branch[:, None]], axis=1)
        if live is not None:
            parent = live[parent]  # parents index the set as it was passed in
    if merge and trace is None:
        lo, hi, plo, phi = merge_rows(lo, hi, plo, phi)
    out = ChronicleSet(cs.names, lo, hi, plo, phi, trace)
    if with_parents:
        return out, parent, branch, np.concatenate(musts)
    return out


# ----------------------------------------------------------------- weighted sums


def _dot(p: np.ndarray, u: np.ndarray, up: bool) -> float:
    """sum(p*u) with a single directed rounding of the exact value."""
    if p.size == 0:
        return 0.0
    prod = p * u
    _, err = _two_prod_vec(p, u)
    pieces = np.concatenate([prod, err])
    r = math.fsum(pieces)
    if not math.isfinite(r):
        return r
    residual = math.fsum(np.append(pieces, -r))
    if up and residual > 0:
        return math.nextafter(r, math.inf)
    if not up and residual < 0:
        return math.nextafter(r, -math.inf)
    return r


def _two_prod_vec(a, b):
    splitter = 134217729.0
    p = a * b
    c = splitter * a
    ah = c - (c - a)
    al = a - ah
    c = splitter * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def bound_weighted_sum(u_lo, u_hi, p_lo, p_hi) -> Interval:
    """Tight bounds on sum(u_i p_i) over u_i in [u_lo, u_hi], p_i in [p_lo, p_hi], sum p = 1.

    The upper bound pours the free probability mass onto the largest utility
    upper bounds first; the lower bound onto the smallest lower bounds.
    """
    u_lo = np.asarray(u_lo, dtype=np.float64)
    u_hi = np.asarray(u_hi, dtype=np.float64)
    p_lo = np.asarray(p_lo, dtype=np.float64)
    p_hi = np.asarray(p_hi, dtype=np.float64)
    if u_lo.size == 0:
        raise InfeasibleBoxError("no chronicles: probabilities cannot sum to 1")
    s_lo, s_hi = math.fsum(p_lo), math.fsum(p_hi)
    if s_lo > 1.0 + FEAS_TOL or s_hi < 1.0 - FEAS_TOL:
        raise InfeasibleBoxError(
            f"probability box is infeasible: sum of lower bounds {s_lo!r}, upper {s_hi!r}")
    mass = 1.0 - s_lo
    ends = []
    for key, up in ((u_hi, True), (-u_lo, False)):
        p = kernels.water_fill(key, p_lo, p_hi, mass)
        u = u_hi if up else u_lo
        v = _dot(p, u, up)
        slack = abs(1.0 - math.fsum(p)) * float(np.max(np.abs(u)))
        slack += _EPS * _dot(p, np.abs(u), True)
        ends.append(kernels.add_up(v, slack)[0] if up else kernels.add_down(v, -slack)[0])
    hi, lo = ends
    return Interval(min(lo, hi), hi)


# ----------------------------------------------------------------- utility


@dataclass(frozen=True)
class CompiledUtility:
    ug: tuple
    ur: tuple
    k_r: float

    def parts(self, lo, hi, names=None):
        """Per-row (ug_lo, ug_hi, ur_lo, ur_hi): hull over guards that may apply."""
        out = []
        for items, label in ((self.ug, "UG"), (self.ur, "UR")):
            n = lo.shape[0]
            v_lo = np.full(n, np.inf)
            v_hi = np.full(n, -np.inf)
            covered = np.zeros(n, bool)
            for guard, expr in items:
                _, may = guard(lo, hi)
                if not may.any():
                    continue
                rows = np.flatnonzero(may)
                a, b = expr.eval(lo[rows], hi[rows])
                v_lo[rows] = np.minimum(v_lo[rows], a)
                v_hi[rows] = np.maximum(v_hi[rows], b)
                covered[rows] = True
            if not covered.all():
                bad = int(np.flatnonzero(~covered)[0])
                state = {n_: (lo[bad, j], hi[bad, j]) for j, n_ in enumerate(names or ())}
                raise ModelError(f"no {label} guard applies to state {state}")
            out.extend([v_lo, v_hi])
        return tuple(out)

    def combine(self, ug_lo, ug_hi, ur_lo, ur_hi):
        k = self.k_r
        if k == 0:
            return ug_lo, ug_hi
        if k == 1:
            return kernels.add_down(ug_lo, ur_lo), kernels.add_up(ug_hi, ur_hi)
        r_lo, r_hi = kernels.imul(ur_lo, ur_hi, k, k)
        return kernels.add_down(ug_lo, r_lo), kernels.add_up(ug_hi, r_hi)

    def evaluate(self, lo, hi, names=None):
        return self.combine(*self.parts(lo, hi, names))


# ----------------------------------------------------------------- results


@dataclass(frozen=True)
class EUInterval:
    eu: Interval
    u_lo: np.ndarray = field(repr=False)
    u_hi: np.ndarray = field(repr=False)
    p_lo: np.ndarray = field(repr=False)
    p_hi: np.ndarray = field(repr=False)

    @property
    def lo(self):
        return self.eu.lo

    @property
    def hi(self):
        return self.eu.hi

    @property
    def per_chronicle(self) -> list[tuple[Interval, Interval]]:
        return [(Interval(a, b), Interval(c, d))
                for a, b, c, d in zip(self.u_lo, self.u_hi, self.p_lo, self.p_hi)]

    def recompute(self) -> Interval:
        return bound_weighted_sum(self.u_lo, self.u_hi, self.p_lo, self.p_hi)


@dataclass
class Counters:
    plans_evaluated: int = 0
    peak_states: int = 0
    projections: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def saw_states(self, n: int):
        if n > self.peak_states:
            with self.lock:
                self.peak_states = max(self.peak_states, n)


# ----------------------------------------------------------------- compiled domain


@dataclass
class Layer:
    """One step of a traced projection."""

    cs: ChronicleSet          # states after this step
    parent: np.ndarray        # row of the previous layer
    branch: np.ndarray        # branch index taken
    must: np.ndarray          # branch guard held for sure
    action: str               # description projected
    plan_step: int            # index of the plan step it came from


class CompiledDomain:
    """A domain prepared for fast projection and evaluation."""

    def __init__(self, d: Domain, strict: bool = False):
        self.domain = d
        self.names = d.attribute_names
        self.compiler = Compiler(self.names, d.parameters,
                                 [a.name for a in d.attributes if a.is_boolean])
        self.describe = Describer(d, strict)
        self.bool_cols = np.array([a.is_boolean for a in d.attributes], dtype=bool)
        u = d.resolved_utility()
        self.utility = CompiledUtility(
            tuple((self.compiler.condition(c), self.compiler.expr(e)) for c, e in u.ug),
            tuple((self.compiler.condition(c), self.compiler.expr(e)) for c, e in u.ur),
            u.k_r,
        )
        self._branches: dict[str, tuple[CompiledBranch, ...]] = {}
        self._flat: dict[str, tuple[str, ...]] = {}
        self._lock = threading.RLock()

    def branches(self, name: str) -> tuple[CompiledBranch, ...]:
        got = self._branches.get(name)
        if got is None:
            desc = self.describe(name)
            got = tuple(self.compiler.branch(b) for b in desc.branches)
            with self._lock:
                self._branches.setdefault(name, got)
        return got

    def flatten(self, name: str) -> tuple[str, ...]:
        """Decomposable actions are projected lazily through their subplans."""
        got = self._flat.get(name)
        if got is None:
            a = self.domain.action(name)
            if a.kind is ActionKind.DECOMPOSABLE:
                got = tuple(x for s in a.subplan for x in self.flatten(s))
            else:
                got = (name,)
            with self._lock:
                self._flat.setdefault(name, got)
        return got

    def flat_plan(self, plan: Sequence[str]) -> list[tuple[str, int]]:
        return [(x, k) for k, s in enumerate(plan) for x in self.flatten(s)]

    def initial(self, trace: bool = False) -> ChronicleSet:
        return ChronicleSet.initial(self.names, self.domain.initial, trace)

    def project(self, plan: Sequence[str], start: ChronicleSet | None = None,
                counters: Counters | None = None, merge: bool = True,
                held: int = 0) -> ChronicleSet:
        """Project ``plan`` from ``start``; ``held`` counts states kept alive elsewhere."""
        cs = start if start is not None else self.initial()
        if counters is not None:
            counters.projections += 1
            counters.saw_states(held + len(cs))
        for name, _ in self.flat_plan(plan):
            cs = step(cs, self.branches(name), self.bool_cols, merge)
            if counters is not None:
                counters.saw_states(held + len(cs))
        return cs

    def project_traced(self, plan: Sequence[str], counters: Counters | None = None):
        """Unmerged projection keeping every layer, for sensitivity analysis."""
        cs = self.initial()
        layers: list[Layer] = []
        held = len(cs)
        for name, k in self.flat_plan(plan):
            nxt, parent, branch, must = step(cs, self.branches(name), self.bool_cols,
                                             merge=False, with_parents=True)
            layers.append(Layer(nxt, parent, branch, must, name, k))
            held += len(nxt)
            if counters is not None:
                counters.saw_states(held)
            cs = nxt
        return self.initial(), layers

    def eu_of(self, cs: ChronicleSet) -> EUInterval:
        u_lo, u_hi = self.utility.evaluate(cs.lo, cs.hi, self.names)
        eu = bound_weighted_sum(u_lo, u_hi, cs.plo, cs.phi)
        return EUInterval(eu, u_lo, u_hi, cs.plo.copy(), cs.phi.copy())

    def evaluate(self, plan: Sequence[str], counters: Counters | None = None,
                 start: ChronicleSet | None = None, prefix_len: int = 0) -> EUInterval:
        if counters is not None:
            with counters.lock:
                counters.plans_evaluated += 1
        if start is None:
            cs = self.project(plan, None, counters)
        else:
            # the shared start set stays alive while this plan is projected
            cs = self.project(plan[prefix_len:], start, counters, held=len(start))
        return self.eu_of(cs)


def compile_domain(d: Domain | CompiledDomain) -> CompiledDomain:
    return d if isinstance(d, CompiledDomain) else CompiledDomain(d)


def project(plan: Sequence[str], init: Mapping[str, Interval] | None,
            d: Domain | CompiledDomain, merge: bool = True) -> ChronicleSet:
    cd = compile_domain(d)
    start = None
    if init is not None:
        start = ChronicleSet.initial(cd.names, init)
    return cd.project(plan, start, merge=merge)


def chronicle_utility(state: Mapping[str, Interval], u: UtilityModel,
                      params: Mapping[str, float] | None = None) -> Interval:
    """U(c) = UG(c) + k_r UR(c), hulled over every guard that may apply."""
    names = tuple(state)
    comp = Compiler(names, params)
    cu = CompiledUtility(
        tuple((comp.condition(c), comp.expr(e)) for c, e in u.ug),
        tuple((comp.condition(c), comp.expr(e)) for c, e in u.ur),
        u.k_r,
    )
    lo = np.array([[state[n].lo for n in names]])
    hi = np.array([[state[n].hi for n in names]])
    a, b = cu.evaluate(lo, hi, names)
    return Interval(a[0], b[0])


def evaluate_plan(plan: Sequence[str], d: Domain | CompiledDomain) -> EUInterval:
    return compile_domain(d).evaluate(list(plan))
