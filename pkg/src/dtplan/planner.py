"""Refinement planning: evaluate abstract plans to EU intervals, prune the
dominated ones, and refine survivors until only primitive plans remain."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .abstraction import expand
from .errors import ContractViolation
from .interval import Interval, intersect
from .model import ActionKind, Domain
from .projection import (
    CompiledDomain, Counters, EUInterval, bound_weighted_sum, compile_domain, step,
)

STRATEGIES = ("first", "priority", "sensitivity")


@dataclass
class Plan:
    id: int
    steps: tuple[str, ...]
    eu: EUInterval
    parent: Optional[int] = None
    refined_position: Optional[int] = None
    primitive: bool = False

    @property
    def lo(self):
        return self.eu.eu.lo

    @property
    def hi(self):
        return self.eu.eu.hi

    def __repr__(self):
        return f"Plan#{self.id}({', '.join(self.steps)}; [{self.lo:.6g}, {self.hi:.6g}])"


@dataclass(frozen=True)
class Strategy:
    kind: str = "first"
    priorities: Optional[Mapping[str, int]] = None
    fraction: float = 1.0

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}; pick one of {', '.join(STRATEGIES)}")
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError("fraction must lie in (0, 1]")


@dataclass(frozen=True)
class Budget:
    max_expansions: Optional[int] = None
    max_ms: Optional[float] = None


@dataclass
class PlanStats:
    plans_evaluated: int = 0
    expansions: int = 0
    peak_states: int = 0
    pruned: int = 0
    wall_ms: float = 0.0
    complete: bool = False

    def as_dict(self):
        return {
            "plans_evaluated": self.plans_evaluated,
            "expansions": self.expansions,
            "peak_states": self.peak_states,
            "pruned": self.pruned,
            "wall_ms": round(self.wall_ms, 3),
            "complete": self.complete,
        }


@dataclass
class PlanResult:
    plans: list[Plan]
    stats: PlanStats

    @property
    def optimal_eu(self) -> Optional[Interval]:
        if not self.plans:
            return None
        return max((p.eu.eu for p in self.plans), key=lambda i: (i.lo, i.hi))


# ----------------------------------------------------------------- frontier operations


def is_primitive_plan(steps: Sequence[str], d: Domain) -> bool:
    return all(d.is_primitive(s) for s in steps)


def select_plan(frontier: Sequence[Plan]) -> Plan:
    """Non-primitive plan with the largest EU upper bound; lowest id on ties."""
    best = None
    for p in frontier:
        if p.primitive:
            continue
        if best is None or p.hi > best.hi or (p.hi == best.hi and p.id < best.id):
            best = p
    if best is None:
        raise ContractViolation("every plan in the frontier is primitive")
    return best


def prune(frontier: Sequence[Plan]) -> list[Plan]:
    """Drop each plan whose upper bound is strictly below another plan's lower bound."""
    if len(frontier) < 2:
        return list(frontier)
    los = np.array([p.lo for p in frontier])
    order = np.argsort(-los, kind="stable")
    top, second = order[0], order[1]
    out = []
    for i, p in enumerate(frontier):
        best_other = los[second] if i == top else los[top]
        if not p.hi < best_other:
            out.append(p)
    return out


def _leftmost_max(weights: Sequence[Optional[float]]) -> int:
    best, idx = -math.inf, None
    for i, w in enumerate(weights):
        if w is None:
            continue
        if idx is None or w > best:
            best, idx = w, i
    if idx is None:
        raise ContractViolation("plan has no non-primitive step")
    return idx


def select_action_first(steps: Sequence[str], d: Domain) -> int:
    for i, s in enumerate(steps):
        if not d.is_primitive(s):
            return i
    raise ContractViolation("plan has no non-primitive step")


def select_action_priority(steps: Sequence[str], d: Domain,
                           priorities: Mapping[str, int] | None = None) -> int:
    pr = d.priorities if priorities is None else priorities
    return _leftmost_max([None if d.is_primitive(s) else pr.get(s, 0) for s in steps])


def expansion_count(name: str, d: Domain) -> int:
    a = d.action(name)
    if a.kind is ActionKind.ABSTRACT:
        return len(a.instantiations)
    if a.kind is ActionKind.DECOMPOSABLE:
        return 1
    raise ContractViolation(f"{name!r} is primitive")


def sensitivity_weights(sensitivities: Sequence[Optional[float]],
                        counts: Sequence[Optional[int]]) -> list[Optional[float]]:
    return [None if s is None else s / c for s, c in zip(sensitivities, counts)]


def select_action_sensitivity(steps: Sequence[str], d: Domain | CompiledDomain,
                              counters: Counters | None = None, fraction: float = 1.0) -> int:
    cd = compile_domain(d)
    open_steps = [k for k, s in enumerate(steps) if not cd.domain.is_primitive(s)]
    if len(open_steps) == 1:
        return open_steps[0]  # nothing to rank
    sens = plan_sensitivities(cd, steps, counters, fraction)
    counts = [None if s is None else expansion_count(name, cd.domain)
              for name, s in zip(steps, sens)]
    return _leftmost_max(sensitivity_weights(sens, counts))


# ----------------------------------------------------------------- sensitivity


@dataclass
class StepAnalysis:
    """Per-chronicle sensitivity detail for one abstract layer of a plan."""

    d_ug: np.ndarray
    d_ur: np.ndarray
    dp_lo: np.ndarray        # how far each lower bound can rise
    dp_hi: np.ndarray        # how far each upper bound can drop
    box_lo: np.ndarray
    box_hi: np.ndarray
    u_hat: np.ndarray
    eu_hi: float
    sensitivity: float


def least_upper_bound(u, lo, hi, chosen) -> Optional[float]:
    """min over the ``chosen`` weights of max over the rest of sum(u * p), sum(p) = 1.

    Rows in ``chosen`` may be pinned anywhere in their box by the expansion;
    the other rows stay adversarial.  With ``t`` the mass on chosen rows the
    objective is h(t) + f(1 - t), h the cheapest fill of the chosen rows and
    f the dearest fill of the rest.  Both are piecewise linear, so the minimum
    sits on a breakpoint.  Returns None when no split of the unit mass fits.
    """
    u = np.asarray(u, float)

    def fill(sel, ascending):
        uu, l, c = u[sel], lo[sel], (hi - lo)[sel]
        order = np.argsort(uu if ascending else -uu, kind="stable")
        keep = c[order] > 0
        caps, us = c[order][keep], uu[order][keep]
        x = np.concatenate(([l.sum()], l.sum() + np.cumsum(caps)))
        y = np.concatenate(([float(np.dot(uu, l))], float(np.dot(uu, l)) + np.cumsum(caps * us)))
        return x, y

    tx, ty = fill(chosen, True)
    sx, sy = fill(~chosen, False)
    t_lo, t_hi = max(tx[0], 1.0 - sx[-1]), min(tx[-1], 1.0 - sx[0])
    if t_lo > t_hi + 1e-9:
        return None
    if t_lo > t_hi:
        t_lo = t_hi = 0.5 * (t_lo + t_hi)
    cand = np.concatenate((tx, 1.0 - sx, [t_lo, t_hi]))
    cand = np.clip(cand, t_lo, t_hi)
    g = _interp(cand, tx, ty) + _interp(1.0 - cand, sx, sy)
    return float(g.min())


def _interp(x, xp, fp):
    if xp.size == 1:
        return np.full_like(x, fp[0])
    return np.interp(x, xp, fp)


class _Trace:
    """Unmerged projection of a plan plus the lookups needed to replay paths."""

    def __init__(self, cd: CompiledDomain, steps: Sequence[str], counters: Counters | None):
        self.cd = cd
        self.init, self.layers = cd.project_traced(steps, counters)
        final = self.layers[-1].cs if self.layers else self.init
        self.final = final
        n = len(final)
        self.anc: list[np.ndarray] = [None] * len(self.layers)
        cur = np.arange(n)
        for j in range(len(self.layers) - 1, -1, -1):
            self.anc[j] = cur
            cur = self.layers[j].parent[cur]
        u = cd.utility
        if n:
            self.ug_lo, self.ug_hi, self.ur_lo, self.ur_hi = u.parts(final.lo, final.hi, cd.names)
            ulo, uhi = u.combine(self.ug_lo, self.ug_hi, self.ur_lo, self.ur_hi)
            self.eu = bound_weighted_sum(ulo, uhi, final.plo, final.phi)

    def before(self, j: int):
        return self.layers[j - 1].cs if j > 0 else self.init

    def analyze(self, j: int, fraction: float = 1.0,
                deltas: Mapping[str, float] | None = None) -> StepAnalysis:
        cd = self.cd
        layer = self.layers[j]
        final = self.final
        n = len(final)
        rows = self.anc[j]
        pre = self.before(j)
        pre_rows = layer.parent[rows]
        taken = layer.branch[rows]
        desc = cd.describe(layer.action)
        k_r = cd.utility.k_r
        ug_hi, ur_hi = self.ug_hi, self.ur_hi
        n_inst = len(desc.instantiations)

        active = np.ones(n, bool)
        if fraction < 1.0:
            order = np.argsort(-final.phi, kind="stable")
            cum = np.cumsum(final.phi[order])
            cut = int(np.searchsorted(cum, fraction * cum[-1])) + 1
            active[:] = False
            active[order[:cut]] = True

        min_ug = np.full(n, np.inf)
        min_ur = np.full(n, np.inf)
        new_lo = np.zeros(n)
        new_hi = np.full(n, np.inf)
        have_members = all(b.members is not None for b in desc.branches)
        if have_members and n:
            replays = self._replay(j, pre, pre_rows, taken, desc, n_inst)
            for valid, s_lo, s_hi, f_lo, f_hi in zip(*replays):
                if valid.any():
                    a, b, c, e = cd.utility.parts(s_lo[valid], s_hi[valid], cd.names)
                    idx = np.flatnonzero(valid)
                    min_ug[idx] = np.minimum(min_ug[idx], b)
                    min_ur[idx] = np.minimum(min_ur[idx], e)
                f_lo = np.where(valid, f_lo, 0.0)
                f_hi = np.where(valid, f_hi, 0.0)
                new_lo = np.maximum(new_lo, f_lo)
                new_hi = np.minimum(new_hi, f_hi)
        else:
            new_lo, new_hi = final.plo.copy(), final.phi.copy()

        has_valid = np.isfinite(min_ug)
        d_ug = np.where(has_valid & active, np.maximum(ug_hi - np.where(has_valid, min_ug, 0), 0.0), 0.0)
        d_ur = np.where(has_valid & active, np.maximum(ur_hi - np.where(has_valid, min_ur, 0), 0.0), 0.0)
        if deltas:
            d_ug = np.where(active, float(deltas.get("ug", 0.0)), 0.0)
            d_ur = np.where(active, float(deltas.get("ur", 0.0)), 0.0)
        new_hi = np.where(np.isfinite(new_hi), new_hi, final.phi)
        dp_lo = np.maximum(new_lo - final.plo, 0.0)
        dp_hi = np.maximum(final.phi - new_hi, 0.0)
        box_lo = np.clip(np.minimum(new_lo, new_hi), final.plo, final.phi)
        box_hi = np.clip(np.maximum(new_lo, new_hi), final.plo, final.phi)
        box_lo = np.where(active, box_lo, final.plo)
        box_hi = np.where(active, box_hi, final.phi)
        # where instantiations narrow from both sides the probability can be
        # pinned anywhere between them; elsewhere the narrowed box stays open
        chosen = active & (new_lo > new_hi)
        u_hat = (ug_hi - d_ug) + k_r * (ur_hi - d_ur)
        ub = least_upper_bound(u_hat, box_lo, box_hi, chosen)
        if ub is None:
            box_lo, box_hi = final.plo, final.phi
            ub = bound_weighted_sum(u_hat, u_hat, box_lo, box_hi).hi
        sens = max(0.0, self.eu.hi - ub)
        return StepAnalysis(d_ug, d_ur, dp_lo, dp_hi, box_lo, box_hi, u_hat, self.eu.hi, sens)

    def _replay(self, j, pre, pre_rows, taken, desc, n_inst):
        """Re-run each chronicle with every instantiation's member branch at layer ``j``.

        All instantiations are replayed together: copy ``i`` of chronicle
        ``r`` is row ``i * n + r``.  Returns (valid, lo, hi, f_lo, f_hi), each
        with a leading axis over instantiations.
        """
        cd = self.cd
        n = pre_rows.size
        lo = np.tile(pre.lo[pre_rows], (n_inst, 1))
        hi = np.tile(pre.hi[pre_rows], (n_inst, 1))
        f_lo = np.tile(pre.plo[pre_rows], n_inst)
        f_hi = np.tile(pre.phi[pre_rows], n_inst)
        valid = np.ones(n * n_inst, bool)
        for b, sel in _split(taken):
            for i, member in enumerate(desc.branches[b].members):
                at = sel + i * n
                if member is None:
                    valid[at] = False
                    continue
                self._advance(cd.compiler.branch(member), at, lo, hi, f_lo, f_hi, valid)
        copies = (np.arange(n_inst) * n)[:, None]
        for jj in range(j + 1, len(self.layers)):
            lay = self.layers[jj]
            branches = cd.branches(lay.action)
            for b, sel in _split(lay.branch[self.anc[jj]]):
                self._advance(branches[b], (sel[None, :] + copies).ravel(), lo, hi, f_lo, f_hi,
                              valid)
        width = lo.shape[1]
        return (valid.reshape(n_inst, n), lo.reshape(n_inst, n, width),
                hi.reshape(n_inst, n, width), f_lo.reshape(n_inst, n), f_hi.reshape(n_inst, n))

    @staticmethod
    def _advance(cb, sel, lo, hi, f_lo, f_hi, valid):
        from . import kernels

        s_lo, s_hi = lo[sel], hi[sel]
        must, may = cb.guard(s_lo, s_hi)
        valid[sel] &= may
        nlo, nhi = cb.effect.apply(s_lo, s_hi)
        bc = cb.effect.clip
        if bc.size:
            nlo[:, bc] = np.clip(nlo[:, bc], 0.0, 1.0)
            nhi[:, bc] = np.clip(nhi[:, bc], 0.0, 1.0)
        lo[sel], hi[sel] = nlo, nhi
        f_lo[sel] = np.where(must, kernels.mul_down(f_lo[sel], cb.plo), 0.0)
        f_hi[sel] = kernels.mul_up(f_hi[sel], cb.phi)


def _split(labels: np.ndarray):
    """(label, row indices) for each distinct label, in increasing label order."""
    if labels.size == 0:
        return
    order = np.argsort(labels, kind="stable")
    ordered = labels[order]
    cuts = np.flatnonzero(ordered[1:] != ordered[:-1]) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [labels.size]))
    for a, b in zip(starts.tolist(), ends.tolist()):
        yield int(ordered[a]), order[a:b]


def plan_sensitivities(cd: CompiledDomain, steps: Sequence[str], counters: Counters | None = None,
                       fraction: float = 1.0) -> list[Optional[float]]:
    """Sensitivity of every step (``None`` for primitive steps).

    A decomposable step is projected through its subplan, so expanding it
    changes no bound by itself; it scores the best abstract step it contains.
    """
    d = cd.domain
    tr = _Trace(cd, steps, counters)
    out: list[Optional[float]] = [None if d.is_primitive(s) else 0.0 for s in steps]
    if len(tr.final) == 0:
        return out
    for j, layer in enumerate(tr.layers):
        k = layer.plan_step
        if out[k] is None or d.action(layer.action).kind is not ActionKind.ABSTRACT:
            continue
        a = tr.analyze(j, fraction, d.deltas.get(layer.action))
        out[k] = max(out[k], a.sensitivity)
    return out


def _layer_for(cd: CompiledDomain, steps: Sequence[str], k: int) -> int:
    flat = cd.flat_plan(steps)
    for j, (name, pk) in enumerate(flat):
        if pk == k:
            if cd.domain.action(name).kind is not ActionKind.ABSTRACT:
                raise ContractViolation(f"step {k} ({steps[k]!r}) is not an abstract action")
            return j
    raise ContractViolation(f"plan has no step {k}")


def analyze_step(d: Domain | CompiledDomain, steps: Sequence[str], k: int,
                 fraction: float = 1.0, use_overrides: bool = True) -> StepAnalysis:
    cd = compile_domain(d)
    if cd.domain.is_primitive(steps[k]):
        raise ContractViolation(f"step {k} ({steps[k]!r}) is primitive")
    tr = _Trace(cd, steps, None)
    j = _layer_for(cd, steps, k)
    deltas = cd.domain.deltas.get(steps[k]) if use_overrides else None
    return tr.analyze(j, fraction, deltas)


def delta_functions(d: Domain | CompiledDomain, steps: Sequence[str], k: int, chronicle: int):
    """(dUG, dUR, (dP_lo, dP_hi)) of step ``k`` for one chronicle of the plan."""
    a = analyze_step(d, steps, k)
    c = chronicle
    return float(a.d_ug[c]), float(a.d_ur[c]), (float(a.dp_lo[c]), float(a.dp_hi[c]))


def sensitivity(d: Domain | CompiledDomain, steps: Sequence[str], k: int,
                fraction: float = 1.0) -> float:
    cd = compile_domain(d)
    if cd.domain.is_primitive(steps[k]):
        raise ContractViolation(f"step {k} ({steps[k]!r}) is primitive")
    return plan_sensitivities(cd, steps, None, fraction)[k]


# ----------------------------------------------------------------- main loop


def inherit_bounds(child: EUInterval, parent: EUInterval) -> EUInterval:
    """Intersect a child's EU interval with its parent's.

    Every instantiation of the child is an instantiation of the parent, so
    both intervals contain its EU and so does their intersection.  The
    projection alone does not guarantee nesting: a parent may describe a
    decomposable step by its sequential summary while the child projects the
    same subplan step by step, and the two relaxations are incomparable.
    An empty intersection can only come from rounding; the child's own
    interval is kept then.
    """
    both = intersect(child.eu, parent.eu)
    if both is None or both == child.eu:
        return child
    return replace(child, eu=both)


def drips_plan(d: Domain | CompiledDomain, strategy: Strategy | str = "first",
               budget: Budget | None = None, jobs: int = 1,
               on_expand: Callable[[Plan, list[Plan]], None] | None = None,
               on_frontier: Callable[[list[Plan]], None] | None = None) -> PlanResult:
    """Find every EU-optimal primitive plan (or the current candidates if a budget runs out)."""
    t0 = time.perf_counter()
    cd = compile_domain(d)
    dom = cd.domain
    if isinstance(strategy, str):
        strategy = Strategy(strategy)
    budget = budget or Budget()
    counters = Counters()
    next_id = 0

    def make(steps, parent=None, pos=None):
        nonlocal next_id
        pid = next_id
        next_id += 1
        return pid, steps, parent, pos

    def evaluate_all(specs, parent_plan=None, k=0):
        # siblings share the parent's steps before position k; project those once
        start = cd.project(list(parent_plan.steps[:k]), None, counters) if k else None

        def one(spec):
            return cd.evaluate(list(spec[1]), counters, start, k)

        if jobs > 1 and len(specs) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as ex:
                eus = list(ex.map(one, specs))
        else:
            eus = [one(s) for s in specs]
        if parent_plan is not None:
            eus = [inherit_bounds(eu, parent_plan.eu) for eu in eus]
        return [Plan(pid, steps, eu, parent, pos, is_primitive_plan(steps, dom))
                for (pid, steps, parent, pos), eu in zip(specs, eus)]

    root = evaluate_all([make((dom.root,))])[0]
    frontier = [root]
    seen = {root.steps}
    expansions = 0
    pruned = 0
    complete = False
    while True:
        if budget.max_expansions is not None and budget.max_expansions <= 0:
            break
        before = len(frontier)
        frontier = prune(frontier)
        pruned += before - len(frontier)
        if on_frontier is not None:
            on_frontier(list(frontier))
        if all(p.primitive for p in frontier):
            complete = True
            break
        if budget.max_expansions is not None and expansions >= budget.max_expansions:
            break
        if budget.max_ms is not None and (time.perf_counter() - t0) * 1000 >= budget.max_ms:
            break
        p = select_plan(frontier)
        if strategy.kind == "first":
            k = select_action_first(p.steps, dom)
        elif strategy.kind == "priority":
            k = select_action_priority(p.steps, dom, strategy.priorities)
        else:
            k = select_action_sensitivity(p.steps, cd, counters, strategy.fraction)
        specs = []
        for seq in expand(p.steps[k], dom):
            steps = p.steps[:k] + tuple(seq) + p.steps[k + 1:]
            if steps in seen:
                continue
            seen.add(steps)
            specs.append(make(steps, p.id, k))
        children = evaluate_all(specs, p, k) if specs else []
        expansions += 1
        frontier = [q for q in frontier if q is not p] + children
        if on_expand is not None:
            on_expand(p, children)
    stats = PlanStats(counters.plans_evaluated, expansions, counters.peak_states, pruned,
                      (time.perf_counter() - t0) * 1000, complete)
    return PlanResult(frontier, stats)
