"""Inter-action and sequential abstraction, plus navigation of the
abstraction/decomposition network.

Abstract branches keep two views of when they apply.  ``condition`` is the
displayed disjunction of member conditions; ``guard`` is the test the
projector actually uses.  For an inter-action group the guard holds for sure
only when every member holds, and may hold when any member may; that keeps
the branch probability ``[min lo, max hi]`` honest when the members disagree.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .domain_io import check_grouping
from .errors import ContractViolation, DomainError, UnsupportedConstruct
from .interval import ONE, ZERO, Interval
from .model import (
    FALSE, TRUE, ActionDef, ActionKind, AffineExpr, Atom, Branch, Condition, Domain,
    Effect, Rel, Truth, conjunction_satisfiable, eval_condition,
)


@dataclass(frozen=True)
class GroupGuard:
    """Applicability of an inter-action branch; ``None`` members are padding."""

    members: tuple

    def truth(self, s) -> Truth:
        vals = [guard_truth(m, s) for m in self.members]
        if all(v is True for v in vals):
            return True
        if all(v is False for v in vals):
            return False
        return None


@dataclass(frozen=True)
class SeqGuard:
    """``first`` holds now and ``second`` holds after ``effect``."""

    first: object
    effect: Effect
    second: object

    def truth(self, s) -> Truth:
        from .model import apply_effect

        a = guard_truth(self.first, s)
        if a is False:
            return False
        b = guard_truth(self.second, apply_effect(self.effect, s))
        if b is False:
            return False
        return True if (a is True and b is True) else None


def guard_truth(guard, s) -> Truth:
    """Three-valued applicability of a guard (Condition, composite or padding)."""
    if guard is None:
        return False
    if isinstance(guard, Condition):
        return eval_condition(guard, s)
    return guard.truth(s)


# ----------------------------------------------------------------- inter-action


def _effect_hull(effects: Sequence[Effect]) -> Effect:
    """Coefficient-wise hull; members that leave an attribute alone count as identity."""
    dicts = [e.as_dict() for e in effects]
    targets: dict[str, None] = {}
    for e in dicts:
        targets.update(dict.fromkeys(e))
    out = []
    for a in targets:
        exprs = [e.get(a) or AffineExpr.var(a) for e in dicts]
        const = exprs[0].constant
        for x in exprs[1:]:
            const = const.hull(x.constant)
        per = [x.coeffs() for x in exprs]
        names: dict[str, None] = {}
        for c in per:
            names.update(dict.fromkeys(c))
        coeffs = {}
        for n in names:
            h = per[0].get(n, ZERO)
            for c in per[1:]:
                h = h.hull(c.get(n, ZERO))
            coeffs[n] = h
        expr = AffineExpr.from_coeffs(const, coeffs)
        if not expr.is_identity(a):
            out.append((a, expr))
    return Effect(tuple(out))


def _effect_width(effect: Effect, scales: Mapping[str, float]) -> float:
    total = 0.0
    for a, e in effect.assignments:
        w = e.constant.width
        for c, n in e.terms:
            w += c.width * scales.get(n, 1.0)
        total += w / max(scales.get(a, 1.0), 1e-12)
    return total


def _pad_cost(probs) -> float:
    # a padded group loses its lower probability bound, freeing that mass
    return 1.0 + 8.0 * max(p.hi for p in probs)


def _dense_effects(actions: Sequence[ActionDef], scales: Mapping[str, float]):
    """Every branch effect as dense ``lo``/``hi`` rows plus per-slot width weights.

    A slot is a target attribute's constant or one of its coefficients.  A
    target an effect leaves alone reads as the identity, exactly as in
    :func:`_effect_hull`, so the hull of a set of effects has slot-wise
    ``[min lo, max hi]`` and its :func:`_effect_width` is the weighted sum of
    slot widths.
    """
    dicts = [[br.effect.as_dict() for br in a.branches] for a in actions]
    slots: dict[tuple[str, Optional[str]], int] = {}
    for per_action in dicts:
        for e in per_action:
            for t, expr in e.items():
                slots.setdefault((t, None), len(slots))
                slots.setdefault((t, t), len(slots))
                for _, n in expr.terms:
                    slots.setdefault((t, n), len(slots))
    weight = np.empty(len(slots))
    ident = np.zeros(len(slots))
    for (t, n), k in slots.items():
        denom = max(scales.get(t, 1.0), 1e-12)
        weight[k] = (1.0 if n is None else scales.get(n, 1.0)) / denom
        ident[k] = 1.0 if n == t else 0.0
    rows = []
    for per_action in dicts:
        lo = np.tile(ident, (len(per_action), 1))
        hi = lo.copy()
        for i, e in enumerate(per_action):
            for t, expr in e.items():
                # an assigned target starts from zero, not from the identity
                lo[i, slots[(t, t)]] = hi[i, slots[(t, t)]] = 0.0
                k = slots[(t, None)]
                lo[i, k], hi[i, k] = expr.constant.lo, expr.constant.hi
                for c, n in expr.terms:
                    k = slots[(t, n)]
                    lo[i, k], hi[i, k] = c.lo, c.hi
        rows.append((lo, hi))
    return rows, weight


def greedy_grouping(actions: Sequence[ActionDef], scales: Mapping[str, float] | None = None):
    """Group branches so the summed hull widths stay small.

    Branches of the first action seed the groups.  Each later action's
    branches are matched to existing groups (or new ones) by minimum-cost
    assignment, the cost being the normalised hull width of the effects plus
    the probability spread.  Padding a group, or mixing conditions in it,
    loosens its probability bound and is charged by the mass it frees.
    """
    scales = scales or {}
    dense, weight = _dense_effects(actions, scales)
    # running summary per group; hulls are associative, so extending a group
    # never needs its full member list.  ``cond`` is None once members disagree.
    g_lo, g_hi = dense[0][0].copy(), dense[0][1].copy()
    p_lo = np.array([br.prob.lo for br in actions[0].branches])
    p_hi = np.array([br.prob.hi for br in actions[0].branches])
    cond: list[Optional[Condition]] = [br.condition for br in actions[0].branches]
    groups = [[(0, j)] for j in range(len(actions[0].branches))]
    for k in range(1, len(actions)):
        branches = actions[k].branches
        m, g = len(branches), len(groups)
        b_lo, b_hi = dense[k]
        bp_lo = np.array([br.prob.lo for br in branches])
        bp_hi = np.array([br.prob.hi for br in branches])
        # rows: branches then one dummy per group; columns: groups then new groups
        cost = np.zeros((m + g, g + m))
        cost[:m, g:] = np.inf
        width = (np.maximum(b_hi[:, None, :], g_hi[None]) -
                 np.minimum(b_lo[:, None, :], g_lo[None])) @ weight
        hi = np.maximum(bp_hi[:, None], p_hi[None])
        spread = hi - np.minimum(bp_lo[:, None], p_lo[None])
        mixed = np.array([[c is None or c != br.condition for c in cond] for br in branches],
                         dtype=bool).reshape(m, g)
        # the guard goes unknown wherever the conditions disagree
        cost[:m, :g] = width + spread + np.where(mixed, 1.0 + 8.0 * hi, 0.0)
        cost[np.arange(m), g + np.arange(m)] = [_pad_cost([br.prob]) for br in branches]
        cost[m:, :g] = np.inf
        cost[m + np.arange(g), np.arange(g)] = 1.0 + 8.0 * p_hi
        rows, cols = linear_sum_assignment(cost)
        fresh = []
        for i, j in zip(rows, cols):
            if i >= m:
                continue
            br = branches[i]
            if j < g:
                groups[j].append((k, i))
                g_lo[j] = np.minimum(g_lo[j], b_lo[i])
                g_hi[j] = np.maximum(g_hi[j], b_hi[i])
                p_lo[j] = min(p_lo[j], br.prob.lo)
                p_hi[j] = max(p_hi[j], br.prob.hi)
                if cond[j] != br.condition:
                    cond[j] = None
            else:
                groups.append([(k, i)])
                fresh.append(i)
                cond.append(br.condition)
        if fresh:
            g_lo = np.vstack([g_lo, b_lo[fresh]])
            g_hi = np.vstack([g_hi, b_hi[fresh]])
            p_lo = np.concatenate([p_lo, bp_lo[fresh]])
            p_hi = np.concatenate([p_hi, bp_hi[fresh]])
    return tuple(tuple(grp) for grp in groups)


def inter_abstract(actions: Sequence[ActionDef], grouping=None, name: str | None = None,
                   scales: Mapping[str, float] | None = None) -> ActionDef:
    """Abstract action standing for any one of ``actions``."""
    if len(actions) < 2:
        raise ContractViolation("inter-action abstraction needs at least two actions")
    for a in actions:
        if not a.branches:
            raise ContractViolation(f"action {a.name!r} has no branch description")
    if grouping is None:
        grouping = greedy_grouping(actions, scales)
    problems = check_grouping([len(a.branches) for a in actions], grouping)
    if problems:
        raise DomainError("invalid branch grouping: " + "; ".join(problems))
    branches = []
    for grp in grouping:
        by_action = dict(grp)
        members: list[Optional[Branch]] = [
            actions[k].branches[by_action[k]] if k in by_action else None
            for k in range(len(actions))
        ]
        real = [m for m in members if m is not None]
        padded = len(real) < len(actions)
        cond = Condition.any_of(m.condition for m in real)
        lo = 0.0 if padded else min(m.prob.lo for m in real)
        hi = max(m.prob.hi for m in real)
        effect = _effect_hull([m.effect for m in real])
        guard = GroupGuard(tuple(None if m is None else m.applicability for m in members))
        branches.append(Branch(cond, Interval(lo, hi), effect, guard=guard,
                               members=tuple(members)))
    return ActionDef(name or "|".join(a.name for a in actions), ActionKind.ABSTRACT,
                     tuple(branches), instantiations=tuple(a.name for a in actions),
                     grouping=tuple(tuple(g) for g in grouping))


# ----------------------------------------------------------------- sequential


def regress_atom(atom: Atom, effect: Effect) -> tuple[str, object]:
    """Rewrite ``atom`` as a condition on the state before ``effect``.

    Returns ("atom", Atom), ("const", bool) or ("unsupported", None).
    """
    rhs = effect.as_dict().get(atom.attr)
    if rhs is None:
        return "atom", atom
    if rhs.is_constant() and rhs.constant.is_point():
        return "const", atom.holds(rhs.constant.lo)
    if rhs.constant.is_point() and rhs.terms == ((ONE, atom.attr),):
        return "atom", Atom(atom.attr, atom.rel, atom.threshold - rhs.constant.lo)
    return "unsupported", None


def regress_condition(c: Condition, effect: Effect, strict: bool = False,
                      context: str = "") -> tuple[Condition, bool]:
    """Regress a condition through an effect.  Returns (condition, exact)."""
    exact = True
    out = []
    for conj in c.disjuncts:
        atoms = []
        dead = False
        for atom in conj:
            kind, val = regress_atom(atom, effect)
            if kind == "atom":
                atoms.append(val)
            elif kind == "const":
                if not val:
                    dead = True
                    break
            else:
                if strict:
                    raise UnsupportedConstruct(
                        f"cannot regress {atom} through {atom.attr} := "
                        f"{effect.as_dict()[atom.attr]}" + (f" ({context})" if context else ""))
                exact = False
        if not dead:
            out.append(tuple(atoms))
    if () in out:
        return TRUE, exact
    return Condition(tuple(out)), exact


def seq_abstract(a1: ActionDef, a2: ActionDef, name: str | None = None, strict: bool = False,
                 prune_unsatisfiable: bool = False) -> ActionDef:
    """Macro action for ``a1`` followed by ``a2``: every pair of branches."""
    if not a1.branches or not a2.branches:
        raise ContractViolation("sequential abstraction needs branch descriptions")
    branches = []
    for i, b1 in enumerate(a1.branches):
        for j, b2 in enumerate(a2.branches):
            regressed, exact = regress_condition(b2.condition, b1.effect, strict,
                                                 f"{a1.name}[{i}] then {a2.name}[{j}]")
            cond = b1.condition.and_(regressed)
            if prune_unsatisfiable and exact:
                cond = cond.satisfiable_disjuncts()
                if cond.is_false():
                    continue
            if b1.prob.hi == 0 or b2.prob.hi == 0:
                if prune_unsatisfiable:
                    continue
            guard = SeqGuard(b1.applicability, b1.effect, b2.applicability)
            branches.append(Branch(cond, b1.prob * b2.prob, b1.effect.then(b2.effect),
                                   guard=guard))
    return ActionDef(name or f"{a1.name};{a2.name}", ActionKind.DECOMPOSABLE, tuple(branches),
                     subplan=(a1.name, a2.name))


def materialize(descs: Sequence[ActionDef], name: str | None = None,
                strict: bool = False) -> ActionDef:
    """Fold :func:`seq_abstract` over a whole subplan."""
    if len(descs) == 1:
        return descs[0]
    acc = descs[0]
    for d in descs[1:]:
        acc = seq_abstract(acc, d, strict=strict, prune_unsatisfiable=True)
    return ActionDef(name or acc.name, ActionKind.DECOMPOSABLE, acc.branches,
                     subplan=tuple(x.name for x in descs))


# ----------------------------------------------------------------- network


def expand(a: ActionDef | str, d: Domain) -> list[tuple[str, ...]]:
    """Replacement sequences for a non-primitive action."""
    if isinstance(a, str):
        a = d.action(a)
    if a.kind is ActionKind.ABSTRACT:
        return [(i,) for i in a.instantiations]
    if a.kind is ActionKind.DECOMPOSABLE:
        return [tuple(a.subplan)]
    raise ContractViolation(f"cannot expand primitive action {a.name!r}")


def attribute_scales(d: Domain) -> dict[str, float]:
    out = {}
    for a in d.attributes:
        r = a.range
        out[a.name] = r.width if r is not None and r.width > 0 else 1.0
    return out


class Describer:
    """Branch descriptions used to project each action of a domain.

    Primitive actions use their own branches with parameters folded in.
    Abstract and decomposable actions use authored branches when the file
    provides them, otherwise a derived inter-action or sequential abstraction.
    Results are cached; the cache is safe to share between threads.
    """

    def __init__(self, d: Domain, strict: bool = False):
        self.domain = d
        self.strict = strict
        self.scales = attribute_scales(d)
        self._cache: dict[str, ActionDef] = {}
        self._lock = threading.RLock()

    def _resolve(self, b: Branch) -> Branch:
        params = self.domain.parameters
        if not params:
            return b
        eff = Effect(tuple((a, e.substitute(params)) for a, e in b.effect.assignments))
        return Branch(b.condition, b.prob, eff, guard=b.guard, members=b.members)

    def __call__(self, name: str) -> ActionDef:
        got = self._cache.get(name)
        if got is not None:
            return got
        with self._lock:
            got = self._cache.get(name)
            if got is None:
                got = self._build(name, ())
                self._cache[name] = got
            return got

    def _build(self, name: str, stack: tuple[str, ...]) -> ActionDef:
        if name in stack:
            raise DomainError("cycle in network: " + " -> ".join(stack + (name,)))
        a = self.domain.action(name)
        if a.branches:
            return ActionDef(a.name, a.kind, tuple(self._resolve(b) for b in a.branches),
                             a.instantiations, a.subplan, a.grouping)
        sub = [self._cache.get(n) or self._build(n, stack + (name,))
               for n in a.referenced_actions()]
        for n, s in zip(a.referenced_actions(), sub):
            self._cache.setdefault(n, s)
        if a.kind is ActionKind.ABSTRACT:
            derived = inter_abstract(sub, a.grouping, a.name, self.scales)
            return derived
        return materialize(sub, a.name, self.strict)
