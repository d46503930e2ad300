"""Ground truth and comparison algorithms.

``enumerate_optimal`` evaluates every concrete plan; ``bb_decision_tree`` walks
the decision tree of action choices depth-first and prunes a subtree when the
abstract projection of its remaining choices cannot reach the best plan
found so far.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

from .model import ActionKind, Domain
from .planner import Plan, PlanResult, PlanStats, is_primitive_plan
from .projection import ChronicleSet, CompiledDomain, Counters, EUInterval, compile_domain, step

BB_EPS = 1e-12


def _language(d: Domain):
    @lru_cache(maxsize=None)
    def lang(name: str) -> tuple[tuple[str, ...], ...]:
        a = d.action(name)
        if a.kind is ActionKind.PRIMITIVE:
            return ((name,),)
        if a.kind is ActionKind.ABSTRACT:
            out = [p for inst in a.instantiations for p in lang(inst)]
        else:
            out = [tuple(itertools.chain.from_iterable(combo))
                   for combo in itertools.product(*(lang(s) for s in a.subplan))]
        return tuple(dict.fromkeys(out))

    return lang


def enumerate_plans(d: Domain, root: Sequence[str] | None = None) -> list[tuple[str, ...]]:
    """Every distinct primitive sequence derivable from the root, depth-first, left to right."""
    lang = _language(d)
    steps = tuple(root) if root is not None else (d.root,)
    out = [tuple(itertools.chain.from_iterable(combo))
           for combo in itertools.product(*(lang(s) for s in steps))]
    return list(dict.fromkeys(out))


def count_plans(d: Domain) -> int:
    """Number of distinct concrete plans (same as ``len(enumerate_plans(d))``)."""
    return len(enumerate_plans(d))


def derives(abstract: Sequence[str], concrete: Sequence[str], d: Domain) -> bool:
    """True when ``concrete`` is an instantiation of the plan ``abstract``."""
    lang = _language(d)
    concrete = tuple(concrete)
    n = len(concrete)

    @lru_cache(maxsize=None)
    def match(i: int, j: int) -> bool:
        if i == len(abstract):
            return j == n
        for piece in lang(abstract[i]):
            if concrete[j:j + len(piece)] == piece and match(i + 1, j + len(piece)):
                return True
        return False

    return match(0, 0)


def non_dominated(plans: Sequence[Plan]) -> list[Plan]:
    """Plans whose EU upper bound reaches every other plan's lower bound."""
    if len(plans) < 2:
        return list(plans)
    los = sorted(((p.lo, i) for i, p in enumerate(plans)), reverse=True)
    (l1, i1), (l2, _) = los[0], los[1]
    return [p for i, p in enumerate(plans) if not p.hi < (l2 if i == i1 else l1)]


@dataclass
class OracleResult:
    plans: list[Plan]
    evaluated: list[Plan]
    stats: PlanStats


def evaluate_all_plans(d: Domain | CompiledDomain, plans: Sequence[Sequence[str]] | None = None,
                       counters: Counters | None = None) -> list[Plan]:
    """Evaluate concrete plans, sharing projections of common prefixes."""
    cd = compile_domain(d)
    plans = [tuple(p) for p in (plans if plans is not None else enumerate_plans(cd.domain))]
    counters = counters or Counters()
    out: list[Optional[Plan]] = [None] * len(plans)
    cache: dict[tuple[str, ...], ChronicleSet] = {(): cd.initial()}
    for idx, steps in enumerate(plans):
        k = len(steps)
        while steps[:k] not in cache:
            k -= 1
        cs = cache[steps[:k]]
        for j in range(k, len(steps)):
            cs = cd.project([steps[j]], cs)
            cache[steps[:j + 1]] = cs
        counters.saw_states(sum(len(c) for c in cache.values()))
        with counters.lock:
            counters.plans_evaluated += 1
        out[idx] = Plan(idx, steps, cd.eu_of(cs), primitive=True)
        # keep only the prefixes of the current plan; later plans share them in order
        for key in [key for key in cache if key and steps[:len(key)] != key]:
            del cache[key]
    return out  # type: ignore[return-value]


def enumerate_optimal(d: Domain | CompiledDomain) -> OracleResult:
    """Evaluate every concrete plan and keep the ones no other plan dominates."""
    t0 = time.perf_counter()
    cd = compile_domain(d)
    counters = Counters()
    evaluated = evaluate_all_plans(cd, None, counters)
    best = non_dominated(evaluated)
    stats = PlanStats(counters.plans_evaluated, 0, counters.peak_states, 0,
                      (time.perf_counter() - t0) * 1000, True)
    return OracleResult(best, evaluated, stats)


@dataclass
class BBStats(PlanStats):
    nodes: int = 0
    prunes: int = 0
    leaves: int = 0

    def as_dict(self):
        out = super().as_dict()
        out.update(nodes=self.nodes, prunes=self.prunes, leaves=self.leaves)
        return out


def bb_decision_tree(d: Domain | CompiledDomain) -> PlanResult:
    """Depth-first branch and bound over the decision tree of action choices.

    A node is a concrete prefix with its chronicle set and an unresolved
    suffix.  Expanding a choice generates every successor (projecting each
    instantiation up to the next choice) and keeps them stored until their
    subtrees are done; successors are explored in tree order.  A
    successor's bound is the EU upper bound of projecting its unresolved
    suffix abstractly.  As in a decision tree, identical outcomes reached
    along different paths stay separate nodes, in the tree and in the bound.
    """
    t0 = time.perf_counter()
    cd = compile_domain(d)
    dom = cd.domain
    counters = Counters()
    stats = BBStats()
    leaves: list[Plan] = []
    best_lo = -float("inf")
    held = [0]

    def note(extra: int = 0):
        counters.saw_states(held[0] + extra)

    def advance(prefix, cs, suffix):
        """Run primitive steps (and open decompositions) up to the next choice."""
        while suffix:
            head = dom.action(suffix[0])
            if head.kind is ActionKind.PRIMITIVE:
                cs = step(cs, cd.branches(head.name), cd.bool_cols, merge=False)
                note(len(cs))
                prefix, suffix = prefix + (head.name,), suffix[1:]
            elif head.kind is ActionKind.DECOMPOSABLE:
                suffix = tuple(head.subplan) + suffix[1:]
            else:
                break
        return prefix, cs, suffix

    def bound(cs: ChronicleSet, suffix: tuple[str, ...]) -> float:
        with counters.lock:
            counters.plans_evaluated += 1
        out = cs
        for name, _ in cd.flat_plan(suffix):
            out = step(out, cd.branches(name), cd.bool_cols, merge=False)
            note(len(out))
        return cd.eu_of(out).eu.hi

    def leaf(prefix, cs):
        nonlocal best_lo
        with counters.lock:
            counters.plans_evaluated += 1
        eu = cd.eu_of(cs)
        stats.leaves += 1
        leaves.append(Plan(len(leaves), prefix, eu, primitive=True))
        best_lo = max(best_lo, eu.eu.lo)

    def visit(prefix, cs, suffix):
        stats.nodes += 1
        head = dom.action(suffix[0])
        kids = []
        for inst in head.instantiations:
            p2, c2, s2 = advance(prefix, cs, (inst,) + suffix[1:])
            own = len(c2) if c2 is not cs else 0
            held[0] += own
            note()
            if not s2:
                leaf(p2, c2)
                held[0] -= own
                continue
            kids.append((bound(c2, s2), p2, c2, s2, own))
        for ub, p2, c2, s2, own in kids:
            if ub <= best_lo - BB_EPS:
                stats.prunes += 1
            else:
                visit(p2, c2, s2)
            held[0] -= own

    prefix, cs, suffix = advance((), cd.initial(), (dom.root,))
    if suffix:
        held[0] += len(cs)
        visit(prefix, cs, suffix)
    else:
        leaf(prefix, cs)
    plans = non_dominated(leaves)
    stats.plans_evaluated = counters.plans_evaluated
    stats.peak_states = counters.peak_states
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    stats.complete = True
    return PlanResult(plans, stats)
