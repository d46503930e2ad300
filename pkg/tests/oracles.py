"""Independent reference computations used by the tests.

Nothing here calls the projection machinery: the LP oracle enumerates the
vertices of the probability polytope and the decision-tree oracle walks
concrete states with the model-level evaluation functions.
"""

import itertools
import math

from dtplan import WorldState, apply_effect, eval_condition
from dtplan.projection import chronicle_utility


def lp_vertex_bounds(u_lo, u_hi, p_lo, p_hi, tol=1e-12):
    """min sum(u_lo*p) and max sum(u_hi*p) over {p_lo <= p <= p_hi, sum p = 1}.

    A vertex of the polytope has every coordinate but (at most) one at a bound.
    """
    n = len(u_lo)
    best_lo, best_hi = math.inf, -math.inf
    for free in range(n):
        others = [i for i in range(n) if i != free]
        for pick in itertools.product((0, 1), repeat=len(others)):
            p = [0.0] * n
            for i, b in zip(others, pick):
                p[i] = p_hi[i] if b else p_lo[i]
            p[free] = 1.0 - math.fsum(p[i] for i in others)
            if not (p_lo[free] - tol <= p[free] <= p_hi[free] + tol):
                continue
            best_lo = min(best_lo, math.fsum(a * b for a, b in zip(u_lo, p)))
            best_hi = max(best_hi, math.fsum(a * b for a, b in zip(u_hi, p)))
    return best_lo, best_hi


def decision_tree_eu(d, plan):
    """Expected utility of a concrete plan by explicit recursion over branches.

    Requires point probabilities and concrete states (a primitive plan in a
    point-probability domain).
    """
    params = d.parameters
    utility = d.utility

    def rec(i, state, prob):
        if prob == 0.0:
            return 0.0
        if i == len(plan):
            u = chronicle_utility(state, utility, params)
            assert u.width <= 1e-9 * (1 + abs(u.lo))
            return prob * u.lo
        total = 0.0
        for br in d.action(plan[i]).branches:
            truth = eval_condition(br.condition, state)
            assert truth is not None, "concrete state gave an undetermined condition"
            if not truth:
                continue
            assert br.prob.is_point()
            eff = br.effect
            if params:
                from dtplan.model import Effect
                eff = Effect(tuple((a, e.substitute(params)) for a, e in eff.assignments))
            total += rec(i + 1, apply_effect(eff, state), prob * br.prob.lo)
        return total

    return rec(0, WorldState(d.initial), 1.0)
