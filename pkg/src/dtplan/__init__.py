"""Decision-theoretic refinement planning over interval expected utilities."""

from .interval import Interval
from .model import (
    FALSE, TRUE, ActionDef, ActionKind, AffineExpr, Atom, AttributeDecl, Branch, Condition,
    Domain, Effect, Rel, UtilityModel, WorldState, apply_effect, eval_condition, eval_expr,
)
from .domain_io import load_domain, parse_domain, serialize_domain, validate_domain
from .projection import (
    ChronicleSet, CompiledDomain, bound_weighted_sum, chronicle_utility, evaluate_plan, project,
)

__version__ = "0.1.0"

__all__ = [
    "Interval", "FALSE", "TRUE", "ActionDef", "ActionKind", "AffineExpr", "Atom",
    "AttributeDecl", "Branch", "Condition", "Domain", "Effect", "Rel", "UtilityModel",
    "WorldState", "apply_effect", "eval_condition", "eval_expr", "load_domain", "parse_domain",
    "serialize_domain", "validate_domain", "ChronicleSet", "CompiledDomain",
    "bound_weighted_sum", "chronicle_utility", "evaluate_plan", "project",
]
