"""Core value types: conditions, affine expressions, effects, world states,
actions and domains, plus their scalar evaluation semantics.

Conditions are three-valued over interval states: ``True`` when the condition
holds at every point of the state box, ``False`` when it holds at none and
``None`` (unknown) otherwise.
"""

from __future__ import annotations

import enum
import itertools
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .errors import DomainReferenceError, UnknownAttributeError
from .interval import ONE, ZERO, Interval

Truth = Optional[bool]


class Rel(str, enum.Enum):
    EQ = "="
    LE = "<="
    GE = ">="
    LT = "<"
    GT = ">"


@dataclass(frozen=True)
class Atom:
    attr: str
    rel: Rel
    threshold: float

    def holds(self, x: float) -> bool:
        t = self.threshold
        if self.rel is Rel.EQ:
            return x == t
        if self.rel is Rel.LE:
            return x <= t
        if self.rel is Rel.GE:
            return x >= t
        if self.rel is Rel.LT:
            return x < t
        return x > t

    def truth(self, value: Interval) -> Truth:
        lo, hi, t = value.lo, value.hi, self.threshold
        rel = self.rel
        if rel is Rel.EQ:
            if lo == hi == t:
                return True
            return None if lo <= t <= hi else False
        if rel is Rel.GE:
            return True if lo >= t else (False if hi < t else None)
        if rel is Rel.GT:
            return True if lo > t else (False if hi <= t else None)
        if rel is Rel.LE:
            return True if hi <= t else (False if lo > t else None)
        return True if hi < t else (False if lo >= t else None)

    def __str__(self):
        t = self.threshold
        return f"{self.attr} {self.rel.value} {_fmt_number(t)}"


@dataclass(frozen=True)
class Condition:
    """Disjunction of conjunctions of single-attribute atoms.

    ``TRUE`` is the single empty conjunction, ``FALSE`` the empty disjunction.
    A condition with one disjunct is a plain conjunction.
    """

    disjuncts: tuple[tuple[Atom, ...], ...]

    @classmethod
    def conj(cls, atoms: Iterable[Atom]) -> Condition:
        return cls((tuple(atoms),))

    @classmethod
    def any_of(cls, conditions: Iterable[Condition]) -> Condition:
        out: list[tuple[Atom, ...]] = []
        for c in conditions:
            for d in c.disjuncts:
                if d not in out:
                    out.append(d)
        if () in out:
            return TRUE
        return cls(tuple(out))

    def and_(self, other: Condition) -> Condition:
        out: list[tuple[Atom, ...]] = []
        for a, b in itertools.product(self.disjuncts, other.disjuncts):
            merged = tuple(dict.fromkeys(a + b))
            if merged not in out:
                out.append(merged)
        return Condition(tuple(out))

    @property
    def mode(self) -> str:
        return "conjunction" if len(self.disjuncts) == 1 else "disjunction"

    def is_true(self) -> bool:
        return () in self.disjuncts

    def is_false(self) -> bool:
        return not self.disjuncts

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(dict.fromkeys(a for d in self.disjuncts for a in d))

    def attributes(self) -> set[str]:
        return {a.attr for a in self.atoms}

    def holds(self, point: Mapping[str, float]) -> bool:
        return any(all(a.holds(point[a.attr]) for a in d) for d in self.disjuncts)

    def satisfiable_disjuncts(self) -> Condition:
        """Drop conjunctions that no point can satisfy."""
        return Condition(tuple(d for d in self.disjuncts if conjunction_satisfiable(d)))

    def __str__(self):
        if self.is_false():
            return "FALSE"
        if self.is_true():
            return "TRUE"
        parts = [" and ".join(map(str, d)) for d in self.disjuncts]
        return " or ".join(f"({p})" if len(self.disjuncts) > 1 else p for p in parts)


TRUE = Condition(((),))
FALSE = Condition(())


def conjunction_satisfiable(atoms: Iterable[Atom]) -> bool:
    by_attr: dict[str, list[Atom]] = {}
    for a in atoms:
        by_attr.setdefault(a.attr, []).append(a)
    for group in by_attr.values():
        if not any(all(a.holds(x) for a in group) for x in region_points(a.threshold for a in group)):
            return False
    return True


def region_points(thresholds: Iterable[float]) -> list[float]:
    """One representative per region cut out by single-attribute atoms."""
    ts = sorted(set(thresholds))
    if not ts:
        return [0.0]
    pts = [ts[0] - 1.0, ts[-1] + 1.0]
    pts.extend(ts)
    pts.extend((a + b) / 2 for a, b in zip(ts, ts[1:]))
    return sorted(pts)


@dataclass(frozen=True)
class AffineExpr:
    """``constant + sum(coef * name)`` with interval constant and coefficients.

    Names are attributes, or parameters that are folded into the constant by
    :meth:`substitute` before evaluation.
    """

    constant: Interval = ZERO
    terms: tuple[tuple[Interval, str], ...] = ()

    def __post_init__(self):
        names = [n for _, n in self.terms]
        if len(names) != len(set(names)):
            raise ValueError(f"attribute repeated in affine expression: {names}")

    @classmethod
    def const(cls, value) -> AffineExpr:
        return cls(Interval.coerce(value), ())

    @classmethod
    def var(cls, name: str, coef=1.0) -> AffineExpr:
        return cls(ZERO, ((Interval.coerce(coef), name),))

    @classmethod
    def from_coeffs(cls, constant, coeffs: Mapping[str, Interval]) -> AffineExpr:
        return cls(Interval.coerce(constant),
                   tuple((Interval.coerce(c), n) for n, c in coeffs.items() if c != ZERO))

    def coeffs(self) -> dict[str, Interval]:
        return {n: c for c, n in self.terms}

    def names(self) -> set[str]:
        return {n for _, n in self.terms}

    def is_identity(self, attr: str) -> bool:
        return self.constant == ZERO and self.terms == ((ONE, attr),)

    def is_constant(self) -> bool:
        return not self.terms

    def substitute(self, values: Mapping[str, object]) -> AffineExpr:
        """Fold every name found in ``values`` (numbers or Intervals) into the constant."""
        const = self.constant
        kept = []
        for c, n in self.terms:
            if n in values:
                const = const + c * Interval.coerce(values[n])
            else:
                kept.append((c, n))
        return AffineExpr(const, tuple(kept))

    def compose(self, assignments: Mapping[str, AffineExpr]) -> AffineExpr:
        """Replace each assigned name by its right-hand side."""
        const = self.constant
        acc: dict[str, Interval] = {}
        for c, n in self.terms:
            rhs = assignments.get(n)
            if rhs is None:
                acc[n] = acc[n] + c if n in acc else c
                continue
            const = const + c * rhs.constant
            for c2, n2 in rhs.terms:
                prod = c * c2
                acc[n2] = acc[n2] + prod if n2 in acc else prod
        return AffineExpr.from_coeffs(const, acc)

    def __str__(self):
        from .domain_io import format_expr

        return format_expr(self)


@dataclass(frozen=True)
class Effect:
    assignments: tuple[tuple[str, AffineExpr], ...] = ()

    def __post_init__(self):
        targets = [a for a, _ in self.assignments]
        if len(targets) != len(set(targets)):
            raise ValueError(f"attribute assigned twice in one effect: {targets}")

    @classmethod
    def of(cls, mapping: Mapping[str, AffineExpr]) -> Effect:
        return cls(tuple(mapping.items()))

    def as_dict(self) -> dict[str, AffineExpr]:
        return dict(self.assignments)

    def targets(self) -> set[str]:
        return {a for a, _ in self.assignments}

    def names(self) -> set[str]:
        out = self.targets()
        for _, e in self.assignments:
            out |= e.names()
        return out

    def then(self, second: Effect) -> Effect:
        """Sequential composition: apply ``self`` then ``second``."""
        first = self.as_dict()
        out = {a: e.compose(first) for a, e in second.assignments}
        for a, e in self.assignments:
            out.setdefault(a, e)
        return Effect(tuple((a, e) for a, e in out.items() if not e.is_identity(a)))


class WorldState(Mapping):
    """Immutable mapping from attribute names to Intervals."""

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[str, object]):
        self._values = {k: Interval.coerce(v) for k, v in values.items()}

    def __getitem__(self, key):
        try:
            return self._values[key]
        except KeyError:
            raise UnknownAttributeError(key) from None

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __eq__(self, other):
        if isinstance(other, WorldState):
            return self._values == other._values
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self._values.items())))

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self._values.items())
        return f"WorldState({inner})"

    def is_concrete(self) -> bool:
        return all(v.is_point() for v in self._values.values())

    def contains(self, other: WorldState, tol: float = 0.0) -> bool:
        return all(self[k].contains(other[k], tol) for k in self._values)

    def updated(self, changes: Mapping[str, Interval]) -> WorldState:
        vals = dict(self._values)
        vals.update(changes)
        return WorldState(vals)


def eval_expr(e: AffineExpr, s: Mapping[str, Interval]) -> Interval:
    acc = e.constant
    for coef, name in e.terms:
        if name not in s:
            raise UnknownAttributeError(name)
        v = s[name]
        acc = acc + (v if coef == ONE else coef * v)
    return acc


def eval_condition(c: Condition, s: Mapping[str, Interval]) -> Truth:
    any_unknown = False
    for conj in c.disjuncts:
        result: Truth = True
        for atom in conj:
            if atom.attr not in s:
                raise UnknownAttributeError(atom.attr)
            t = atom.truth(s[atom.attr])
            if t is False:
                result = False
                break
            if t is None:
                result = None
        if result is True:
            return True
        if result is None:
            any_unknown = True
    return None if any_unknown else False


def apply_effect(e: Effect, s: WorldState) -> WorldState:
    changes = {}
    for attr, rhs in e.assignments:
        if attr not in s:
            raise UnknownAttributeError(attr)
        changes[attr] = eval_expr(rhs, s)
    return s.updated(changes)


# ----------------------------------------------------------------- actions


class ActionKind(str, enum.Enum):
    PRIMITIVE = "primitive"
    ABSTRACT = "abstract"
    DECOMPOSABLE = "decomposable"


@dataclass(frozen=True)
class Branch:
    condition: Condition
    prob: Interval
    effect: Effect
    # Derived descriptions carry a finer applicability test than the display
    # condition, and abstract branches remember their per-instantiation members.
    guard: object = field(default=None, compare=False, repr=False)
    members: Optional[tuple] = field(default=None, compare=False, repr=False)

    @property
    def applicability(self):
        return self.guard if self.guard is not None else self.condition


@dataclass(frozen=True)
class ActionDef:
    name: str
    kind: ActionKind = ActionKind.PRIMITIVE
    branches: tuple[Branch, ...] = ()
    instantiations: tuple[str, ...] = ()
    subplan: tuple[str, ...] = ()
    grouping: Optional[tuple[tuple[tuple[int, int], ...], ...]] = None

    @property
    def is_primitive(self) -> bool:
        return self.kind is ActionKind.PRIMITIVE

    def referenced_actions(self) -> tuple[str, ...]:
        if self.kind is ActionKind.ABSTRACT:
            return self.instantiations
        if self.kind is ActionKind.DECOMPOSABLE:
            return self.subplan
        return ()


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    kind: str = "numeric"  # or "boolean"
    default: float = 0.0
    bounds: Optional[Interval] = None

    @property
    def is_boolean(self) -> bool:
        return self.kind == "boolean"

    @property
    def range(self) -> Optional[Interval]:
        if self.is_boolean:
            return Interval(0.0, 1.0)
        return self.bounds


@dataclass(frozen=True)
class UtilityModel:
    ug: tuple[tuple[Condition, AffineExpr], ...] = ((TRUE, AffineExpr()),)
    ur: tuple[tuple[Condition, AffineExpr], ...] = ((TRUE, AffineExpr()),)
    k_r: float = 1.0

    def substitute(self, values: Mapping[str, object]) -> UtilityModel:
        return UtilityModel(
            tuple((c, e.substitute(values)) for c, e in self.ug),
            tuple((c, e.substitute(values)) for c, e in self.ur),
            self.k_r,
        )


@dataclass(frozen=True, eq=True)
class Domain:
    name: str
    attributes: tuple[AttributeDecl, ...]
    actions: dict[str, ActionDef]
    root: str
    initial: WorldState
    utility: UtilityModel
    priorities: dict[str, int] = field(default_factory=dict)
    parameters: dict[str, float] = field(default_factory=dict)
    deltas: dict[str, dict[str, float]] = field(default_factory=dict)

    __hash__ = None  # type: ignore[assignment]

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def attribute(self, name: str) -> AttributeDecl:
        for a in self.attributes:
            if a.name == name:
                return a
        raise UnknownAttributeError(name)

    def action(self, name: str) -> ActionDef:
        try:
            return self.actions[name]
        except KeyError:
            raise DomainReferenceError(name) from None

    def is_primitive(self, name: str) -> bool:
        return self.action(name).is_primitive

    def priority(self, name: str) -> int:
        return self.priorities.get(name, 0)

    def with_parameters(self, overrides: Mapping[str, float]) -> Domain:
        unknown = set(overrides) - set(self.parameters)
        if unknown:
            raise DomainReferenceError(sorted(unknown)[0], "parameters")
        params = dict(self.parameters)
        params.update({k: float(v) for k, v in overrides.items()})
        return replace(self, parameters=params)

    def resolved_utility(self) -> UtilityModel:
        return self.utility.substitute(self.parameters)


def _fmt_number(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))
