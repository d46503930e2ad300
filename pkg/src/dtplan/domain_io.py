"""Reading, writing and checking domain files.

A domain file is a YAML document with the sections::

    domain:      optional display name
    attributes:  {name: {kind: numeric|boolean, default: x, range: [lo, hi]}}
    parameters:  {NAME: number}            named constants usable in expressions
    actions:     {name: {branches: [...], grouping: [...]}}
    network:     {root: name, abstract: {name: [inst...]}, decompose: {name: [step...]}}
    initial:     {attribute: number}       missing attributes take their default
    utility:     {k_r: x, ug: [{when: ..., value: expr}], ur: [...]}
    priorities:  {action: int}
    deltas:      {action: {ug: x, ur: y}}  optional sensitivity overrides

A branch is ``{when: cond, prob: p | [lo, hi], effects: {attr: expr}}``.  A
condition is ``true``, ``false``, an atom string such as ``"fuel >= 5"``, a
list of atoms (conjunction) or ``{any: [cond, ...]}``.  Expressions are affine
in attributes and parameters, e.g. ``"cost + [120, 300]"`` or
``"ton_delivered + 0.9*ton_intruck"``.
"""

from __future__ import annotations

import ast
import itertools
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import yaml

from .errors import DomainError, DomainReferenceError, DomainSchemaError, DomainSyntaxError
from .interval import ONE, ZERO, Interval
from .model import (
    FALSE, TRUE, ActionDef, ActionKind, AffineExpr, Atom, AttributeDecl, Branch,
    Condition, Domain, Effect, Rel, UtilityModel, WorldState, _fmt_number, region_points,
)

SECTIONS = ("domain", "attributes", "parameters", "actions", "network", "initial",
            "utility", "priorities", "deltas")
PROB_TOL = 1e-9
_IDENT = re.compile(r"^[A-Za-z_][\w]*$")
_ATOM = re.compile(r"^\s*([A-Za-z_]\w*)\s*(<=|>=|=|<|>)\s*(\S+)\s*$")


# ----------------------------------------------------------------- YAML with line numbers


class _LineDict(dict):
    line: int | None = None


class _LineList(list):
    line: int | None = None


class _Loader(yaml.SafeLoader):
    pass


class _FastLoader(getattr(yaml, "CSafeLoader", yaml.SafeLoader)):
    """libyaml when available; errors are re-reported by the pure loader."""


def _construct_map(loader, node):
    data = _LineDict()
    data.line = node.start_mark.line + 1
    yield data
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node)
        if key in seen:
            raise DomainSyntaxError(f"duplicate key {key!r}", key_node.start_mark.line + 1,
                                    key_node.start_mark.column + 1)
        seen.add(key)
    data.update(loader.construct_mapping(node))


def _construct_seq(loader, node):
    data = _LineList()
    data.line = node.start_mark.line + 1
    yield data
    data.extend(loader.construct_sequence(node))


for _cls in (_Loader, _FastLoader):
    _cls.add_constructor("tag:yaml.org,2002:map", _construct_map)
    _cls.add_constructor("tag:yaml.org,2002:seq", _construct_seq)


def _line(obj) -> str:
    line = getattr(obj, "line", None)
    return f" (line {line})" if line else ""


# ----------------------------------------------------------------- expressions


def parse_expr(text, where: str = "expression") -> AffineExpr:
    if isinstance(text, bool):
        raise DomainSchemaError(where, "expected an expression, got a boolean")
    if isinstance(text, (int, float)):
        return AffineExpr.const(float(text))
    if not isinstance(text, str):
        raise DomainSchemaError(where, f"expected an expression string, got {type(text).__name__}")
    try:
        node = ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise DomainSyntaxError(f"{where}: cannot parse {text!r}: {exc.msg}") from None
    const, coeffs = _affine(node, text, where)
    return AffineExpr.from_coeffs(const, coeffs)


def _number(node, text, where) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _number(node.operand, text, where)
        return -v if isinstance(node.op, ast.USub) else v
    raise DomainSyntaxError(f"{where}: expected a number in {text!r}")


def _affine(node, text, where) -> tuple[Interval, dict[str, Interval]]:
    if isinstance(node, (ast.Constant, ast.UnaryOp)) and not (
            isinstance(node, ast.UnaryOp) and not _is_numeric(node.operand)):
        if isinstance(node, ast.UnaryOp):
            c, t = _affine(node.operand, text, where)
            if isinstance(node.op, ast.USub):
                return -c, {n: -v for n, v in t.items()}
            return c, t
        return Interval.point(_number(node, text, where)), {}
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        c, t = _affine(node.operand, text, where)
        if isinstance(node.op, ast.USub):
            return -c, {n: -v for n, v in t.items()}
        return c, t
    if isinstance(node, (ast.List, ast.Tuple)):
        if len(node.elts) != 2:
            raise DomainSyntaxError(f"{where}: interval literal needs two endpoints in {text!r}")
        lo, hi = (_number(e, text, where) for e in node.elts)
        if lo > hi:
            raise DomainSchemaError(where, f"interval [{lo}, {hi}] has lo > hi")
        return Interval(lo, hi), {}
    if isinstance(node, ast.Name):
        return ZERO, {node.id: ONE}
    if isinstance(node, ast.BinOp):
        lc, lt = _affine(node.left, text, where)
        rc, rt = _affine(node.right, text, where)
        if isinstance(node.op, (ast.Add, ast.Sub)):
            sign = isinstance(node.op, ast.Sub)
            out = dict(lt)
            for n, v in rt.items():
                v = -v if sign else v
                out[n] = out[n] + v if n in out else v
            return (lc - rc if sign else lc + rc), out
        if isinstance(node.op, ast.Mult):
            if lt and rt:
                raise DomainSyntaxError(f"{where}: product of two attributes is not affine: {text!r}")
            if lt:
                lc, lt, rc, rt = rc, rt, lc, lt
            return lc * rc, {n: lc * v for n, v in rt.items()}
    raise DomainSyntaxError(f"{where}: unsupported expression {text!r} (affine forms only)")


def _is_numeric(node) -> bool:
    if isinstance(node, ast.Constant):
        return isinstance(node.value, (int, float)) and not isinstance(node.value, bool)
    if isinstance(node, ast.UnaryOp):
        return _is_numeric(node.operand)
    return False


def _fmt_interval(i: Interval) -> str:
    return f"[{_fmt_number(i.lo)}, {_fmt_number(i.hi)}]"


def format_expr(e: AffineExpr) -> str:
    parts: list[str] = []
    for coef, name in e.terms:
        if coef.is_point():
            v = coef.lo
            if v == 1:
                term = name
            elif v == -1:
                term = f"-{name}"
            else:
                term = f"{_fmt_number(v)}*{name}"
        else:
            term = f"{_fmt_interval(coef)}*{name}"
        parts.append(term)
    c = e.constant
    if c != ZERO or not parts:
        parts.append(_fmt_number(c.lo) if c.is_point() else _fmt_interval(c))
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


# ----------------------------------------------------------------- conditions


def parse_atom(text: str, where: str) -> Atom:
    m = _ATOM.match(text)
    if not m:
        raise DomainSyntaxError(f"{where}: cannot parse condition atom {text!r}")
    name, rel, thr = m.groups()
    try:
        t = float(thr)
    except ValueError:
        raise DomainSyntaxError(f"{where}: threshold {thr!r} is not a number") from None
    if math.isnan(t):
        raise DomainSyntaxError(f"{where}: threshold is NaN")
    return Atom(name, Rel(rel), t)


def parse_condition(obj, where: str) -> Condition:
    if obj is None or obj is True:
        return TRUE
    if obj is False:
        return FALSE
    if isinstance(obj, str):
        return Condition.conj([parse_atom(obj, where)])
    if isinstance(obj, list):
        return Condition.conj([parse_atom(_as_str(a, where), where) for a in obj])
    if isinstance(obj, dict) and set(obj) == {"any"} and isinstance(obj["any"], list):
        disjuncts = []
        for sub in obj["any"]:
            c = parse_condition(sub, where)
            if len(c.disjuncts) != 1:
                raise DomainSchemaError(where, "nested disjunctions are not allowed")
            disjuncts.append(c.disjuncts[0])
        return Condition(tuple(disjuncts))
    raise DomainSchemaError(where, f"malformed condition {obj!r}{_line(obj)}")


def format_condition(c: Condition):
    if c.is_false():
        return False
    if c == TRUE:
        return True
    if len(c.disjuncts) == 1:
        return [str(a) for a in c.disjuncts[0]]
    return {"any": [[str(a) for a in d] for d in c.disjuncts]}


def _as_str(a, where) -> str:
    if not isinstance(a, str):
        raise DomainSchemaError(where, f"condition atom must be a string, got {a!r}")
    return a


# ----------------------------------------------------------------- parse


def parse_domain(text: str | bytes) -> Domain:
    """Parse a domain document.  Raises a :class:`DomainError` subclass on failure."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DomainSyntaxError(f"document is not UTF-8: {exc}") from None
    try:
        try:
            doc = yaml.load(text, Loader=_FastLoader)
        except Exception:
            # libyaml places some errors differently; report the pure loader's view
            doc = yaml.load(text, Loader=_Loader)
    except DomainError:
        raise
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise DomainSyntaxError(str(exc.problem or exc), line, col) from None
    except yaml.YAMLError as exc:
        raise DomainSyntaxError(str(exc)) from None
    except (ValueError, TypeError, RecursionError) as exc:
        raise DomainSyntaxError(str(exc)) from None
    if doc is None:
        raise DomainSyntaxError("empty document", 1, 1)
    if not isinstance(doc, dict):
        raise DomainSyntaxError("top level must be a mapping", 1, 1)
    try:
        return _build(doc)
    except DomainError:
        raise
    except (ValueError, TypeError, AttributeError, KeyError) as exc:
        raise DomainSchemaError("document", str(exc)) from None


def _mapping(doc, key, required=False) -> dict:
    val = doc.get(key)
    if val is None:
        if required:
            raise DomainSchemaError(key, "section is required")
        return {}
    if not isinstance(val, dict):
        raise DomainSchemaError(key, f"expected a mapping{_line(val)}")
    return val


def _real(v, where) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DomainSchemaError(where, f"expected a number, got {v!r}")
    v = float(v)
    if math.isnan(v):
        raise DomainSchemaError(where, "NaN is not allowed")
    return v


def _prob(v, where) -> Interval:
    if isinstance(v, list):
        if len(v) != 2:
            raise DomainSchemaError(where, f"probability interval needs two endpoints{_line(v)}")
        lo, hi = _real(v[0], where), _real(v[1], where)
    else:
        lo = hi = _real(v, where)
    if not 0.0 <= lo <= hi <= 1.0:
        raise DomainSchemaError(where, f"probability [{lo}, {hi}] outside [0, 1] or inverted")
    return Interval(lo, hi)


def _names(v, where) -> tuple[str, ...]:
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        raise DomainSchemaError(where, f"expected a list of action names{_line(v)}")
    return tuple(v)


def _build(doc: dict) -> Domain:
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise DomainSchemaError(sorted(unknown)[0], "unknown section")
    name = doc.get("domain", "domain")
    if not isinstance(name, str):
        raise DomainSchemaError("domain", "expected a string")

    attrs: list[AttributeDecl] = []
    for aname, spec in _mapping(doc, "attributes", required=True).items():
        where = f"attributes.{aname}"
        if not isinstance(aname, str) or not _IDENT.match(aname):
            raise DomainSchemaError(where, "attribute names must be identifiers")
        if spec is None:
            spec = {}
        if isinstance(spec, str):
            spec = {"kind": spec}
        if not isinstance(spec, dict):
            raise DomainSchemaError(where, "expected a mapping")
        extra = set(spec) - {"kind", "default", "range"}
        if extra:
            raise DomainSchemaError(f"{where}.{sorted(extra)[0]}", "unknown field")
        kind = spec.get("kind", "numeric")
        if kind not in ("numeric", "boolean"):
            raise DomainSchemaError(f"{where}.kind", f"must be numeric or boolean, got {kind!r}")
        default = _real(spec.get("default", 0), f"{where}.default")
        bounds = None
        if "range" in spec:
            r = spec["range"]
            if not isinstance(r, list) or len(r) != 2:
                raise DomainSchemaError(f"{where}.range", "expected [lo, hi]")
            lo, hi = _real(r[0], f"{where}.range"), _real(r[1], f"{where}.range")
            if lo > hi:
                raise DomainSchemaError(f"{where}.range", "lo > hi")
            bounds = Interval(lo, hi)
        attrs.append(AttributeDecl(aname, kind, default, bounds))
    attr_names = {a.name for a in attrs}
    if not attrs:
        raise DomainSchemaError("attributes", "at least one attribute is required")

    params = {}
    for pname, v in _mapping(doc, "parameters").items():
        if not isinstance(pname, str) or not _IDENT.match(pname):
            raise DomainSchemaError(f"parameters.{pname}", "parameter names must be identifiers")
        if pname in attr_names:
            raise DomainSchemaError(f"parameters.{pname}", "clashes with an attribute name")
        params[pname] = _real(v, f"parameters.{pname}")
    known_names = attr_names | set(params)

    def expr(v, where):
        e = parse_expr(v, where)
        for n in e.names():
            if n not in known_names:
                raise DomainReferenceError(n, where)
        return e

    def cond(v, where):
        c = parse_condition(v, where)
        for n in c.attributes():
            if n not in attr_names:
                raise DomainReferenceError(n, where)
        return c

    def branches(v, where):
        if not isinstance(v, list):
            raise DomainSchemaError(where, f"expected a list of branches{_line(v)}")
        out = []
        for i, b in enumerate(v):
            bw = f"{where}[{i}]"
            if not isinstance(b, dict):
                raise DomainSchemaError(bw, "expected a mapping")
            extra = set(b) - {"when", "prob", "effects"}
            if extra:
                raise DomainSchemaError(f"{bw}.{sorted(extra)[0]}", "unknown field")
            if "prob" not in b:
                raise DomainSchemaError(f"{bw}.prob", f"missing{_line(b)}")
            effects = b.get("effects") or {}
            if not isinstance(effects, dict):
                raise DomainSchemaError(f"{bw}.effects", "expected a mapping")
            assigns = []
            for target, rhs in effects.items():
                if target not in attr_names:
                    raise DomainReferenceError(str(target), f"{bw}.effects")
                assigns.append((target, expr(rhs, f"{bw}.effects.{target}")))
            out.append(Branch(cond(b.get("when", True), f"{bw}.when"),
                              _prob(b["prob"], f"{bw}.prob"), Effect(tuple(assigns))))
        return tuple(out)

    network = _mapping(doc, "network", required=True)
    extra = set(network) - {"root", "abstract", "decompose"}
    if extra:
        raise DomainSchemaError(f"network.{sorted(extra)[0]}", "unknown field")
    abstract = {k: _names(v, f"network.abstract.{k}") for k, v in _mapping(network, "abstract").items()}
    decompose = {k: _names(v, f"network.decompose.{k}") for k, v in _mapping(network, "decompose").items()}
    both = set(abstract) & set(decompose)
    if both:
        raise DomainSchemaError(f"network.{sorted(both)[0]}", "action is both abstract and decomposable")

    descs = _mapping(doc, "actions")
    actions: dict[str, ActionDef] = {}
    for aname in list(descs) + [n for n in itertools.chain(abstract, decompose) if n not in descs]:
        spec = descs.get(aname) or {}
        where = f"actions.{aname}"
        if not isinstance(spec, dict):
            raise DomainSchemaError(where, "expected a mapping")
        extra = set(spec) - {"branches", "grouping"}
        if extra:
            raise DomainSchemaError(f"{where}.{sorted(extra)[0]}", "unknown field")
        bs = branches(spec["branches"], f"{where}.branches") if "branches" in spec else ()
        grouping = None
        if "grouping" in spec:
            grouping = _grouping(spec["grouping"], f"{where}.grouping")
        if aname in abstract:
            act = ActionDef(aname, ActionKind.ABSTRACT, bs, instantiations=abstract[aname],
                            grouping=grouping)
        elif aname in decompose:
            if grouping is not None:
                raise DomainSchemaError(f"{where}.grouping", "only abstract actions take a grouping")
            act = ActionDef(aname, ActionKind.DECOMPOSABLE, bs, subplan=decompose[aname])
        else:
            if grouping is not None:
                raise DomainSchemaError(f"{where}.grouping", "only abstract actions take a grouping")
            if not bs:
                raise DomainSchemaError(f"{where}.branches", "primitive actions need branches")
            act = ActionDef(aname, ActionKind.PRIMITIVE, bs)
        actions[aname] = act

    for a in actions.values():
        for ref in a.referenced_actions():
            if ref not in actions:
                raise DomainReferenceError(ref, f"network entry for {a.name}")

    root = network.get("root")
    if not isinstance(root, str):
        raise DomainSchemaError("network.root", "missing or not a name")
    if root not in actions:
        raise DomainReferenceError(root, "network.root")

    init_vals = {a.name: a.default for a in attrs}
    for k, v in _mapping(doc, "initial").items():
        if k not in attr_names:
            raise DomainReferenceError(str(k), "initial")
        init_vals[k] = _real(v, f"initial.{k}")

    util = _mapping(doc, "utility", required=True)
    extra = set(util) - {"k_r", "ug", "ur"}
    if extra:
        raise DomainSchemaError(f"utility.{sorted(extra)[0]}", "unknown field")

    def guarded(key):
        v = util.get(key)
        if v is None:
            return ((TRUE, AffineExpr()),)
        if not isinstance(v, list) or not v:
            raise DomainSchemaError(f"utility.{key}", "expected a non-empty list")
        out = []
        for i, g in enumerate(v):
            gw = f"utility.{key}[{i}]"
            if not isinstance(g, dict) or "value" not in g:
                raise DomainSchemaError(gw, "expected {when: ..., value: ...}")
            extra = set(g) - {"when", "value"}
            if extra:
                raise DomainSchemaError(f"{gw}.{sorted(extra)[0]}", "unknown field")
            out.append((cond(g.get("when", True), f"{gw}.when"), expr(g["value"], f"{gw}.value")))
        return tuple(out)

    utility = UtilityModel(guarded("ug"), guarded("ur"), _real(util.get("k_r", 1.0), "utility.k_r"))

    priorities = {}
    for k, v in _mapping(doc, "priorities").items():
        if k not in actions:
            raise DomainReferenceError(str(k), "priorities")
        if isinstance(v, bool) or not isinstance(v, int):
            raise DomainSchemaError(f"priorities.{k}", "expected an integer")
        priorities[k] = v

    deltas = {}
    for k, v in _mapping(doc, "deltas").items():
        if k not in actions:
            raise DomainReferenceError(str(k), "deltas")
        if not isinstance(v, dict) or set(v) - {"ug", "ur"}:
            raise DomainSchemaError(f"deltas.{k}", "expected {ug: x, ur: y}")
        deltas[k] = {kk: _real(vv, f"deltas.{k}.{kk}") for kk, vv in v.items()}

    return Domain(name, tuple(attrs), actions, root, WorldState(init_vals), utility,
                  priorities, params, deltas)


def _grouping(v, where):
    if not isinstance(v, list):
        raise DomainSchemaError(where, "expected a list of groups")
    out = []
    for g in v:
        if not isinstance(g, list):
            raise DomainSchemaError(where, f"each group is a list of [action, branch] pairs{_line(g)}")
        pairs = []
        for p in g:
            if (not isinstance(p, list) or len(p) != 2
                    or not all(isinstance(x, int) and not isinstance(x, bool) for x in p)):
                raise DomainSchemaError(where, f"bad [action, branch] pair {p!r}")
            pairs.append((p[0], p[1]))
        out.append(tuple(pairs))
    return tuple(out)


def load_domain(path: str | Path) -> Domain:
    """Load a domain from a file path or a bundled domain name."""
    p = Path(path)
    if not p.exists() and str(path) in bundled_names():
        return load_bundled(str(path))
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_domain(data)


def bundled_names() -> list[str]:
    files = resources.files("dtplan") / "data"
    return sorted(f.name[:-5] for f in files.iterdir() if f.name.endswith(".yaml"))


def bundled_text(name: str) -> str:
    return (resources.files("dtplan") / "data" / f"{name}.yaml").read_text(encoding="utf-8")


def load_bundled(name: str) -> Domain:
    return parse_domain(bundled_text(name))


# ----------------------------------------------------------------- serialize


def _num(x: float):
    return int(x) if float(x).is_integer() and abs(x) < 1e15 else float(x)


def _branch_doc(b: Branch) -> dict:
    out: dict[str, Any] = {}
    if b.condition != TRUE:
        out["when"] = format_condition(b.condition)
    out["prob"] = _num(b.prob.lo) if b.prob.is_point() else [_num(b.prob.lo), _num(b.prob.hi)]
    if b.effect.assignments:
        out["effects"] = {a: _expr_doc(e) for a, e in b.effect.assignments}
    return out


def _expr_doc(e: AffineExpr):
    if e.is_constant() and e.constant.is_point():
        return _num(e.constant.lo)
    return format_expr(e)


def domain_to_dict(d: Domain) -> dict:
    doc: dict[str, Any] = {"domain": d.name}
    attrs = {}
    for a in d.attributes:
        spec: dict[str, Any] = {"kind": a.kind, "default": _num(a.default)}
        if a.bounds is not None:
            spec["range"] = [_num(a.bounds.lo), _num(a.bounds.hi)]
        attrs[a.name] = spec
    doc["attributes"] = attrs
    if d.parameters:
        doc["parameters"] = {k: _num(v) for k, v in d.parameters.items()}
    actions = {}
    for a in d.actions.values():
        spec = {}
        if a.branches:
            spec["branches"] = [_branch_doc(b) for b in a.branches]
        if a.grouping is not None:
            spec["grouping"] = [[list(p) for p in g] for g in a.grouping]
        if spec or a.is_primitive:
            actions[a.name] = spec
    doc["actions"] = actions
    net: dict[str, Any] = {"root": d.root}
    abstract = {a.name: list(a.instantiations) for a in d.actions.values()
                if a.kind is ActionKind.ABSTRACT}
    decompose = {a.name: list(a.subplan) for a in d.actions.values()
                 if a.kind is ActionKind.DECOMPOSABLE}
    if abstract:
        net["abstract"] = abstract
    if decompose:
        net["decompose"] = decompose
    doc["network"] = net
    doc["initial"] = {k: _num(v.lo) for k, v in d.initial.items()}
    u = d.utility
    doc["utility"] = {
        "k_r": _num(u.k_r),
        "ug": [{"when": format_condition(c), "value": _expr_doc(e)} for c, e in u.ug],
        "ur": [{"when": format_condition(c), "value": _expr_doc(e)} for c, e in u.ur],
    }
    if d.priorities:
        doc["priorities"] = dict(d.priorities)
    if d.deltas:
        doc["deltas"] = {k: {kk: _num(vv) for kk, vv in v.items()} for k, v in d.deltas.items()}
    return doc


def serialize_domain(d: Domain) -> str:
    return yaml.safe_dump(domain_to_dict(d), sort_keys=False, default_flow_style=None,
                          allow_unicode=True, width=100)


# ----------------------------------------------------------------- validation


@dataclass(frozen=True)
class Issue:
    code: str
    where: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.where}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, code, where, message):
        self.issues.append(Issue(code, where, message))

    def __bool__(self):
        return bool(self.issues)

    def __str__(self):
        if not self.issues:
            return "domain is valid"
        return "\n".join(map(str, self.issues))


def corner_points(d: Domain, attrs: Iterable[str], conditions: Iterable[Condition],
                  limit: int = 200_000) -> list[dict[str, float]]:
    """Concrete points covering every region cut out by the conditions' atoms.

    Booleans take {0, 1}; numeric attributes take their declared bounds, every
    threshold, midpoints between thresholds and one point beyond each end.
    """
    conditions = list(conditions)
    candidates = {}
    for name in sorted(set(attrs)):
        decl = d.attribute(name)
        if decl.is_boolean:
            candidates[name] = [0.0, 1.0]
            continue
        ts = [a.threshold for c in conditions for a in c.atoms if a.attr == name]
        if decl.bounds is not None:
            ts += [decl.bounds.lo, decl.bounds.hi]
        pts = region_points(ts)
        if decl.bounds is not None:
            pts = [p for p in pts if decl.bounds.lo <= p <= decl.bounds.hi]
        candidates[name] = pts
    names = list(candidates)
    total = math.prod(len(v) for v in candidates.values())
    if total > limit:
        raise DomainError(f"too many corner points to check ({total})")
    return [dict(zip(names, combo)) for combo in itertools.product(*candidates.values())]


def _check_partition(report, d, where, cells: list[Condition]):
    """Cells must be pairwise exclusive and jointly exhaustive at every corner point."""
    attrs = set().union(*(c.attributes() for c in cells)) if cells else set()
    try:
        points = corner_points(d, attrs, cells)
    except DomainError as exc:
        report.add("partition", where, str(exc))
        return
    for pt in points:
        holding = [i for i, c in enumerate(cells) if c.holds(pt)]
        if len(holding) == 0:
            report.add("exhaustive", where, f"no condition holds at {pt}")
            return
        if len(holding) > 1:
            shown = ", ".join(str(cells[i]) for i in holding)
            report.add("exclusive", where, f"conditions overlap at {pt}: {shown}")
            return


def find_cycle(d: Domain) -> list[str] | None:
    colour: dict[str, int] = {}
    stack: list[str] = []

    def visit(n):
        colour[n] = 1
        stack.append(n)
        for m in d.actions[n].referenced_actions():
            if m not in d.actions:
                continue
            if colour.get(m) == 1:
                return stack[stack.index(m):] + [m]
            if colour.get(m) is None:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        colour[n] = 2
        return None

    for n in d.actions:
        if n not in colour:
            found = visit(n)
            if found:
                return found
    return None


def check_grouping(sizes: list[int], grouping) -> list[str]:
    """Problems with a branch grouping over actions with ``sizes`` branches each."""
    problems = []
    seen = set()
    for gi, g in enumerate(grouping):
        if not g:
            problems.append(f"group {gi} is empty")
        acts = [a for a, _ in g]
        if len(acts) != len(set(acts)):
            problems.append(f"group {gi} holds two branches of one action")
        for a, b in g:
            if not (0 <= a < len(sizes)) or not (0 <= b < sizes[a]):
                problems.append(f"group {gi} names missing branch ({a}, {b})")
            elif (a, b) in seen:
                problems.append(f"branch ({a}, {b}) appears in two groups")
            seen.add((a, b))
    for a, n in enumerate(sizes):
        for b in range(n):
            if (a, b) not in seen:
                problems.append(f"branch ({a}, {b}) is in no group")
    return problems


def validate_domain(d: Domain) -> ValidationReport:
    report = ValidationReport()
    names = [a.name for a in d.attributes]
    for n in sorted({n for n in names if names.count(n) > 1}):
        report.add("duplicate", f"attributes.{n}", "attribute declared more than once")
    attr_set = set(names)
    known = attr_set | set(d.parameters)

    if d.root not in d.actions:
        report.add("reference", "network.root", f"root {d.root!r} is not an action")
    for a in d.actions.values():
        for ref in a.referenced_actions():
            if ref not in d.actions:
                report.add("reference", f"network.{a.name}", f"unknown action {ref!r}")
    cycle = find_cycle(d)
    if cycle:
        report.add("cycle", "network", "cycle " + " -> ".join(cycle))

    for name in attr_set:
        if name not in d.initial:
            report.add("initial", f"initial.{name}", "attribute has no initial value")
    for name, v in d.initial.items():
        if name not in attr_set:
            report.add("reference", f"initial.{name}", "unknown attribute")
            continue
        if not v.is_point():
            report.add("initial", f"initial.{name}", "initial state must be concrete")
        if d.attribute(name).is_boolean and v.lo not in (0.0, 1.0):
            report.add("boolean", f"initial.{name}", f"boolean attribute set to {v.lo}")

    for a in d.actions.values():
        where = f"actions.{a.name}"
        if a.kind is ActionKind.ABSTRACT and len(a.instantiations) < 2:
            report.add("network", where, "abstract action needs at least 2 instantiations")
        if a.kind is ActionKind.DECOMPOSABLE and len(a.subplan) < 2:
            report.add("network", where, "decomposable action needs at least 2 subplan steps")
        if a.kind is ActionKind.ABSTRACT and a.grouping is not None:
            if all(i in d.actions for i in a.instantiations):
                sizes = [len(d.actions[i].branches) for i in a.instantiations]
                for p in check_grouping(sizes, a.grouping):
                    report.add("grouping", where, p)
        for bi, b in enumerate(a.branches):
            bw = f"{where}.branches[{bi}]"
            for n in b.condition.attributes():
                if n not in attr_set:
                    report.add("reference", bw, f"unknown attribute {n!r} in condition")
            for target, rhs in b.effect.assignments:
                if target not in attr_set:
                    report.add("reference", bw, f"unknown attribute {target!r} assigned")
                    continue
                for n in rhs.names():
                    if n not in known:
                        report.add("reference", bw, f"unknown name {n!r} in effect")
                if a.is_primitive and d.attribute(target).is_boolean and not _boolean_rhs(d, rhs):
                    report.add("boolean", bw, f"boolean {target!r} may leave {{0, 1}}")
        if not a.is_primitive:
            continue
        if not a.branches:
            report.add("branches", where, "primitive action has no branches")
            continue
        for bi, b in enumerate(a.branches):
            if not b.prob.is_point():
                report.add("probability", f"{where}.branches[{bi}]",
                           "primitive branch probabilities must be points")
        cells: dict[Condition, float] = {}
        for b in a.branches:
            cells[b.condition] = cells.get(b.condition, 0.0) + b.prob.lo
        for c, total in cells.items():
            if abs(total - 1.0) > PROB_TOL:
                report.add("probability", where,
                           f"probabilities sum to {total:.12g} under condition {c}")
        if all(n in attr_set for c in cells for n in c.attributes()):
            _check_partition(report, d, where, list(cells))

    u = d.utility
    if u.k_r < 0:
        report.add("utility", "utility.k_r", "k_r must be non-negative")
    for key, guards in (("ug", u.ug), ("ur", u.ur)):
        conds = []
        for gi, (c, e) in enumerate(guards):
            for n in c.attributes():
                if n not in attr_set:
                    report.add("reference", f"utility.{key}[{gi}]", f"unknown attribute {n!r}")
            for n in e.names():
                if n not in known:
                    report.add("reference", f"utility.{key}[{gi}]", f"unknown name {n!r}")
            conds.append(c)
        if all(n in attr_set for c in conds for n in c.attributes()):
            _check_partition(report, d, f"utility.{key}", conds)

    for k, v in d.priorities.items():
        if k not in d.actions:
            report.add("reference", f"priorities.{k}", "unknown action")
    return report


def _boolean_rhs(d: Domain, e: AffineExpr) -> bool:
    if e.is_constant():
        return e.constant.is_point() and e.constant.lo in (0.0, 1.0)
    if e.constant == ZERO and len(e.terms) == 1:
        coef, name = e.terms[0]
        return coef == ONE and name in d.initial and d.attribute(name).is_boolean
    return False
