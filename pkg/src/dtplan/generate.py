"""Domain generators: seeded random domains for property tests, and the
synthetic DVT-style test/treat family used by the benchmarks.

Everything here is synthetic.  The DVT-style builder follows the network
shape of a test/treat management problem (a top-level abstraction over six
strategies, each a sequence of tests, waiting periods and a conditional
treatment) but its probabilities and costs are invented.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np
import yaml

from .domain_io import parse_domain
from .model import Domain


_Dumper = getattr(yaml, "CSafeDumper", yaml.SafeDumper)  # libyaml when available


def _dump(doc: dict) -> str:
    return yaml.dump(doc, Dumper=_Dumper, sort_keys=False, default_flow_style=None, width=100)


# ----------------------------------------------------------------- random domains


class _RandomBuilder:
    def __init__(self, seed: int, depth: int, branching: int, plans_target: int):
        self.rng = np.random.default_rng(seed)
        self.seed = seed
        self.depth = depth
        self.branching = branching
        self.target = plans_target
        self.flags = [f"f{i}" for i in range(3)]
        self.actions: dict[str, Any] = {}
        self.abstract: dict[str, list[str]] = {}
        self.decompose: dict[str, list[str]] = {}
        self.counter = 0

    def name(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def probs(self, k: int) -> list[float]:
        if k == 1:
            return [1]
        w = self.rng.dirichlet(np.ones(k))
        units = np.maximum(1, np.round(w * 20)).astype(int)
        while units.sum() > 20:
            units[int(np.argmax(units))] -= 1
        while units.sum() < 20:
            units[int(np.argmin(units))] += 1
        return [int(u) * 5 / 100 for u in units]

    def primitive(self, last: bool) -> str:
        rng = self.rng
        name = self.name("p")
        c = int(rng.integers(len(self.flags) + 1))
        cells = [None] if c == len(self.flags) else [[f"{self.flags[c]} = 1"], [f"{self.flags[c]} = 0"]]
        branches = []
        for cell in cells:
            k = int(rng.choice([1, 2, 2, 3]))
            for p in self.probs(k):
                eff: dict[str, Any] = {"cost": f"cost + {int(rng.integers(1, 40))}"}
                if rng.random() < 0.6:
                    eff[self.flags[int(rng.integers(len(self.flags)))]] = int(rng.integers(2))
                if rng.random() < (0.5 if last else 0.2):
                    eff["goal"] = int(rng.random() < 0.8)
                b: dict[str, Any] = {}
                if cell is not None:
                    b["when"] = cell
                b["prob"] = p
                b["effects"] = eff
                branches.append(b)
        self.actions[name] = {"branches": branches}
        return name

    def slot(self, n: int, last: bool) -> str:
        """An action whose language holds exactly ``n`` concrete sequences."""
        rng = self.rng
        if n == 1:
            if rng.random() < 0.15:
                name = self.name("d")
                self.decompose[name] = [self.primitive(False), self.primitive(last)]
                return name
            return self.primitive(last)
        factors = [a for a in range(2, int(math.isqrt(n)) + 1) if n % a == 0]
        if factors and n > self.branching and rng.random() < 0.3:
            a = int(rng.choice(factors))
            name = self.name("d")
            self.decompose[name] = [self.slot(a, False), self.slot(n // a, last)]
            return name
        k = min(n, self.branching)
        sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
        name = self.name("a")
        self.abstract[name] = [self.slot(s, last) for s in sizes]
        return name

    def slot_sizes(self) -> list[int]:
        m = self.depth + 1
        t = self.target
        for _ in range(500):
            w = self.rng.dirichlet(np.ones(m))
            sizes = [max(1, int(round(t ** wi))) for wi in w[:-1]]
            rest = max(1, int(round(t / math.prod(sizes))))
            sizes.append(rest)
            if abs(math.prod(sizes) - t) <= 0.1 * t:
                return sizes
        return [t] + [1] * (m - 1)

    def build(self) -> dict:
        sizes = self.slot_sizes()
        steps = [self.slot(n, i == len(sizes) - 1) for i, n in enumerate(sizes)]
        root = "root"
        self.decompose[root] = steps
        goal_value = int(self.rng.integers(40, 160))
        attrs: dict[str, Any] = {f: {"kind": "boolean", "default": 0} for f in self.flags}
        attrs["goal"] = {"kind": "boolean", "default": 0}
        attrs["cost"] = {"kind": "numeric", "default": 0, "range": [0, 100000]}
        return {
            "domain": f"random-{self.seed}",
            "attributes": attrs,
            "actions": self.actions,
            "network": {"root": root, "abstract": self.abstract, "decompose": self.decompose},
            "initial": {a: 0 for a in attrs},
            "utility": {
                "k_r": 1,
                "ug": [{"when": ["goal = 1"], "value": goal_value}, {"when": ["goal = 0"], "value": 0}],
                "ur": [{"when": True, "value": "-cost"}],
            },
        }


def random_domain_text(seed: int, depth: int = 2, branching: int = 3,
                       plans_target: int = 100) -> str:
    """Deterministic domain file for ``seed`` with about ``plans_target`` concrete plans."""
    if depth < 1 or branching < 2 or plans_target < 1:
        raise ValueError("depth >= 1, branching >= 2 and plans_target >= 1 are required")
    return _dump(_RandomBuilder(seed, depth, branching, plans_target).build())


def random_domain(seed: int, depth: int = 2, branching: int = 3, plans_target: int = 100) -> Domain:
    return parse_domain(random_domain_text(seed, depth, branching, plans_target))


def suite_target(seed: int) -> int:
    """Plan-count target used by the seeded test suite: spreads 50..500 over seeds 1..200."""
    return 50 + ((seed - 1) * 450) // 199


# ----------------------------------------------------------------- DVT-style family

TREATMENTS = {
    # name: (condition that triggers treatment, or None for always / "never")
    "Treat_if_Pos": ["npos > 0"],
    "Treat_if_Veno+": ["vpos = 1"],
    "Treat_if_Npos2": ["npos >= 2"],
    "Treat_if_Npos3": ["npos >= 3"],
    "Treat_if_Veno+_or_Npos2": {"any": [["vpos = 1"], ["npos >= 2"]]},
    "Treat_All": True,
    "Treat_None": False,
    "Treat_if_Neg": ["npos <= 0"],
}
_NEGATION = {
    "Treat_if_Pos": ["npos <= 0"],
    "Treat_if_Veno+": ["vpos = 0"],
    "Treat_if_Npos2": ["npos < 2"],
    "Treat_if_Npos3": ["npos < 3"],
    "Treat_if_Veno+_or_Npos2": ["vpos = 0", "npos < 2"],
    "Treat_if_Neg": ["npos > 0"],
}
TREAT_ORDER = list(TREATMENTS)

# Synthetic clinical numbers.  Tests are (cost, P(positive | dvt), P(positive | no dvt)).
DVT_NUMBERS = {
    "prevalence": 0.35,
    "tests": {"IPG": (150, 0.85, 0.08), "RUS": (300, 0.95, 0.04), "Veno": (1500, 0.98, 0.02)},
    "exam_cost": 50,
    # waits are (cost, P(untreated clot resolves), P(fatal embolism)) over the period
    "waits": {"3d": (150, 0.1, 0.04), "7d": (300, 0.2, 0.08), "14d": (500, 0.35, 0.14)},
    "treat_cost": 3000,
    "death_dvt_treated": 0.02,
    "death_dvt_untreated": 0.15,
    "death_bleed": 0.006,
}

DVT_SIZES = {
    # name: (max tests, wait periods, treatment options for Veno_Tests, NIT_Tests, Two, Three, Four)
    "dvt-small": (2, ("7d",), 2, 2, 2, 0, 0),
    "dvt-250": (4, ("7d",), 4, 4, 2, 2, 4),
    "dvt-1k": (4, ("3d", "7d"), 4, 4, 2, 2, 2),
    "dvt-3k": (4, ("3d", "7d", "14d"), 4, 4, 2, 2, 2),
    "dvt-like": (4, ("3d", "7d", "14d"), 4, 4, 2, 2, 4),
}


def _test_action(name: str, conditional: bool, nums: dict) -> dict:
    cost, sens, fpr = nums["tests"][name.split("_")[0]]
    veno = name.startswith("Veno")
    guard = ["npos <= 0"] if conditional else []
    branches = []
    for dvt, p_pos in ((1, sens), (0, fpr)):
        when = [f"dvt = {dvt}"] + guard
        pos_eff = {"npos": "npos + 1", "cost": f"cost + {cost}"}
        if veno:
            pos_eff["vpos"] = 1
        p_pos = round(p_pos, 4)
        branches.append({"when": when, "prob": p_pos, "effects": pos_eff})
        branches.append({"when": when, "prob": round(1 - p_pos, 4), "effects": {"cost": f"cost + {cost}"}})
    if conditional:
        branches.append({"when": ["npos > 0"], "prob": 1})
    return {"branches": branches}


def _wait_action(period: str, nums: dict) -> dict:
    """Wait before re-testing; only patients with no positive result so far wait."""
    c, r, pe = nums["waits"][period]
    guard = ["npos <= 0"]
    cost = f"cost + {_num(c)}"
    return {"branches": [
        {"when": ["dvt = 1"] + guard, "prob": r, "effects": {"dvt": 0, "cost": cost}},
        {"when": ["dvt = 1"] + guard, "prob": pe, "effects": {"dead": 1, "cost": cost}},
        {"when": ["dvt = 1"] + guard, "prob": round(1 - r - pe, 6), "effects": {"cost": cost}},
        {"when": ["dvt = 0"] + guard, "prob": 1, "effects": {"cost": cost}},
        {"when": ["npos > 0"], "prob": 1},
    ]}


def _treat_action(name: str) -> dict:
    cond = TREATMENTS[name]
    treat = {"treated": 1, "cost": "cost + TREAT_COST"}
    if cond is True:
        return {"branches": [{"prob": 1, "effects": treat}]}
    if cond is False:
        return {"branches": [{"prob": 1}]}
    return {"branches": [{"when": cond, "prob": 1, "effects": treat},
                         {"when": _NEGATION[name], "prob": 1}]}


def dvt_like_doc(max_tests: int = 4, waits=("3d", "7d", "14d"), n_veno: int = 4, n_nit: int = 4,
                 n_two: int = 2, n_three: int = 2, n_four: int = 4, name: str = "dvt-like",
                 numbers: dict | None = None) -> dict:
    nums = {**DVT_NUMBERS, **(numbers or {})}
    actions: dict[str, Any] = {}
    abstract: dict[str, list[str]] = {}
    decompose: dict[str, list[str]] = {}
    prev = nums["prevalence"]
    actions["Onset"] = {"branches": [{"prob": prev, "effects": {"dvt": 1}},
                                     {"prob": round(1 - prev, 6), "effects": {"dvt": 0}}]}
    actions["Clinical_Exam"] = {"branches": [
        {"prob": 1, "effects": {"cost": f"cost + {_num(nums['exam_cost'])}"}}]}
    for t in ("IPG", "RUS", "Veno"):
        actions[t] = _test_action(t, False, nums)
        actions[f"{t}_if_NIT-"] = _test_action(f"{t}_if_NIT-", True, nums)
    for period in waits:
        actions[f"Wait_{period}_if_NIT-"] = _wait_action(period, nums)
    for t in TREAT_ORDER:
        actions[t] = _treat_action(t)
    outcome = [{"when": ["dead = 1"], "prob": 1}]
    for cell, key in ((["dvt = 1", "treated = 1"], "death_dvt_treated"),
                      (["dvt = 1", "treated = 0"], "death_dvt_untreated"),
                      (["dvt = 0", "treated = 1"], "death_bleed")):
        p = nums[key]
        outcome.append({"when": ["dead = 0"] + cell, "prob": p, "effects": {"dead": 1}})
        outcome.append({"when": ["dead = 0"] + cell, "prob": round(1 - p, 6)})
    outcome.append({"when": ["dead = 0", "dvt = 0", "treated = 0"], "prob": 1})
    actions["Outcome"] = {"branches": outcome}

    abstract["NIT"] = ["IPG", "RUS"]
    abstract["NIT_if_NIT-"] = ["IPG_if_NIT-", "RUS_if_NIT-"]
    abstract["Next_Test"] = ["NIT_if_NIT-", "Veno_if_NIT-"]
    wait = f"Wait_{waits[0]}_if_NIT-"
    if len(waits) > 1:
        wait = "Wait"
        abstract["Wait"] = [f"Wait_{period}_if_NIT-" for period in waits]
    abstract["Treat_Uncond"] = ["Treat_All", "Treat_None"]

    strategies = []
    decompose["No_Tests_and_Treat"] = ["Clinical_Exam", "Treat_Uncond"]
    strategies.append("No_Tests_and_Treat")

    def treat_slot(label, n):
        if n == 1:
            return TREAT_ORDER[0]
        abstract[label] = TREAT_ORDER[:n]
        return label

    if n_veno:
        decompose["Veno_Tests"] = ["Veno", treat_slot("Treat_Veno", n_veno)]
        strategies.append("Veno_Tests")
    if n_nit:
        decompose["NIT_Tests"] = ["NIT", treat_slot("Treat_NIT", n_nit)]
        strategies.append("NIT_Tests")
    for k, label, n in ((2, "Two", n_two), (3, "Three", n_three), (4, "Four", n_four)):
        if max_tests < k or n == 0:
            continue
        steps = ["NIT"]
        for _ in range(k - 1):
            steps += [wait, "Next_Test"]
        steps.append(treat_slot(f"Treat_{label}", n))
        decompose[f"{label}_Tests"] = steps
        strategies.append(f"{label}_Tests")
    abstract["Manage_DVT"] = strategies
    decompose["Patient"] = ["Onset", "Manage_DVT", "Outcome"]

    doc = {
        "domain": name,
        "attributes": {
            "dvt": {"kind": "boolean", "default": 0},
            "npos": {"kind": "numeric", "default": 0, "range": [0, 4]},
            "vpos": {"kind": "boolean", "default": 0},
            "treated": {"kind": "boolean", "default": 0},
            "dead": {"kind": "boolean", "default": 0},
            "cost": {"kind": "numeric", "default": 0, "range": [0, 100000]},
        },
        "parameters": {"COST_FATALITY": 50000, "TREAT_COST": nums["treat_cost"]},
        "actions": actions,
        "network": {"root": "Patient", "abstract": abstract, "decompose": decompose},
        "initial": {"dvt": 0, "npos": 0, "vpos": 0, "treated": 0, "dead": 0, "cost": 0},
        "utility": {
            "k_r": 1,
            "ug": [{"when": True, "value": 0}],
            "ur": [{"when": ["dead = 1"], "value": "-(cost + COST_FATALITY)"},
                   {"when": ["dead = 0"], "value": "-cost"}],
        },
        "priorities": {"Manage_DVT": 10, "Next_Test": 6, "Wait": 4, "NIT": 2, "NIT_if_NIT-": 1},
    }
    for label in ("Treat_Uncond", "Treat_Veno", "Treat_NIT", "Treat_Two", "Treat_Three", "Treat_Four"):
        if label in abstract:
            doc["priorities"][label] = 8
    doc["priorities"] = {k: v for k, v in doc["priorities"].items() if k in abstract}
    _add_summaries(doc, strategies)
    return doc


def _cost_bounds(doc: dict, name: str, params: dict) -> tuple[float, float]:
    """Static [min, max] of the cost increment along any path of ``name``."""
    net = doc["network"]
    if name in net["abstract"]:
        bs = [_cost_bounds(doc, i, params) for i in net["abstract"][name]]
        return min(b[0] for b in bs), max(b[1] for b in bs)
    if name in net["decompose"]:
        bs = [_cost_bounds(doc, s, params) for s in net["decompose"][name]]
        return sum(b[0] for b in bs), sum(b[1] for b in bs)
    incs = []
    for b in doc["actions"][name]["branches"]:
        rhs = (b.get("effects") or {}).get("cost")
        if rhs is None:
            incs.append(0.0)
            continue
        term = rhs.replace(" ", "").split("+", 1)[1]
        incs.append(float(params.get(term, term)))
    return min(incs), max(incs)


def _touches(doc: dict, name: str) -> set[str]:
    net = doc["network"]
    kids = net["abstract"].get(name) or net["decompose"].get(name)
    if kids:
        return set().union(*(_touches(doc, k) for k in kids))
    return {a for b in doc["actions"][name]["branches"] for a in (b.get("effects") or {})}


def _add_summaries(doc: dict, strategies: list[str]):
    """Hand-style summary descriptions for the strategy sequences.

    One branch per ``dvt`` cell with probability 1: booleans the strategy may
    change are widened to [0, 1], the positive-result counter grows by up to
    the number of tests and cost grows by its static range.  Sound for any
    pre-state, and far smaller than the full sequential abstraction.
    """
    params = doc["parameters"]
    for s in strategies:
        touched = _touches(doc, s)
        lo, hi = _cost_bounds(doc, s, params)
        n_tests = sum(1 for step in doc["network"]["decompose"][s]
                      if step in ("NIT", "Next_Test", "Veno"))
        branches = []
        for dvt in (1, 0):
            eff: dict[str, Any] = {}
            for attr in ("vpos", "treated", "dead"):
                if attr in touched:
                    eff[attr] = "[0, 1]"
            if "npos" in touched:
                eff["npos"] = f"npos + [0, {n_tests}]"
            if dvt == 1 and "dvt" in touched:
                eff["dvt"] = "[0, 1]"
            eff["cost"] = f"cost + [{_num(lo)}, {_num(hi)}]"
            branches.append({"when": [f"dvt = {dvt}"], "prob": 1, "effects": eff})
        doc["actions"][s] = {"branches": branches}


def _num(x: float):
    return int(x) if float(x).is_integer() else x


def dvt_like_text(size: str = "dvt-like", numbers: dict | None = None) -> str:
    if size not in DVT_SIZES:
        raise ValueError(f"unknown size {size!r}; choose from {', '.join(DVT_SIZES)}")
    doc = dvt_like_doc(*DVT_SIZES[size], name=size, numbers=numbers)
    return _dump(doc)


def dvt_like(size: str = "dvt-like", numbers: dict | None = None) -> Domain:
    return parse_domain(dvt_like_text(size, numbers))
