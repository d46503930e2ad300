"""Command-line entry point.

Subcommands::

    dtplan plan DOMAIN [--strategy S] [--param NAME=VALUE ...] [--budget-expansions N]
                       [--budget-ms MS] [--jobs J] [--out FILE]
    dtplan enumerate DOMAIN [--param NAME=VALUE ...] [--all] [--out FILE]
    dtplan bench DOMAIN... [--strategies a,b] [--sweep NAME=LO:HI:STEPS] [--algo drips|bb|both]
                           [--csv FILE]
    dtplan gen --seed N [--depth D] [--branching B] [--plans-target P] [--out FILE]
    dtplan validate DOMAIN

DOMAIN is a file path or the name of a bundled domain (``tomato``, ``dvt-like``, ...).
Exit status is 0 on success, 1 for domain errors and 2 for usage errors.

The result document written by ``plan`` is YAML with three top-level keys:
``config`` (domain, strategy, parameter overrides, budgets), ``plans`` (each with
``steps``, ``eu_lo``, ``eu_hi`` and ``primitive``) and ``stats`` (``plans_evaluated``,
``expansions``, ``peak_states``, ``pruned``, ``wall_ms``, ``complete``).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from .baselines import bb_decision_tree, enumerate_optimal
from .domain_io import load_domain, validate_domain
from .errors import DomainError, DomainReferenceError
from .generate import random_domain_text
from .model import Domain
from .planner import STRATEGIES, Budget, PlanResult, Strategy, drips_plan

log = logging.getLogger("dtplan")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

CSV_COLUMNS = ("domain", "algo", "strategy", "param", "param_value", "plans_evaluated",
               "expansions", "peak_states", "wall_ms", "optimal_eu", "n_optimal_plans")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ----------------------------------------------------------------- small helpers


def _number(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{what}: {text!r} is not a number") from None


def _num_out(x: float):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 1e15 else x


def parse_params(items: Sequence[str] | None) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--param expects NAME=VALUE, got {item!r}")
        out[name.strip()] = _number(value.strip(), f"--param {name.strip()}")
    return out


def parse_sweep(text: str | None) -> tuple[Optional[str], list[Optional[float]]]:
    """``NAME=LO:HI:STEPS`` to the parameter name and its evenly spaced values."""
    if not text:
        return None, [None]
    name, sep, span = text.partition("=")
    parts = span.split(":")
    if not sep or not name.strip() or len(parts) != 3:
        raise UsageError(f"--sweep expects NAME=LO:HI:STEPS, got {text!r}")
    lo = _number(parts[0], "--sweep lower end")
    hi = _number(parts[1], "--sweep upper end")
    try:
        steps = int(parts[2])
    except ValueError:
        raise UsageError(f"--sweep steps must be an integer, got {parts[2]!r}") from None
    if steps < 1:
        raise UsageError("--sweep steps must be at least 1")
    values = [lo] if steps == 1 else np.linspace(lo, hi, steps).tolist()
    return name.strip(), [_num_out(v) for v in values]


def _load(path: str, params: dict[str, float] | None = None) -> Domain:
    """Parse, validate and apply parameter overrides; raise DomainError on any problem."""
    d = load_domain(path)
    report = validate_domain(d)
    if not report.ok:
        raise DomainError(f"{path} is not a valid domain:\n{report}")
    if params:
        try:
            d = d.with_parameters(params)
        except DomainReferenceError as exc:
            raise UsageError(f"--param names an unknown parameter {exc.name!r}") from None
    return d


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _plan_docs(result: PlanResult) -> list[dict]:
    return [{"steps": list(p.steps), "eu_lo": float(p.lo), "eu_hi": float(p.hi),
             "primitive": bool(p.primitive)}
            for p in sorted(result.plans, key=lambda p: (-p.lo, -p.hi, p.steps))]


def _dump(doc) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


# ----------------------------------------------------------------- subcommands


def cmd_plan(args) -> int:
    params = parse_params(args.param)
    if args.budget_expansions is not None and args.budget_expansions < 0:
        raise UsageError("--budget-expansions must be non-negative")
    if args.budget_ms is not None and args.budget_ms < 0:
        raise UsageError("--budget-ms must be non-negative")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if not 0.0 < args.fraction <= 1.0:
        raise UsageError("--fraction must lie in (0, 1]")
    d = _load(args.domain, params)
    strategy = Strategy(args.strategy, fraction=args.fraction)
    budget = Budget(args.budget_expansions, args.budget_ms)
    result = drips_plan(d, strategy, budget, jobs=args.jobs)
    doc = {
        "config": {
            "domain": args.domain,
            "strategy": args.strategy,
            "params": {k: _num_out(v) for k, v in sorted(params.items())},
            "budget_expansions": args.budget_expansions,
            "budget_ms": args.budget_ms,
        },
        "plans": _plan_docs(result),
        "stats": result.stats.as_dict(),
    }
    _write(_dump(doc), args.out)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    d = _load(args.domain, parse_params(args.param))
    oracle = enumerate_optimal(d)
    doc = {
        "config": {"domain": args.domain,
                   "params": {k: _num_out(v) for k, v in sorted(parse_params(args.param).items())}},
        "n_plans": len(oracle.evaluated),
        "plans": _plan_docs(PlanResult(oracle.plans, oracle.stats)),
    }
    if args.all:
        doc["evaluated"] = _plan_docs(PlanResult(oracle.evaluated, oracle.stats))
    doc["stats"] = oracle.stats.as_dict()
    _write(_dump(doc), args.out)
    return EXIT_OK


def bench_rows(domains: Sequence[str], strategies: Sequence[str], sweep: str | None,
               algo: str) -> list[dict]:
    """Run the benchmark grid and return one dict per CSV row."""
    name, values = parse_sweep(sweep)
    bases = [(path, _load(path)) for path in domains]  # validate everything before running
    if name is not None:
        for path, d in bases:
            if name not in d.parameters:
                raise UsageError(f"--sweep names an unknown parameter {name!r} (domain {path})")
    rows = []
    for path, base in bases:
        for value in values:
            d = base if name is None else base.with_parameters({name: value})
            runs = []
            if algo in ("drips", "both"):
                runs += [("drips", s, drips_plan(d, Strategy(s))) for s in strategies]
            if algo in ("bb", "both"):
                runs.append(("bb", "-", bb_decision_tree(d)))
            for algo_name, strat, res in runs:
                best = res.optimal_eu
                rows.append({
                    "domain": path, "algo": algo_name, "strategy": strat,
                    "param": name or "", "param_value": "" if value is None else value,
                    "plans_evaluated": res.stats.plans_evaluated,
                    "expansions": res.stats.expansions,
                    "peak_states": res.stats.peak_states,
                    "wall_ms": round(res.stats.wall_ms, 3),
                    "optimal_eu": "" if best is None else repr(float(best.lo)),
                    "n_optimal_plans": len(res.plans),
                })
                log.info("%s %s %s %s=%s evaluated=%d", path, algo_name, strat, name, value,
                         res.stats.plans_evaluated)
    return rows


def cmd_bench(args) -> int:
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    bad = [s for s in strategies if s not in STRATEGIES]
    if bad or not strategies:
        raise UsageError(f"--strategies takes a comma list from {', '.join(STRATEGIES)}")
    rows = bench_rows(args.domains, strategies, args.sweep, args.algo)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            w.writerows(rows)
    else:
        w = csv.DictWriter(sys.stdout, fieldnames=CSV_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.depth < 1:
        raise UsageError("--depth must be at least 1")
    if args.branching < 2:
        raise UsageError("--branching must be at least 2")
    if args.plans_target < 1:
        raise UsageError("--plans-target must be at least 1")
    text = random_domain_text(args.seed, args.depth, args.branching, args.plans_target)
    _write(text, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    d = load_domain(args.domain)
    report = validate_domain(d)
    print(report)
    return EXIT_OK if report.ok else EXIT_DOMAIN


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dtplan", description="Decision-theoretic refinement planner.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("plan", help="find the EU-optimal plans of a domain")
    sp.add_argument("domain")
    sp.add_argument("--strategy", choices=STRATEGIES, default="priority")
    sp.add_argument("--fraction", type=float, default=1.0,
                    help="sensitivity strategy: fraction of chronicles analysed")
    sp.add_argument("--param", action="append", metavar="NAME=VALUE")
    sp.add_argument("--budget-expansions", type=int)
    sp.add_argument("--budget-ms", type=float)
    sp.add_argument("--jobs", type=int, default=1, help="cap on concurrent plan evaluations")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("enumerate", help="evaluate every concrete plan (the exhaustive oracle)")
    sp.add_argument("domain")
    sp.add_argument("--param", action="append", metavar="NAME=VALUE")
    sp.add_argument("--all", action="store_true", help="also list every evaluated plan")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("bench", help="benchmark planners, optionally over a parameter sweep")
    sp.add_argument("domains", nargs="+")
    sp.add_argument("--strategies", default=",".join(STRATEGIES))
    sp.add_argument("--sweep", metavar="NAME=LO:HI:STEPS")
    sp.add_argument("--algo", choices=("drips", "bb", "both"), default="drips")
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("gen", help="write a random domain")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--branching", type=int, default=3)
    sp.add_argument("--plans-target", type=int, default=100)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("validate", help="check a domain file and print its report")
    sp.add_argument("domain")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dtplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dtplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"dtplan: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
