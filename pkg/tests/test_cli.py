import csv
import subprocess
import sys
import textwrap

import pytest
import yaml

from dtplan.baselines import count_plans
from dtplan.cli import CSV_COLUMNS, main
from dtplan.domain_io import load_domain

BAD_PROB = """
attributes: {x: {kind: boolean}}
actions:
  A:
    branches:
      - {when: [x = 0], prob: 0.8, effects: {x: 1}}
      - {when: [x = 0], prob: 0.1}
      - {when: [x = 1], prob: 1}
network: {root: A}
utility: {ug: [{when: true, value: x}]}
"""

CYCLE = """
attributes: {x: {kind: boolean}}
actions:
  P: {branches: [{prob: 1}]}
network:
  root: A
  decompose: {A: [P, A]}
utility: {ug: [{when: true, value: x}]}
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def strip_wall(doc):
    doc = dict(doc)
    doc["stats"] = {k: v for k, v in doc["stats"].items() if k != "wall_ms"}
    return doc


def test_plan_with_parameter_override(tmp_path):
    out = tmp_path / "r.yaml"
    code = main(["plan", "dvt-like", "--strategy", "priority",
                 "--param", "COST_FATALITY=500000", "--out", str(out)])
    assert code == 0
    doc = yaml.safe_load(out.read_text())
    assert list(doc) == ["config", "plans", "stats"]
    assert doc["config"]["params"] == {"COST_FATALITY": 500000}
    assert doc["plans"] and all({"steps", "eu_lo", "eu_hi"} <= set(p) for p in doc["plans"])
    for key in ("plans_evaluated", "expansions", "peak_states", "wall_ms"):
        assert key in doc["stats"]
    assert doc["stats"]["complete"] is True


def test_plan_missing_file(capsys):
    assert main(["plan", "missing-file"]) == 1
    assert "missing-file" in capsys.readouterr().err


def test_plan_zero_budget(capsys):
    assert main(["plan", "tomato", "--budget-expansions", "0"]) == 0
    doc = yaml.safe_load(capsys.readouterr().out)
    assert [p["steps"] for p in doc["plans"]] == [["Deliver-tomato"]]
    assert doc["plans"][0]["eu_lo"] <= doc["plans"][0]["eu_hi"]


def test_plan_is_deterministic(capsys):
    docs = []
    for _ in range(2):
        assert main(["plan", "dvt-small", "--strategy", "sensitivity"]) == 0
        docs.append(strip_wall(yaml.safe_load(capsys.readouterr().out)))
    assert docs[0] == docs[1]


@pytest.mark.parametrize("argv", [
    ["plan", "tomato", "--param", "oops"],
    ["plan", "tomato", "--param", "NOPE=3"],
    ["plan", "tomato", "--strategy", "random"],
    ["plan", "tomato", "--budget-expansions", "-1"],
    ["bench", "tomato", "--sweep", "X=1:2"],
    ["bench", "tomato", "--strategies", "first,bogus"],
    [],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_bench_row_arithmetic_small(tmp_path):
    out = tmp_path / "b.csv"
    code = main(["bench", "dvt-small", "--sweep", "COST_FATALITY=50000:500000:3",
                 "--algo", "both", "--csv", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 3 * (3 + 1)
    by_value = {}
    for r in rows:
        by_value.setdefault(r["param_value"], set()).add(float(r["optimal_eu"]))
    for eus in by_value.values():
        assert max(eus) - min(eus) <= 1e-9


def test_bench_small_domain_evaluation_counts(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "dvt-small", "--algo", "drips", "--csv", str(out)]) == 0
    rows = read_csv(out)
    assert {r["strategy"] for r in rows} == {"first", "priority", "sensitivity"}
    for r in rows:
        assert 10 <= int(r["plans_evaluated"]) <= 40


@pytest.mark.slow
def test_bench_dvt_like_sweep_rows(tmp_path):
    out = tmp_path / "b.csv"
    code = main(["bench", "dvt-like", "--strategies", "priority,sensitivity",
                 "--sweep", "COST_FATALITY=50000:500000:10", "--algo", "both", "--csv", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 10 * (2 + 1)
    values = sorted({float(r["param_value"]) for r in rows})
    assert values[0] == 50000 and values[-1] == 500000 and len(values) == 10
    for v in values:
        eus = [float(r["optimal_eu"]) for r in rows if float(r["param_value"]) == v]
        assert max(eus) - min(eus) <= 1e-9


def test_bench_invalid_file_writes_nothing(tmp_path):
    bad = write(tmp_path, "bad.yaml", BAD_PROB)
    out = tmp_path / "b.csv"
    assert main(["bench", bad, "--csv", str(out)]) == 1
    assert not out.exists()


def test_bench_csv_deterministic_apart_from_time(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"b{i}.csv"
        assert main(["bench", "dvt-small", "--algo", "both", "--csv", str(out)]) == 0
        outs.append([{k: v for k, v in r.items() if k != "wall_ms"} for r in read_csv(out)])
    assert outs[0] == outs[1]


def test_gen_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.yaml", tmp_path / "b.yaml"
    for p in (a, b):
        assert main(["gen", "--seed", "7", "--plans-target", "100", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert 80 <= count_plans(load_domain(a)) <= 120
    assert main(["validate", str(a)]) == 0


def test_gen_depth_zero(capsys):
    assert main(["gen", "--seed", "1", "--depth", "0"]) == 2


def test_validate_reports(tmp_path, capsys):
    assert main(["validate", "tomato"]) == 0
    assert "valid" in capsys.readouterr().out
    assert main(["validate", write(tmp_path, "p.yaml", BAD_PROB)]) == 1
    assert "sum to 0.9" in capsys.readouterr().out
    assert main(["validate", write(tmp_path, "c.yaml", CYCLE)]) == 1
    assert "cycle" in capsys.readouterr().out


def test_enumerate_lists_optimal(capsys):
    assert main(["enumerate", "test-pair"]) == 0
    doc = yaml.safe_load(capsys.readouterr().out)
    assert doc["n_plans"] == 2 and len(doc["plans"]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dtplan.cli", "validate", "tomato"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "valid" in proc.stdout
