import copy
import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from cmaxreg import cli
from cmaxreg import scenario as sc

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"


def scalar_scenario(**extra):
    data = {
        "schema_version": 1,
        "space": {"dim": 1},
        "generator": {"kind": "list", "params": {"values": [-1.0]}},
        "forcing": {"f": {"kind": "zero"}, "x0": {"unit": 1}},
        "horizon": 1.0,
        "tasks": ["solve", "sv"],
    }
    data.update(extra)
    return data


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_schema_file_is_current():
    assert json.loads((SCENARIOS / "scenario.schema.json").read_text()) == sc.SCHEMA


@pytest.mark.parametrize("mutate,needle", [
    (lambda d: d.update(tasks=[]), "$.tasks"),
    (lambda d: d["space"].update(dim=0), "$.space.dim"),
    (lambda d: d.update(horizon=-1), "$.horizon"),
    (lambda d: d.update(schema_version=2), "$.schema_version"),
    (lambda d: d.update(colour="red"), "colour"),
])
def test_schema_violations_name_the_field(mutate, needle):
    data = scalar_scenario()
    mutate(data)
    with pytest.raises(sc.ScenarioError) as exc:
        sc.validate(data)
    assert needle in str(exc.value)


def test_parse_errors_carry_line_numbers(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "schema_version": 1,\n  "space": \n}\n')
    with pytest.raises(sc.ScenarioError, match=r"bad.json:4:"):
        sc.load_scenario(bad)
    assert cli.main(["run", str(bad)]) == cli.EXIT_USAGE
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_USAGE


def test_solve_series_and_sv_ladder(tmp_path):
    report = sc.run_data(scalar_scenario())
    paths = sc.emit_report(report, tmp_path)
    names = {p.name for p in paths}
    assert {"report.json", "solve_series.csv", "sv_sv_sup.csv"} <= names
    rows = read_csv(tmp_path / "solve_series.csv")
    assert rows[0] == ["t", "q_label", "value"]
    u = [(float(t), float(v)) for t, lab, v in rows[1:] if lab == "u:sup"]
    assert len(u) == 33
    assert max(abs(v - math.exp(-t)) for t, v in u) <= 1e-9
    ladder = read_csv(tmp_path / "sv_sv_sup.csv")
    assert ladder[0] == ["mesh", "sv_value", "kind"]
    vals = [float(r[1]) for r in ladder[1:]]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1 - math.exp(-1), abs=1e-15)


def test_report_json_roundtrip(tmp_path):
    report = sc.run_data(scalar_scenario())
    sc.emit_report(report, tmp_path, ("json",))
    loaded = sc.Report.from_dict(json.loads((tmp_path / "report.json").read_text()))
    assert loaded.to_dict() == json.loads(sc.report_json(report))
    assert not list(tmp_path.glob("*.csv"))


def test_determinism_modulo_timestamp():
    data = json.loads((SCENARIOS / "rotation.json").read_text())
    a = sc.run_data(copy.deepcopy(data))
    b = sc.run_data(copy.deepcopy(data))
    dump = lambda r: json.dumps(r.numerics(), sort_keys=True)
    assert dump(a) == dump(b)


def test_example_scenarios():
    c0 = sc.run_scenario(SCENARIOS / "c0_mult.json").results
    assert c0["maxreg"]["holds"] == "yes" and c0["admissible"]["holds"] == "yes"
    assert c0["admissible"]["control"] == "extension"
    rot = sc.run_scenario(SCENARIOS / "rotation.json").results
    assert rot["maxreg"]["holds"] == "counterexample"
    assert rot["sv"]["ladders"]["sup"]
    assert rot["baillon_demo"]["dim_slope"] > 0.9


def test_task_errors_do_not_abort_the_run():
    data = json.loads((SCENARIOS / "rotation.json").read_text())
    data["tasks"] = ["admissible", "sv"]
    report = sc.run_data(data)
    assert "NotInvertibleError" in report.results["admissible"]["error"]
    assert "estimates" in report.results["sv"]
    assert report.failed_tasks == ["admissible"]


def test_every_task_runs_from_a_scenario(tmp_path):
    data = scalar_scenario(tasks=list(sc.TASKS), space={"dim": 8},
                           generator={"kind": "linear", "params": {"slope": -1.0}},
                           forcing={"f": {"kind": "sin", "k": 2}, "x0": {"unit": 2},
                                    "battery": {"random_count": 2}},
                           task_options={"travis": {"cells": 2, "eps_ladder": [0.1]},
                                         "baillon_demo": {"dims": [4, 8]},
                                         "admissible": {"transfer": {"id": {"kind": "identity",
                                                                            "codomain": "Xminus1"}}}})
    report = sc.run_data(data)
    assert not report.failed_tasks, report.results
    assert report.results["admissible"]["transfer_consistent"] is True
    sc.emit_report(report, tmp_path)


def test_cli_subcommands(tmp_path, capsys):
    assert cli.main(["sv", "--generator", "list", "--symbol=-1,-2", "--out", str(tmp_path)]) == 0
    assert "sv: sup=0.8646647168" in capsys.readouterr().out
    assert cli.main(["--seed", "3", "maxreg", "--dim", "16", "--envelope", "c0"]) == 0
    assert "maxreg: yes" in capsys.readouterr().out
    assert cli.main(["demo-baillon", "--dims", "8,16", "--budget", "256"]) == 0
    assert cli.main(["travis", "--generator", "list", "--symbol=-1,-2"]) == 0
    assert "sv_sum=0.8646647" in capsys.readouterr().out
    assert cli.main(["solve", "--dim", "4", "--forcing", "sin", "--k", "2", "--mode", "classical"]) == 0
    assert cli.main(["admissible", "--dim", "16", "--tol", "1e-9"]) == 0
    # counterexample verdicts are completed runs
    assert cli.main(["maxreg", "--generator", "rotation", "--dim", "16"]) == 0
    assert "counterexample" in capsys.readouterr().out


def test_cli_exit_codes(capsys):
    assert cli.main(["admissible", "--generator", "rotation", "--dim", "8"]) == cli.EXIT_TASK_ERROR
    assert cli.main(["sv", "--dim", "8", "--generator", "list", "--symbol=-1,-2"]) == cli.EXIT_USAGE
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])


def test_run_applies_global_flags(tmp_path):
    args = cli.build_parser().parse_args(["run", str(SCENARIOS / "c0_mult.json"), "--dim", "8",
                                          "--seed", "5", "--tol", "1e-9", "--budget", "64"])
    data = cli.apply_global_flags(sc.load_scenario(args.scenario), args)
    assert data["space"]["dim"] == 8 and data["seed"] == 5
    assert data["tolerances"]["quadrature"] == 1e-9 and data["budget"]["sv_cells"] == 64
    args = cli.build_parser().parse_args(["--dim", "8", "sv"])
    assert cli.scenario_from_args(args)["space"]["dim"] == 8


def test_complex_symbols_and_vectors_from_json():
    data = scalar_scenario(space={"dim": 2},
                           generator={"kind": "list", "params": {"values": [[-1.0, 1.0], [-2.0, 0.0]]}},
                           forcing={"x0": [[1.0, 0.0], 0.5]}, tasks=["solve"])
    model = sc.build_model(data)
    assert np.allclose(model.A.m, [-1 + 1j, -2])
    report = sc.run_data(data)
    assert report.results["solve"]["integrated_ok"]
