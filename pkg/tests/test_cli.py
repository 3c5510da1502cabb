import csv
import json

import pytest

from colombeau import cli

EXPECTED = {
    "asymptotic_classifier", "counterexample_near_standard", "flow_rotation", "polar_straightening",
    "circle_symmetry", "triangular_symmetry", "linear_rotation_symmetry", "heat_equation_symmetry",
    "pde_scaling_counterexample", "prolongation_coefficients", "translation_battery",
    "rotation_invariance_gauss", "off_center_mollifier",
}


def run_report(tmp_path, *args, name="report.json"):
    out = tmp_path / name
    code = cli.main(["run", *args, "--report", str(out)])
    return code, out


def test_list_examples_is_sorted_and_complete(capsys):
    assert cli.main(["list-examples"]) == 0
    names = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
    assert len(names) >= 8
    assert names == sorted(names)
    assert set(names) == EXPECTED


def test_list_examples_kind_filter(capsys):
    assert cli.main(["list-examples", "--kind", "flow"]) == 0
    names = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
    assert names == ["flow_rotation", "polar_straightening"]
    assert cli.main(["list-examples", "--kind", "no-such-kind"]) == 0
    assert capsys.readouterr().out == ""


def test_empty_file_is_config_error(tmp_path, capsys):
    f = tmp_path / "empty.yaml"
    f.write_text("")
    assert cli.main(["run", str(f)]) == 2
    assert "empty" in capsys.readouterr().err


@pytest.mark.parametrize(
    "body, fragment",
    [
        ("name: x\nkind: asymptotics\nsteps:\n  - {op: classify, net: foo}\n", "steps[0].net"),
        ("name: x\nkind: asymptotics\nsteps:\n  - {op: frobnicate}\n", "steps[0]"),
        ("name: x\nkind: asymptotics\nbogus: 1\nsteps: []\n", "bogus"),
        ("name: x\nkind: asymptotics\nsteps: [\n", "YAML"),
    ],
)
def test_schema_errors_name_the_offending_path(tmp_path, capsys, body, fragment):
    f = tmp_path / "bad.yaml"
    f.write_text(body)
    assert cli.main(["run", str(f)]) == 2
    assert fragment in capsys.readouterr().err


def test_bad_arguments_exit_2(capsys):
    assert cli.main(["run"]) == 2
    assert cli.main(["run", "asymptotic_classifier", "--grid", "nonsense"]) == 2


def test_counterexample_report(tmp_path):
    code, out = run_report(tmp_path, "examples/counterexample_near_standard")
    assert code == 0
    report = json.loads(out.read_text())
    value_at, no_limit, control = report["steps"]
    assert value_at["op"] == "value_at" and value_at["outcome"] == "pass"
    assert no_limit["result"]["limit"] == "none" and no_limit["ok"]
    assert control["outcome"] == "pass"
    assert report["passed"]


def test_failing_scenario_exits_1(tmp_path):
    f = tmp_path / "fail.yaml"
    f.write_text("name: f\nkind: asymptotics\nsteps:\n  - {op: classify, net: '1/eps', expect_class: Negligible}\n")
    assert cli.main(["run", str(f)]) == 1


def test_rotation_gauss_passes(tmp_path):
    code, out = run_report(tmp_path, "rotation_invariance_gauss")
    assert code == 0
    assert json.loads(out.read_text())["passed"]


def test_replay_is_byte_identical(tmp_path):
    _, a = run_report(tmp_path, "translation_battery", name="a.json")
    _, b = run_report(tmp_path, "translation_battery", name="b.json")
    assert a.read_bytes() == b.read_bytes()


def test_grid_and_seed_overrides(tmp_path):
    code, out = run_report(tmp_path, "asymptotic_classifier", "--grid", "1:12", "--seed", "11")
    report = json.loads(out.read_text())
    assert report["grid"]["k_max"] == 12 and report["grid"]["k_min"] == 1
    assert report["seed"] == 11
    assert code == 0


def test_csv_dump(tmp_path):
    d = tmp_path / "dump"
    assert cli.main(["run", "flow_rotation", "--dump-csv", str(d)]) == 0
    with open(d / "residuals.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "op", "check", "k", "eps", "sample", "class"]
    assert len(rows) > 1
    traj = sorted(d.glob("trajectory_step*.csv"))
    assert traj
    with open(traj[0]) as fh:
        header = next(csv.reader(fh))
    assert header == ["eps", "start", "eta", "x1", "x2"]


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_every_bundled_scenario_passes(name, capsys):
    assert cli.main(["run", name]) == 0
    assert "overall: PASS" in capsys.readouterr().out
