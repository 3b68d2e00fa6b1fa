import copy
import json
import os
import subprocess
import sys
import warnings

import pytest

from sasraman import __version__
from sasraman.cli import main
from sasraman.errors import ConfigError, PhysicsWarning
from sasraman.runner import EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION, run_scenario
from sasraman.scenario import SCHEMA, parse_scenario, scenario_from_dict, validate
from sasraman.selfcheck import outputs_identical, reference_scenario_path, self_check

MINIMAL = {
    "medium": {"n": 1.5, "N": 1.0, "alpha_prime": 1.0, "M": 1.0, "omega_tilde": 250.0,
               "gamma": 0.5, "V_S": 1.0},
    "laser": {"k1": [0, 0, 1], "k2": [0, 0, 1], "omega_l": 3500.0},
}


def doc(**changes):
    d = copy.deepcopy(MINIMAL)
    for key, value in changes.items():
        d[key] = value
    return d


def write(tmp_path, d, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return str(path)


DELAY_ONLY = {"scans": [{"id": "delay", "kind": "delay", "grid": {"start": 0, "stop": 10, "count": 11}}]}


def test_minimal_defaults():
    sc = scenario_from_dict(doc())
    assert sc.sigma_acc == 0.01
    assert sc.V_Q == 1e3 * sc.medium.V_S
    assert sc.J == 401
    assert sc.bandwidth == 40 * sc.medium.gamma
    assert sc.seed == 0 and sc.checks == ("thermal",) and sc.scans == []
    assert sc.medium.T == 300.0


def test_raman_shift_and_wavelength_inputs():
    d = doc()
    d["medium"].pop("omega_tilde")
    d["medium"]["raman_shift_cm"] = 1332.0
    d["laser"].pop("omega_l")
    d["laser"]["wavelength_um"] = 0.532
    sc = scenario_from_dict(d)
    assert sc.medium.omega_tilde == pytest.approx(250.9, abs=0.01)
    assert sc.laser.omega_l == pytest.approx(3540.6, abs=0.1)


def test_soft_constraint_warns_but_parses():
    d = doc()
    d["medium"]["gamma"] = 125.0
    with pytest.warns(PhysicsWarning):
        sc = scenario_from_dict(d)
    assert sc.medium.gamma == 125.0


def test_no_warning_for_well_separated_scales():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        scenario_from_dict(doc())


def test_malformed_nesting_names_path():
    d = doc()
    d["medium"]["gamma"] = {"value": 0.5}
    with pytest.raises(ConfigError) as info:
        scenario_from_dict(d)
    assert "medium.gamma" in [p for p, _ in info.value.problems]
    d = doc(scans=[{"id": "x", "kind": "delay", "grid": {"start": 0, "stop": 1, "count": "3"}}])
    assert "scans.0.grid.count" in [p for p, _ in validate(d)]


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        scenario_from_dict(doc(gama=0.5))
    d = doc()
    d["medium"]["gama"] = 0.5
    with pytest.raises(ConfigError) as info:
        scenario_from_dict(d)
    assert any(p == "medium" and "gama" in m for p, m in info.value.problems)


def test_physical_constraint_diagnostics():
    with pytest.raises(ConfigError) as info:
        scenario_from_dict(doc(reservoir={"J": 400, "bandwidth": 1.0}))
    paths = {p for p, _ in info.value.problems}
    assert {"reservoir.J", "reservoir.bandwidth"} <= paths
    d = doc()
    d["laser"]["omega_l"] = 100.0
    with pytest.raises(ConfigError):
        scenario_from_dict(d)
    with pytest.raises(ConfigError):
        scenario_from_dict(doc(scans=[{"id": "a", "kind": "delay", "grid": {"start": 0, "stop": 1, "count": 2}},
                                      {"id": "a", "kind": "spectrum"}]))


def test_parse_scenario_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_scenario(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError) as info:
        parse_scenario(bad)
    assert "line 1" in str(info.value)


def test_reference_scenario_parses():
    sc = parse_scenario(reference_scenario_path())
    assert [s.scan_id for s in sc.scans] == ["delay", "polarization", "angular", "spectrum"]


def test_delay_only_outputs(tmp_path):
    sc = scenario_from_dict(doc(**DELAY_ONLY))
    res = run_scenario(sc, tmp_path / "out")
    assert res.status == EXIT_OK
    assert sorted(os.listdir(tmp_path / "out")) == ["delay.csv", "summary.json"]
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert sorted(summary) == ["scans", "scenario", "seed", "status", "validations", "version"]
    assert summary["scans"]["delay"]["summary"]["relative_error"] < 1e-10


def test_run_deterministic_across_threads(tmp_path):
    d = doc(scans=[
        {"id": "delay", "kind": "delay", "grid": {"start": 0, "stop": 10, "count": 11}},
        {"id": "ang", "kind": "angular", "grid": {"start": -0.05, "stop": 0.05, "count": 5},
         "samples": 300, "events": 200},
        {"id": "spec", "kind": "spectrum"},
    ])
    d["laser"]["beam_spread"] = 0.02
    sc = scenario_from_dict(d)
    run_scenario(sc, tmp_path / "a")
    run_scenario(sc, tmp_path / "b")
    run_scenario(sc, tmp_path / "c", threads=3)
    assert outputs_identical(tmp_path / "a", tmp_path / "b")
    assert outputs_identical(tmp_path / "a", tmp_path / "c")
    run_scenario(sc.with_seed(1), tmp_path / "d")
    assert (tmp_path / "a" / "ang.csv").read_bytes() != (tmp_path / "d" / "ang.csv").read_bytes()


def test_thermal_gate_fails_run(tmp_path):
    d = doc(**DELAY_ONLY)
    d["medium"]["omega_tilde"] = 20.0
    d["medium"]["gamma"] = 0.1
    res = run_scenario(scenario_from_dict(d), tmp_path)
    assert res.status == EXIT_VALIDATION
    assert res.summary["validations"]["thermal"]["passed"] is False
    assert os.listdir(tmp_path) == ["summary.json"]


def test_cli_exit_codes(tmp_path, capsys):
    good = write(tmp_path, doc(**DELAY_ONLY), "good.json")
    assert main(["run", good, "--out-dir", str(tmp_path / "o1")]) == EXIT_OK
    hot = doc(**DELAY_ONLY)
    hot["medium"]["omega_tilde"] = 20.0
    hot["medium"]["gamma"] = 0.1
    assert main(["run", write(tmp_path, hot, "hot.json"), "--out-dir", str(tmp_path / "o2")]) == EXIT_VALIDATION
    assert main(["run", write(tmp_path, doc(bogus=1), "bad.json")]) == EXIT_CONFIG
    assert main(["run", good, "--threads", "0"]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "bogus" in err


def test_cli_seed_override(tmp_path):
    good = write(tmp_path, doc(**DELAY_ONLY))
    main(["run", good, "--out-dir", str(tmp_path / "o"), "--seed", "42"])
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["seed"] == 42


def test_cli_schema_and_version(capsys):
    assert main(["schema"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == SCHEMA
    assert main(["version"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == __version__


def test_cli_check_subset_json(capsys):
    assert main(["check", "--only", "thermal_occupation", "delay_decay", "--json"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert sorted(report) == ["all_passed", "checks", "version"]
    assert sorted(report["checks"]) == ["delay_decay", "thermal_occupation"]
    for entry in report["checks"].values():
        assert {"criterion", "passed", "value", "threshold", "runtime_s"} <= set(entry)


def test_self_check_isolation():
    fast = ["analytic_signal", "delay_decay", "cross_polarization_null", "thermal_occupation",
            "exchange_symmetry"]
    clean = self_check(only=fast)
    assert clean["all_passed"]
    broken = self_check(only=fast, overrides={"delay_decay": {"gamma": 0.5}})
    failed = [name for name, r in broken["checks"].items() if not r["passed"]]
    assert failed == ["delay_decay"]
    with pytest.raises(KeyError):
        self_check(only=["nope"])


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "sasraman.cli", "version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == __version__
