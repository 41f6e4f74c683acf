import json
import pathlib

import pytest

import encplan

DESK = pathlib.Path(__file__).resolve().parents[2] / "data" / "desk5"


def test_load_and_reduce():
    s = encplan.load_system(str(DESK))
    assert s.num_days == 365
    assert len(s.candidate_buses) >= 1
    r = encplan.reduce_days(s, k=5, variance=0.95, seed=7)
    assert len(r["days"]) == 5
    assert sum(d["probability"] for d in r["days"]) == pytest.approx(1.0, abs=1e-12)
    c = r["cumulative_variance"]
    assert c[r["components"] - 1] >= 0.95
    assert r["components"] == 1 or c[r["components"] - 2] < 0.95


def test_wilcoxon():
    assert encplan.wilcoxon_pratt([1, 2, 3, 4, 5])["p_value"] == pytest.approx(0.0625)
    assert encplan.wilcoxon_pratt([0, 0, 0])["p_value"] == 1.0


def test_config_hash_and_errors():
    a = encplan.config_hash({"system": str(DESK)})
    assert a == encplan.config_hash({"system": str(DESK), "out": "elsewhere", "workers": "4"})
    assert a != encplan.config_hash({"system": str(DESK), "chi": "0.9"})
    with pytest.raises(encplan.UsageError):
        encplan.config_hash({"no_such_key": "1"})
    with pytest.raises(encplan.DomainError):
        encplan.load_system("/no/such/dir")


def test_reduce_command_is_deterministic(tmp_path):
    a = encplan.reduce(system=DESK, out=tmp_path / "a")
    b = encplan.reduce(system=DESK, out=tmp_path / "b")
    assert a["exit_code"] == 0
    assert (tmp_path / "a" / "repdays.csv").read_bytes() == (tmp_path / "b" / "repdays.csv").read_bytes()


def test_plan_outcomes_and_mps(tmp_path):
    o = encplan.plan_outcomes({"system": str(DESK), "max_units": "2", "enc": "on"})
    assert o["phsi"]["profit"] >= 0
    assert o["viu"]["viu_bound"] == o["viu"]["social_cost"]
    assert [r["q"] for r in o["records"]] == list(range(len(o["records"])))
    r = encplan.plan(system=DESK, solver="mps-only", out=tmp_path)
    assert r["exit_code"] == 0
    assert (tmp_path / "mps" / "viu.mps").exists()
    assert not (tmp_path / "outcome.json").exists()


def test_empty_sweep_grid_is_a_usage_error(tmp_path):
    with pytest.raises(encplan.UsageError):
        encplan.sweep(system=DESK, out=tmp_path)
