import csv
import json
from fractions import Fraction

import pytest

from partlab.cli import main
from partlab.errors import ConfigError
from partlab.experiments import (COLUMNS, ExperimentConfig, inverse_fit, records_csv,
                                 run_experiment)
from partlab.partition import Partition, enumerate_family
from partlab.tables import MomentTable


# ---------------------------------------------------------------------------
# configuration

@pytest.mark.parametrize("raw,pointer", [
    ({}, "/scenario"),
    ({"scenario": "nope"}, "/scenario"),
    ({"scenario": "semicircle"}, "/seed"),
    ({"scenario": "semicircle", "seed": 1, "samples": 0}, "/samples"),
    ({"scenario": "semicircle", "seed": "x"}, "/seed"),
    ({"scenario": "semicircle", "seed": 1, "k": [2, "4"]}, "/k/1"),
    ({"scenario": "semicircle", "seed": 1, "N": 0}, "/N"),
    ({"scenario": "semicircle", "seed": 1, "bogus": 1}, "/bogus"),
    ({"scenario": "semicircle", "seed": 1, "tolerance": {"combine": "avg"}}, "/tolerance/combine"),
    ({"scenario": "semicircle", "seed": 1, "tolerance": {"sigmas": -1}}, "/tolerance/sigmas"),
    ({"scenario": "semicircle", "seed": 1, "output": {"pdf": "x"}}, "/output/pdf"),
    ({"scenario": "semicircle", "seed": 1, "params": {"steps": 3}}, "/params/steps"),
    ({"scenario": "free-poisson", "seed": 1, "params": {"triplet": {"a": -1}}}, "/params/triplet"),
    ({"scenario": "entries", "seed": 1, "family": {"a": {"kind": "nope"}}}, "/family/a"),
    ({"scenario": "entries", "seed": 1, "family": {"a": {}}}, "/family/a/kind"),
    ({"scenario": "unitary-bm", "samples": 5}, "/seed"),
])
def test_config_errors_name_the_key(raw, pointer):
    with pytest.raises(ConfigError) as e:
        ExperimentConfig.from_dict(raw)
    assert str(e.value).startswith(pointer + ":")


def test_missing_seed_message_names_seed():
    with pytest.raises(ConfigError, match="seed"):
        ExperimentConfig.from_dict({"scenario": "wick"})


def test_exact_scenarios_need_no_seed():
    cfg = ExperimentConfig.from_dict({"scenario": "classical-bridge"})
    assert cfg.seed is None and cfg.samples == 0


def test_config_load_reports_bad_json(tmp_path):
    f = tmp_path / "c.json"
    f.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(f)


def test_tolerance_policy():
    cfg = ExperimentConfig.from_dict({"scenario": "semicircle", "seed": 1,
                                      "tolerance": {"sigmas": 2, "floor": 0.1}})
    assert cfg.tolerance_for(0.01) == 0.1
    assert cfg.tolerance_for(0.1) == pytest.approx(0.2)
    cfg = ExperimentConfig.from_dict({"scenario": "semicircle", "seed": 1,
                                      "tolerance": {"sigmas": 2, "floor": 0.1, "combine": "sum"}})
    assert cfg.tolerance_for(0.1) == pytest.approx(0.3)


# ---------------------------------------------------------------------------
# scenarios and reports

def test_classical_bridge_scenario():
    recs = run_experiment({"scenario": "classical-bridge", "k": [1, 2, 3, 4], "N": [8]})
    assert [r.estimate for r in recs] == [Fraction(1, 2), Fraction(1, 4), 0, Fraction(-1, 8)]
    assert all(r.passed and r.method == "exact" for r in recs)


def test_gaussian_approx_scenario():
    recs = run_experiment({"scenario": "gaussian-approx", "N": [4],
                           "params": {"classes": ["contraction", "cross"]}})
    assert len(recs) == 4 and all(r.passed for r in recs)


def test_small_mc_scenarios_pass():
    for cfg in ({"scenario": "semicircle", "seed": 3, "k": [2, 4], "N": [60], "samples": 30},
                {"scenario": "free-poisson", "seed": 4, "k": [1, 2], "N": [40], "samples": 30},
                {"scenario": "entries", "seed": 5, "N": [4], "samples": 500}):
        recs = run_experiment(cfg)
        assert recs and all(r.passed for r in recs), cfg["scenario"]


def _small():
    return {"scenario": "semicircle", "seed": 7, "k": [2, 4], "N": [20], "samples": 10}


def test_reports_are_byte_deterministic(tmp_path):
    run_experiment(_small(), tmp_path / "a")
    run_experiment(_small(), tmp_path / "b")
    for name in ("semicircle.csv", "semicircle.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    other = dict(_small(), seed=8)
    run_experiment(other, tmp_path / "c")
    assert (tmp_path / "a" / "semicircle.csv").read_bytes() != \
        (tmp_path / "c" / "semicircle.csv").read_bytes()


def test_csv_layout_and_partition_strings(tmp_path):
    recs = run_experiment(_small(), tmp_path)
    text = (tmp_path / "semicircle.csv").read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# partlab results v1")
    rows = list(csv.DictReader(lines[1:]))
    assert tuple(rows[0]) == COLUMNS and len(rows) == len(recs)
    for row in rows:
        p = Partition.parse(row["partition"])
        assert str(p) == row["partition"]
        assert row["pass"] in ("0", "1")
    doc = json.loads((tmp_path / "semicircle.json").read_text())
    assert doc["summary"]["total"] == len(recs)
    assert doc["config"]["seed"] == 7


def test_output_names_from_config(tmp_path):
    cfg = dict(_small(), output={"csv": "x.csv", "json": "x.json"})
    run_experiment(cfg, tmp_path)
    assert (tmp_path / "x.csv").exists() and (tmp_path / "x.json").exists()


def test_records_csv_empty():
    assert records_csv([]).count("\n") == 2


def test_inverse_fit_recovers_constant():
    Ns = [8, 16, 32]
    C, r2 = inverse_fit(Ns, [3 / n for n in Ns])
    assert C == pytest.approx(3) and r2 == pytest.approx(1)


# ---------------------------------------------------------------------------
# command line

def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_cli_partition_ops(capsys):
    assert main(["partition", "compose", "{1 2'}{2 1'}", "{1 2'}{2 1'}"]) == 0
    assert _json_out(capsys) == {"kappa": 0, "result": "{1 1'}{2 2'}"}
    assert main(["partition", "compose", "{1 2}{1' 2'}", "{1 2}{1' 2'}"]) == 0
    assert _json_out(capsys)["kappa"] == 1
    assert main(["partition", "stats", "{1 2'}{2 1'}"]) == 0
    out = _json_out(capsys)
    assert out["k"] == 2 and out["cycles"] == 1
    assert main(["partition", "transpose", "{1 2}{1'}{2'}"]) == 0
    assert _json_out(capsys)["result"] == "{1}{1' 2'}{2}"
    assert main(["partition", "enumerate", "--k", "2", "--tag", "S"]) == 0
    assert len(_json_out(capsys)["partitions"]) == 2
    assert main(["partition", "pis", "{1 2'}{2 1'}"]) == 0
    assert _json_out(capsys)["pairs"]


def test_cli_partition_errors(capsys):
    assert main(["partition", "compose", "{1 2'}{2 1'}"]) == 2
    assert "partlab: error" in capsys.readouterr().err
    assert main(["partition", "stats", "{1 1}"]) == 2
    assert main(["partition", "compose", "{1 1'}", "{1 2'}{2 1'}"]) == 2


def test_cli_transform_round_trip(tmp_path, capsys):
    m = MomentTable()
    for i, p in enumerate(enumerate_family(2, "P")):
        m.set(p, ("a", "a"), Fraction(i, 3))
    src = tmp_path / "m.json"
    src.write_text(m.to_json())
    kap = tmp_path / "k.json"
    back = tmp_path / "m2.json"
    assert main(["transform", str(src), "--to", "cumulants", "-o", str(kap)]) == 0
    assert main(["transform", str(kap), "--to", "moments", "-o", str(back)]) == 0
    again = MomentTable.from_json(back.read_text())
    assert dict(again.items()) == dict(m.items())
    assert main(["transform", str(src), "--to", "exclusive"]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "exclusive"


def test_cli_predict(capsys):
    assert main(["predict", "semicircle", "--k", "6"]) == 0
    assert _json_out(capsys)["moments"] == {"1": 0, "2": 1, "3": 0, "4": 2, "5": 0, "6": 5}
    assert main(["predict", "free-poisson", "--k", "4", "--lam", "2", "--t", "1"]) == 0
    out = _json_out(capsys)
    assert out["exp_boxplus"] == out["noncrossing"] == {"1": 2, "2": 6, "3": 22, "4": 90}
    assert main(["predict", "classical-bridge", "--k", "4"]) == 0
    out = _json_out(capsys)
    assert out["kappa_zero"] == out["classical"] == {"1": "1/2", "2": "1/4", "3": 0, "4": "-1/8"}
    assert main(["predict", "unitary-bm", "--k", "3", "--t", "0.5", "--ode"]) == 0
    out = _json_out(capsys)
    for k in ("1", "2", "3"):
        assert out["ode"][k] == pytest.approx(out["moments"][k], abs=1e-8)


def test_cli_simulate(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "classical-bridge", "k": [1, 2]}))
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "classical-bridge.csv").exists()
    assert "2/2 records pass" in capsys.readouterr().out
    cfg.write_text(json.dumps({"scenario": "semicircle", "samples": 5}))
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2
    assert "/seed" in capsys.readouterr().err
    assert main(["simulate"]) == 2


def test_cli_simulate_seed_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(dict(_small(), seed=1)))
    main(["simulate", "--config", str(cfg), "--seed", "7", "--out-dir", str(tmp_path / "a")])
    run_experiment(_small(), tmp_path / "b")
    assert (tmp_path / "a" / "semicircle.csv").read_bytes() == \
        (tmp_path / "b" / "semicircle.csv").read_bytes()


def test_cli_verify_rejects_zero_samples(capsys):
    assert main(["verify", "--level", "mc", "--samples", "0"]) == 2
    assert "samples" in capsys.readouterr().err


def test_cli_threads_and_budget(capsys):
    assert main(["partition", "stats", "{1 1'}", "--threads", "1", "--budget", "1e6"]) == 0
    assert _json_out(capsys)["k"] == 1


def test_cli_budget_is_enforced_and_restored(capsys):
    import partlab.matrices as mx
    before = mx.DEFAULT_BUDGET
    assert main(["predict", "classical-bridge", "--k", "2", "--budget", "1"]) == 0
    capsys.readouterr()
    assert mx.DEFAULT_BUDGET == before
