import io
import json
import math
from pathlib import Path

import pytest
import yaml

from ehpo.cli import main
from ehpo.config import ConfigError, bundled_config_text, config_from_dict
from ehpo.hpo import read_log

TOY = yaml.safe_load(bundled_config_text("toy"))


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write_config(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def toy_cfg(tmp_path):
    data = json.loads(json.dumps(TOY))
    data["configs"]["five"] = {"a": {"random": {"trials": 5, "support": [{"x": 1}, {"x": 2}], "weights": [0.5, 0.5]}}}
    return write_config(tmp_path, data)


# -- config validation ------------------------------------------------------------

@pytest.mark.parametrize("mutate, message", [
    (lambda d: d.update(schema="ehpo-config/2"), "schema"),
    (lambda d: d["allowable"].update(extra=["nope"]), "unknown HPO config"),
    (lambda d: d["policy"]["threshold"].update(algorithm="zzz"), "zzz"),
    (lambda d: d["configs"]["mostly-good"]["a"]["random"].update(support=[{"x": 7}, {"x": 2}]), "7"),
    (lambda d: d.update(defense={"config": "mostly-good", "kappa": 4}), "odd"),
])
def test_config_rejects_bad_references(mutate, message):
    data = json.loads(json.dumps(TOY))
    mutate(data)
    with pytest.raises(ConfigError, match=message):
        config_from_dict(data)


# -- run / conclude ---------------------------------------------------------------

def test_run_writes_log(tmp_path, toy_cfg):
    code, out, _ = run("--config", toy_cfg, "--out", str(tmp_path), "run", "five")
    assert code == 0 and "T = 5" in out
    log = read_log(tmp_path / "five.log.ndjson")
    assert len(log.trials) == 5 and log.total_time == 5


def test_run_unknown_config(tmp_path, toy_cfg):
    code, _, err = run("--config", toy_cfg, "--out", str(tmp_path), "run", "missing")
    assert code == 1 and "unknown HPO config" in err


def test_run_is_byte_identical(tmp_path, toy_cfg):
    a, b = tmp_path / "a", tmp_path / "b"
    run("--config", toy_cfg, "--out", str(a), "run", "five")
    run("run", "five", "--config", toy_cfg, "--out", str(b))
    assert (a / "five.log.ndjson").read_bytes() == (b / "five.log.ndjson").read_bytes()
    run("--config", toy_cfg, "--seed", "9", "--out", str(b), "run", "five")
    assert (a / "five.log.ndjson").read_bytes() != (b / "five.log.ndjson").read_bytes()


def test_conclude(tmp_path):
    out = str(tmp_path)
    run("--config", "bundled:deceptive", "--out", out, "run", "default-eps")
    run("--config", "bundled:deceptive", "--out", out, "run", "tuned-eps")
    assert run("--config", "bundled:deceptive", "conclude", f"{out}/default-eps.log.ndjson")[1].strip() == "p"
    assert run("--config", "bundled:deceptive", "conclude", f"{out}/tuned-eps.log.ndjson")[1].strip() == "!p"
    code, _, err = run("--config", "bundled:deceptive", "conclude", f"{out}/missing.log.ndjson")
    assert code == 1 and err


def test_conclude_tie_prints_nothing(tmp_path):
    data = yaml.safe_load(bundled_config_text("deceptive"))
    same = {"grid": {"lr": [0], "eps": [-8]}}
    data["task"]["algorithms"]["adam"] = data["task"]["algorithms"]["sgd"]
    data["configs"] = {"tie": {"sgd": same, "adam": same}}
    data["allowable"] = {"grid": ["tie"]}
    data.pop("defense"), data.pop("certify")
    cfg = write_config(tmp_path, data)
    run("--config", cfg, "--out", str(tmp_path), "run", "tie")
    assert run("--config", cfg, "conclude", str(tmp_path / "tie.log.ndjson"))[1].strip() == "nothing"


# -- defend ----------------------------------------------------------------------

def test_defend_fractions_table(tmp_path):
    code, out, _ = run("--out", str(tmp_path), "defend", "--fractions", "bundled:decision_fractions")
    assert code == 0
    rows = json.loads((tmp_path / "defense.json").read_text())["rows"]
    assert [r["conclude"] for r in rows] == ["!p", "nothing", "nothing", "!p", "!p", "nothing"]


def test_defend_generated_groups(tmp_path):
    code, out, _ = run("--config", "bundled:deceptive", "--out", str(tmp_path), "defend")
    assert code == 0
    rows = json.loads((tmp_path / "defense.json").read_text())["rows"]
    assert [r["one_minus_delta"] for r in rows] == [0.75, 0.8, 0.9]
    assert all(set(r["fractions"]) == {"p", "!p", "nothing"} for r in rows)
    assert read_log(tmp_path / "desk-scale.log.ndjson").total_time == 1200


def test_defend_even_kappa(tmp_path):
    data = yaml.safe_load(bundled_config_text("deceptive"))
    data["defense"]["kappa"] = 10
    code, _, err = run("--config", write_config(tmp_path, data), "--out", str(tmp_path), "defend")
    assert code == 1 and "odd" in err


# -- demon / certify --------------------------------------------------------------

def test_demon_naive_grid(tmp_path):
    code, out, _ = run("--config", "bundled:deceptive", "--out", str(tmp_path), "demon")
    assert code == 0 and "verdict: Deceptive" in out
    v = json.loads((tmp_path / "verdict-naive-grid.json").read_text())
    assert v["verdict"] == "Deceptive"
    assert v["witness_p"]["config"] == "default-eps" and v["witness_notp"]["config"] == "tuned-eps"


def test_demon_defended(tmp_path):
    code, out, _ = run("--config", "bundled:deceptive", "--out", str(tmp_path), "demon",
                       "--set", "random", "--reasoner", "defended")
    assert code == 0
    v = json.loads((tmp_path / "verdict-defended-random.json").read_text())
    assert v["verdict"] == "CertifiedNonDeceptive" and v["R"] == 107


def test_demon_budget_below_one_run(tmp_path):
    code, out, _ = run("--config", "bundled:deceptive", "--budget", "10", "--out", str(tmp_path), "demon")
    assert code == 0 and "CertifiedNonDeceptive" in out


def test_certify_bundled(tmp_path):
    code, out, _ = run("--config", "bundled:deceptive", "--out", str(tmp_path), "certify", "--audit-samples", "20")
    assert code == 0 and "R = 107" in out and "FLAGGED intermediate exp bound" in out
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["contradiction_check"]["passed"]


def test_certify_gamma_ln2(tmp_path):
    data = json.loads(json.dumps(TOY))
    data["configs"]["half"] = {"a": {"random": {"trials": 3, "support": [{"x": 1}, {"x": 2}], "weights": [0.5, 0.5]}}}
    data["configs"]["quarter"] = {"a": {"random": {"trials": 3, "support": [{"x": 1}, {"x": 2}],
                                               "weights": [0.25, 0.75]}}}
    data["allowable"] = {"pair": ["half", "quarter"], "single": ["half"]}
    data["budget"] = 10000
    cfg = write_config(tmp_path, data)
    code, out, _ = run("--config", cfg, "--out", str(tmp_path), "certify", "--set", "pair", "--audit-samples", "10")
    assert code == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["gamma"] == pytest.approx(math.log(2))
    assert cert["R"] == math.ceil(math.sqrt(10000 * 8 / 3))
    run("--config", cfg, "--out", str(tmp_path), "certify", "--set", "single", "--audit-samples", "0")
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["gamma"] == 0 and cert["R"] == math.ceil(math.sqrt(10000 / 3))


def test_certify_disjoint_support(tmp_path):
    data = json.loads(json.dumps(TOY))
    data["configs"]["only-good"] = {"a": {"random": {"trials": 2, "support": [{"x": 1}], "weights": [1.0]}}}
    data["configs"]["only-bad"] = {"a": {"random": {"trials": 2, "support": [{"x": 2}], "weights": [1.0]}}}
    data["allowable"] = {"disjoint": ["only-good", "only-bad"]}
    code, _, err = run("--config", write_config(tmp_path, data), "--out", str(tmp_path), "certify", "--set", "disjoint")
    assert code == 1 and "hypothesis" in err


# -- verify-proof -----------------------------------------------------------------

def test_verify_bundled_proofs():
    for name in ("defended_reasoner", "bundled:diamond_over_or"):
        code, out, _ = run("verify-proof", name)
        assert code == 0 and out.startswith("PASS")


def test_verify_mutated_proof(tmp_path):
    from importlib import resources

    text = (resources.files("ehpo.logic") / "proofs" / "defended_reasoner.proof").read_text()
    bad = text.replace("| DiamondCollapse    |", "| Reflexivity        |")
    path = tmp_path / "bad.proof"
    path.write_text(bad)
    code, out, _ = run("verify-proof", str(path))
    assert code == 1 and "step 5" in out


# -- report / scout ---------------------------------------------------------------

def test_report(tmp_path, toy_cfg):
    out = str(tmp_path)
    run("--config", toy_cfg, "--out", out, "run", "five")
    run("--config", toy_cfg, "--seed", "1", "--out", str(tmp_path / "other"), "run", "five")
    (tmp_path / "other" / "five.log.ndjson").rename(tmp_path / "five-b.log.ndjson")
    run("--config", toy_cfg, "--out", out, "demon", "--set", "random")
    code, stdout, _ = run("--out", out, "report", out)
    assert code == 0
    lines = (tmp_path / "trials.csv").read_text().splitlines()
    assert lines[0] == "log,algorithm,x,seed_index,metric" and len(lines) == 11
    first = (tmp_path / "trials.csv").read_bytes()
    run("--out", out, "report", out)
    assert (tmp_path / "trials.csv").read_bytes() == first
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert [v["file"] for v in summary["verdicts"]] == ["verdict-naive-random.json"]


def test_report_empty_dir(tmp_path):
    code, _, err = run("report", str(tmp_path))
    assert code == 1 and "no run artifacts" in err


def test_scout(tmp_path):
    code, out, _ = run("--config", "bundled:deceptive", "--out", str(tmp_path), "scout")
    assert code == 0
    res = json.loads((tmp_path / "scout.json").read_text())
    lo, hi = res["final_range"]
    assert lo <= 1e11 <= hi


# -- usage ------------------------------------------------------------------------

def test_usage_errors(tmp_path, monkeypatch):
    assert run()[0] == 2
    assert run("nosuchcommand")[0] == 2
    assert run("run", "x")[0] == 2  # no --config
    monkeypatch.setenv("EHPO_THREADS", "zero")
    assert run("verify-proof", "defended_reasoner")[0] == 2
    monkeypatch.setenv("EHPO_THREADS", "4")
    assert run("verify-proof", "defended_reasoner")[0] == 0


@pytest.mark.parametrize("argv, files", [
    (["demon"], ["verdict-naive-grid.json"]),
    (["demon", "--set", "random", "--reasoner", "defended"], ["verdict-defended-random.json"]),
    (["certify", "--audit-samples", "10"], ["certificate.json"]),
    (["defend"], ["defense.json", "desk-scale.log.ndjson"]),
    (["scout"], ["scout.json"]),
    (["run", "eps-low"], ["eps-low.log.ndjson"]),
])
def test_commands_are_byte_identical(tmp_path, argv, files):
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        assert run("--config", "bundled:deceptive", "--out", str(d), *argv)[0] == 0
        outs.append({f: (d / f).read_bytes() for f in files})
    assert outs[0] == outs[1]
