from __future__ import annotations

import json

import pytest

from wmorita import cli
from wmorita.report import CertReport, Entry, plain
from wmorita.suites import ANCHORS, ConfigError, RunConfig, run


def _verify(capsys, *args):
    code = cli.main(["verify", "--quiet", *args])
    return code, json.loads(capsys.readouterr().out)


def test_describe_gl3_subregular(capsys):
    assert cli.main(["describe", "--rank", "3", "--partition", "2,1", "--format", "json"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["dim g"] == 9 and info["d(chi)"] == 2 and info["D(chi)"] == 9
    assert info["dim m"] == 2 and info["dim m-perp"] == 7


def test_describe_text(capsys):
    assert cli.main(["describe", "--family", "sl", "--prime", "5"]) == 0
    out = capsys.readouterr().out
    assert "dim U_eta(g)" in out and "125" in out


def test_empty_suite_selection(capsys):
    code, rep = _verify(capsys, "--suites", "none")
    assert code == 0 and rep["entries"] == [] and rep["verdict"] == "pass"
    assert set(rep) == {"config", "entries", "verdict"}


def test_report_schema_and_ggg_dimension(capsys):
    code, rep = _verify(capsys, "--suites", "liealg,ggg")
    assert code == 0 and rep["verdict"] == "pass"
    for e in rep["entries"]:
        assert set(e) == {"anchor", "statement", "verdict", "witnesses", "ms"}
        assert e["verdict"] in ("pass", "fail", "inconclusive")
    owners = {a for a, s, _ in ANCHORS if s in ("liealg", "ggg")}
    assert {e["anchor"] for e in rep["entries"]} == owners
    cor = next(e for e in rep["entries"] if e["anchor"] == "Cor-4.2")
    assert cor["witnesses"]["dim"] == 27


def test_byte_stable_apart_from_timing():
    cfg = dict(suites=("liealg", "penv"), seed=7)
    a = run(RunConfig(**cfg)).to_json(timing=False)
    b = run(RunConfig(**cfg)).to_json(timing=False)
    assert a == b


def test_seed_flag_beats_environment(capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "11")
    _, rep = _verify(capsys, "--suites", "none")
    assert rep["config"]["seed"] == 11
    _, rep = _verify(capsys, "--suites", "none", "--seed", "5")
    assert rep["config"]["seed"] == 5
    monkeypatch.setenv(cli.SEED_ENV, "x")
    with pytest.raises(SystemExit):
        cli.main(["verify", "--suites", "none"])


@pytest.mark.parametrize("fault,anchor", [("structure", "Lie-axioms"), ("ppower", "Restricted")])
def test_injected_fault_fails_the_run(capsys, fault, anchor):
    code, rep = _verify(capsys, "--suites", "liealg", "--inject-fault", fault)
    assert code == 1 and rep["verdict"] == "fail"
    assert next(e for e in rep["entries"] if e["anchor"] == anchor)["verdict"] == "fail"


def test_bad_configurations():
    with pytest.raises(ConfigError):
        RunConfig(family="sl", rank=3, prime=3).validate()
    with pytest.raises(ConfigError):
        RunConfig(rank=2, partition=(1,)).validate()
    with pytest.raises(SystemExit):
        cli.main(["verify", "--suites", "bogus"])
    with pytest.raises(SystemExit):
        cli.main(["describe", "--prime", "4"])


def test_report_roundtrip_and_render(tmp_path, capsys):
    path = tmp_path / "r.json"
    assert cli.main(["verify", "--quiet", "--suites", "liealg", "--output", str(path)]) == 0
    assert cli.main(["report", str(path)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("config:") and "Lie-axioms" in text and "verdict: pass" in text
    loaded = CertReport.load(str(path))
    assert loaded.to_json() == path.read_text()
    assert cli.main(["report", str(tmp_path / "missing.json")]) == 2


def test_verdict_aggregation():
    rep = CertReport({}, [Entry("a", "", "pass"), Entry("b", "", "inconclusive")])
    assert rep.verdict == "pass" and rep.exit_code == 0
    rep.entries.append(Entry("c", "", "fail"))
    assert rep.verdict == "fail" and rep.exit_code == 1
    assert "1 fail" in rep.to_text()
    with pytest.raises(ValueError):
        rep.render("yaml")


def test_plain_conversion():
    import numpy as np

    assert plain({"a": np.int64(3), "b": (np.bool_(True), np.arange(2))}) == {"a": 3, "b": [True, [0, 1]]}
