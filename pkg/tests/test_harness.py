import csv
import json
import math
from fractions import Fraction

import pytest

from convlab import cli
from convlab.harness import emit as E
from convlab.harness.report import (
    FAIL,
    INDETERMINATE,
    PASS,
    Check,
    ScenarioReport,
    default_precision,
)
from convlab.harness.scenarios import SCENARIO_IDS, UnknownScenario, default_params, run_scenario, scenario
from convlab.witnesses import UnknownFamily

IDS = ("thm-2.2", "thm-2.3", "prop-3.1", "thm-3.4", "thm-3.6", "thm-3.9", "thm-4.1", "thm-4.3")


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_registry_ids():
    assert SCENARIO_IDS == IDS
    for sid in IDS:
        assert scenario(sid).id == sid
    with pytest.raises(UnknownScenario):
        scenario("thm-9.9")


def test_list_command(capsys):
    assert cli.main(["list"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split("\t")[0] for ln in lines] == list(IDS)


def test_params_validation():
    p = default_params("thm-2.3")
    assert p.with_overrides(eps=["1/4"]).eps == ("1/4",)
    assert p.with_overrides(horizon=None) == p
    with pytest.raises(ValueError):
        p.with_overrides(horizon=0)
    with pytest.raises(ValueError):
        p.with_overrides(eps=["-1/2"])
    with pytest.raises(ValueError):
        p.with_overrides(precision=16)


def test_report_outcome_and_exit_code():
    p = default_params("thm-2.3")
    chk = lambda s: Check("c", "claim", s, "cert")  # noqa: E731
    assert ScenarioReport("thm-2.3", p, [chk(PASS)], 0, 256).exit_code() == 0
    assert ScenarioReport("thm-2.3", p, [chk(PASS), chk(INDETERMINATE)], 0, 256).exit_code() == 2
    assert ScenarioReport("thm-2.3", p, [chk(INDETERMINATE), chk(FAIL)], 0, 256).exit_code() == 1


def test_report_json_round_trip():
    r = run_scenario("thm-3.9", default_params("thm-3.9").with_overrides(horizon=8, k_max=4))
    back = ScenarioReport.from_json(r.to_json())
    assert back.to_json() == r.to_json()
    assert back.params == r.params
    d = json.loads(r.to_json())
    assert set(d) == {"scenario", "params", "checks", "seed", "precision", "runtime_ms"}
    assert "runtime_ms" not in json.loads(r.payload_json())


@pytest.mark.parametrize("sid,over", [("thm-2.3", {}), ("thm-3.4", {"polys": 2}), ("prop-3.1", {"polys": 10})])
def test_reports_deterministic(sid, over):
    p = default_params(sid, seed=7).with_overrides(**over)
    assert run_scenario(sid, p).payload_json() == run_scenario(sid, p).payload_json()


def test_precision_env(monkeypatch):
    monkeypatch.setenv("CONVLAB_PRECISION", "128")
    assert default_precision() == 128
    assert default_params("thm-2.3").precision == 128
    monkeypatch.setenv("CONVLAB_PRECISION", "lots")
    with pytest.raises(ValueError):
        default_precision()
    monkeypatch.delenv("CONVLAB_PRECISION")
    assert default_precision() == 256


@pytest.mark.parametrize(
    "argv,code",
    [
        (["verify", "thm-2.3"], 0),
        (["verify", "thm-4.1", "--horizon", "50"], 1),  # log-norm never passes 100 before n = 107
        (["verify", "prop-3.1", "--horizon", "64", "--polys", "5"], 2),
        (["verify", "thm-9.9"], 3),
        (["verify", "thm-2.3", "--horizon", "0"], 3),
        (["verify", "thm-2.3", "--eps", "0"], 3),
        (["verify", "thm-2.3", "--precision", "8"], 3),
        (["frobnicate"], 3),
    ],
)
def test_verify_exit_codes(argv, code, capsys):
    try:
        got = cli.main(argv)
    except SystemExit as exc:
        got = exc.code
    assert got == code


def test_verify_json_out(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["verify", "thm-4.3", "--horizon", "20", "--k-max", "5", "--seed", "3", "--format", "json", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["scenario"] == "thm-4.3" and d["seed"] == 3
    assert all(c["status"] == PASS for c in d["checks"])
    assert cli.main(["verify", "thm-2.3", "--out", str(tmp_path / "missing" / "r.txt")]) == 3


def test_parse_grid():
    assert E.parse_grid("0:1:1/4") == [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1]
    assert E.parse_grid("0:1:1/3")[-1] == 1
    assert E.parse_grid("0:1:2/5") == [0, Fraction(2, 5), Fraction(4, 5)]
    for bad in ("0:1", "1:0:1/2", "0:1:0", "a:b:c"):
        with pytest.raises(ValueError):
            E.parse_grid(bad)
    assert E.parse_n_list("1, 2,3") == [1, 2, 3]
    assert E.parse_n_list("") == []
    with pytest.raises(ValueError):
        E.parse_n_list("0")


def test_emit_typewriter(tmp_path):
    out = tmp_path / "t.csv"
    assert E.emit_samples("typewriter", [1, 2, 3], "0:1:1/8", out) == 27
    rows = _read(out)
    assert tuple(rows[0]) == E.HEADER and len(rows) == 28
    vals = {(int(r[0]), Fraction(r[1])): float(r[2]) for r in rows[1:]}
    assert vals[(2, Fraction(1, 4))] == 1.0
    assert vals[(3, Fraction(1, 4))] == 0.0
    assert all(float(r[3]) == 0.0 for r in rows[1:])


def test_emit_nup_gen_range(tmp_path):
    out = tmp_path / "g.csv"
    E.emit_samples("nup-gen:c=1", [3], "0:1:1/96", out)
    lo = math.exp(-math.sqrt(2))
    for n, x, mid, width in _read(out)[1:]:
        x, mid = Fraction(x), float(mid)
        if Fraction(1, 4) <= x <= Fraction(1, 3):
            assert lo - 1e-15 <= mid <= 1 + 1e-15, x
            assert float(width) < 1e-15
        else:
            assert mid == 0.0, x


def test_emit_edge_cases(tmp_path):
    out = tmp_path / "e.csv"
    assert E.emit_samples("typewriter", [], "0:1:1/2", out) == 0
    assert _read(out) == [list(E.HEADER)]
    with pytest.raises(UnknownFamily):
        E.emit_samples("sawtooth", [1], "0:1:1/2", out)
    with pytest.raises(ValueError):
        E.emit_samples("typewriter", [1], "0:2:1/2", out)
    with pytest.raises(E.IoFailure):
        E.emit_samples("typewriter", [1], "0:1:1/2", tmp_path / "nope" / "x.csv")


def test_emit_cli(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert cli.main(["emit", "traveling-bump:k=2", "--n", "1,2", "--grid", "0:8:1", "--out", str(out)]) == 0
    assert "18 rows" in capsys.readouterr().out
    assert cli.main(["emit", "sawtooth", "--n", "1", "--grid", "0:1:1", "--out", str(out)]) == 3
    assert cli.main(["emit", "typewriter", "--n", "x", "--grid", "0:1:1", "--out", str(out)]) == 3


@pytest.mark.parametrize("sid", IDS)
def test_scenario_defaults_pass(sid):
    r = run_scenario(sid, default_params(sid))
    assert r.outcome == PASS, [(c.name, c.certificate) for c in r.checks if c.status != PASS]
