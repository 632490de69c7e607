import json
import os
import pathlib

import pytest

import rugtrace

FIXTURES = pathlib.Path(
    os.environ.get("RUGTRACE_FIXTURES_DIR", pathlib.Path(__file__).resolve().parents[1] / "fixtures")
)


def expected(name):
    return json.loads((FIXTURES / name / "expected.json").read_text())


def test_fig2_verdict_and_victims():
    exp = expected("fig2")
    inv = rugtrace.Investigation(FIXTURES / "fig2", exp["token"])
    verdict = inv.verdict()
    assert verdict["classification"]["verdict"] == "sell_rug_pull"
    assert verdict["classification"]["pumpAndDump"] is True
    assert inv.victims() == sorted(exp["victims"])


def test_report_is_stable_and_cites_transactions():
    exp = expected("token1")
    a = rugtrace.Investigation(FIXTURES / "token1", exp["token"], {"maxDepth": 3})
    b = rugtrace.Investigation(FIXTURES / "token1", exp["token"], {"maxDepth": 3})
    assert a.report() == b.report()
    assert a.report()["provenance"]["thresholds"]["trace"]["maxDepth"] == 3
    assert "##" in a.report("md")
    assert a.trace()["nodes"]


def test_profit_bounds_are_exact():
    eth = 10**18
    p_min, p_max = rugtrace.profit_bounds(revenue=1057 * eth // 100, spend=1596 * eth // 100,
                                          delta_liquidity=539 * eth // 100)
    assert (p_min, p_max) == (0, 1596 * eth // 100)


def test_keccak():
    assert rugtrace.keccak256(b"") == "0xc5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"


def test_errors_are_typed():
    with pytest.raises(rugtrace.NotFoundError):
        rugtrace.Investigation(FIXTURES / "fig2", "0x" + "00" * 19 + "aa")
    with pytest.raises(rugtrace.ConfigError):
        rugtrace.Investigation(FIXTURES / "fig2", expected("fig2")["token"], {"maxDepth": 99})
    with pytest.raises(rugtrace.Error):
        rugtrace.Investigation(FIXTURES / "nowhere", expected("fig2")["token"])


def test_cli_entry_point(tmp_path):
    code, out, err = rugtrace.run_cli(["detect", "--fixtures", str(FIXTURES / "fig2"), expected("fig2")["token"],
                                       "--out", str(tmp_path)])
    assert code == 0, err
    assert json.loads((tmp_path / "verdict.json").read_text())["classification"]["verdict"] == "sell_rug_pull"
    assert rugtrace.run_cli(["frobnicate"])[0] == 2
