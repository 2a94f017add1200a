"""Self-verification battery and frozen derivation outputs."""

import json

import pytest

from weinorman import derive_hierarchy, emit, parse_hierarchy_json
from weinorman.verify import GOLDEN_N, load_golden, run_battery


@pytest.mark.parametrize("N", GOLDEN_N)
@pytest.mark.parametrize("fmt", ["plain", "latex", "json"])
def test_frozen_outputs_match_regenerated(N, fmt):
    assert emit(derive_hierarchy(N), fmt) == load_golden(N, fmt)


def test_frozen_json_parses_back():
    for N in GOLDEN_N:
        sched = parse_hierarchy_json(load_golden(N, "json"))
        assert sched == derive_hierarchy(N)


def test_load_golden_rejects_unknown():
    with pytest.raises((ValueError, FileNotFoundError)):
        load_golden(7, "plain")
    with pytest.raises(ValueError):
        load_golden(2, "pdf")


def test_battery_passes_and_reports_items():
    summary = run_battery((2, 3), trials=3, seed=1)
    assert summary.passed
    names = {item.name for item in summary.items}
    assert {
        "algebraic-properties",
        "factor-matrix-at-origin",
        "staged-matches-dense",
        "factor-matrix-block-structure",
        "golden-derivation",
        "integration-matches-oracle",
        "corrupted-ordering-detected",
    } <= names
    # every requested dimension shows up
    assert {item.n for item in summary.items if item.n} >= {2, 3}


def test_battery_json_schema():
    summary = run_battery((2,), trials=2, seed=0)
    obj = json.loads(summary.to_json())
    assert obj["schema"] == "wn-verify/1"
    assert obj["passed"] is True
    assert obj["seed"] == 0
    assert all({"name", "n", "passed", "detail"} <= set(i) for i in obj["items"])


def test_battery_describe_mentions_failures(monkeypatch):
    import weinorman.verify as verify

    real = verify.load_golden

    def tampered(N, fmt):
        text = real(N, fmt)
        return text.replace("a1", "a9") if fmt == "plain" else text

    monkeypatch.setattr(verify, "load_golden", tampered)
    summary = verify.run_battery((2,), trials=2, seed=0)
    assert not summary.passed
    assert "FAIL" in summary.describe()
    failed = [i for i in summary.items if not i.passed]
    assert any(i.name == "golden-derivation" for i in failed)
