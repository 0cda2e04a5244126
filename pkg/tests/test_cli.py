import json
import os

import pytest
from hypothesis import given, strategies as st

from relsteinberg.cli import PRESETS, SUITE_NAMES, ConfigError, RunConfig, list_presets, main

EXPECTED = {"C3-Z2", "C3-Z3", "B3-Z2", "C3-Z4-admissible-b0", "C3-Z4-admissible-b2", "F4-Z4-admissible",
            "B2-smoke"}


def test_presets_listed(capsys):
    assert main(["--list-presets"]) == 0
    out = capsys.readouterr().out
    assert len(out.strip().splitlines()) >= 7
    assert all(name in out for name in EXPECTED)
    assert set(PRESETS) == EXPECTED


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_preset_round_trip(name):
    cfg = PRESETS[name]
    assert RunConfig.from_text(cfg.to_text()) == cfg


@given(st.lists(st.sampled_from(["axioms", "family", "unrel", "dl", "injectivity", "lemmas"]),
                min_size=1, unique=True),
       st.integers(0, 10**9), st.integers(0, 2**64 - 1), st.sampled_from([2, 3, 4, 5]))
def test_random_config_round_trip(suites, budget, seed, n):
    cfg = RunConfig(suites=tuple(suites), budget=budget, seed=seed, modulus=n, rank=3).validate()
    assert RunConfig.from_text(cfg.to_text()) == cfg


@pytest.mark.parametrize("text,needle", [
    ("pair FF K=Q/4\n", "line 1"),
    ("rank 3\nbogus 1\n", "line 2"),
    ("admissible a=[2]\n", "line 1"),
    ("suites dl,nonsense\n", "nonsense"),
    ("rank 3\nsuites relative-dl\n", "crossed pair"),
])
def test_malformed_configs(tmp_path, capsys, text, needle):
    p = tmp_path / "bad.cfg"
    p.write_text(text)
    assert main(["--config", str(p)]) != 0
    assert needle in capsys.readouterr().err


def test_inadmissible_pair_names_the_failure(tmp_path, capsys):
    p = tmp_path / "c.cfg"
    p.write_text("rank 3\npair FF K=Z/4\nadmissible a=[2] b=[1]\nsuites crossed\n")
    assert main(["--config", str(p)]) == 3
    assert "crossed pair" in capsys.readouterr().err


def test_smoke_run_writes_records(tmp_path):
    out = tmp_path / "run"
    assert main(["--preset", "B2-smoke", "--out", str(out), "--budget", "2000"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["ok"] and set(summary["suites"]) == set(PRESETS["B2-smoke"].suites)
    for s in summary["suites"]:
        rows = (out / f"{s}.jsonl").read_text().splitlines()
        assert rows and all(json.loads(r)["pass"] for r in rows)


def test_planted_fault_fails_with_witness(tmp_path):
    out = tmp_path / "run"
    cfg = tmp_path / "f.cfg"
    cfg.write_text("construction ofasymp\nrank 2\npair FF K=Z/3\nsuites dl\nfault planted\nbudget 0\n")
    assert main(["--config", str(cfg), "--out", str(out)]) == 1
    rows = [json.loads(r) for r in (out / "dl.jsonl").read_text().splitlines()]
    assert any(r["witnesses"] for r in rows)


def test_workers_do_not_change_reports(tmp_path):
    outs = []
    for w in (1, 2):
        out = tmp_path / f"w{w}"
        assert main(["--preset", "B2-smoke", "--out", str(out), "--workers", str(w), "--budget", "500"]) == 0
        outs.append({f: (out / f).read_bytes() for f in sorted(os.listdir(out))})
    assert outs[0] == outs[1]


def test_suite_names_are_complete():
    assert set(SUITE_NAMES) == {"axioms", "family", "crossed", "unrel", "presentation", "dl", "relative-dl",
                                "injectivity", "lemmas"}
    with pytest.raises(ConfigError):
        RunConfig(suites=("axioms", "warp")).validate()
