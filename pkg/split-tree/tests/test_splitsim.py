import pytest

from scenarios import ROSTER_DIR
from splitsim import main
from trace_store import load_trace, save_trace
from verifier import CORRUPTIONS

A1 = f"{ROSTER_DIR}/a1.json"


def run_a1(out, horizon=20, *extra):
    return main(["run", "--roster", A1, "--horizon", str(horizon), "--trace-out", str(out),
                 "--verbosity", "0", *extra])


def test_run_writes_a_trace(tmp_path, capsys):
    out = tmp_path / "t.jsonl"
    assert run_a1(out) == 0
    assert load_trace(str(out)).horizon == 20
    assert "[done]" in capsys.readouterr().out


def test_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    run_a1(a)
    run_a1(b)
    assert a.read_bytes() == b.read_bytes()


def test_random_rosters_are_seeded(tmp_path):
    outs = [tmp_path / f"{i}.jsonl" for i in range(2)]
    for out in outs:
        assert main(["run", "--random", "--regime", "two-split", "--horizon", "12",
                     "--rng-seed", "7", "--trace-out", str(out), "--verbosity", "0"]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_saved_random_roster_replays(tmp_path):
    roster, a, b = tmp_path / "r.json", tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    common = ["--regime", "two-split", "--horizon", "12", "--rng-seed", "7", "--verbosity", "0"]
    assert main(["run", "--random", "--roster-out", str(roster), "--trace-out", str(a), *common]) == 0
    assert main(["run", "--roster", str(roster), "--trace-out", str(b), *common]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_with_stage_log(tmp_path):
    log = tmp_path / "stages.csv"
    assert run_a1(tmp_path / "t.jsonl", 10, "--log-file", str(log)) == 0
    assert len(log.read_text().splitlines()) == 11


def test_run_without_a_roster():
    with pytest.raises(SystemExit) as e:
        main(["run"])
    assert e.value.code == 2


def test_bad_horizon_is_a_usage_error(tmp_path):
    assert main(["run", "--random", "--horizon", "0", "--trace-out", str(tmp_path / "t.jsonl")]) == 2


def test_missing_roster_file(tmp_path, capsys):
    assert main(["run", "--roster", str(tmp_path / "nope.json")]) == 1
    assert "[error]" in capsys.readouterr().err


def test_verify_selected_checks(tmp_path, capsys):
    out = tmp_path / "t.jsonl"
    run_a1(out)
    assert main(["verify", "--trace", str(out), "--checks", "check_pool_discipline,check_delta_length"]) == 0
    assert capsys.readouterr().out.count("[check]") == 2


def test_verify_reports_a_failure(tmp_path):
    out = tmp_path / "t.jsonl"
    run_a1(out)
    bad = tmp_path / "bad.jsonl"
    save_trace(str(bad), CORRUPTIONS["check_upward_origin"](load_trace(str(out)).records))
    assert main(["verify", "--trace", str(bad), "--checks", "check_upward_origin"]) == 1


def test_verify_unknown_check(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["verify", "--trace", str(tmp_path / "t.jsonl"), "--checks", "check_everything"])
    assert e.value.code == 2


def test_verify_unreadable_trace(tmp_path):
    assert main(["verify", "--trace", str(tmp_path / "missing.jsonl")]) == 1


def test_scenario(tmp_path, capsys):
    out = tmp_path / "a1.jsonl"
    assert main(["scenario", "a1", "--trace-out", str(out)]) == 0
    assert out.exists()
    assert "scenario a1: ok" in capsys.readouterr().out


def test_unknown_scenario():
    with pytest.raises(SystemExit) as e:
        main(["scenario", "a9"])
    assert e.value.code == 2


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ("a1", "a2", "switch2", "gen3"):
        assert name in out
