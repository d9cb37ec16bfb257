"""Command-line surface: exit codes, report files, CLI/API equality."""

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from ballotchain.cli import main
from ballotchain.service import build_service, create_app

from test_service import (
    ADMIN,
    VOTE_START,
    Clock,
    cast_vote,
    election_params,
    onboard,
)


@pytest.fixture
def runner():
    return CliRunner()


def write_config(tmp_path, **overrides):
    path = tmp_path / "election-config.json"
    path.write_text(json.dumps(election_params(**overrides)))
    return str(path)


def invoke(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def test_init_then_tally_on_fresh_dir(runner, tmp_path):
    config = write_config(tmp_path)
    data_dir = str(tmp_path / "data")

    result = invoke(runner, "init-election", "--data-dir", data_dir,
                    "--config", config, "--format", "json")
    assert result.exit_code == 0, result.output
    created = json.loads(result.output)
    assert created["election_id"] == "svc-election"
    assert len(created["genesis_hash"]) == 64

    result = invoke(runner, "tally", "--data-dir", data_dir,
                    "--format", "json")
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "data" / "tally-report.json").read_bytes())
    assert report["per_candidate"] == {"alice": 0, "bob": 0}
    assert report["total_minted"] == 0
    assert report["winners"] == ["alice", "bob"]  # nobody voted: full tie


def test_reinit_same_election_is_idempotent_but_new_id_refused(runner, tmp_path):
    config = write_config(tmp_path)
    data_dir = str(tmp_path / "data")
    assert invoke(runner, "init-election", "--data-dir", data_dir,
                  "--config", config).exit_code == 0
    assert invoke(runner, "init-election", "--data-dir", data_dir,
                  "--config", config).exit_code == 0

    other = tmp_path / "other-config.json"
    other.write_text(json.dumps(election_params(election_id="different")))
    result = runner.invoke(main, ["init-election", "--data-dir", data_dir,
                                  "--config", str(other)])
    assert result.exit_code == 5


def test_run_nodes_reports_replica_status(runner, tmp_path):
    config = write_config(tmp_path)
    data_dir = str(tmp_path / "data")
    invoke(runner, "init-election", "--data-dir", data_dir, "--config", config)

    result = invoke(runner, "run-nodes", "--data-dir", data_dir,
                    "--format", "json")
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["replicas_identical"] is True
    for i in range(5):
        assert report[f"node-{i}"].startswith("height=0 tip=")


def test_simulate_generated_scenario_converges(runner, tmp_path):
    trace_path = tmp_path / "trace.jsonl"
    result = invoke(runner, "simulate", "--seed", "9", "--voters", "8",
                    "--out", str(trace_path), "--format", "json")
    assert result.exit_code == 0, result.output
    summary = json.loads(result.output)
    assert summary["converged"] is True
    assert summary["height"] >= 1
    lines = trace_path.read_text().splitlines()
    assert len(lines) == summary["trace_events"]
    assert json.loads(lines[-1])["event"] == "summary"


def test_simulate_partition_scenario_records_minority_stalls(runner, tmp_path):
    scenario = {
        "seed": 31,
        "num_nodes": 5,
        "duration": 12,
        "partition_schedule": [
            [2, [["node-0", "node-1"], ["node-2", "node-3", "node-4"]]],
            [9, "heal"],
        ],
        "events": [
            [1, {"action": "mint", "voter": 0}],
            [3, {"action": "mint", "voter": 1}],
            [4, {"action": "vote", "voter": 0, "candidate": "alice"}],
        ],
    }
    path = tmp_path / "partition.json"
    path.write_text(json.dumps(scenario))

    result = invoke(runner, "simulate", "--scenario", str(path),
                    "--out", str(tmp_path / "t.jsonl"), "--format", "json")
    assert result.exit_code == 0, result.output
    summary = json.loads(result.output)
    assert summary["converged"] is True
    assert summary["stalled_rounds"] > 0  # two-node side cannot reach quorum


def test_audit_report_matches_api_body_byte_for_byte(tmp_path, runner):
    clock = Clock()
    data_dir = str(tmp_path / "data")
    service = build_service(data_dir, admin_token="test-admin", clock=clock,
                            election_params=election_params())
    client = TestClient(create_app(service))
    keys = [onboard(client, service, i)[0] for i in range(4)]
    clock.now = VOTE_START + 10
    for key, choice in zip(keys[:3], ("alice", "bob", "alice")):
        assert cast_vote(client, key, clock, choice).status_code == 200

    api_body = client.get("/admin/audit", headers=ADMIN).content

    result = invoke(runner, "audit", "--data-dir", data_dir, "--format", "json")
    assert result.exit_code == 0, result.output
    cli_body = (tmp_path / "data" / "audit-report.json").read_bytes()
    assert cli_body == api_body

    report = json.loads(cli_body)
    assert report["accepted"] == 3
    assert report["registered_nonvoters"] == 1
    assert report["unregistered_keys"] == []


def test_tally_command_agrees_with_results_endpoint(tmp_path, runner):
    clock = Clock()
    data_dir = str(tmp_path / "data")
    service = build_service(data_dir, admin_token="test-admin", clock=clock,
                            election_params=election_params(
                                provisional_results=True))
    client = TestClient(create_app(service))
    keys = [onboard(client, service, i)[0] for i in range(3)]
    clock.now = VOTE_START + 10
    for key in keys:
        assert cast_vote(client, key, clock, "bob").status_code == 200

    api = client.get("/public/results").json()
    result = invoke(runner, "tally", "--data-dir", data_dir, "--format", "json")
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "data" / "tally-report.json").read_bytes())
    for field in ("per_candidate", "total_minted", "voted_tokens", "winners"):
        assert report[field] == api[field]


def test_missing_election_and_corrupt_store_exit_codes(runner, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    result = runner.invoke(main, ["tally", "--data-dir", str(empty)])
    assert result.exit_code == 3

    config = write_config(tmp_path)
    data_dir = tmp_path / "data"
    invoke(runner, "init-election", "--data-dir", str(data_dir),
           "--config", config)
    chain = data_dir / "chain.dat"
    raw = bytearray(chain.read_bytes())
    raw[len(raw) // 2] ^= 0x04
    chain.write_bytes(bytes(raw))
    result = runner.invoke(main, ["tally", "--data-dir", str(data_dir)])
    assert result.exit_code == 4
    assert "CorruptStore" in result.output


def test_verify_store_command(runner, tmp_path):
    config = write_config(tmp_path)
    data_dir = str(tmp_path / "data")
    invoke(runner, "init-election", "--data-dir", data_dir, "--config", config)
    result = invoke(runner, "verify-store", "--data-dir", data_dir,
                    "--format", "json")
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["ok"] is True


def test_cost_estimate_command_prints_headline_figures(runner):
    result = invoke(runner, "cost-estimate", "--voters", "100000000",
                    "--penetration", "92.5", "--format", "json")
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["first_cycle_total"] == 104_000_010
    assert report["subsequent_cycle_total"] == 50_000_010
    assert report["paper_ballot_total"] == 200_000_000
    assert report["breakeven_cycle"] == 1
    assert report["feasibility"] == "Feasible"


def test_feasibility_command_and_out_of_range_exit(runner):
    result = invoke(runner, "feasibility", "--penetration", "89.9",
                    "--format", "json")
    assert result.exit_code == 0
    assert json.loads(result.output)["verdict"] == "Infeasible"

    result = runner.invoke(main, ["feasibility", "--penetration", "120"])
    assert result.exit_code == 6


def test_text_format_is_sorted_key_value_lines(runner):
    result = invoke(runner, "feasibility", "--penetration", "95")
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert lines == ["internet_penetration_pct: 95.0", "verdict: Feasible"]
