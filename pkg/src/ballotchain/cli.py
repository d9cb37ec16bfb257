"""Operator command line: election setup, nodes, simulation, tally, audit.

Exit codes are one per error class so scripts can branch on failures:
0 success, 2 usage (click), 3 missing or invalid config/paths, 4 corrupt
stores, 5 domain rejections, 6 out-of-range or failed validation.
"""

import functools
import json
import sys
import time

import click

from .economics import CostParams, cost_estimate, feasibility_verdict
from .errors import BallotChainError, CorruptStore
from .service import build_service, serve as serve_app, snapshot_and_restore
from .simulation import SimScenario, make_random_scenario, run_simulation
from .storage import dump_compact
from .tally import tally

EXIT_CONFIG = 3
EXIT_CORRUPT = 4
EXIT_DOMAIN = 5
EXIT_INVALID = 6


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    """Map exception classes onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CorruptStore as exc:
            _fail(EXIT_CORRUPT, f"CorruptStore: {exc}")
        except BallotChainError as exc:
            _fail(EXIT_DOMAIN, f"{exc.code}: {exc}")
        except (FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
            _fail(EXIT_CONFIG, f"bad config or path: {exc!r}")
        except ValueError as exc:
            _fail(EXIT_INVALID, str(exc))

    return wrapper


def emit(payload: dict, fmt: str):
    if fmt == "json":
        click.echo(dump_compact(payload))
        return
    for key in sorted(payload):
        click.echo(f"{key}: {payload[key]}")


format_option = click.option("--format", "fmt",
                             type=click.Choice(["text", "json"]),
                             default="text", show_default=True)


@click.group()
def main():
    """Token-ballot election toolkit."""


@main.command("init-election")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None,
              help="Override the key-generation seed from the config file.")
@format_option
@guarded
def init_election(data_dir, config_path, seed, fmt):
    """Create the election config, keys, and genesis block in DATA_DIR."""
    with open(config_path) as fh:
        params = json.load(fh)
    if seed is not None:
        params["seed"] = seed
    service = build_service(data_dir, election_params=params)
    if service.cfg is None or service.cfg.election_id != params["election_id"]:
        raise BallotChainError("data dir already holds a different election")
    genesis = service.blocks[0]
    emit({
        "election_id": service.cfg.election_id,
        "genesis_hash": genesis.block_hash.hex(),
        "candidates": ",".join(c.name for c in service.cfg.candidates),
        "nodes": len(service.cfg.roster),
        "data_dir": service.service_cfg.data_dir,
    }, fmt)


@main.command("run-nodes")
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--rounds", type=int, default=0, show_default=True,
              help="Consensus rounds to drive before reporting.")
@format_option
@guarded
def run_nodes(data_dir, rounds, fmt):
    """Bring up the node cluster over DATA_DIR and report replica status."""
    service = build_service(data_dir)
    if service.cfg is None:
        raise FileNotFoundError("no election in data dir")
    for _ in range(rounds):
        if not any(n.mempool for n in service.cluster.nodes.values()):
            break
        now = max(int(time.time()),
                  service.blocks[-1].timestamp)
        block, _ = service.cluster.run_height(now=now)
        if block is None:
            break
    report = {"replicas_identical": service.cluster.replicas_identical()}
    for node_id in sorted(service.cluster.nodes):
        node = service.cluster.nodes[node_id]
        tip = node.ledger.blocks[-1]
        report[node_id] = f"height={node.ledger.height} tip={tip.block_hash.hex()[:16]}"
    emit(report, fmt)


@main.command("simulate")
@click.option("--scenario", "scenario_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--voters", type=int, default=12, show_default=True,
              help="Voter count for generated scenarios.")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Trace file destination (default: stdout summary only).")
@format_option
@guarded
def simulate(scenario_path, seed, voters, out_path, fmt):
    """Run a deterministic cluster simulation and report convergence."""
    if scenario_path is not None:
        scenario = SimScenario.load(scenario_path)
    else:
        scenario = make_random_scenario(seed, voters=voters)
    trace, cluster = run_simulation(scenario)
    if out_path:
        trace.write(out_path)
    summary = trace.summary
    stalls = sum(1 for e in trace.events if e.get("event") == "stalled")
    emit({
        "seed": scenario.seed,
        "converged": summary["converged"],
        "height": max(r["height"] for r in summary["replicas"].values()),
        "stalled_rounds": stalls,
        "trace_events": len(trace.events),
        "trace_file": out_path or "",
    }, fmt)
    if not summary["converged"]:
        raise ValueError("replicas failed to converge")


@main.command("tally")
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@format_option
@guarded
def tally_cmd(data_dir, fmt):
    """Tally the chain in DATA_DIR and write tally-report.json."""
    service = build_service(data_dir)
    if service.cfg is None:
        raise FileNotFoundError("no election in data dir")
    result = tally(service.blocks, service.cfg)
    body = result.to_dict()
    report_path = service._path("tally-report.json")
    with open(report_path, "wb") as fh:
        fh.write(dump_compact(body).encode())
    emit({**body, "per_candidate": dump_compact(body["per_candidate"]),
          "winners": ",".join(body["winners"]),
          "report_file": report_path}, fmt)


@main.command("audit")
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@format_option
@guarded
def audit_cmd(data_dir, fmt):
    """Recount DATA_DIR against registry keys; write audit-report.json."""
    service = build_service(data_dir)
    if service.cfg is None:
        raise FileNotFoundError("no election in data dir")
    body = service.audit()
    report_path = service._path("audit-report.json")
    with open(report_path, "wb") as fh:
        fh.write(dump_compact(body).encode())
    emit({"total_vote_txs": body["total_vote_txs"],
          "accepted": body["accepted"],
          "rejected": sum(body["rejected_by_reason"].values()),
          "unregistered_keys": len(body["unregistered_keys"]),
          "registered_nonvoters": body["registered_nonvoters"],
          "report_file": report_path}, fmt)


@main.command("verify-store")
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@format_option
@guarded
def verify_store(data_dir, fmt):
    """Rebuild state from DATA_DIR and check every integrity invariant."""
    service = snapshot_and_restore(data_dir)
    emit({
        "ok": True,
        "height": service.node.ledger.height,
        "registered": len(service.registry.records),
        "granted": len(service.registry.grants),
    }, fmt)


@main.command("cost-estimate")
@click.option("--voters", type=int, default=100_000_000, show_default=True)
@click.option("--penetration", type=float, default=None,
              help="Internet penetration percent for a feasibility verdict.")
@format_option
@guarded
def cost_estimate_cmd(voters, penetration, fmt):
    """Project rollout costs against recurring paper-ballot printing."""
    report = cost_estimate(CostParams(voters=voters)).to_dict()
    report["voters"] = voters
    if penetration is not None:
        report["feasibility"] = feasibility_verdict(penetration)
        report["internet_penetration_pct"] = penetration
    emit(report, fmt)


@main.command("feasibility")
@click.option("--penetration", type=float, required=True)
@format_option
@guarded
def feasibility_cmd(penetration, fmt):
    """Verdict on rollout given an internet penetration percentage."""
    emit({"internet_penetration_pct": penetration,
          "verdict": feasibility_verdict(penetration)}, fmt)


@main.command("serve")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--admin-token", default="change-me", show_default=True)
@click.option("--tls-mode", type=click.Choice(["required", "test_plaintext"]),
              default="test_plaintext", show_default=True)
@click.option("--certfile", default=None, type=click.Path())
@click.option("--keyfile", default=None, type=click.Path())
@guarded
def serve_cmd(data_dir, host, port, admin_token, tls_mode, certfile, keyfile):
    """Serve the HTTP API over DATA_DIR."""
    serve_app(data_dir, host=host, port=port, admin_token=admin_token,
              tls_mode=tls_mode, certfile=certfile, keyfile=keyfile)


if __name__ == "__main__":
    main()
