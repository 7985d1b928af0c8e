"""Command-line front end: report, simulate, attrib.

Exit codes: 0 success, 2 parse error, 3 policy/scenario violation. Every
run writes a manifest next to its outputs; identical inputs and seed
reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .attribution.scenario import (
    ScenarioError as AttribScenarioError,
    parse_attribution_scenario,
    run_attribution_scenario,
)
from .scenarios import (
    ScenarioError,
    run_chain_scenario,
    run_pool_scenario,
    run_validator_scenario,
)
from .tax.engine import EngineError, PolicyViolation, compute_report
from .tax.events import EventParseError, parse_event_file
from .tax.lots import AccountingMethod, LotError
from .tax.policy import parse_policy

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_POLICY = 3


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out_dir: Path, command: str, inputs: list[Path], seed: int | None,
                    outputs: list[Path]) -> None:
    manifest = {
        "command": command,
        "engine_version": __version__,
        "inputs": {str(p): _file_digest(p) for p in inputs},
        "seed": seed,
        "outputs": {str(p.name): _file_digest(p) for p in outputs},
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _resolve_config(args) -> Path | None:
    if args.config:
        return Path(args.config)
    env = os.environ.get("FISC_CONFIG")
    return Path(env) if env else None


def cmd_report(args) -> int:
    events_path = Path(args.events)
    out_dir = Path(args.out)
    policy_path = _resolve_config(args)
    try:
        decimals, records = parse_event_file(events_path.read_text())
    except EventParseError as exc:
        print("%s:%d: %s" % (events_path, exc.line_no, exc), file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARSE
    try:
        policy = parse_policy(policy_path.read_text()) if policy_path else parse_policy("")
    except (ValueError, OSError) as exc:
        print("%s: %s" % (policy_path, exc), file=sys.stderr)
        return EXIT_PARSE
    try:
        method = AccountingMethod(args.method)
        report = compute_report(records, policy, method, decimals)
    except PolicyViolation as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_POLICY
    except (EngineError, LotError, ValueError) as exc:
        print("%s: %s" % (events_path, exc), file=sys.stderr)
        return EXIT_POLICY
    out_dir.mkdir(parents=True, exist_ok=True)
    ledger_path = out_dir / "ledger.csv"
    totals_path = out_dir / "totals.json"
    ledger_path.write_text(report.to_csv())
    totals_path.write_text(report.to_totals_json())
    inputs = [events_path] + ([policy_path] if policy_path else [])
    _write_manifest(out_dir, "report", inputs, args.seed, [ledger_path, totals_path])
    return EXIT_OK


_SIM_RUNNERS = {
    "pool": run_pool_scenario,
    "chain": run_chain_scenario,
    "validators": run_validator_scenario,
}


def cmd_simulate(args) -> int:
    scenario_path = Path(args.scenario)
    out_dir = Path(args.out)
    try:
        text = scenario_path.read_text()
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARSE
    try:
        output = _SIM_RUNNERS[args.kind](text)
    except ScenarioError as exc:
        print("%s:%d: %s" % (scenario_path, exc.line_no, exc), file=sys.stderr)
        return EXIT_POLICY if exc.line_no == 0 else EXIT_PARSE
    out_dir.mkdir(parents=True, exist_ok=True)
    events_path = out_dir / "events.fisc"
    state_path = out_dir / "state.txt"
    events_path.write_text(output.events_text)
    state_path.write_text(output.state_text)
    _write_manifest(out_dir, "simulate " + args.kind, [scenario_path], args.seed,
                    [events_path, state_path])
    return EXIT_OK


def cmd_attrib(args) -> int:
    scenario_path = Path(args.scenario)
    out_dir = Path(args.out)
    try:
        text = scenario_path.read_text()
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARSE
    try:
        scenario = parse_attribution_scenario(text)
        if args.seed is not None:
            scenario.seed = args.seed
        run = run_attribution_scenario(scenario)
    except AttribScenarioError as exc:
        print("%s:%d: %s" % (scenario_path, exc.line_no, exc), file=sys.stderr)
        return EXIT_POLICY if exc.line_no == 0 else EXIT_PARSE
    except KeyError as exc:
        print("%s: unknown reference %s" % (scenario_path, exc), file=sys.stderr)
        return EXIT_POLICY
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "trace.txt"
    ledger_path = out_dir / "withholding.txt"
    trace_path.write_text(run.trace)
    ledger_path.write_text(run.ledger)
    _write_manifest(out_dir, "attrib", [scenario_path], scenario.seed,
                    [trace_path, ledger_path])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fisc", description=__doc__)
    parser.add_argument("--version", action="version", version="fisc " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="policy/config file (fallback: $FISC_CONFIG)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", required=True, help="output directory")

    p_report = sub.add_parser("report", parents=[common], help="compute a tax report")
    p_report.add_argument("events", help="event file")
    p_report.add_argument("--method", default="fifo",
                          choices=[m.value for m in AccountingMethod])
    p_report.set_defaults(func=cmd_report)

    p_sim = sub.add_parser("simulate", parents=[common], help="replay a scenario")
    p_sim.add_argument("kind", choices=sorted(_SIM_RUNNERS))
    p_sim.add_argument("scenario")
    p_sim.set_defaults(func=cmd_simulate)

    p_attrib = sub.add_parser("attrib", parents=[common],
                              help="run an attribution-protocol scenario")
    p_attrib.add_argument("scenario")
    p_attrib.set_defaults(func=cmd_attrib)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
