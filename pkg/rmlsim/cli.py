# stdlib
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# rmlsim absolute
import rmlsim.logger as log
from rmlsim.benchmark import PRESETS, preset, run_sweep
from rmlsim.benchmark.io import ResultFormat, write_results
from rmlsim.exceptions import ResultsIOError, RMLSimError
from rmlsim.rml.policy import policy_summary
from rmlsim.simulation.config import Mode, ScenarioConfig, build_config
from rmlsim.simulation.engine import run_scenario
from rmlsim.simulation.records import write_trace
from rmlsim.utils.config_io import parse_config, validate_config
from rmlsim.version import __version__


def _load(config: Optional[Path], **overrides: Any) -> ScenarioConfig:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if config is None:
        return build_config(**overrides)
    return parse_config(config, **overrides)


def _write_json(path: Path, document: Dict[str, Any]) -> None:
    try:
        with open(path, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise ResultsIOError(f"cannot write {path}: {e}") from e


def simulate(args: argparse.Namespace) -> None:
    cfg = _load(
        args.config,
        seed=args.seed,
        mode=args.mode,
        n_blockages=args.blockages,
        n_vehicles=args.vehicles,
        enb_preset=True if args.enb_preset else None,
    )
    result = run_scenario(cfg)

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_trace(result.records, out / "trace.csv")
    _write_json(
        out / "metrics.json",
        {
            "metrics": json.loads(result.metrics.json()),
            "decisions": result.decisions,
            "flow": [json.loads(f.json()) for f in result.flow_trace],
            "config": result.config,
        },
    )
    if cfg.mode == Mode.RML and result.policy is not None:
        result.policy.export_snapshot(out / "policy.csv")
        log.debug(f"policy: {policy_summary(result.policy)}")

    m = result.metrics
    print(
        f"pdr={m.pdr:.4f} pdr_nlos={m.pdr_nlos:.4f} latency_ms={m.mean_latency_ms:.6f} "
        f"throughput_mbps={m.throughput_mbps:.6f} sent={m.messages_sent} delivered={m.messages_delivered}"
    )


def sweep(args: argparse.Namespace) -> None:
    base = _load(args.config, enb_preset=True if args.enb_preset else None)
    spec = preset(args.preset, seeds=args.seeds, output_dir=args.out)
    table = run_sweep(spec, base=base, jobs=args.jobs, workspace=args.workspace)

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_results(table, out / f"{args.preset}.csv", ResultFormat.DELIMITED)
    write_results(
        table,
        out / f"{args.preset}.json",
        ResultFormat.STRUCTURED,
        provenance={
            "preset": args.preset,
            "sweep": json.loads(spec.json(exclude={"output_dir"})),
            "config": base.resolved(),
        },
    )
    print(table.to_string(index=False))


def validate(args: argparse.Namespace) -> None:
    cfg = validate_config(args.config)
    print(json.dumps(cfg.resolved(), indent=2, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmlsim", description="V2X mmWave relay selection simulator"
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["TRACE", "DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", help="run one scenario")
    sim.add_argument("--config", type=Path, default=None, help="INI config file")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    sim.add_argument("--blockages", type=int, default=None, help="number of buildings")
    sim.add_argument("--vehicles", type=int, default=None, help="number of vehicles")
    sim.add_argument("--enb-preset", action="store_true", help="place the eNB by blockage count")
    sim.add_argument("--out", type=Path, default=Path("results"))
    sim.set_defaults(func=simulate)

    sw = commands.add_parser("sweep", help="run a preset experiment grid")
    sw.add_argument("--preset", choices=sorted(PRESETS), required=True)
    sw.add_argument("--seeds", type=int, default=10, help="seeds 0..N-1 per point")
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--config", type=Path, default=None, help="INI config for shared parameters")
    sw.add_argument("--enb-preset", action="store_true")
    sw.add_argument("--workspace", type=Path, default=None, help="scenario cache directory")
    sw.add_argument("--out", type=Path, default=Path("results"))
    sw.set_defaults(func=sweep)

    val = commands.add_parser("validate", help="check a config file")
    val.add_argument("--config", type=Path, required=True)
    val.set_defaults(func=validate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    log.configure(args.log_level)
    try:
        args.func(args)
    except RMLSimError as e:
        log.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        log.critical("interrupted")
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
