"""Command line entry point and the JSON config / trace / timeseries formats.

    hivabm run      --config cfg.json [--out DIR]
    hivabm sweep    --config cfg.json --param commitment --from 0 --to 100 --step 20
                    --replicates 50 [--out DIR] [--workers N]
    hivabm validate --trace trace.json [--json]
    hivabm check    --config cfg.json

Exit status: 0 success, 1 validation failure or config violation, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from enum import Enum
from pathlib import Path

from .contracts import validate_trace
from .domain import CONFIG_FIELDS, OPTIONAL_CONFIG_DEFAULTS, ConfigError, SimConfig, validate_config
from .engine import CouplingEvent, Trace, run
from .experiments import SWEEP_PARAMS, export_errorbar_svg, export_sweep_csv, sweep
from .metrics import COUNTER_FIELDS, SNAPSHOT_COLUMNS, CounterSnapshot, new_infections


class Command(Enum):
    RUN = "run"
    SWEEP = "sweep"
    VALIDATE = "validate"
    CHECK = "check"


class UsageError(Exception):
    pass


# --- config -------------------------------------------------------------------


def config_from_dict(data) -> SimConfig:
    if not isinstance(data, dict):
        raise ConfigError(["config must be a JSON object"])
    unknown = sorted(set(data) - set(CONFIG_FIELDS))
    missing = [k for k in CONFIG_FIELDS if k not in data and k not in OPTIONAL_CONFIG_DEFAULTS]
    problems = [f"{k}: unknown key" for k in unknown]
    problems += [f"{k}: required key missing" for k in missing]
    if problems:
        raise ConfigError(problems)
    cfg = SimConfig(**{**OPTIONAL_CONFIG_DEFAULTS, **data})
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> SimConfig:
    """Parse and validate a JSON config. Raises OSError or ConfigError."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON in {path}: {exc}"]) from exc
    return config_from_dict(data)


def write_config(cfg: SimConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n", encoding="utf-8")


# --- trace --------------------------------------------------------------------


def trace_to_dict(trace: Trace) -> dict:
    return {
        "config": trace.config.to_dict(),
        "seed": trace.seed,
        "events": [
            {
                "tick": e.tick,
                "male": e.male,
                "female": e.female,
                "protected": e.protected_act,
                "transmission": None if e.transmission is None
                else {"infected": e.transmission[0], "source": e.transmission[1]},
            }
            for e in trace.events
        ],
        "final_counters": None if trace.final_counters is None
        else dict(zip(SNAPSHOT_COLUMNS, trace.final_counters.as_row())),
    }


def trace_from_dict(data: dict) -> Trace:
    cfg = config_from_dict(data["config"])
    events = []
    for e in data["events"]:
        tx = e["transmission"]
        events.append(CouplingEvent(
            int(e["tick"]), int(e["male"]), int(e["female"]), bool(e["protected"]),
            None if tx is None else (int(tx["infected"]), int(tx["source"])),
        ))
    fc = data.get("final_counters")
    return Trace(cfg, int(data["seed"]), events, [], None,
                 None if fc is None else CounterSnapshot(**fc))


def write_trace(trace: Trace, path) -> None:
    obj = trace_to_dict(trace)
    # one event per line keeps large traces diffable
    head = json.dumps({k: obj[k] for k in ("config", "seed")}, sort_keys=False)[:-1]
    lines = [head + ',"events":[']
    lines.append(",\n".join(json.dumps(e, separators=(",", ":")) for e in obj["events"]))
    lines.append('],"final_counters":' + json.dumps(obj["final_counters"]) + "}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace(path) -> Trace:
    return trace_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_timeseries(trace: Trace, path) -> None:
    """Per-tick counters plus the number of new infections in that tick."""
    seeded = trace.config.max_infected_fsw
    fresh = new_infections(trace.snapshots, seeded)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*SNAPSHOT_COLUMNS, "new_infections"])
        for snap, k in zip(trace.snapshots, fresh):
            w.writerow([*snap.as_row(), k])


# --- commands -----------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hivabm", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser(Command.RUN.value, help="run one simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")

    p = sub.add_parser(Command.SWEEP.value, help="sweep commitment or condom usage")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--from", dest="start", type=int, required=True)
    p.add_argument("--to", dest="stop", type=int, required=True)
    p.add_argument("--step", type=int, required=True)
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser(Command.VALIDATE.value, help="check a trace against the model rules")
    p.add_argument("--trace", required=True)
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser(Command.CHECK.value, help="validate a config file")
    p.add_argument("--config", required=True)
    return ap


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace = run(cfg)
    write_timeseries(trace, out / "timeseries.csv")
    write_trace(trace, out / "trace.json")
    print(f"{cfg.ticks} ticks, {len(trace.events)} couplings, "
          f"total infected {trace.final_counters.total_infected}")
    return 0


def _cmd_sweep(args) -> int:
    if args.step <= 0 or args.start > args.stop or args.replicates < 1:
        raise UsageError("need --step > 0, --from <= --to and --replicates >= 1")
    if not (0 <= args.start and args.stop <= 100):
        raise UsageError("sweep values must lie in [0, 100]")
    cfg = load_config(args.config)
    values = list(range(args.start, args.stop + 1, args.step))
    result = sweep(cfg, args.param, values, args.replicates, cfg.seed, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = out / args.param
    export_sweep_csv(result, base)
    for m in COUNTER_FIELDS:
        export_errorbar_svg(result, m, f"{base}.{m}.svg")
    for p in result.points:
        a = p.aggregates["total_infected"]
        print(f"{args.param}={p.value:3d}  total_infected mean {a.mean:.2f} "
              f"[{a.min:g}, {a.max:g}]")
    return 0


def _cmd_validate(args) -> int:
    try:
        trace = read_trace(args.trace)
    except (KeyError, TypeError, ValueError) as exc:
        print(f"malformed trace {args.trace}: {exc}", file=sys.stderr)
        return 1
    report = validate_trace(trace)
    print(report.to_json() if args.json else report.to_text())
    return 0 if report.passed else 1


def _cmd_check(args) -> int:
    try:
        load_config(args.config)
    except ConfigError as exc:
        print("\n".join(exc.violations))
        return 1
    print(f"{args.config}: ok")
    return 0


_COMMANDS = {
    Command.RUN: _cmd_run,
    Command.SWEEP: _cmd_sweep,
    Command.VALIDATE: _cmd_validate,
    Command.CHECK: _cmd_check,
}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[Command(args.command)](args)
    except ConfigError as exc:
        for v in exc.violations:
            print(v, file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
