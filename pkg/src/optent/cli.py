"""Command-line entry point: ``optent <subcommand> [--config PATH] [--out PATH]``."""
import argparse
import json
import sys
from pathlib import Path

from . import experiments
from .errors import ConfigError, DomainError, NumericError, ValidationError

SUBCOMMANDS = {
    "qfi-table": "qfi-table",
    "saturate": "saturation-sweep",
    "mixtures": "mixture-sweep",
    "tomo-compare": "tomo-compare",
    "phase-scan": "phase-scan",
    "fano": "fano-check",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="optent", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, experiment in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {experiment} experiment")
        p.add_argument("--config", help="JSON experiment config (defaults are used when omitted)")
        p.add_argument("--out", help="CSV output path; a JSON report is written next to it")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--dump-raw", action="store_true", help="include per-window counts in the JSON report")
    return parser


def _fail(kind, exc, code):
    record = {"error": kind, "message": str(exc)}
    if getattr(exc, "field", None):
        record["field"] = exc.field
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    experiment = SUBCOMMANDS[args.command]
    try:
        cfg = experiments.load_config(args.config, experiment=experiment, seed=args.seed)
        out = args.out or cfg.output_path or f"{experiment}.csv"
        out = experiments.resolve_output(out)
        rows, raw = experiments.run(cfg, keep_raw=args.dump_raw)
    except ConfigError as exc:
        return _fail("config", exc, 2)
    except FileNotFoundError as exc:
        return _fail("config", exc, 2)
    except (ValidationError, DomainError, NumericError) as exc:
        return _fail(type(exc).__name__, exc, 1)
    csv_path = experiments.write_csv(rows, out)
    json_path = experiments.write_report(cfg, rows, raw, Path(csv_path).with_suffix(".json"))
    print(f"wrote {csv_path} and {json_path} ({len(rows)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
