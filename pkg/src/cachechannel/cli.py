"""Command-line front end.

Subcommands: theory, simulate, sweep, disrupt.  Exit status 0 means every
requested output was written; 2 flags a configuration problem, 1 an I/O
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import load_scenario, load_sweep
from .engine import run_scenario, serialize_trace, trace_document
from .errors import ConfigFileError, ConfigurationError
from .report import (
    format_table,
    render_figure,
    sweep_rows,
    theory_rows,
    write_csv,
    write_json_lines,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cachechannel",
        description=(
            "Simulate a covert timing channel between two isolated "
            "compartments that share a file-system block cache."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_required: bool) -> None:
        p.add_argument("--config", required=True, help="YAML scenario or sweep file")
        p.add_argument("--out", required=out_required, help="output file path")
        p.add_argument("--seed", type=int, default=None, help="override the configured RNG seed")
        p.add_argument(
            "--format",
            choices=["csv", "json-lines"],
            default="csv",
            help="tabular output format (default csv)",
        )

    p_theory = sub.add_parser("theory", help="closed-form report, no simulation")
    common(p_theory, out_required=False)

    p_sim = sub.add_parser("simulate", help="run one scenario and write its trace")
    common(p_sim, out_required=True)

    p_sweep = sub.add_parser("sweep", help="simulate every cache size and tabulate")
    common(p_sweep, out_required=True)
    p_sweep.add_argument(
        "--plot",
        default=None,
        help="figure path (default: output path with .png suffix)",
    )
    p_sweep.add_argument(
        "--no-plot",
        action="store_true",
        help="skip rendering the companion figure",
    )

    p_disrupt = sub.add_parser(
        "disrupt", help="run a disrupted scenario uncoded and repetition-coded"
    )
    common(p_disrupt, out_required=True)
    return parser


def _write_rows(rows, out: str | None, fmt: str) -> None:
    if out is None:
        return
    if fmt == "csv":
        write_csv(rows, out)
    else:
        write_json_lines(rows, out)


def _cmd_theory(args) -> int:
    spec = load_sweep(args.config, seed_override=args.seed)
    rows = theory_rows(spec)
    print(format_table(rows))
    _write_rows(rows, args.out, args.format)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config = load_scenario(args.config, seed_override=args.seed)
    trace = run_scenario(config)
    Path(args.out).write_text(serialize_trace(trace))
    m = trace.metrics
    print(
        f"total_time={m.total_time:.3f}s throughput={m.throughput:.3f}bit/s "
        f"ber={m.ber:.4f} bit_errors={m.bit_errors}"
    )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = load_sweep(args.config, seed_override=args.seed)
    rows = sweep_rows(spec)
    print(format_table(rows))
    _write_rows(rows, args.out, args.format)
    if not args.no_plot:
        plot_path = args.plot or str(Path(args.out).with_suffix(".png"))
        render_figure(rows, plot_path)
        print(f"figure written to {plot_path}")
    return EXIT_OK


def _cmd_disrupt(args) -> int:
    config = load_scenario(args.config, seed_override=args.seed)
    if config.disruptor is None:
        raise ConfigFileError(f"{args.config}: disrupt needs a 'disruptor' section")

    uncoded = dataclasses.replace(config, coding="none", message=list(config.message))
    coded = dataclasses.replace(config, coding="repetition3", message=list(config.message))
    trace_uncoded = run_scenario(uncoded)
    trace_coded = run_scenario(coded)

    document = {
        "ber_uncoded": trace_uncoded.metrics.ber,
        "ber_repetition3": trace_coded.metrics.ber,
        "total_time_uncoded": trace_uncoded.metrics.total_time,
        "total_time_repetition3": trace_coded.metrics.total_time,
        "uncoded": trace_document(trace_uncoded),
        "repetition3": trace_document(trace_coded),
    }
    Path(args.out).write_text(json.dumps(document, indent=2) + "\n")
    print(
        f"ber uncoded={trace_uncoded.metrics.ber:.4f} "
        f"repetition3={trace_coded.metrics.ber:.4f} "
        f"(times {trace_uncoded.metrics.total_time:.3f}s / "
        f"{trace_coded.metrics.total_time:.3f}s)"
    )
    return EXIT_OK


_COMMANDS = {
    "theory": _cmd_theory,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "disrupt": _cmd_disrupt,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigFileError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
