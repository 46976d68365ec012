"""Tabular reports for theory runs and cache-size sweeps.

Column set and order are fixed; rerunning the same spec reproduces the output
byte for byte.  Seconds and bit/s are written with three decimals, BER with
four.  The sweep's companion figure plots theoretical against simulated
transmission time over the cache sizes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .config import SweepSpec, scenario_for_row
from .engine import run_scenario
from .timing import mixed_message_theoretical_time, throughput

CSV_COLUMNS = [
    "cache_size_mb",
    "read_time_s",
    "wait_period_s",
    "theor_1bits_s",
    "theor_0bits_s",
    "theor_total_s",
    "sim_total_s",
    "performance_bit_s",
    "ber",
]


@dataclass(frozen=True)
class ReportRow:
    """One cache size: theoretical breakdown, and simulated totals when run."""

    cache_size_mb: float
    read_time_s: float
    wait_period_s: float
    theor_1bits_s: float
    theor_0bits_s: float
    theor_total_s: float
    sim_total_s: float | None
    performance_bit_s: float
    ber: float | None


def _theory_parts(spec: SweepSpec, row) -> tuple[float, float, float]:
    breakdown = mixed_message_theoretical_time(
        spec.n_ones, spec.n_zeros, row.read_time_s, row.wait_period
    )
    return breakdown.ones_time, breakdown.zeros_time, breakdown.total


def theory_rows(spec: SweepSpec) -> list[ReportRow]:
    """Closed-form rows only; nothing is simulated."""
    rows = []
    for row in sorted(spec.rows, key=lambda r: r.cache_mb):
        ones, zeros, total = _theory_parts(spec, row)
        rows.append(
            ReportRow(
                cache_size_mb=row.cache_mb,
                read_time_s=row.read_time_s,
                wait_period_s=row.wait_period,
                theor_1bits_s=ones,
                theor_0bits_s=zeros,
                theor_total_s=total,
                sim_total_s=None,
                performance_bit_s=throughput(spec.n_bits, total),
                ber=None,
            )
        )
    return rows


def sweep_rows(spec: SweepSpec) -> list[ReportRow]:
    """Theory columns plus a full simulation per cache size."""
    rows = []
    for row in sorted(spec.rows, key=lambda r: r.cache_mb):
        ones, zeros, total = _theory_parts(spec, row)
        trace = run_scenario(scenario_for_row(spec, row))
        rows.append(
            ReportRow(
                cache_size_mb=row.cache_mb,
                read_time_s=row.read_time_s,
                wait_period_s=row.wait_period,
                theor_1bits_s=ones,
                theor_0bits_s=zeros,
                theor_total_s=total,
                sim_total_s=trace.metrics.total_time,
                performance_bit_s=trace.metrics.throughput,
                ber=trace.metrics.ber,
            )
        )
    return rows


def _fmt(value: float | None, decimals: int = 3) -> str:
    if value is None:
        return ""
    return f"{value:.{decimals}f}"


def _row_cells(row: ReportRow) -> list[str]:
    return [
        f"{row.cache_size_mb:g}",
        _fmt(row.read_time_s),
        _fmt(row.wait_period_s),
        _fmt(row.theor_1bits_s),
        _fmt(row.theor_0bits_s),
        _fmt(row.theor_total_s),
        _fmt(row.sim_total_s),
        _fmt(row.performance_bit_s),
        _fmt(row.ber, 4),
    ]


def write_csv(rows: list[ReportRow], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(_row_cells(row))


def write_json_lines(rows: list[ReportRow], path: str | Path) -> None:
    with open(path, "w") as handle:
        for row in rows:
            record = {
                "cache_size_mb": row.cache_size_mb,
                "read_time_s": row.read_time_s,
                "wait_period_s": row.wait_period_s,
                "theor_1bits_s": row.theor_1bits_s,
                "theor_0bits_s": row.theor_0bits_s,
                "theor_total_s": row.theor_total_s,
                "sim_total_s": row.sim_total_s,
                "performance_bit_s": row.performance_bit_s,
                "ber": row.ber,
            }
            handle.write(json.dumps(record) + "\n")


def format_table(rows: list[ReportRow]) -> str:
    widths = [len(name) + 2 for name in CSV_COLUMNS]
    header = "".join(name.rjust(w) for name, w in zip(CSV_COLUMNS, widths))
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append("".join(cell.rjust(w) for cell, w in zip(_row_cells(row), widths)))
    return "\n".join(lines)


def render_figure(rows: list[ReportRow], path: str | Path) -> None:
    """Transmission time against cache size, theory beside simulation."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sizes = [row.cache_size_mb for row in rows]
    theor = [row.theor_total_s for row in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(sizes, theor, "o-", label="theoretical")
    sim = [row.sim_total_s for row in rows]
    if all(value is not None for value in sim):
        ax.plot(sizes, sim, "s--", label="simulated")
    ax.set_xlabel("cache size (MB)")
    ax.set_ylabel("transmission time (s)")
    ax.set_title("Transmission time by cache size")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
