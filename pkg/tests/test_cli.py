"""CLI subcommands, config validation, and report reproducibility."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from cachechannel import parse_bits
from cachechannel.cli import main
from cachechannel.config import load_scenario, load_sweep, scenario_for_row
from cachechannel.errors import ConfigFileError
from cachechannel.report import CSV_COLUMNS
from conftest import N_BITS, REFERENCE_ROWS

REPO_CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SCENARIO_YAML = """\
physical:
  cache_mb: 2.0
  backing_rate_mb_s: 6.849315068493151
variant: optimized
message:
  bits: "{bits}"
timing:
  wait_period_s: 0.125
rng_seed: 3
"""

SWEEP_YAML = """\
message:
  n_ones: 27
  n_zeros: 37
  arrangement_seed: 7
base:
  variant: optimized
  rng_seed: 42
rows:
  - {cache_mb: 2, read_time_s: 0.292}
  - {cache_mb: 4, read_time_s: 0.566}
  - {cache_mb: 8, read_time_s: 1.122}
  - {cache_mb: 16, read_time_s: 2.224}
  - {cache_mb: 32, read_time_s: 4.473}
  - {cache_mb: 64, read_time_s: 8.810}
"""

DISRUPT_YAML = """\
physical:
  cache_mb: 2.0
  backing_rate_mb_s: 6.849315068493151
variant: basic
message:
  bits: "00000000000000000000"
timing:
  safety_fraction: 0.0
disruptor:
  interval_s: 2.19
  file_mb: 2.0
  start_offset_s: 0.876
rng_seed: 42
"""


def write(path: Path, text: str) -> str:
    path.write_text(text)
    return str(path)


def test_theory_reproduces_reference_totals(tmp_path, capsys):
    config = write(tmp_path / "sweep.yaml", SWEEP_YAML)
    out = tmp_path / "theory.csv"
    assert main(["theory", "--config", config, "--out", str(out)]) == 0
    table = capsys.readouterr().out
    assert "theor_total_s" in table

    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + len(REFERENCE_ROWS)
    for line, row in zip(lines[1:], REFERENCE_ROWS):
        cells = line.split(",")
        assert float(cells[0]) == row.cache_mb
        total = float(cells[5])
        assert total == pytest.approx(row.theor_total_s, rel=0.02)
        assert cells[6] == ""  # nothing simulated
        assert float(cells[7]) == pytest.approx(N_BITS / total, rel=1e-2)


def test_theory_doubling_cache_roughly_doubles_one_bit_cost(tmp_path):
    config = write(tmp_path / "sweep.yaml", SWEEP_YAML)
    spec = load_sweep(config)
    from cachechannel.report import theory_rows

    rows = theory_rows(spec)
    for a, b in zip(rows, rows[1:]):
        ratio = b.theor_1bits_s / a.theor_1bits_s
        assert 1.5 < ratio < 2.5


def test_theory_with_no_ones_has_zero_ones_time(tmp_path):
    yaml_text = SWEEP_YAML.replace("n_ones: 27", "n_ones: 0")
    config = write(tmp_path / "sweep.yaml", yaml_text)
    from cachechannel.report import theory_rows

    rows = theory_rows(load_sweep(config))
    assert all(row.theor_1bits_s == 0.0 for row in rows)


def test_simulate_writes_trace_and_summary(tmp_path, capsys):
    bits = "1" * 64
    config = write(tmp_path / "scenario.yaml", SCENARIO_YAML.format(bits=bits))
    out = tmp_path / "trace.json"
    assert main(["simulate", "--config", config, "--out", str(out)]) == 0
    summary = capsys.readouterr().out
    assert "ber=0.0000" in summary

    document = json.loads(out.read_text())
    assert document["decoded_message"] == bits
    assert document["metrics"]["ber"] == 0.0
    # 64 one-bits through the calibrated 2 MB cache: ~2.27 bit/s.
    assert document["metrics"]["throughput"] == pytest.approx(2.27, rel=1e-2)
    assert [e["actor"] for e in document["events"][:2]] == ["receiver", "sender"]


def test_simulate_is_reproducible_byte_for_byte(tmp_path):
    config = write(tmp_path / "scenario.yaml", SCENARIO_YAML.format(bits="10110"))
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["simulate", "--config", config, "--out", str(out1)]) == 0
    assert main(["simulate", "--config", config, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    text = SCENARIO_YAML.format(bits="101101") + "jitter_fraction: 0.2\n"
    config = write(tmp_path / "scenario.yaml", text)
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["simulate", "--config", config, "--out", str(out1), "--seed", "1"]) == 0
    assert main(["simulate", "--config", config, "--out", str(out2), "--seed", "2"]) == 0
    doc1, doc2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    assert doc1["config"]["rng_seed"] == 1
    assert doc1["metrics"]["total_time"] != doc2["metrics"]["total_time"]


def test_sweep_writes_csv_and_figure(tmp_path):
    config = write(tmp_path / "sweep.yaml", SWEEP_YAML)
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", config, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    for line, row in zip(lines[1:], REFERENCE_ROWS):
        cells = line.split(",")
        assert float(cells[5]) == pytest.approx(row.theor_total_s, rel=0.02)
        assert cells[6] != ""
        assert float(cells[8]) == 0.0  # noiseless sweep decodes cleanly
    figure = tmp_path / "sweep.png"
    assert figure.exists() and figure.stat().st_size > 0


def test_sweep_rerun_is_byte_identical_and_no_plot_skips_figure(tmp_path):
    config = write(tmp_path / "sweep.yaml", SWEEP_YAML)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", config, "--out", str(out1), "--no-plot"]) == 0
    assert main(["sweep", "--config", config, "--out", str(out2), "--no-plot"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert not (tmp_path / "a.png").exists()


def test_sweep_json_lines_format(tmp_path):
    config = write(tmp_path / "sweep.yaml", SWEEP_YAML)
    out = tmp_path / "sweep.jsonl"
    assert main(["sweep", "--config", config, "--out", str(out), "--no-plot",
                 "--format", "json-lines"]) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(records) == len(REFERENCE_ROWS)
    assert list(records[0]) == CSV_COLUMNS
    assert records[0]["cache_size_mb"] == 2
    for record in records:
        assert record["theor_total_s"] == record["theor_1bits_s"] + record["theor_0bits_s"]


def test_sweep_sim_totals_grow_with_overhead(tmp_path):
    plain = write(tmp_path / "plain.yaml", SWEEP_YAML)
    padded = write(
        tmp_path / "padded.yaml",
        SWEEP_YAML.replace("rng_seed: 42", "rng_seed: 42\n  per_bit_overhead_s: 0.05"),
    )
    spec_plain, spec_padded = load_sweep(plain), load_sweep(padded)
    from cachechannel.report import sweep_rows

    n_bits = spec_plain.n_bits
    for a, b in zip(sweep_rows(spec_plain), sweep_rows(spec_padded)):
        assert b.sim_total_s == pytest.approx(a.sim_total_s + 0.05 * n_bits, abs=1e-9)
        assert b.sim_total_s >= b.theor_total_s


def test_disrupt_reports_both_codings(tmp_path, capsys):
    config = write(tmp_path / "disrupt.yaml", DISRUPT_YAML)
    out = tmp_path / "disrupt.json"
    assert main(["disrupt", "--config", config, "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "uncoded=" in printed and "repetition3=" in printed

    document = json.loads(out.read_text())
    assert document["ber_uncoded"] == pytest.approx(0.2)
    assert document["ber_repetition3"] == 0.0
    assert document["total_time_repetition3"] == pytest.approx(
        3 * document["total_time_uncoded"]
    )


def test_disrupt_requires_a_disruptor_section(tmp_path, capsys):
    config = write(tmp_path / "scenario.yaml", SCENARIO_YAML.format(bits="101"))
    assert main(["disrupt", "--config", config, "--out", str(tmp_path / "x.json")]) == 2
    assert "disruptor" in capsys.readouterr().err


def test_unknown_keys_are_rejected_with_field_path(tmp_path, capsys):
    bad = SCENARIO_YAML.format(bits="101").replace("rng_seed", "rngseed")
    config = write(tmp_path / "scenario.yaml", bad)
    assert main(["simulate", "--config", config, "--out", str(tmp_path / "t.json")]) == 2
    err = capsys.readouterr().err
    assert "rngseed" in err


def test_malformed_yaml_and_missing_file_exit_with_config_error(tmp_path, capsys):
    config = write(tmp_path / "broken.yaml", "physical: [unclosed")
    assert main(["simulate", "--config", config, "--out", str(tmp_path / "t.json")]) == 2
    assert main(["simulate", "--config", str(tmp_path / "absent.yaml"),
                 "--out", str(tmp_path / "t.json")]) == 2
    capsys.readouterr()


def test_unwritable_output_exits_with_io_error(tmp_path, capsys):
    config = write(tmp_path / "scenario.yaml", SCENARIO_YAML.format(bits="101"))
    assert main(["simulate", "--config", config, "--out", str(tmp_path)]) == 1
    capsys.readouterr()


def test_message_spec_validation(tmp_path):
    both = SCENARIO_YAML.format(bits="101").replace(
        'bits: "101"', 'bits: "101"\n  n_ones: 3'
    )
    with pytest.raises(ConfigFileError):
        load_scenario(write(tmp_path / "both.yaml", both))
    neither = SCENARIO_YAML.format(bits="101").replace('  bits: "101"\n', "")
    with pytest.raises(ConfigFileError):
        load_scenario(write(tmp_path / "neither.yaml", neither))


def test_counted_message_is_a_seeded_shuffle(tmp_path):
    config = write(tmp_path / "sweep.yaml", SWEEP_YAML)
    spec1 = load_sweep(config)
    spec2 = load_sweep(config)
    assert spec1.message == spec2.message
    assert sum(spec1.message) == 27 and len(spec1.message) == 64


def test_empty_row_list_is_rejected(tmp_path):
    text = SWEEP_YAML.split("rows:")[0] + "rows: []\n"
    with pytest.raises(ConfigFileError):
        load_sweep(write(tmp_path / "sweep.yaml", text))


def test_shipped_configs_load_and_run(tmp_path):
    scenario = load_scenario(REPO_CONFIGS / "pipelined_2mb.yaml")
    assert scenario.message == parse_bits("1" * 64)
    load_scenario(REPO_CONFIGS / "slotted_2mb.yaml")
    load_scenario(REPO_CONFIGS / "woodpecker_2mb.yaml")
    spec = load_sweep(REPO_CONFIGS / "reference_sweep.yaml")
    scenario_for_row(spec, spec.rows[0]).validate()
