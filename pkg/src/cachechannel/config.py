"""YAML scenario and sweep files.

One canonical schema, documented in the README.  Unknown keys are rejected
with the offending field path so a typo cannot silently change a run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

import yaml

from .codec import Bits, parse_bits
from .engine import DisruptorConfig, ScenarioConfig
from .errors import ConfigFileError, ConfigurationError
from .timing import (
    DEFAULT_RAM_RATE,
    DEFAULT_SAFETY_FRACTION,
    PhysicalParams,
    SchemeVariant,
    TimingParams,
    default_wait_period,
)

_PHYSICAL_KEYS = {"cache_mb", "backing_rate_mb_s", "ram_rate_mb_s", "receiver_read_mb"}
_TIMING_KEYS = {"safety_fraction", "wait_period_s", "threshold_s"}
_MESSAGE_KEYS = {"bits", "n_ones", "n_zeros", "arrangement_seed"}
_DISRUPTOR_KEYS = {"interval_s", "file_mb", "start_offset_s"}
_SCENARIO_KEYS = {
    "physical",
    "timing",
    "variant",
    "message",
    "coding",
    "jitter_fraction",
    "rng_seed",
    "per_bit_overhead_s",
    "divergence_tolerance_s",
    "disruptor",
}
_SWEEP_KEYS = {"message", "base", "rows"}
_BASE_KEYS = {
    "variant",
    "coding",
    "rng_seed",
    "jitter_fraction",
    "per_bit_overhead_s",
    "divergence_tolerance_s",
    "safety_fraction",
    "threshold_s",
    "ram_rate_mb_s",
    "receiver_read_mb",
}
_ROW_KEYS = {"cache_mb", "read_time_s", "wait_period_s"}


def _require_mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigFileError(f"{path}: expected a key-value mapping")
    return node


def _check_keys(mapping: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigFileError(f"{path}: unknown key(s) {', '.join(unknown)}")


def _load_yaml(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigFileError(f"{path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigFileError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigFileError(f"{path}: top level must be a mapping")
    return data


def build_message(node, path: str = "message") -> Bits:
    """Literal bit string, or shuffled counts with a recorded arrangement seed."""
    node = _require_mapping(node, path)
    _check_keys(node, _MESSAGE_KEYS, path)
    has_bits = "bits" in node
    has_counts = "n_ones" in node or "n_zeros" in node
    if has_bits and has_counts:
        raise ConfigFileError(f"{path}: give either 'bits' or counts, not both")
    if has_bits:
        try:
            return parse_bits(str(node["bits"]))
        except ValueError as exc:
            raise ConfigFileError(f"{path}.bits: {exc}") from exc
    if not has_counts:
        raise ConfigFileError(f"{path}: needs 'bits' or 'n_ones'/'n_zeros'")
    n_ones = int(node.get("n_ones", 0))
    n_zeros = int(node.get("n_zeros", 0))
    if n_ones < 0 or n_zeros < 0:
        raise ConfigFileError(f"{path}: bit counts must be non-negative")
    bits = [1] * n_ones + [0] * n_zeros
    random.Random(int(node.get("arrangement_seed", 0))).shuffle(bits)
    return bits


def message_counts(node, path: str = "message") -> tuple[int, int]:
    bits = build_message(node, path)
    ones = sum(bits)
    return ones, len(bits) - ones


def _physical_from(node, path: str) -> PhysicalParams:
    node = _require_mapping(node, path)
    _check_keys(node, _PHYSICAL_KEYS, path)
    for key in ("cache_mb", "backing_rate_mb_s"):
        if key not in node:
            raise ConfigFileError(f"{path}: missing required key '{key}'")
    try:
        return PhysicalParams(
            cache_mb=float(node["cache_mb"]),
            backing_rate=float(node["backing_rate_mb_s"]),
            ram_rate=float(node.get("ram_rate_mb_s", DEFAULT_RAM_RATE)),
            receiver_read_mb=float(node.get("receiver_read_mb", 1.0)),
        )
    except ConfigurationError as exc:
        raise ConfigFileError(f"{path}: {exc}") from exc


def _timing_from(node, params: PhysicalParams, path: str) -> TimingParams:
    if node is None:
        node = {}
    node = _require_mapping(node, path)
    _check_keys(node, _TIMING_KEYS, path)
    try:
        return TimingParams.derive(
            params,
            safety_fraction=float(node.get("safety_fraction", DEFAULT_SAFETY_FRACTION)),
            wait_period=(
                float(node["wait_period_s"]) if "wait_period_s" in node else None
            ),
            threshold=float(node["threshold_s"]) if "threshold_s" in node else None,
        )
    except ConfigurationError as exc:
        raise ConfigFileError(f"{path}: {exc}") from exc


def _variant_from(value, path: str) -> SchemeVariant:
    try:
        return SchemeVariant(str(value))
    except ValueError as exc:
        raise ConfigFileError(
            f"{path}: must be one of {[v.value for v in SchemeVariant]}"
        ) from exc


def scenario_from_mapping(data: dict, origin: str, seed_override: int | None = None) -> ScenarioConfig:
    _check_keys(data, _SCENARIO_KEYS, origin)
    for key in ("physical", "variant", "message"):
        if key not in data:
            raise ConfigFileError(f"{origin}: missing required key '{key}'")
    params = _physical_from(data["physical"], f"{origin}.physical")
    timing = _timing_from(data.get("timing"), params, f"{origin}.timing")
    disruptor = None
    if data.get("disruptor") is not None:
        dnode = _require_mapping(data["disruptor"], f"{origin}.disruptor")
        _check_keys(dnode, _DISRUPTOR_KEYS, f"{origin}.disruptor")
        for key in ("interval_s", "file_mb"):
            if key not in dnode:
                raise ConfigFileError(f"{origin}.disruptor: missing required key '{key}'")
        try:
            disruptor = DisruptorConfig(
                interval_s=float(dnode["interval_s"]),
                file_mb=float(dnode["file_mb"]),
                start_offset_s=float(dnode.get("start_offset_s", 0.0)),
            )
        except ConfigurationError as exc:
            raise ConfigFileError(f"{origin}.disruptor: {exc}") from exc
    tolerance = data.get("divergence_tolerance_s")
    config = ScenarioConfig(
        physical=params,
        timing=timing,
        variant=_variant_from(data["variant"], f"{origin}.variant"),
        message=build_message(data["message"], f"{origin}.message"),
        coding=str(data.get("coding", "none")),
        jitter_fraction=float(data.get("jitter_fraction", 0.0)),
        rng_seed=int(seed_override if seed_override is not None else data.get("rng_seed", 0)),
        disruptor=disruptor,
        per_bit_overhead=float(data.get("per_bit_overhead_s", 0.0)),
        divergence_tolerance=float(tolerance) if tolerance is not None else None,
    )
    try:
        config.validate()
    except ConfigurationError as exc:
        raise ConfigFileError(f"{origin}: {exc}") from exc
    return config


def load_scenario(path: str | Path, seed_override: int | None = None) -> ScenarioConfig:
    return scenario_from_mapping(_load_yaml(path), str(path), seed_override)


@dataclass(frozen=True)
class SweepRow:
    """One cache size with its observed full-cache read time."""

    cache_mb: float
    read_time_s: float
    wait_period_s: float | None = None

    @property
    def wait_period(self) -> float:
        if self.wait_period_s is not None:
            return self.wait_period_s
        return default_wait_period(self.cache_mb)


@dataclass
class SweepSpec:
    """A cache-size sweep: per-row calibration plus one shared message."""

    rows: list[SweepRow]
    message: Bits
    base: dict

    @property
    def n_bits(self) -> int:
        return len(self.message)

    @property
    def n_ones(self) -> int:
        return sum(self.message)

    @property
    def n_zeros(self) -> int:
        return len(self.message) - sum(self.message)


def load_sweep(path: str | Path, seed_override: int | None = None) -> SweepSpec:
    data = _load_yaml(path)
    origin = str(path)
    _check_keys(data, _SWEEP_KEYS, origin)
    for key in ("message", "rows"):
        if key not in data:
            raise ConfigFileError(f"{origin}: missing required key '{key}'")
    base = data.get("base") or {}
    base = _require_mapping(base, f"{origin}.base")
    _check_keys(base, _BASE_KEYS, f"{origin}.base")
    if seed_override is not None:
        base = dict(base, rng_seed=seed_override)

    rows_node = data["rows"]
    if not isinstance(rows_node, list) or not rows_node:
        raise ConfigFileError(f"{origin}.rows: needs a non-empty list")
    rows = []
    for i, row in enumerate(rows_node):
        row = _require_mapping(row, f"{origin}.rows[{i}]")
        _check_keys(row, _ROW_KEYS, f"{origin}.rows[{i}]")
        for key in ("cache_mb", "read_time_s"):
            if key not in row:
                raise ConfigFileError(f"{origin}.rows[{i}]: missing required key '{key}'")
        cache_mb = float(row["cache_mb"])
        read_time = float(row["read_time_s"])
        if cache_mb <= 0 or read_time <= 0:
            raise ConfigFileError(f"{origin}.rows[{i}]: sizes and times must be positive")
        rows.append(
            SweepRow(
                cache_mb=cache_mb,
                read_time_s=read_time,
                wait_period_s=(
                    float(row["wait_period_s"]) if "wait_period_s" in row else None
                ),
            )
        )
    return SweepSpec(
        rows=rows,
        message=build_message(data["message"], f"{origin}.message"),
        base=base,
    )


def scenario_for_row(spec: SweepSpec, row: SweepRow) -> ScenarioConfig:
    """Instantiate the sweep's base scenario at one cache size.

    The backing rate is calibrated from the row's observed read time, so the
    simulated eviction read reproduces it.
    """
    base = spec.base
    try:
        params = PhysicalParams(
            cache_mb=row.cache_mb,
            backing_rate=row.cache_mb / row.read_time_s,
            ram_rate=float(base.get("ram_rate_mb_s", DEFAULT_RAM_RATE)),
            receiver_read_mb=float(base.get("receiver_read_mb", 1.0)),
        )
        timing = TimingParams.derive(
            params,
            safety_fraction=float(base.get("safety_fraction", DEFAULT_SAFETY_FRACTION)),
            wait_period=row.wait_period,
            threshold=(
                float(base["threshold_s"]) if "threshold_s" in base else None
            ),
        )
        tolerance = base.get("divergence_tolerance_s")
        config = ScenarioConfig(
            physical=params,
            timing=timing,
            variant=SchemeVariant(str(base.get("variant", "optimized"))),
            message=list(spec.message),
            coding=str(base.get("coding", "none")),
            jitter_fraction=float(base.get("jitter_fraction", 0.0)),
            rng_seed=int(base.get("rng_seed", 0)),
            per_bit_overhead=float(base.get("per_bit_overhead_s", 0.0)),
            divergence_tolerance=float(tolerance) if tolerance is not None else None,
        )
        config.validate()
    except (ConfigurationError, ValueError) as exc:
        raise ConfigFileError(f"sweep row cache_mb={row.cache_mb}: {exc}") from exc
    return config
