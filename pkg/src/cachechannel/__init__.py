"""Deterministic simulator for a covert timing channel over a shared block cache."""

from .cache import (
    BACKING_STORE_LIMIT_MB,
    BlockCache,
    BlockId,
    ReadOutcome,
    SimFile,
    evict_all_via_read,
)
from .codec import (
    Bits,
    SenderAction,
    SlotRecord,
    decode_repetition3,
    default_threshold,
    demodulate,
    encode_repetition3,
    format_bits,
    modulate,
    parse_bits,
)
from .engine import (
    ChannelMetrics,
    DisruptorConfig,
    ScenarioConfig,
    ScenarioRunner,
    SimEvent,
    SimulationTrace,
    divergence_adjust,
    receiver_probe,
    run_scenario,
    serialize_trace,
    trace_document,
    woodpecker_tick,
)
from .errors import ConfigFileError, ConfigurationError, FramingError
from .timing import (
    BLOCK_BYTES,
    BLOCK_MB,
    PhysicalParams,
    SchemeVariant,
    TheoryBreakdown,
    TimingParams,
    bit_time_basic,
    bit_time_frames,
    bit_time_optimized,
    default_wait_period,
    fit_params_from_observation,
    mixed_message_theoretical_time,
    safety_time,
    throughput,
    to_seconds,
    to_us,
    total_time_basic,
    total_time_optimized,
)

__version__ = "0.1.0"
