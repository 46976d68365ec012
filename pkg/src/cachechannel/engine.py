"""Deterministic discrete-event execution of the covert-channel protocol.

The virtual clock counts integer microseconds.  Up to three actors (an
optional cache-clearing disruptor, the sender, the receiver) share one
backing medium: read requests are granted oldest first, with ties broken by
the fixed priority disruptor, then sender, then receiver, so a run is a pure
function of its configuration and seed.  Waits never occupy the medium.

The receiver's file is warmed once before the first slot.  The slotted
variant does this during setup (negative timestamps, not charged); the
pipelined variant charges the warming read to the transmission, which is
exactly the one extra receiver read its total-time formula carries.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Callable

from .cache import BlockCache, SimFile
from .codec import (
    Bits,
    SlotRecord,
    decode_repetition3,
    demodulate,
    encode_repetition3,
    format_bits,
    validate_bits,
)
from .errors import ConfigurationError
from .timing import (
    BLOCK_MB,
    PhysicalParams,
    SchemeVariant,
    TimingParams,
    frame_us,
    read_duration_us,
    to_seconds,
    to_us,
)

CODING_NONE = "none"
CODING_REPETITION3 = "repetition3"

_PRIORITY = {"disruptor": 0, "sender": 1, "receiver": 2}

JitterFn = Callable[[str, random.Random], float]


@dataclass(frozen=True)
class DisruptorConfig:
    """Periodic cache-clearing reader running beside the channel."""

    interval_s: float
    file_mb: float
    start_offset_s: float = 0.0

    def __post_init__(self) -> None:
        if self.interval_s <= 0:
            raise ConfigurationError("disruptor interval must be positive")
        if self.file_mb <= 0:
            raise ConfigurationError("disruptor file must not be empty")
        if self.start_offset_s < 0:
            raise ConfigurationError("disruptor start offset must be non-negative")


@dataclass
class ScenarioConfig:
    """Everything one run needs; equal configs with equal seeds replay identically."""

    physical: PhysicalParams
    timing: TimingParams
    variant: SchemeVariant
    message: Bits
    coding: str = CODING_NONE
    jitter_fraction: float = 0.0
    rng_seed: int = 0
    disruptor: DisruptorConfig | None = None
    per_bit_overhead: float = 0.0
    divergence_tolerance: float | None = None

    def validate(self) -> None:
        validate_bits(self.message)
        if self.coding not in (CODING_NONE, CODING_REPETITION3):
            raise ConfigurationError(f"unknown coding {self.coding!r}")
        if not 0.0 <= self.jitter_fraction < 0.5:
            raise ConfigurationError(
                "jitter_fraction must lie in [0, 0.5) to keep hits and misses separable"
            )
        if self.per_bit_overhead < 0:
            raise ConfigurationError("per_bit_overhead must be non-negative")
        if self.variant is SchemeVariant.OPTIMIZED and not self.message:
            raise ConfigurationError(
                "the pipelined variant needs a non-empty message"
            )
        cache_blocks = self.physical.cache_mb / BLOCK_MB
        if cache_blocks != int(cache_blocks):
            raise ConfigurationError(
                "cache_mb must be a whole number of blocks so the sender file "
                "can cover the cache exactly"
            )
        if self.physical.receiver_read_mb > self.physical.cache_mb:
            raise ConfigurationError(
                "receiver file must fit in the cache or probes always miss"
            )
        if self.disruptor is not None and self.disruptor.file_mb > self.physical.cache_mb:
            raise ConfigurationError("disruptor file must not exceed the cache size")
        if self.divergence_tolerance is not None and self.divergence_tolerance <= 0:
            raise ConfigurationError("divergence_tolerance must be positive")

    @property
    def resolved_divergence_tolerance(self) -> float:
        """Explicit tolerance, or half of one block-miss time."""
        if self.divergence_tolerance is not None:
            return self.divergence_tolerance
        return BLOCK_MB / (2.0 * self.physical.backing_rate)

    def channel_bits(self) -> Bits:
        if self.coding == CODING_REPETITION3:
            return encode_repetition3(self.message)
        return list(self.message)


@dataclass(frozen=True)
class SimEvent:
    """One timed action of one actor on the virtual clock (seconds)."""

    time: float
    actor: str
    action: str
    duration: float
    blocks_touched: int

    @property
    def end(self) -> float:
        return self.time + self.duration


@dataclass
class ChannelMetrics:
    total_time: float
    throughput: float
    bit_errors: int
    ber: float
    divergence_max: float


@dataclass
class SimulationTrace:
    config: ScenarioConfig
    events: list[SimEvent]
    slots: list[SlotRecord]
    decoded_message: Bits
    metrics: ChannelMetrics


def receiver_probe(
    clock: float,
    cache: BlockCache,
    receiver_file: SimFile,
    params: PhysicalParams,
    threshold: float,
    slot_index: int = 0,
    sent_bit: int | None = None,
    jitter_fraction: float = 0.0,
    rng: random.Random | None = None,
) -> SlotRecord:
    """Read the receiver file, measure it, and decode one bit.

    The read re-warms the file, so the next probe measures only evictions
    that happen after ``clock``.
    """
    outcome = cache.read_file(receiver_file, params)
    measured = outcome.duration
    if jitter_fraction > 0:
        if rng is None:
            raise ValueError("jitter requires a seeded random source")
        measured *= rng.uniform(1.0 - jitter_fraction, 1.0 + jitter_fraction)
    # Decide on the clock's microsecond quanta for both sides of the compare.
    measured = to_seconds(to_us(measured))
    threshold = to_seconds(to_us(threshold))
    return SlotRecord(
        slot_index=slot_index,
        sent_bit=sent_bit,
        measured_read_time=measured,
        threshold=threshold,
        decoded_bit=demodulate(measured, threshold),
    )


def woodpecker_tick(
    clock: float,
    cache: BlockCache,
    dconf: DisruptorConfig,
    file: SimFile,
    params: PhysicalParams,
) -> tuple[SimEvent, float]:
    """One disruptor pass: read its file through the shared cache.

    Returns the read event and the next tick's nominal time.
    """
    outcome = cache.read_file(file, params)
    event = SimEvent(
        time=clock,
        actor="disruptor",
        action="read",
        duration=outcome.duration,
        blocks_touched=file.n_blocks,
    )
    return event, clock + dconf.interval_s


@dataclass(frozen=True)
class DivergenceResult:
    adjusted_schedule: list[float]
    divergences: list[float]
    adjustments: list[int]
    divergence_max: float


def divergence_adjust(
    sender_schedule: list[float],
    receiver_schedule: list[float],
    tolerance: float,
) -> DivergenceResult:
    """Re-align a planned sender schedule to the receiver's actual slot starts.

    Divergence per slot is the receiver's drift from its initial offset
    against the (already adjusted) sender plan.  Whenever it exceeds the
    tolerance in magnitude, the sender inserts (or removes) that much wait
    before all later slots, which resets the running divergence.
    """
    if len(sender_schedule) != len(receiver_schedule):
        raise ValueError("schedules must have equal length")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if not sender_schedule:
        return DivergenceResult([], [], [], 0.0)
    offset = receiver_schedule[0] - sender_schedule[0]
    shift = 0.0
    adjusted: list[float] = []
    divergences: list[float] = []
    adjustments: list[int] = []
    for i, (planned, actual) in enumerate(zip(sender_schedule, receiver_schedule)):
        slot_start = planned + shift
        adjusted.append(slot_start)
        div = (actual - slot_start) - offset
        divergences.append(div)
        if abs(div) > tolerance:
            shift += div
            adjustments.append(i)
    return DivergenceResult(
        adjusted_schedule=adjusted,
        divergences=divergences,
        adjustments=adjustments,
        divergence_max=max(abs(d) for d in divergences),
    )


class ScenarioRunner:
    """Executes one scenario on the virtual clock.

    ``jitter_fn(actor, rng)`` overrides the jitter multiplier per read; the
    default is the configured multiplicative uniform draw.  The hook exists
    for calibrated-drift tests.
    """

    def __init__(self, config: ScenarioConfig, jitter_fn: JitterFn | None = None) -> None:
        config.validate()
        self.config = config
        self.params = config.physical
        self.timing = config.timing
        self.rng = random.Random(config.rng_seed)
        self.jitter_fn = jitter_fn

        self.cache = BlockCache.from_mb(self.params.cache_mb)
        self.sender_file = SimFile.from_mb("sender", self.params.cache_mb, "high")
        self.receiver_file = SimFile.from_mb("receiver", self.params.receiver_read_mb, "low")
        self.disruptor_file = (
            SimFile.from_mb("disruptor", config.disruptor.file_mb, "guard")
            if config.disruptor
            else None
        )

        # Receiver decisions use the same microsecond quanta as the clock.
        self.threshold_s = to_seconds(to_us(self.timing.threshold))
        self.overhead_us = to_us(config.per_bit_overhead)
        self.tolerance_us = to_us(config.resolved_divergence_tolerance)

        self.medium_free_us = 0
        self.disruptor_next_us: int | None = (
            to_us(config.disruptor.start_offset_s) if config.disruptor else None
        )
        self.interval_us = to_us(config.disruptor.interval_s) if config.disruptor else 0

        # (time_us, priority, seq, actor, action, duration_us, blocks)
        self._raw_events: list[tuple[int, int, int, str, str, int, int]] = []
        self._seq = 0
        self.slots: list[SlotRecord] = []
        self.divergence_max_us = 0

    # ------------------------------------------------------------------
    # primitives

    def _multiplier(self, actor: str) -> float:
        if self.jitter_fn is not None:
            return self.jitter_fn(actor, self.rng)
        j = self.config.jitter_fraction
        if j == 0:
            return 1.0
        return self.rng.uniform(1.0 - j, 1.0 + j)

    def _emit(self, time_us: int, actor: str, action: str, duration_us: int, blocks: int) -> None:
        self._raw_events.append(
            (time_us, _PRIORITY[actor], self._seq, actor, action, duration_us, blocks)
        )
        self._seq += 1

    def _run_tick(self) -> None:
        assert self.disruptor_next_us is not None and self.disruptor_file is not None
        request = self.disruptor_next_us
        start = max(request, self.medium_free_us)
        outcome = self.cache.read_file(self.disruptor_file, self.params)
        duration = to_us(outcome.duration * self._multiplier("disruptor"))
        self._emit(start, "disruptor", "read", duration, self.disruptor_file.n_blocks)
        self.medium_free_us = start + duration
        # One pending request at a time keeps the queue finite when the
        # interval is shorter than the read itself.
        self.disruptor_next_us = max(request + self.interval_us, start + duration)

    def _drain_disruptor(self, request_us: int, priority: int) -> None:
        while self.disruptor_next_us is not None and (
            self.disruptor_next_us < request_us
            or (self.disruptor_next_us == request_us and _PRIORITY["disruptor"] < priority)
        ):
            self._run_tick()

    def _read(self, actor: str, file: SimFile, request_us: int) -> tuple[int, int, float]:
        """Grant a read oldest-request-first; returns (start, end, measured seconds)."""
        self._drain_disruptor(request_us, _PRIORITY[actor])
        start = max(request_us, self.medium_free_us)
        outcome = self.cache.read_file(file, self.params)
        duration = to_us(outcome.duration * self._multiplier(actor))
        self._emit(start, actor, "read", duration, file.n_blocks)
        self.medium_free_us = start + duration
        return start, start + duration, to_seconds(duration)

    def _wait(self, actor: str, start_us: int, duration_us: int) -> None:
        if duration_us > 0:
            self._emit(start_us, actor, "wait", duration_us, 0)

    def _probe(self, slot_index: int, sent_bit: int, request_us: int) -> int:
        start, end, measured = self._read("receiver", self.receiver_file, request_us)
        self.slots.append(
            SlotRecord(
                slot_index=slot_index,
                sent_bit=sent_bit,
                measured_read_time=measured,
                threshold=self.threshold_s,
                decoded_bit=demodulate(measured, self.threshold_s),
            )
        )
        return end

    # ------------------------------------------------------------------
    # schedules

    def _run_basic(self, channel_bits: Bits) -> int:
        """Fixed slots: sender frame then receiver frame, both safety-padded."""
        # Warm the receiver file during setup; the transmission starts at 0.
        outcome = self.cache.read_file(self.receiver_file, self.params)
        warm_us = to_us(outcome.duration * self._multiplier("receiver"))
        self._emit(-warm_us, "receiver", "read", warm_us, self.receiver_file.n_blocks)

        sf = self.timing.safety_fraction
        sender_frame_us = frame_us(self.timing.sender_frame, sf)
        receiver_frame_us = frame_us(self.timing.receiver_frame, sf)
        slot_us = sender_frame_us + receiver_frame_us + self.overhead_us

        sender_free = 0
        receiver_free = 0
        for i, bit in enumerate(channel_bits):
            grid = i * slot_us
            if bit == 1:
                request = max(grid, sender_free)
                _, sender_free, _ = self._read("sender", self.sender_file, request)
            else:
                start = max(grid, sender_free)
                self._wait("sender", start, sender_frame_us)
                sender_free = start + sender_frame_us
            probe_request = max(grid + sender_frame_us, receiver_free)
            probe_end = self._probe(i, bit, probe_request)
            slot_end = grid + slot_us
            if slot_end > probe_end:
                # Receiver sits out the rest of its frame.
                self._wait("receiver", probe_end, slot_end - probe_end)
            receiver_free = max(probe_end, slot_end)
        return receiver_free

    def _run_optimized(self, channel_bits: Bits) -> int:
        """Back-to-back windows, no safety margins, warming read charged."""
        warm_request = 0
        _, warm_end, _ = self._read("receiver", self.receiver_file, warm_request)

        send_us = read_duration_us(self.params.cache_mb, 0.0, self.params)
        probe_miss_us = read_duration_us(self.params.receiver_read_mb, 0.0, self.params)
        probe_hit_us = read_duration_us(0.0, self.params.receiver_read_mb, self.params)
        wait_us = to_us(self.timing.wait_period)
        warm_nominal_us = probe_miss_us

        nominal_next = warm_nominal_us + self.overhead_us
        receiver_free = warm_end
        for i, bit in enumerate(channel_bits):
            sender_start = receiver_free + self.overhead_us
            divergence = sender_start - nominal_next
            self.divergence_max_us = max(self.divergence_max_us, abs(divergence))
            if abs(divergence) > self.tolerance_us:
                # Sender re-aligns its plan to the pace actually observed.
                self._emit(sender_start, "sender", "realign", 0, 0)
                nominal_next = sender_start
            if bit == 1:
                _, sender_end, _ = self._read("sender", self.sender_file, sender_start)
                nominal_next += send_us + probe_miss_us + self.overhead_us
            else:
                self._wait("sender", sender_start, wait_us)
                sender_end = sender_start + wait_us
                nominal_next += wait_us + probe_hit_us + self.overhead_us
            receiver_free = self._probe(i, bit, sender_end)
        return receiver_free

    # ------------------------------------------------------------------

    def run(self) -> SimulationTrace:
        channel_bits = self.config.channel_bits()
        if self.config.variant is SchemeVariant.BASIC:
            total_us = self._run_basic(channel_bits)
        else:
            total_us = self._run_optimized(channel_bits)

        received = [slot.decoded_bit for slot in self.slots]
        if self.config.coding == CODING_REPETITION3:
            decoded = decode_repetition3(received)
        else:
            decoded = received

        message = self.config.message
        bit_errors = sum(1 for a, b in zip(decoded, message) if a != b)
        total_s = to_seconds(total_us)
        metrics = ChannelMetrics(
            total_time=total_s,
            throughput=len(message) / total_s if total_s > 0 and message else 0.0,
            bit_errors=bit_errors,
            ber=bit_errors / len(message) if message else 0.0,
            divergence_max=to_seconds(self.divergence_max_us),
        )

        ordered = sorted(self._raw_events, key=lambda e: (e[0], e[1], e[2]))
        events = [
            SimEvent(
                time=to_seconds(t),
                actor=actor,
                action=action,
                duration=to_seconds(d),
                blocks_touched=blocks,
            )
            for (t, _, _, actor, action, d, blocks) in ordered
        ]
        return SimulationTrace(
            config=self.config,
            events=events,
            slots=self.slots,
            decoded_message=decoded,
            metrics=metrics,
        )


def run_scenario(config: ScenarioConfig, jitter_fn: JitterFn | None = None) -> SimulationTrace:
    """Execute one scenario; identical config and seed give identical traces."""
    return ScenarioRunner(config, jitter_fn=jitter_fn).run()


# ----------------------------------------------------------------------
# trace serialization (stable field order, byte-identical across reruns)


def config_document(config: ScenarioConfig) -> dict:
    phys = config.physical
    timing = config.timing
    doc: dict = {
        "physical": {
            "cache_mb": phys.cache_mb,
            "backing_rate": phys.backing_rate,
            "ram_rate": phys.ram_rate,
            "receiver_read_mb": phys.receiver_read_mb,
        },
        "timing": {
            "sender_frame": timing.sender_frame,
            "receiver_frame": timing.receiver_frame,
            "wait_period": timing.wait_period,
            "threshold": timing.threshold,
            "safety_fraction": timing.safety_fraction,
        },
        "variant": config.variant.value,
        "message": format_bits(config.message),
        "coding": config.coding,
        "jitter_fraction": config.jitter_fraction,
        "rng_seed": config.rng_seed,
        "per_bit_overhead": config.per_bit_overhead,
        "divergence_tolerance": config.resolved_divergence_tolerance,
        "disruptor": None,
    }
    if config.disruptor is not None:
        doc["disruptor"] = {
            "interval_s": config.disruptor.interval_s,
            "file_mb": config.disruptor.file_mb,
            "start_offset_s": config.disruptor.start_offset_s,
        }
    return doc


def trace_document(trace: SimulationTrace) -> dict:
    return {
        "config": config_document(trace.config),
        "events": [
            {
                "time": e.time,
                "actor": e.actor,
                "action": e.action,
                "duration": e.duration,
                "blocks_touched": e.blocks_touched,
            }
            for e in trace.events
        ],
        "slots": [
            {
                "slot_index": s.slot_index,
                "sent_bit": s.sent_bit,
                "measured_read_time": s.measured_read_time,
                "threshold": s.threshold,
                "decoded_bit": s.decoded_bit,
            }
            for s in trace.slots
        ],
        "decoded_message": format_bits(trace.decoded_message),
        "metrics": {
            "total_time": trace.metrics.total_time,
            "throughput": trace.metrics.throughput,
            "bit_errors": trace.metrics.bit_errors,
            "ber": trace.metrics.ber,
            "divergence_max": trace.metrics.divergence_max,
        },
    }


def serialize_trace(trace: SimulationTrace) -> str:
    return json.dumps(trace_document(trace), indent=2) + "\n"
