"""Closed-form transmission timing for the covert channel.

Two scheme variants are modelled.  The slotted ("basic") scheme gives every
bit a fixed frame: the sender's full-cache eviction read plus a proportional
safety margin, followed by the receiver's probe read plus its margin.  The
pipelined ("optimized") scheme drops the safety margins, lets a short fixed
wait stand in for 0-bits, and pays for one extra receiver read over the whole
transmission.

Public functions take and return seconds.  Internally every duration is
quantised to integer microseconds through the helpers below; the simulator
uses the same quanta, so simulated totals and these formulas agree exactly
instead of drifting apart over long messages.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ConfigurationError

US_PER_SECOND = 1_000_000

BLOCK_BYTES = 512 * 1024
BLOCK_MB = 0.5

DEFAULT_RAM_RATE = 3000.0
DEFAULT_SAFETY_FRACTION = 0.10


def to_us(seconds: float) -> int:
    """Quantise a duration in seconds to whole microseconds."""
    return round(seconds * US_PER_SECOND)


def to_seconds(us: int) -> float:
    return us / US_PER_SECOND


class SchemeVariant(str, Enum):
    BASIC = "basic"
    OPTIMIZED = "optimized"


@dataclass(frozen=True)
class PhysicalParams:
    """Physical description of the shared cache and its backing store.

    cache_mb:         size of the shared block cache, MB.
    backing_rate:     read rate of the slow medium (disk/SSD), MB/s.
    ram_rate:         read rate for cache hits, MB/s; ``math.inf`` treats
                      hits as instantaneous (used for theory reproduction).
    receiver_read_mb: amount the receiver reads per probe, MB; must be a
                      whole number of blocks.
    """

    cache_mb: float
    backing_rate: float
    ram_rate: float = DEFAULT_RAM_RATE
    receiver_read_mb: float = 1.0

    def __post_init__(self) -> None:
        if self.cache_mb <= 0:
            raise ConfigurationError("cache_mb must be positive")
        if self.backing_rate <= 0:
            raise ConfigurationError("backing_rate must be positive")
        if not self.ram_rate > self.backing_rate:
            raise ConfigurationError(
                "ram_rate must exceed backing_rate, otherwise hits and "
                "misses are indistinguishable"
            )
        blocks = self.receiver_read_mb / BLOCK_MB
        if self.receiver_read_mb <= 0 or blocks != int(blocks):
            raise ConfigurationError(
                "receiver_read_mb must be a positive whole number of blocks"
            )

    @property
    def evict_time(self) -> float:
        """Seconds to stream the whole cache from the slow medium."""
        return self.cache_mb / self.backing_rate

    @property
    def probe_miss_time(self) -> float:
        """Seconds for a fully evicted receiver probe."""
        return self.receiver_read_mb / self.backing_rate

    @property
    def probe_hit_time(self) -> float:
        """Seconds for a fully resident receiver probe."""
        return self.receiver_read_mb / self.ram_rate


def read_duration_seconds(miss_mb: float, hit_mb: float, params: PhysicalParams) -> float:
    """Cost of one read: missed data at the backing rate, hits at RAM rate."""
    return miss_mb / params.backing_rate + hit_mb / params.ram_rate


def read_duration_us(miss_mb: float, hit_mb: float, params: PhysicalParams) -> int:
    return to_us(read_duration_seconds(miss_mb, hit_mb, params))


def default_wait_period(cache_mb: float) -> float:
    """Default 0-bit wait for the pipelined scheme, seconds.

    Empirical fit: one sixteenth of the cache size in MB, expressed in
    seconds (2 MB -> 0.125 s, ..., 64 MB -> 4.0 s).  Not derived from the
    timing model; override it freely.
    """
    return cache_mb / 16.0


@dataclass(frozen=True)
class TimingParams:
    """Protocol timing: nominal frames, safety margin, 0-bit wait, threshold.

    sender_frame / receiver_frame are the nominal read times the frames are
    sized for; the slotted scheme stretches both by ``safety_fraction``.
    ``wait_period`` is the pipelined scheme's 0-bit wait.  ``threshold`` is
    the receiver's hit/miss decision boundary in seconds.
    """

    sender_frame: float
    receiver_frame: float
    wait_period: float
    threshold: float
    safety_fraction: float = DEFAULT_SAFETY_FRACTION

    def __post_init__(self) -> None:
        if self.sender_frame <= 0 or self.receiver_frame <= 0:
            raise ConfigurationError("frame times must be positive")
        if self.wait_period < 0:
            raise ConfigurationError("wait_period must be non-negative")
        if self.threshold <= 0:
            raise ConfigurationError("threshold must be positive")
        if self.safety_fraction < 0:
            raise ConfigurationError("safety_fraction must be non-negative")

    @classmethod
    def derive(
        cls,
        params: PhysicalParams,
        safety_fraction: float = DEFAULT_SAFETY_FRACTION,
        wait_period: float | None = None,
        threshold: float | None = None,
    ) -> "TimingParams":
        """Fill frames from the physical model, defaulting wait and threshold."""
        if wait_period is None:
            wait_period = default_wait_period(params.cache_mb)
        if threshold is None:
            from .codec import default_threshold

            threshold = default_threshold(params)
        return cls(
            sender_frame=params.evict_time,
            receiver_frame=params.probe_miss_time,
            wait_period=wait_period,
            threshold=threshold,
            safety_fraction=safety_fraction,
        )


def safety_time(nominal: float, timing: TimingParams) -> float:
    """Proportional safety slack added to a nominal transfer time."""
    if nominal < 0:
        raise ConfigurationError("nominal duration must be non-negative")
    return timing.safety_fraction * nominal


def frame_us(nominal: float, safety_fraction: float) -> int:
    """A frame in microseconds: nominal time stretched by the safety margin."""
    return to_us(nominal * (1.0 + safety_fraction))


def bit_time_frames(sender_frame: float, receiver_frame: float, safety_fraction: float) -> float:
    """Per-bit time of the slotted scheme for explicit frame times."""
    return to_seconds(frame_us(sender_frame, safety_fraction) + frame_us(receiver_frame, safety_fraction))


def bit_time_basic(params: PhysicalParams, timing: TimingParams) -> float:
    """Per-bit time of the slotted scheme: both frames plus their margins."""
    return bit_time_frames(timing.sender_frame, timing.receiver_frame, timing.safety_fraction)


def total_time_basic(n_bits: int, bit_time: float) -> float:
    """Slotted-scheme total: every bit occupies one fixed slot."""
    if n_bits < 0:
        raise ConfigurationError("bit count must be non-negative")
    return to_seconds(n_bits * to_us(bit_time))


def bit_time_optimized(params: PhysicalParams) -> float:
    """Per-bit time of the pipelined scheme: eviction read plus probe read."""
    send = read_duration_us(params.cache_mb, 0.0, params)
    probe = read_duration_us(params.receiver_read_mb, 0.0, params)
    return to_seconds(send + probe)


def total_time_optimized(n_bits: int, params: PhysicalParams) -> float:
    """Pipelined-scheme total: n bit times plus one extra receiver read."""
    if n_bits < 1:
        raise ConfigurationError(
            "the pipelined total is undefined for an empty message "
            "(the trailing receiver read has nothing to close)"
        )
    send = read_duration_us(params.cache_mb, 0.0, params)
    probe = read_duration_us(params.receiver_read_mb, 0.0, params)
    return to_seconds(n_bits * (send + probe) + probe)


@dataclass(frozen=True)
class TheoryBreakdown:
    """Mixed-message total split into the 1-bit and 0-bit contributions."""

    ones_time: float
    zeros_time: float

    @property
    def total(self) -> float:
        return self.ones_time + self.zeros_time


def mixed_message_theoretical_time(
    n_ones: int, n_zeros: int, one_bit_time: float, wait_period: float
) -> TheoryBreakdown:
    """Sender-side accounting: each 1-bit costs one read, each 0-bit one wait."""
    if n_ones < 0 or n_zeros < 0:
        raise ConfigurationError("bit counts must be non-negative")
    return TheoryBreakdown(
        ones_time=n_ones * one_bit_time,
        zeros_time=n_zeros * wait_period,
    )


def fit_params_from_observation(
    cache_size_mb: float,
    observed_evict_time: float,
    ram_rate: float = DEFAULT_RAM_RATE,
    receiver_read_mb: float = 1.0,
) -> PhysicalParams:
    """Calibrate the backing rate from one timed full-cache eviction."""
    if cache_size_mb <= 0 or observed_evict_time <= 0:
        raise ConfigurationError("cache size and observed time must be positive")
    return PhysicalParams(
        cache_mb=cache_size_mb,
        backing_rate=cache_size_mb / observed_evict_time,
        ram_rate=ram_rate,
        receiver_read_mb=receiver_read_mb,
    )


def throughput(n_bits: int, total_time: float) -> float:
    """Channel performance in bit/s."""
    if total_time <= 0:
        raise ConfigurationError("total_time must be positive")
    if n_bits < 0:
        raise ConfigurationError("bit count must be non-negative")
    return n_bits / total_time
