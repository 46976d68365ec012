"""Bit-level protocol logic: modulation, threshold demodulation, repetition code.

Bit messages are plain lists of 0/1 ints; on the wire (traces, CLI I/O) they
serialize as ASCII strings of '0' and '1'.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FramingError
from .timing import PhysicalParams

Bits = list[int]

READ_SENDER_FILE = "read_sender_file"
WAIT = "wait"


def validate_bits(bits: Bits) -> None:
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bit values must be 0 or 1, got {b!r}")


def parse_bits(text: str) -> Bits:
    if any(ch not in "01" for ch in text):
        raise ValueError("bit strings may only contain '0' and '1'")
    return [int(ch) for ch in text]


def format_bits(bits: Bits) -> str:
    return "".join(str(b) for b in bits)


@dataclass(frozen=True)
class SenderAction:
    """What the sender does for one bit: a full-cache read, or a timed wait."""

    kind: str
    wait_s: float | None = None


def modulate(bit: int, wait_period: float) -> SenderAction:
    """1 -> read the sender file (evicting the cache), 0 -> stay silent."""
    if bit == 1:
        return SenderAction(READ_SENDER_FILE)
    if bit == 0:
        return SenderAction(WAIT, wait_s=wait_period)
    raise ValueError(f"bit must be 0 or 1, got {bit!r}")


def demodulate(measured: float, threshold: float) -> int:
    """1 only when the probe took strictly longer than the threshold."""
    if measured < 0:
        raise ValueError("measured time must be non-negative")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return 1 if measured > threshold else 0


def default_threshold(params: PhysicalParams) -> float:
    """Midpoint between an all-hit and an all-miss probe."""
    return (params.probe_hit_time + params.probe_miss_time) / 2.0


def encode_repetition3(message: Bits) -> Bits:
    """Send every message bit three times."""
    validate_bits(message)
    return [b for b in message for _ in range(3)]


def decode_repetition3(received: Bits) -> Bits:
    """Majority-vote each consecutive triple back into one bit."""
    validate_bits(received)
    if len(received) % 3 != 0:
        raise FramingError(
            f"received length {len(received)} is not a multiple of 3"
        )
    return [
        1 if received[i] + received[i + 1] + received[i + 2] >= 2 else 0
        for i in range(0, len(received), 3)
    ]


@dataclass(frozen=True)
class SlotRecord:
    """One transmitted channel bit as the receiver saw it."""

    slot_index: int
    sent_bit: int | None
    measured_read_time: float
    threshold: float
    decoded_bit: int
