"""Modulation, threshold demodulation, and the 3x repetition code."""

from __future__ import annotations

import math
import random
from itertools import product

import pytest

from cachechannel import (
    FramingError,
    PhysicalParams,
    decode_repetition3,
    default_threshold,
    demodulate,
    encode_repetition3,
    format_bits,
    modulate,
    parse_bits,
)


def test_modulate_one_reads_the_sender_file():
    action = modulate(1, wait_period=0.125)
    assert action.kind == "read_sender_file"
    assert action.wait_s is None


def test_modulate_zero_waits_the_configured_period():
    action = modulate(0, wait_period=0.125)
    assert action.kind == "wait"
    assert action.wait_s == 0.125


def test_modulate_alternating_sequence():
    kinds = [modulate(b, 0.5).kind for b in (1, 0, 1, 0)]
    assert kinds == ["read_sender_file", "wait", "read_sender_file", "wait"]


def test_modulate_rejects_non_bits():
    with pytest.raises(ValueError):
        modulate(2, 0.5)


def test_demodulate_examples():
    assert demodulate(0.15, 0.07) == 1
    assert demodulate(0.0, 0.07) == 0
    # Equality is not "more time than": a read exactly at the threshold is 0.
    assert demodulate(0.07, 0.07) == 0


def test_demodulate_is_monotone_in_measured_time():
    rng = random.Random(17)
    for _ in range(200):
        threshold = rng.uniform(0.01, 1.0)
        a, b = sorted((rng.uniform(0, 2.0), rng.uniform(0, 2.0)))
        assert demodulate(a, threshold) <= demodulate(b, threshold)


def test_default_threshold_midpoint():
    instant = PhysicalParams(2.0, 7.0, ram_rate=math.inf)
    assert default_threshold(instant) == pytest.approx(0.0714, rel=1e-2)
    params = PhysicalParams(2.0, 6.849)
    assert default_threshold(params) == pytest.approx(0.0732, rel=1e-3)


def test_hit_rate_must_beat_backing_rate():
    from cachechannel import ConfigurationError

    with pytest.raises(ConfigurationError):
        PhysicalParams(2.0, 7.0, ram_rate=7.0)


def test_encode_examples():
    assert encode_repetition3([]) == []
    assert encode_repetition3([1, 0]) == [1, 1, 1, 0, 0, 0]


def test_encode_triples_the_length():
    rng = random.Random(19)
    for _ in range(50):
        message = [rng.randint(0, 1) for _ in range(rng.randint(0, 64))]
        assert len(encode_repetition3(message)) == 3 * len(message)


def test_decode_pattern_table_is_exactly_majority():
    zero_patterns = {(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)}
    for triple in product((0, 1), repeat=3):
        expected = 0 if triple in zero_patterns else 1
        assert decode_repetition3(list(triple)) == [expected], triple


def test_decode_examples():
    assert decode_repetition3([0, 1, 0]) == [0]
    assert decode_repetition3([1, 0, 1]) == [1]


def test_decode_rejects_broken_framing():
    with pytest.raises(FramingError):
        decode_repetition3([1, 0])


def test_round_trip_exhaustive_short_messages():
    for length in range(0, 11):
        for value in range(1 << length):
            message = [(value >> i) & 1 for i in range(length)]
            assert decode_repetition3(encode_repetition3(message)) == message


def test_single_flip_always_corrected():
    rng = random.Random(21)
    for _ in range(300):
        message = [rng.randint(0, 1) for _ in range(rng.randint(1, 64))]
        sent = encode_repetition3(message)
        flipped = list(sent)
        position = rng.randrange(len(flipped))
        flipped[position] ^= 1
        assert decode_repetition3(flipped) == message


def test_bit_string_round_trip():
    assert parse_bits("10110") == [1, 0, 1, 1, 0]
    assert format_bits([1, 0, 1, 1, 0]) == "10110"
    with pytest.raises(ValueError):
        parse_bits("10x")
