from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import encoders as enc
from ptgflow.analyzers.ber import BerError, ber_first, ber_parse, decode_boolean, decode_integer, decode_string, decode_unsigned


def test_single_tlv():
    (t,) = ber_parse(bytes([0x80, 0x01, 0x05]))
    assert (t.tag, t.tag_class, t.constructed, t.number, t.length, t.value) == (0x80, 2, False, 0, 1, b"\x05")


def test_empty_value():
    (t,) = ber_parse(b"\x81\x00")
    assert t.length == 0 and t.end == 2


def test_overrun_rejected():
    with pytest.raises(BerError):
        ber_parse(bytes([0x80, 200, 1, 2, 3]))


@pytest.mark.parametrize("raw", [b"", b"\x80", b"\x80\x80", b"\x80\x85\0\0\0\0\1", b"\x1f", b"\x80\x82\x01"])
def test_bad_encodings(raw):
    with pytest.raises(BerError):
        ber_parse(raw)


def test_long_form_and_high_tag():
    value = bytes(300)
    (t,) = ber_parse(b"\x04" + enc.ber_length(300) + value)
    assert t.length == 300 and t.header_len == 4
    (t,) = ber_parse(b"\x9f\x21\x01\x07")
    assert (t.tag, t.number, t.value) == (0x9F21, 0x21, b"\x07")


def test_nested_constructed():
    inner = enc.tlv(0x80, b"a") + enc.tlv(0x81, b"bc")
    outer = ber_first(enc.tlv(0x61, inner) + b"trailing")
    assert outer.constructed and outer.end == 2 + len(inner)
    assert [(t.tag, t.value) for t in ber_parse(outer.value)] == [(0x80, b"a"), (0x81, b"bc")]


@given(values=st.lists(st.tuples(st.integers(0, 30), st.binary(max_size=300)), min_size=1, max_size=8))
def test_round_trip(values):
    raw = b"".join(enc.tlv(0x80 | n, v) for n, v in values)
    assert [(t.number, t.value) for t in ber_parse(raw)] == list(values)


@given(n=st.integers(-(2**63), 2**63 - 1))
def test_integer_twos_complement(n):
    body = n.to_bytes(max(1, (n.bit_length() + 8) // 8), "big", signed=True)
    assert decode_integer(body) == n


def test_scalar_decoders():
    assert decode_unsigned(enc.ber_uint(2**32 - 1)) == 2**32 - 1
    with pytest.raises(BerError):
        decode_unsigned(b"\xff")
    assert decode_boolean(b"\xff") is True and decode_boolean(b"\0") is False
    with pytest.raises(BerError):
        decode_boolean(b"\0\0")
    assert decode_string(b"ds1") == "ds1"
    with pytest.raises(BerError):
        decode_string(b"\xc3\xa9")
