"""GOOSE publisher messages (IEC 61850-8-1) carried directly over Ethernet."""

from __future__ import annotations

from dataclasses import dataclass

from ptgflow.engine.analyzer import Analyzer, Malformed, PacketContext, Terminal

from .ber import BerError, ber_first, ber_parse, decode_boolean, decode_string, decode_unsigned
from .link import format_mac

ETHERTYPE_GOOSE = 0x88B8
ETHERTYPE_GSE_MGMT = 0x88B9
GOOSE_PDU_TAG = 0x61  # [APPLICATION 1] IMPLICIT SEQUENCE
HEADER_LEN = 8  # APPID, Length, Reserved1, Reserved2

# Context-specific tags of the goosePdu sequence, in schema order.
TAG_GOCB_REF = 0x80
TAG_TIME_ALLOWED = 0x81
TAG_DAT_SET = 0x82
TAG_GO_ID = 0x83
TAG_T = 0x84
TAG_ST_NUM = 0x85
TAG_SQ_NUM = 0x86
TAG_TEST = 0x87
TAG_CONF_REV = 0x88
TAG_NDS_COM = 0x89
TAG_NUM_ENTRIES = 0x8A
TAG_ALL_DATA = 0xAB

MANDATORY = {TAG_GOCB_REF: "gocbRef", TAG_DAT_SET: "datSet", TAG_ST_NUM: "stNum", TAG_SQ_NUM: "sqNum"}


@dataclass(frozen=True, slots=True)
class GoosePdu:
    appid: int
    length: int
    gocb_ref: str
    dat_set: str
    st_num: int
    sq_num: int
    time_allowed_to_live: int | None = None
    go_id: str | None = None
    t: bytes | None = None
    test: bool = False
    conf_rev: int | None = None
    nds_com: bool = False
    num_dat_set_entries: int | None = None
    all_data: bytes = b""


@dataclass(frozen=True, slots=True)
class GooseInfo:
    src: str | None
    dst: str | None
    appid: int


def decode_goose_pdu(body: bytes, appid: int = 0, length: int = 0) -> GoosePdu:
    """Decode the contents of a ``goosePdu`` sequence.

    Raises :class:`BerError` on bad encodings and on missing mandatory fields.
    """
    fields: dict[int, bytes] = {}
    for tlv in ber_parse(body) if body else ():
        fields.setdefault(tlv.tag, tlv.value)
    missing = [name for tag, name in MANDATORY.items() if tag not in fields]
    if missing:
        raise BerError("missing mandatory field(s) " + ", ".join(missing))

    def opt(tag, decode):
        raw = fields.get(tag)
        return None if raw is None else decode(raw)

    st_num = decode_unsigned(fields[TAG_ST_NUM])
    if st_num < 1:
        raise BerError("stNum must be at least 1")
    t = fields.get(TAG_T)
    if t is not None and len(t) != 8:
        raise BerError("UtcTime must be 8 octets")
    return GoosePdu(
        appid=appid,
        length=length,
        gocb_ref=decode_string(fields[TAG_GOCB_REF]),
        dat_set=decode_string(fields[TAG_DAT_SET]),
        st_num=st_num,
        sq_num=decode_unsigned(fields[TAG_SQ_NUM]),
        time_allowed_to_live=opt(TAG_TIME_ALLOWED, decode_unsigned),
        go_id=opt(TAG_GO_ID, decode_string),
        t=t,
        test=bool(opt(TAG_TEST, decode_boolean)),
        conf_rev=opt(TAG_CONF_REV, decode_unsigned),
        nds_com=bool(opt(TAG_NDS_COM, decode_boolean)),
        num_dat_set_entries=opt(TAG_NUM_ENTRIES, decode_unsigned),
        all_data=fields.get(TAG_ALL_DATA, b""),
    )


class GooseAnalyzer(Analyzer):
    name = "GOOSE"

    def analyze(self, ctx: PacketContext, data: memoryview):
        n = len(data)
        if n < HEADER_LEN + 2:
            return Malformed("truncated GOOSE header")
        appid = (data[0] << 8) | data[1]
        length = (data[2] << 8) | data[3]
        if length < HEADER_LEN or length > n:
            return Malformed("GOOSE length inconsistent with frame")
        try:
            apdu = ber_first(data[HEADER_LEN:length])
            if apdu.tag != GOOSE_PDU_TAG:
                return Malformed(f"unexpected APDU tag {apdu.tag:#x}")
            if HEADER_LEN + apdu.end != length:
                return Malformed("APDU extent does not match length field")
            pdu = decode_goose_pdu(apdu.value, appid, length)
        except BerError as exc:
            return Malformed(str(exc))
        info = GooseInfo(format_mac(ctx.l2_src), format_mac(ctx.l2_dst), appid)
        ctx.emit("goose_message", info=info, pdu=pdu)
        return Terminal(length, pdu)
