"""PROFINET real-time frames, decoding only the DCP discovery/configuration
service (IEC 61158-6-10) in detail."""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

from ptgflow.engine.analyzer import Analyzer, Malformed, PacketContext, Terminal

from .link import format_mac

ETHERTYPE_PROFINET = 0x8892

# PN-RT frame identifiers.
FRAME_DCP_HELLO = 0xFEFC
FRAME_DCP_GET_SET = 0xFEFD
FRAME_DCP_IDENTIFY_REQ = 0xFEFE
FRAME_DCP_IDENTIFY_RSP = 0xFEFF
DCP_FRAMES = range(FRAME_DCP_HELLO, FRAME_DCP_IDENTIFY_RSP + 1)
RTC_FRAMES = range(0x0100, 0xFC00)

OPT_IP = 0x01
OPT_DEVICE_PROPERTIES = 0x02
OPT_CONTROL = 0x05
OPT_ALL_SELECTOR = 0xFF
SUB_NAME_OF_STATION = 0x02
SUB_CONTROL_RESPONSE = 0x04

_HEADER = struct.Struct("!BBIHH")  # service id, service type, xid, delay/reserved, data length
DCP_HEADER_LEN = 2 + _HEADER.size


class DcpService(enum.IntEnum):
    GET = 3
    SET = 4
    IDENTIFY = 5
    HELLO = 6


class DcpServiceType(enum.IntEnum):
    REQUEST = 0
    RESPONSE_SUCCESS = 1
    RESPONSE_UNSUPPORTED = 5


@dataclass(frozen=True, slots=True)
class DcpBlock:
    option: int
    suboption: int
    payload: bytes
    # BlockQualifier (Set request) or BlockInfo (responses), when present.
    qualifier: int | None = None

    @property
    def is_name_of_station(self) -> bool:
        return self.option == OPT_DEVICE_PROPERTIES and self.suboption == SUB_NAME_OF_STATION


@dataclass(frozen=True, slots=True)
class DcpFrame:
    frame_id: int
    service_id: DcpService
    service_type: DcpServiceType
    xid: int
    blocks: tuple[DcpBlock, ...]
    data_length: int = 0

    @property
    def is_request(self) -> bool:
        return self.service_type is DcpServiceType.REQUEST

    @property
    def name_of_station(self) -> str | None:
        for b in self.blocks:
            if b.is_name_of_station:
                return b.payload.decode("ascii", "replace")
        return None

    @property
    def success(self) -> bool:
        if self.service_type is not DcpServiceType.RESPONSE_SUCCESS:
            return False
        # Set/Get responses report a per-block error code in Control/Response.
        return all(b.payload[2:3] in (b"", b"\x00") for b in self.blocks if b.option == OPT_CONTROL and b.suboption == SUB_CONTROL_RESPONSE)


class DcpError(ValueError):
    pass


def _blocks_have_qualifier(service: DcpService, stype: DcpServiceType) -> bool:
    if stype is DcpServiceType.REQUEST:
        return service in (DcpService.SET, DcpService.HELLO)
    # Responses carry BlockInfo, except the Control/Response block itself.
    return True


def decode_dcp(frame_id: int, data: bytes) -> DcpFrame:
    """Decode a DCP PDU; ``data`` starts after the 2-byte frame id."""
    if len(data) < _HEADER.size:
        raise DcpError("truncated DCP header")
    sid, stype, xid, _delay, dlen = _HEADER.unpack_from(data)
    try:
        service = DcpService(sid)
        stype = DcpServiceType(stype)
    except ValueError as exc:
        raise DcpError(str(exc)) from None
    body = data[_HEADER.size : _HEADER.size + dlen]
    if len(body) != dlen:
        raise DcpError("DCPDataLength exceeds frame")
    blocks = []
    pos = 0
    if service is DcpService.GET and stype is DcpServiceType.REQUEST:
        # A Get request lists bare option/suboption pairs.
        if dlen % 2:
            raise DcpError("odd Get request length")
        for pos in range(0, dlen, 2):
            blocks.append(DcpBlock(body[pos], body[pos + 1], b""))
        return DcpFrame(frame_id, service, stype, xid, tuple(blocks), dlen)
    qualified = _blocks_have_qualifier(service, stype)
    while pos < dlen:
        if pos + 4 > dlen:
            raise DcpError("truncated DCP block header")
        opt, sub, blen = body[pos], body[pos + 1], (body[pos + 2] << 8) | body[pos + 3]
        start = pos + 4
        stop = start + blen
        if stop > dlen:
            raise DcpError("DCP block overruns data length")
        value = body[start:stop]
        qual = None
        if qualified and not (opt == OPT_CONTROL and sub == SUB_CONTROL_RESPONSE) and opt != OPT_ALL_SELECTOR:
            if blen < 2:
                raise DcpError("DCP block too short for qualifier")
            qual = (value[0] << 8) | value[1]
            value = value[2:]
        blocks.append(DcpBlock(opt, sub, value, qual))
        pos = stop + (blen & 1)  # blocks are padded to even length
    return DcpFrame(frame_id, service, stype, xid, tuple(blocks), dlen)


class ProfinetAnalyzer(Analyzer):
    name = "PROFINET"

    def analyze(self, ctx: PacketContext, data: memoryview):
        n = len(data)
        if n < 2:
            return Malformed("truncated PN-RT frame id")
        frame_id = (data[0] << 8) | data[1]
        if frame_id in DCP_FRAMES:
            try:
                dcp = decode_dcp(frame_id, data[2:].tobytes())
            except DcpError as exc:
                return Malformed(str(exc))
            fields = dict(
                src=format_mac(ctx.l2_src),
                dst=format_mac(ctx.l2_dst),
                xid=dcp.xid,
                service=dcp.service_id,
                name=dcp.name_of_station,
            )
            if dcp.is_request:
                ctx.emit("dcp_request", **fields)
            else:
                ctx.emit("dcp_response", **fields, success=dcp.success)
            return Terminal(DCP_HEADER_LEN + dcp.data_length, dcp)
        if frame_id in RTC_FRAMES:
            ctx.emit("pn_rtc_observed", frame_id=frame_id)
        return Terminal(2, frame_id)
