# Copyright (c) 2026 by the ic2rm authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Encoding and decoding of IEC 61850 link-layer frames.
#
# A GOOSE or SV frame is laid out as
#
#     dst(6) src(6) [0x8100 TCI(2)] ethertype(2)
#     appid(2) length(2) reserved1(2) reserved2(2)
#     PDU (BER, definite lengths)
#
# where length counts the 8 octets of the IEC header plus the PDU. Fixed
# layouts are declared with construct; PDU bodies go through ic2rm.ber.
#
# Example:
#     frame = ic2rm.codec.encode_goose(header, 0x0001, pdu)
#     decoded = ic2rm.codec.decode_goose(frame)
#     assert decoded.pdu == pdu

import ipaddress
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from construct import (BitStruct, BitsInteger, Bytes, ConstructError, Flag, Int8ub, Int16ub, Int24ub,
                       Int32ub, Nibble, Struct)

import ic2rm
from ic2rm import ber
from ic2rm.registry import (ETHERNET_HEADER_LEN, ETHERTYPE_GOOSE, ETHERTYPE_IPV4, ETHERTYPE_NAMES, ETHERTYPE_SV,
                            ETHERTYPE_VLAN, IEC_HEADER_LEN, IPPROTO_TCP, IPPROTO_UDP, MAX_PAYLOAD_LEN, VLAN_TAG_LEN)

VISIBLE_STRING_CAP = 64
SV_SAMPLE_OCTETS = 64
INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1

ETHERNET_HEADER = Struct(
    'dst' / Bytes(6),
    'src' / Bytes(6),
    'ethertype' / Int16ub,
)

VLAN_TAG = Struct(
    'tci' / BitStruct(
        'pcp' / BitsInteger(3),
        'dei' / Flag,
        'vid' / BitsInteger(12),
    ),
    'ethertype' / Int16ub,
)

IEC_HEADER = Struct(
    'appid' / Int16ub,
    'length' / Int16ub,
    'reserved1' / Int16ub,
    'reserved2' / Int16ub,
)

UTC_TIME = Struct(
    'seconds' / Int32ub,
    'fraction' / Int24ub,
    'quality' / Int8ub,
)

IPV4_HEADER = Struct(
    'vihl' / BitStruct(
        'version' / Nibble,
        'ihl' / Nibble,
    ),
    'tos' / Int8ub,
    'total_length' / Int16ub,
    'identification' / Int16ub,
    'fragment' / BitStruct(
        'flags' / BitsInteger(3),
        'offset' / BitsInteger(13),
    ),
    'ttl' / Int8ub,
    'protocol' / Int8ub,
    'checksum' / Int16ub,
    'src' / Bytes(4),
    'dst' / Bytes(4),
)

TRANSPORT_PORTS = Struct(
    'src_port' / Int16ub,
    'dst_port' / Int16ub,
)

UDP_HEADER = Struct(
    'src_port' / Int16ub,
    'dst_port' / Int16ub,
    'length' / Int16ub,
    'checksum' / Int16ub,
)

TCP_HEADER = Struct(
    'src_port' / Int16ub,
    'dst_port' / Int16ub,
    'seq' / Int32ub,
    'ack' / Int32ub,
    'offset_flags' / Int16ub,
    'window' / Int16ub,
    'checksum' / Int16ub,
    'urgent' / Int16ub,
)

# goosePdu [APPLICATION 1], fields tagged [0]..[11] in declaration order
_GOOSE_PDU = 0x61
(_GOCB_REF, _TIME_ALLOWED_TO_LIVE, _DAT_SET, _GO_ID, _T, _ST_NUM, _SQ_NUM, _SIMULATION, _CONF_REV,
 _NDS_COM, _NUM_DAT_SET_ENTRIES) = range(0x80, 0x8b)
_ALL_DATA = 0xab

# savPdu [APPLICATION 0]
_SAV_PDU = 0x60
_NO_ASDU = 0x80
_SEQ_ASDU = 0xa2
_ASDU = 0x30
_SV_ID = 0x80
_SMP_CNT = 0x82
_SV_CONF_REV = 0x83
_SMP_SYNCH = 0x85
_SAMPLE = 0x87

# Data CHOICE alternatives carried in allData
_DATA_BOOLEAN = 0x83
_DATA_BIT_STRING = 0x84
_DATA_INTEGER = 0x85
_DATA_VISIBLE_STRING = 0x8a
_DATA_UTC_TIME = 0x91


@dataclass(frozen=True)
class MacAddress:
    octets: bytes

    def __post_init__(self):
        octets = bytes(self.octets)
        if len(octets) != 6:
            raise ic2rm.InvalidDataValue(f'MAC address needs 6 octets, got {len(octets)}')
        object.__setattr__(self, 'octets', octets)

    @classmethod
    def parse(cls, text: str) -> 'MacAddress':
        parts = text.replace('-', ':').split(':')
        try:
            octets = bytes(int(p, 16) for p in parts if len(p) == 2)
        except ValueError as e:
            raise ic2rm.InvalidDataValue(f'invalid MAC address {text!r}') from e
        if len(octets) != len(parts):
            raise ic2rm.InvalidDataValue(f'invalid MAC address {text!r}')
        return cls(octets)

    @property
    def is_multicast(self) -> bool:
        return bool(self.octets[0] & 0x01)

    def __str__(self):
        return ':'.join(f'{b:02x}' for b in self.octets)


@dataclass(frozen=True)
class Vlan:
    pcp: int
    vid: int
    dei: bool = False

    def __post_init__(self):
        if not 0 <= self.pcp <= 7 or not 0 <= self.vid <= 4095:
            raise ic2rm.InvalidDataValue(f'VLAN tag out of range: pcp={self.pcp} vid={self.vid}')


@dataclass(frozen=True)
class EthernetHeader:
    dst: MacAddress
    src: MacAddress
    vlan: Optional[Vlan] = None


@dataclass(frozen=True)
class EthernetFrame:
    dst: MacAddress
    src: MacAddress
    ethertype: int
    payload: bytes = b''
    vlan: Optional[Vlan] = None

    @property
    def header(self) -> EthernetHeader:
        return EthernetHeader(self.dst, self.src, self.vlan)


@dataclass(frozen=True)
class IecHeader:
    appid: int
    length: int
    reserved1: int = 0
    reserved2: int = 0


@dataclass(frozen=True)
class Timestamp:
    """
    UtcTime: seconds since 1970, a 24-bit binary fraction of a second and an
    opaque quality octet.
    """
    seconds: int
    fraction: int = 0
    quality: int = 0

    @classmethod
    def from_seconds(cls, t: float, quality: int = 0) -> 'Timestamp':
        seconds = int(t)
        return cls(seconds, int((t - seconds) * (1 << 24)) & 0xffffff, quality)


@dataclass(frozen=True)
class BitString:
    """
    A bit-string of `size` bits (at most 32); bit 0 is the most significant
    bit of `value`.
    """
    value: int
    size: int


DataValue = Union[bool, int, BitString, str, Timestamp]


@dataclass(frozen=True)
class GoosePdu:
    gocb_ref: str
    time_allowed_to_live: int
    dat_set: str
    go_id: str
    t: Timestamp
    st_num: int
    sq_num: int
    test: bool = False
    conf_rev: int = 1
    nds_com: bool = False
    all_data: Tuple[DataValue, ...] = ()
    num_dat_set_entries: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'all_data', tuple(self.all_data))
        if self.num_dat_set_entries is None:
            object.__setattr__(self, 'num_dat_set_entries', len(self.all_data))


@dataclass(frozen=True)
class SvPdu:
    sv_id: str
    smp_cnt: int
    conf_rev: int = 1
    smp_synch: int = 0
    sample_data: bytes = field(default=bytes(SV_SAMPLE_OCTETS))

    def __post_init__(self):
        object.__setattr__(self, 'sample_data', bytes(self.sample_data))


@dataclass(frozen=True)
class IecFrame:
    header: EthernetHeader
    iec: IecHeader
    pdu: Union[GoosePdu, SvPdu]


def encode_ethernet(frame: EthernetFrame) -> bytes:
    if len(frame.payload) > MAX_PAYLOAD_LEN:
        raise ic2rm.FieldTooLong(f'payload of {len(frame.payload)} octets exceeds {MAX_PAYLOAD_LEN}')
    if frame.vlan is None:
        head = ETHERNET_HEADER.build(dict(dst=frame.dst.octets, src=frame.src.octets, ethertype=frame.ethertype))
    else:
        head = ETHERNET_HEADER.build(dict(dst=frame.dst.octets, src=frame.src.octets, ethertype=ETHERTYPE_VLAN))
        head += VLAN_TAG.build(dict(
            tci=dict(pcp=frame.vlan.pcp, dei=frame.vlan.dei, vid=frame.vlan.vid),
            ethertype=frame.ethertype,
        ))
    return head + bytes(frame.payload)


def decode_ethernet(data: bytes) -> EthernetFrame:
    """
    Splits a frame into its link header and payload. Raises Truncated for
    buffers shorter than the (VLAN-tagged) header.
    """
    data = bytes(data)
    if len(data) < ETHERNET_HEADER_LEN:
        raise ic2rm.Truncated(f'{len(data)} octets, an Ethernet header needs {ETHERNET_HEADER_LEN}')
    try:
        head = ETHERNET_HEADER.parse(data[:ETHERNET_HEADER_LEN])
        ethertype = head.ethertype
        offset = ETHERNET_HEADER_LEN
        vlan = None
        if ethertype == ETHERTYPE_VLAN:
            if len(data) < ETHERNET_HEADER_LEN + VLAN_TAG_LEN:
                raise ic2rm.Truncated(f'{len(data)} octets, a tagged header needs '
                                      f'{ETHERNET_HEADER_LEN + VLAN_TAG_LEN}')
            tag = VLAN_TAG.parse(data[offset:offset + VLAN_TAG_LEN])
            vlan = Vlan(tag.tci.pcp, tag.tci.vid, bool(tag.tci.dei))
            ethertype = tag.ethertype
            offset += VLAN_TAG_LEN
    except ConstructError as e:
        raise ic2rm.Truncated(str(e)) from e
    payload = data[offset:]
    if len(payload) > MAX_PAYLOAD_LEN:
        raise ic2rm.LengthMismatch(f'payload of {len(payload)} octets exceeds {MAX_PAYLOAD_LEN}')
    return EthernetFrame(MacAddress(head.dst), MacAddress(head.src), ethertype, payload, vlan)


def _encode_visible(text: str, name: str, cap: int = VISIBLE_STRING_CAP) -> bytes:
    if not isinstance(text, str):
        raise ic2rm.InvalidDataValue(f'{name}: {text!r} is not a string')
    if any(not 0x20 <= ord(c) <= 0x7e for c in text):
        raise ic2rm.InvalidDataValue(f'{name}: {text!r} has non-visible characters')
    if len(text) > cap:
        raise ic2rm.FieldTooLong(f'{name}: {len(text)} octets exceeds the {cap}-octet cap')
    return text.encode('ascii')


def _decode_visible(content: bytes, name: str, cap: int = VISIBLE_STRING_CAP) -> str:
    if len(content) > cap:
        raise ic2rm.MalformedBer(f'{name}: {len(content)} octets exceeds the {cap}-octet cap')
    if any(not 0x20 <= b <= 0x7e for b in content):
        raise ic2rm.MalformedBer(f'{name}: non-visible characters')
    return content.decode('ascii')


def _encode_boolean(value: bool, name: str) -> bytes:
    if not isinstance(value, bool):
        raise ic2rm.InvalidDataValue(f'{name}: {value!r} is not a boolean')
    return b'\xff' if value else b'\x00'


def _decode_boolean(content: bytes, name: str) -> bool:
    if len(content) != 1:
        raise ic2rm.MalformedBer(f'{name}: BOOLEAN of {len(content)} octets')
    return content[0] != 0


def _encode_timestamp(t: Timestamp, name: str) -> bytes:
    if not isinstance(t, Timestamp):
        raise ic2rm.InvalidDataValue(f'{name}: {t!r} is not a Timestamp')
    for part, bits in ((t.seconds, 32), (t.fraction, 24), (t.quality, 8)):
        if not isinstance(part, int) or not 0 <= part < (1 << bits):
            raise ic2rm.InvalidDataValue(f'{name}: {t!r} out of range')
    return UTC_TIME.build(dict(seconds=t.seconds, fraction=t.fraction, quality=t.quality))


def _decode_timestamp(content: bytes, name: str) -> Timestamp:
    if len(content) != UTC_TIME.sizeof():
        raise ic2rm.MalformedBer(f'{name}: UtcTime of {len(content)} octets')
    parsed = UTC_TIME.parse(content)
    return Timestamp(parsed.seconds, parsed.fraction, parsed.quality)


def _encode_bit_string(bits: BitString) -> bytes:
    if not 0 <= bits.size <= 32 or not 0 <= bits.value < (1 << bits.size):
        raise ic2rm.InvalidDataValue(f'bit-string {bits!r} out of range')
    octets = (bits.size + 7) // 8
    unused = octets * 8 - bits.size
    return bytes((unused,)) + (bits.value << unused).to_bytes(octets, 'big')


def _decode_bit_string(content: bytes) -> BitString:
    if not content:
        raise ic2rm.MalformedBer('empty bit-string')
    unused = content[0]
    if unused > 7 or (len(content) == 1 and unused):
        raise ic2rm.MalformedBer(f'bit-string with {unused} unused bits')
    size = (len(content) - 1) * 8 - unused
    if size > 32:
        raise ic2rm.MalformedBer(f'bit-string of {size} bits')
    return BitString(int.from_bytes(content[1:], 'big') >> unused, size)


def _encode_data(value: DataValue) -> bytes:
    if isinstance(value, bool):
        return ber.tlv(_DATA_BOOLEAN, _encode_boolean(value, 'allData'))
    if isinstance(value, int):
        if not INT64_MIN <= value <= INT64_MAX:
            raise ic2rm.InvalidDataValue(f'allData: {value} does not fit in 64 bits')
        return ber.tlv(_DATA_INTEGER, ber.encode_integer(value))
    if isinstance(value, BitString):
        return ber.tlv(_DATA_BIT_STRING, _encode_bit_string(value))
    if isinstance(value, str):
        return ber.tlv(_DATA_VISIBLE_STRING, _encode_visible(value, 'allData'))
    if isinstance(value, Timestamp):
        return ber.tlv(_DATA_UTC_TIME, _encode_timestamp(value, 'allData'))
    raise ic2rm.InvalidDataValue(f'allData: unsupported value {value!r}')


def _decode_data(tag: int, content: bytes) -> DataValue:
    if tag == _DATA_BOOLEAN:
        return _decode_boolean(content, 'allData')
    if tag == _DATA_INTEGER:
        if len(content) > 8:
            raise ic2rm.MalformedBer(f'allData: INTEGER of {len(content)} octets')
        return ber.decode_integer(content, 'allData')
    if tag == _DATA_BIT_STRING:
        return _decode_bit_string(content)
    if tag == _DATA_VISIBLE_STRING:
        return _decode_visible(content, 'allData')
    if tag == _DATA_UTC_TIME:
        return _decode_timestamp(content, 'allData')
    raise ic2rm.MalformedBer(f'allData: unsupported tag 0x{tag:02x}')


def _encode_goose_pdu(pdu: GoosePdu) -> bytes:
    if pdu.num_dat_set_entries != len(pdu.all_data):
        raise ic2rm.InvalidDataValue(f'numDatSetEntries is {pdu.num_dat_set_entries} '
                                     f'but allData holds {len(pdu.all_data)} values')
    body = b''.join((
        ber.tlv(_GOCB_REF, _encode_visible(pdu.gocb_ref, 'gocbRef')),
        ber.tlv(_TIME_ALLOWED_TO_LIVE, ber.encode_unsigned(pdu.time_allowed_to_live, 32, 'timeAllowedToLive')),
        ber.tlv(_DAT_SET, _encode_visible(pdu.dat_set, 'datSet')),
        ber.tlv(_GO_ID, _encode_visible(pdu.go_id, 'goID')),
        ber.tlv(_T, _encode_timestamp(pdu.t, 't')),
        ber.tlv(_ST_NUM, ber.encode_unsigned(pdu.st_num, 32, 'stNum')),
        ber.tlv(_SQ_NUM, ber.encode_unsigned(pdu.sq_num, 32, 'sqNum')),
        ber.tlv(_SIMULATION, _encode_boolean(pdu.test, 'test')),
        ber.tlv(_CONF_REV, ber.encode_unsigned(pdu.conf_rev, 32, 'confRev')),
        ber.tlv(_NDS_COM, _encode_boolean(pdu.nds_com, 'ndsCom')),
        ber.tlv(_NUM_DAT_SET_ENTRIES, ber.encode_unsigned(pdu.num_dat_set_entries, 32, 'numDatSetEntries')),
        ber.tlv(_ALL_DATA, b''.join(_encode_data(v) for v in pdu.all_data)),
    ))
    return ber.tlv(_GOOSE_PDU, body)


def _decode_goose_pdu(buf: bytes, start: int, end: int) -> GoosePdu:
    items = ber.iter_tlvs(buf, start, end)
    gocb_ref = _decode_visible(ber.expect(buf, items, _GOCB_REF, 'gocbRef'), 'gocbRef')
    tal = ber.decode_unsigned(ber.expect(buf, items, _TIME_ALLOWED_TO_LIVE, 'timeAllowedToLive'), 32,
                              'timeAllowedToLive')
    dat_set = _decode_visible(ber.expect(buf, items, _DAT_SET, 'datSet'), 'datSet')
    go_id = _decode_visible(ber.expect(buf, items, _GO_ID, 'goID'), 'goID')
    t = _decode_timestamp(ber.expect(buf, items, _T, 't'), 't')
    st_num = ber.decode_unsigned(ber.expect(buf, items, _ST_NUM, 'stNum'), 32, 'stNum')
    sq_num = ber.decode_unsigned(ber.expect(buf, items, _SQ_NUM, 'sqNum'), 32, 'sqNum')
    test = _decode_boolean(ber.expect(buf, items, _SIMULATION, 'test'), 'test')
    conf_rev = ber.decode_unsigned(ber.expect(buf, items, _CONF_REV, 'confRev'), 32, 'confRev')
    nds_com = _decode_boolean(ber.expect(buf, items, _NDS_COM, 'ndsCom'), 'ndsCom')
    entries = ber.decode_unsigned(ber.expect(buf, items, _NUM_DAT_SET_ENTRIES, 'numDatSetEntries'), 32,
                                  'numDatSetEntries')
    all_data = ber.expect(buf, items, _ALL_DATA, 'allData')
    if next(items, None) is not None:
        raise ic2rm.MalformedBer('unexpected element after allData')

    values = tuple(_decode_data(tag, all_data[s:e]) for tag, s, e in ber.iter_tlvs(all_data, 0, len(all_data)))
    if len(values) != entries:
        raise ic2rm.MalformedBer(f'numDatSetEntries is {entries} but allData holds {len(values)} values')
    return GoosePdu(gocb_ref, tal, dat_set, go_id, t, st_num, sq_num, test, conf_rev, nds_com, values, entries)


def _encode_fixed_unsigned(value: int, octets: int, name: str) -> bytes:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < (1 << (8 * octets)):
        raise ic2rm.InvalidDataValue(f'{name}: {value!r} does not fit in {octets} octets')
    return value.to_bytes(octets, 'big')


def _decode_fixed_unsigned(content: bytes, octets: int, name: str) -> int:
    if len(content) != octets:
        raise ic2rm.MalformedBer(f'{name}: {len(content)} octets, expected {octets}')
    return int.from_bytes(content, 'big')


def _encode_sv_pdu(pdu: SvPdu, sample_octets: Optional[int] = SV_SAMPLE_OCTETS) -> bytes:
    if sample_octets is not None and len(pdu.sample_data) != sample_octets:
        raise ic2rm.InvalidDataValue(f'sample block of {len(pdu.sample_data)} octets, expected {sample_octets}')
    asdu = b''.join((
        ber.tlv(_SV_ID, _encode_visible(pdu.sv_id, 'svID')),
        ber.tlv(_SMP_CNT, _encode_fixed_unsigned(pdu.smp_cnt, 2, 'smpCnt')),
        ber.tlv(_SV_CONF_REV, _encode_fixed_unsigned(pdu.conf_rev, 4, 'confRev')),
        ber.tlv(_SMP_SYNCH, _encode_fixed_unsigned(pdu.smp_synch, 1, 'smpSynch')),
        ber.tlv(_SAMPLE, pdu.sample_data),
    ))
    body = ber.tlv(_NO_ASDU, ber.encode_integer(1)) + ber.tlv(_SEQ_ASDU, ber.tlv(_ASDU, asdu))
    return ber.tlv(_SAV_PDU, body)


def _decode_sv_pdu(buf: bytes, start: int, end: int, sample_octets: Optional[int] = SV_SAMPLE_OCTETS) -> SvPdu:
    items = ber.iter_tlvs(buf, start, end)
    if ber.decode_integer(ber.expect(buf, items, _NO_ASDU, 'noASDU'), 'noASDU') != 1:
        raise ic2rm.MalformedBer('only single-ASDU frames are supported')
    seq = ber.expect(buf, items, _SEQ_ASDU, 'seqASDU')
    if next(items, None) is not None:
        raise ic2rm.MalformedBer('unexpected element after seqASDU')

    asdus = ber.iter_tlvs(seq, 0, len(seq))
    asdu = ber.expect(seq, asdus, _ASDU, 'ASDU')
    if next(asdus, None) is not None:
        raise ic2rm.MalformedBer('more than one ASDU')

    fields = ber.iter_tlvs(asdu, 0, len(asdu))
    sv_id = _decode_visible(ber.expect(asdu, fields, _SV_ID, 'svID'), 'svID')
    smp_cnt = _decode_fixed_unsigned(ber.expect(asdu, fields, _SMP_CNT, 'smpCnt'), 2, 'smpCnt')
    conf_rev = _decode_fixed_unsigned(ber.expect(asdu, fields, _SV_CONF_REV, 'confRev'), 4, 'confRev')
    smp_synch = _decode_fixed_unsigned(ber.expect(asdu, fields, _SMP_SYNCH, 'smpSynch'), 1, 'smpSynch')
    sample = ber.expect(asdu, fields, _SAMPLE, 'sample')
    if next(fields, None) is not None:
        raise ic2rm.MalformedBer('unexpected element after sample')
    if sample_octets is not None and len(sample) != sample_octets:
        raise ic2rm.MalformedBer(f'sample block of {len(sample)} octets, expected {sample_octets}')
    return SvPdu(sv_id, smp_cnt, conf_rev, smp_synch, sample)


_DOC_ENCODE = '''\
Encodes a complete {name} frame.

Args:
    header (EthernetHeader): destination, source and optional VLAN tag.
    appid (int): 16-bit application identifier.
    pdu ({pdu}): the PDU carried after the IEC header.
{options}
Returns the frame octets with EtherType 0x{ethertype:04x} and the IEC header
length computed from the encoded PDU.

Raises FieldTooLong or InvalidDataValue if the PDU cannot be represented.
'''

_DOC_DECODE = '''\
Decodes a complete {name} frame into an IecFrame.
{options}
Raises Truncated if the buffer is shorter than a declared length, BadEtherType
unless the EtherType is 0x{ethertype:04x}, MalformedBer for tag/length
violations in the PDU and LengthMismatch if the IEC header length disagrees
with the PDU or octets follow it.
'''

_DOC_SAMPLE_OCTETS = '''\
    sample_octets (int): expected size of the sample block; None accepts any.
'''


def _gen_encode(name: str, ethertype: int, encode_pdu, pdu_type: type, options_doc: str = ''):
    def f(header: EthernetHeader, appid: int, pdu, **options) -> bytes:
        if not isinstance(pdu, pdu_type):
            raise ic2rm.InvalidDataValue(f'{pdu!r} is not a {pdu_type.__name__}')
        if not 0 <= appid <= 0xffff:
            raise ic2rm.InvalidDataValue(f'APPID {appid} does not fit in 16 bits')
        body = encode_pdu(pdu, **options)
        iec = IEC_HEADER.build(dict(appid=appid, length=IEC_HEADER_LEN + len(body), reserved1=0, reserved2=0))
        return encode_ethernet(EthernetFrame(header.dst, header.src, ethertype, iec + body, header.vlan))

    f.__doc__ = _DOC_ENCODE.format(name=name, pdu=pdu_type.__name__, ethertype=ethertype, options=options_doc)
    return f


def _gen_decode(name: str, ethertype: int, pdu_tag: int, decode_pdu, options_doc: str = ''):
    def f(data: bytes, **options) -> IecFrame:
        frame = decode_ethernet(data)
        if frame.ethertype != ethertype:
            raise ic2rm.BadEtherType(f'EtherType 0x{frame.ethertype:04x} is not {name} (0x{ethertype:04x})')
        payload = frame.payload
        if len(payload) < IEC_HEADER_LEN:
            raise ic2rm.Truncated(f'{len(payload)} octets after the link header, the IEC header needs '
                                  f'{IEC_HEADER_LEN}')
        head = IEC_HEADER.parse(payload[:IEC_HEADER_LEN])
        iec = IecHeader(head.appid, head.length, head.reserved1, head.reserved2)

        tag, start, end = ber.read_tlv(payload, IEC_HEADER_LEN, len(payload), overrun=ic2rm.Truncated)
        if tag != pdu_tag:
            raise ic2rm.MalformedBer(f'expected {name} PDU tag 0x{pdu_tag:02x}, got 0x{tag:02x}')
        if iec.length != end:
            raise ic2rm.LengthMismatch(f'IEC header length is {iec.length}, PDU ends at {end}')
        if end != len(payload):
            raise ic2rm.LengthMismatch(f'{len(payload) - end} octets follow the PDU')
        return IecFrame(frame.header, iec, decode_pdu(payload, start, end, **options))

    f.__doc__ = _DOC_DECODE.format(name=name, ethertype=ethertype, options=options_doc)
    return f


encode_goose = _gen_encode('GOOSE', ETHERTYPE_GOOSE, _encode_goose_pdu, GoosePdu)
decode_goose = _gen_decode('GOOSE', ETHERTYPE_GOOSE, _GOOSE_PDU, _decode_goose_pdu)
encode_sv = _gen_encode('SV', ETHERTYPE_SV, _encode_sv_pdu, SvPdu, _DOC_SAMPLE_OCTETS)
decode_sv = _gen_decode('SV', ETHERTYPE_SV, _SAV_PDU, _decode_sv_pdu, _DOC_SAMPLE_OCTETS)


def decode_frame(data: bytes) -> Union[IecFrame, EthernetFrame]:
    """
    Decodes GOOSE and SV frames fully and returns any other frame as a bare
    EthernetFrame.
    """
    frame = decode_ethernet(data)
    if frame.ethertype == ETHERTYPE_GOOSE:
        return decode_goose(data)
    if frame.ethertype == ETHERTYPE_SV:
        return decode_sv(data, sample_octets=None)
    return frame


def _checksum(header: bytes) -> int:
    total = sum(int.from_bytes(header[i:i + 2], 'big') for i in range(0, len(header), 2))
    while total >> 16:
        total = (total & 0xffff) + (total >> 16)
    return ~total & 0xffff


def encode_ipv4(header: EthernetHeader, src_ip: str, dst_ip: str, protocol: int, src_port: int = 0,
                dst_port: int = 0, payload: bytes = b'', ttl: int = 64) -> bytes:
    """
    Builds an Ethernet/IPv4 frame with a UDP or TCP header (no transport
    header for other protocols). Transport checksums are left at zero.
    """
    if protocol == IPPROTO_UDP:
        transport = UDP_HEADER.build(dict(src_port=src_port, dst_port=dst_port, length=8 + len(payload),
                                          checksum=0))
    elif protocol == IPPROTO_TCP:
        transport = TCP_HEADER.build(dict(src_port=src_port, dst_port=dst_port, seq=0, ack=0,
                                          offset_flags=(5 << 12) | 0x18, window=0xffff, checksum=0, urgent=0))
    else:
        transport = b''
    try:
        src = ipaddress.IPv4Address(src_ip).packed
        dst = ipaddress.IPv4Address(dst_ip).packed
    except ValueError as e:
        raise ic2rm.InvalidDataValue(str(e)) from e
    fields = dict(vihl=dict(version=4, ihl=5), tos=0, total_length=20 + len(transport) + len(payload),
                  identification=0, fragment=dict(flags=0b010, offset=0), ttl=ttl, protocol=protocol,
                  checksum=0, src=src, dst=dst)
    fields['checksum'] = _checksum(IPV4_HEADER.build(fields))
    packet = IPV4_HEADER.build(fields) + transport + bytes(payload)
    return encode_ethernet(EthernetFrame(header.dst, header.src, ETHERTYPE_IPV4, packet, header.vlan))


def ethertype_name(ethertype: int) -> str:
    return ETHERTYPE_NAMES.get(ethertype, 'unknown')
