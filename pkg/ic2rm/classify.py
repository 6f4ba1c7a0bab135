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
# Frame classification: the match tuple a switch would use for a flow entry
# (MAC addresses, EtherType, APPID or transport port) and the message class
# the broker allocates by. Only the octets a class needs are read.

import enum
from dataclasses import dataclass
from typing import Optional

import ic2rm
from ic2rm.codec import IPV4_HEADER, TRANSPORT_PORTS, MacAddress
from ic2rm.registry import (ETHERNET_HEADER_LEN, ETHERTYPE_GOOSE, ETHERTYPE_IPV4, ETHERTYPE_PTP, ETHERTYPE_SV,
                            ETHERTYPE_VLAN, IPPROTO_NAMES, IPPROTO_TCP, IPPROTO_UDP, TRANSPORT_CLASSES,
                            VLAN_TAG_LEN)

_IPV4_MIN_HEADER_LEN = 20


class MessageClass(enum.Enum):
    GOOSE = 'goose'
    SV = 'sv'
    MMS = 'mms'
    TIME_SYNC = 'time_sync'
    OTHER = 'other'

    @property
    def is_priority(self) -> bool:
        return self in PRIORITY_CLASSES

    @property
    def is_shared(self) -> bool:
        return self in SHARED_CLASSES

    def __str__(self):
        return self.value


PRIORITY_CLASSES = frozenset((MessageClass.GOOSE, MessageClass.SV))
SHARED_CLASSES = frozenset((MessageClass.MMS, MessageClass.TIME_SYNC))


@dataclass(frozen=True)
class L4:
    proto: int
    dst_port: int

    def __str__(self):
        return f'{IPPROTO_NAMES.get(self.proto, self.proto)}/{self.dst_port}'.lower()


@dataclass(frozen=True)
class FlowKey:
    src: MacAddress
    dst: MacAddress
    ethertype: int
    appid: Optional[int] = None
    l4: Optional[L4] = None

    def __post_init__(self):
        if self.appid is not None and self.l4 is not None:
            raise ic2rm.InvalidDataValue('a flow key carries an APPID or a transport port, not both')

    def __str__(self):
        s = f'{self.src}>{self.dst}/0x{self.ethertype:04x}'
        if self.appid is not None:
            s += f'/appid=0x{self.appid:04x}'
        if self.l4 is not None:
            s += f'/{self.l4}'
        return s


@dataclass(frozen=True)
class Classification:
    key: FlowKey
    cls: MessageClass


def _require(data: bytes, n: int, what: str):
    if len(data) < n:
        raise ic2rm.Truncated(f'{len(data)} octets, {what} needs {n}')


def _classify_ipv4(data: bytes, offset: int):
    _require(data, offset + _IPV4_MIN_HEADER_LEN, 'an IPv4 header')
    ip = IPV4_HEADER.parse(data[offset:offset + _IPV4_MIN_HEADER_LEN])
    header_len = max(ip.vihl.ihl * 4, _IPV4_MIN_HEADER_LEN)
    port = 0
    # later fragments carry no transport header
    if ip.protocol in (IPPROTO_TCP, IPPROTO_UDP) and ip.fragment.offset == 0:
        start = offset + header_len
        _require(data, start + TRANSPORT_PORTS.sizeof(), 'a transport header')
        port = TRANSPORT_PORTS.parse(data[start:start + TRANSPORT_PORTS.sizeof()]).dst_port
    name = TRANSPORT_CLASSES.get((ip.protocol, port), MessageClass.OTHER.value)
    return L4(ip.protocol, port), MessageClass(name)


def classify_frame(data: bytes) -> Classification:
    """
    Maps a raw frame to its FlowKey and MessageClass.

    GOOSE and SV frames are keyed by APPID, read straight from the IEC header
    without touching the PDU; IPv4 frames are keyed by transport protocol and
    destination port. Unknown EtherTypes are OTHER.

    Raises Truncated if the frame ends before the octets its class needs.
    """
    data = bytes(data)
    _require(data, ETHERNET_HEADER_LEN, 'an Ethernet header')
    dst = MacAddress(data[0:6])
    src = MacAddress(data[6:12])
    ethertype = int.from_bytes(data[12:14], 'big')
    offset = ETHERNET_HEADER_LEN
    if ethertype == ETHERTYPE_VLAN:
        _require(data, ETHERNET_HEADER_LEN + VLAN_TAG_LEN, 'a VLAN-tagged header')
        ethertype = int.from_bytes(data[16:18], 'big')
        offset += VLAN_TAG_LEN

    if ethertype in (ETHERTYPE_GOOSE, ETHERTYPE_SV):
        _require(data, offset + 2, 'an APPID')
        appid = int.from_bytes(data[offset:offset + 2], 'big')
        cls = MessageClass.GOOSE if ethertype == ETHERTYPE_GOOSE else MessageClass.SV
        return Classification(FlowKey(src, dst, ethertype, appid=appid), cls)
    if ethertype == ETHERTYPE_PTP:
        return Classification(FlowKey(src, dst, ethertype), MessageClass.TIME_SYNC)
    if ethertype == ETHERTYPE_IPV4:
        l4, cls = _classify_ipv4(data, offset)
        return Classification(FlowKey(src, dst, ethertype, l4=l4), cls)
    return Classification(FlowKey(src, dst, ethertype), MessageClass.OTHER)
