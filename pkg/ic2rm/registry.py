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
# Wire constants shared by the codec and the classifier.

ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_ARP = 0x0806
ETHERTYPE_VLAN = 0x8100
ETHERTYPE_GOOSE = 0x88B8
ETHERTYPE_SV = 0x88BA
ETHERTYPE_PTP = 0x88F7

ETHERTYPE_NAMES = {
    ETHERTYPE_IPV4: 'IPv4',
    ETHERTYPE_ARP: 'ARP',
    ETHERTYPE_VLAN: '802.1Q',
    ETHERTYPE_GOOSE: 'GOOSE',
    ETHERTYPE_SV: 'SV',
    ETHERTYPE_PTP: 'PTP',
}

IPPROTO_TCP = 6
IPPROTO_UDP = 17

IPPROTO_NAMES = {
    IPPROTO_TCP: 'TCP',
    IPPROTO_UDP: 'UDP',
}

PORT_MMS = 102
PORT_SNTP = 123
PORT_PTP_EVENT = 319
PORT_PTP_GENERAL = 320

# (protocol, destination port) -> class name understood by classify.MessageClass
TRANSPORT_CLASSES = {
    (IPPROTO_TCP, PORT_MMS): 'mms',
    (IPPROTO_UDP, PORT_SNTP): 'time_sync',
    (IPPROTO_UDP, PORT_PTP_EVENT): 'time_sync',
    (IPPROTO_UDP, PORT_PTP_GENERAL): 'time_sync',
}

ETHERNET_HEADER_LEN = 14
VLAN_TAG_LEN = 4
IEC_HEADER_LEN = 8
MAX_PAYLOAD_LEN = 1500
MIN_FRAME_OCTETS = 60
MAX_FRAME_OCTETS = 1514
