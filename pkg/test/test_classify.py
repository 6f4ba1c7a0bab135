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


import os
import unittest

import ic2rm
from ic2rm import codec
from ic2rm.classify import L4, FlowKey, MessageClass, classify_frame
from ic2rm.codec import EthernetFrame, EthernetHeader, MacAddress, Vlan

VECTORS = os.path.join(os.path.dirname(__file__), 'vectors')

IED = MacAddress.parse('00:1a:b6:00:00:04')
SCADA = MacAddress.parse('00:1a:b6:00:01:01')


def read_vector(name: str) -> bytes:
    with open(os.path.join(VECTORS, name), encoding='ascii') as f:
        return bytes.fromhex(''.join(line.split('#', 1)[0] for line in f))


class TestClassify(unittest.TestCase):
    def test_goose(self):
        c = classify_frame(read_vector('goose_basic.hex'))
        self.assertEqual(c.cls, MessageClass.GOOSE)
        self.assertEqual(c.key, FlowKey(MacAddress.parse('00:1a:b6:00:00:01'), MacAddress.parse('01:0c:cd:01:00:01'),
                                        0x88b8, appid=0x0001))

    def test_sv(self):
        c = classify_frame(read_vector('sv_basic.hex'))
        self.assertEqual(c.cls, MessageClass.SV)
        self.assertEqual(c.key.appid, 0x4000)
        self.assertIsNone(c.key.l4)

    def test_appid_only(self):
        # the PDU is never read: a frame ending right after the APPID classifies
        frame = read_vector('goose_basic.hex')
        self.assertEqual(classify_frame(frame[:16]).key.appid, 0x0001)
        self.assertRaises(ic2rm.Truncated, classify_frame, frame[:15])
        broken = bytearray(frame)
        broken[22] = 0xff
        self.assertEqual(classify_frame(bytes(broken)).cls, MessageClass.GOOSE)

    def test_vlan_tagged(self):
        header = EthernetHeader(MacAddress.parse('01:0c:cd:01:00:01'), IED, Vlan(4, 100))
        pdu = codec.GoosePdu('ref', 1000, 'ds', 'id', codec.Timestamp(0), 1, 0)
        c = classify_frame(codec.encode_goose(header, 7, pdu))
        self.assertEqual(c.cls, MessageClass.GOOSE)
        self.assertEqual(c.key.ethertype, 0x88b8)
        self.assertEqual(c.key.appid, 7)

    def test_transport(self):
        header = EthernetHeader(SCADA, IED)
        cases = (
            ('mms', 6, 102, MessageClass.MMS),
            ('sntp', 17, 123, MessageClass.TIME_SYNC),
            ('ptp event', 17, 319, MessageClass.TIME_SYNC),
            ('ptp general', 17, 320, MessageClass.TIME_SYNC),
            ('udp background', 17, 5000, MessageClass.OTHER),
            ('udp 102 is not mms', 17, 102, MessageClass.OTHER),
            ('tcp 123 is not sntp', 6, 123, MessageClass.OTHER),
        )
        for name, proto, port, cls in cases:
            with self.subTest(name):
                c = classify_frame(codec.encode_ipv4(header, '10.0.1.4', '10.0.2.1', proto, 49152, port))
                self.assertEqual(c.cls, cls)
                self.assertEqual(c.key.l4, L4(proto, port))
                self.assertIsNone(c.key.appid)

    def test_other_ip_protocol(self):
        frame = codec.encode_ipv4(EthernetHeader(SCADA, IED), '10.0.1.4', '10.0.2.1', 1)
        c = classify_frame(frame)
        self.assertEqual(c.cls, MessageClass.OTHER)
        self.assertEqual(c.key.l4, L4(1, 0))

    def test_truncated_transport(self):
        frame = codec.encode_ipv4(EthernetHeader(SCADA, IED), '10.0.1.4', '10.0.2.1', 6, 49152, 102)
        self.assertRaises(ic2rm.Truncated, classify_frame, frame[:14 + 20 + 3])
        self.assertRaises(ic2rm.Truncated, classify_frame, frame[:14 + 19])

    def test_ptp(self):
        frame = codec.encode_ethernet(EthernetFrame(MacAddress.parse('01:1b:19:00:00:00'), IED, 0x88f7, bytes(44)))
        c = classify_frame(frame)
        self.assertEqual(c.cls, MessageClass.TIME_SYNC)
        self.assertIsNone(c.key.appid)
        self.assertIsNone(c.key.l4)

    def test_arp(self):
        frame = codec.encode_ethernet(EthernetFrame(MacAddress(b'\xff' * 6), IED, 0x0806, bytes(28)))
        c = classify_frame(frame)
        self.assertEqual(c.cls, MessageClass.OTHER)
        self.assertEqual(c.key, FlowKey(IED, MacAddress(b'\xff' * 6), 0x0806))

    def test_short(self):
        self.assertRaises(ic2rm.Truncated, classify_frame, bytes(13))
        self.assertRaises(ic2rm.Truncated, classify_frame, b'')

    def test_deterministic(self):
        frame = read_vector('sv_basic.hex')
        self.assertEqual(classify_frame(frame), classify_frame(bytearray(frame)))


class TestFlowKey(unittest.TestCase):
    def test_appid_or_l4(self):
        self.assertRaises(ic2rm.InvalidDataValue, FlowKey, IED, SCADA, 0x0800, 1, L4(6, 102))

    def test_str(self):
        self.assertEqual(str(FlowKey(IED, SCADA, 0x0800, l4=L4(6, 102))),
                         '00:1a:b6:00:00:04>00:1a:b6:00:01:01/0x0800/tcp/102')
        self.assertEqual(str(FlowKey(IED, SCADA, 0x88b8, appid=1)),
                         '00:1a:b6:00:00:04>00:1a:b6:00:01:01/0x88b8/appid=0x0001')

    def test_classes(self):
        self.assertTrue(MessageClass.GOOSE.is_priority)
        self.assertTrue(MessageClass.SV.is_priority)
        self.assertTrue(MessageClass.MMS.is_shared)
        self.assertTrue(MessageClass.TIME_SYNC.is_shared)
        self.assertFalse(MessageClass.OTHER.is_priority or MessageClass.OTHER.is_shared)


if __name__ == '__main__':
    unittest.main()
