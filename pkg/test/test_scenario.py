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
import textwrap
import unittest

import ic2rm
from ic2rm import scenario
from ic2rm.classify import MessageClass
from ic2rm.codec import MacAddress
from ic2rm.timing import TimingTable

SHIPPED = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'scenarios',
                       'inter-substation-100m.toml')

MINIMAL = textwrap.dedent('''\
    [run]
    duration = "1s"

    [broker]
    shared_cap_max = "20mbps"
    shared_cap_floor = "5mbps"
    best_effort_floor = "1mbps"
    idle_timeout = "5s"

    [[link]]
    name = "wan"
    a = "s1"
    b = "s2"
    capacity = "100mbps"

    [[switch]]
    name = "s1"

    [[switch]]
    name = "s2"

    [[ied]]
    name = "relay"
    switch = "s1"

    [[ied.traffic]]
    class = "goose"

    [[ied]]
    name = "scada"
    switch = "s2"
''')


def line_of(text: str, needle: str) -> int:
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    raise AssertionError(needle)


class TestUnits(unittest.TestCase):
    def test_rates(self):
        self.assertEqual(scenario.parse_rate('100mbps'), 100_000_000)
        self.assertEqual(scenario.parse_rate('1.5kbps'), 1500)
        self.assertEqual(scenario.parse_rate('1Gbps'), 1_000_000_000)
        self.assertEqual(scenario.parse_rate(' 64 bps '), 64)

    def test_durations(self):
        self.assertEqual(scenario.parse_duration_us('4ms'), 4000)
        self.assertEqual(scenario.parse_duration_us('1s'), 1_000_000)
        self.assertEqual(scenario.parse_duration_us('0.5us'), 0)
        self.assertEqual(scenario.parse_duration_us('250us'), 250)

    def test_sizes(self):
        self.assertEqual(scenario.parse_size('150B'), 150)
        self.assertEqual(scenario.parse_size('256KiB'), 262_144)
        self.assertEqual(scenario.parse_size('1MiB'), 1 << 20)

    def test_invalid(self):
        for value in (100, '100', '100furlongs', 'mbps', '-5mbps', True, None):
            with self.subTest(value=value):
                self.assertRaises(ValueError, scenario.parse_rate, value)


class TestLoad(unittest.TestCase):
    def test_shipped(self):
        s = scenario.load(SHIPPED)
        self.assertEqual(s.duration, 2.0)
        self.assertEqual(s.seed, 61850)
        self.assertTrue(s.broker_enabled)
        self.assertEqual(s.broker.link_capacity, 100_000_000)
        self.assertEqual(s.broker.shared_cap_max, 20_000_000)
        self.assertEqual(s.broker.idle_timeout, 5.0)
        self.assertEqual(s.links[0].buffer, 128 << 10)
        self.assertEqual([sw.id for sw in s.switches], ['s1', 's2'])
        self.assertEqual(len(s.ieds), 7)
        self.assertEqual([src.cls for src in s.sources], [
            MessageClass.GOOSE, MessageClass.GOOSE, MessageClass.SV, MessageClass.MMS, MessageClass.OTHER,
            MessageClass.TIME_SYNC,
        ])
        self.assertIsNone(s.timing[MessageClass.OTHER].max_transfer_time)
        self.assertEqual(s.timing[MessageClass.SV].max_transfer_time, 3000)

    def test_shipped_sources(self):
        s = scenario.load(SHIPPED)
        sv = s.sources[2]
        self.assertEqual(sv.appid, 0x4000)
        self.assertEqual(sv.label, 'MU01')
        self.assertEqual(sv.profile.sample_rate, 4000)
        mms = s.sources[3]
        self.assertEqual(mms.profile.load_bps, 95_000_000)
        self.assertEqual(mms.dst_mac, MacAddress.parse('00:1a:b6:00:01:01'))
        self.assertEqual((mms.proto, mms.dst_port, mms.src_ip, mms.dst_ip), (6, 102, '10.0.1.4', '10.0.2.1'))
        sync = s.sources[5]
        self.assertEqual((sync.switch, sync.proto, sync.dst_port), ('s2', 17, 123))

    def test_mac_tables(self):
        s = scenario.load(SHIPPED)
        s1, s2 = s.switch('s1'), s.switch('s2')
        self.assertEqual(s1.mac_table[MacAddress.parse('00:1a:b6:00:00:02')], 4)
        self.assertEqual(s1.mac_table[MacAddress.parse('00:1a:b6:00:01:01')], 1)
        self.assertEqual(s1.mac_table[MacAddress.parse('01:0c:cd:04:00:01')], 1)
        self.assertEqual(s2.mac_table[MacAddress.parse('00:1a:b6:00:01:02')], 3)
        self.assertEqual(s2.mac_table[MacAddress.parse('00:1a:b6:00:00:04')], 1)

    def test_controller_config(self):
        s = scenario.load(SHIPPED)
        config = s.controller_config()
        self.assertEqual(set(config.switches), {'s1', 's2'})
        sv = s.sources[2]
        self.assertEqual(config.demands[sv.key].steady_rate, 4_032_000)

    def test_defaults(self):
        s = scenario.loads(MINIMAL)
        relay, = s.sources
        self.assertEqual(s.seed, 0)
        self.assertEqual(s.control_delay, 0.001)
        self.assertEqual(s.tick, 0.1)
        self.assertEqual(s.ieds[0].port, 2)
        self.assertEqual(s.ieds[0].mac, MacAddress.parse('00:1a:b6:00:00:01'))
        self.assertEqual(relay.appid, 1)
        self.assertEqual(relay.dst_mac, MacAddress.parse('01:0c:cd:01:00:01'))
        self.assertEqual(relay.profile.frame_octets, 150)
        self.assertEqual(relay.profile.heartbeat_us, 1_000_000)
        self.assertEqual(s.links[0].buffer, scenario.DEFAULT_BUFFER)
        self.assertEqual(s.timing, TimingTable())

    def test_switch_options(self):
        text = MINIMAL.replace('[[switch]]\nname = "s1"\n', textwrap.dedent('''\
            [[switch]]
            name = "s1"
            control_delay = "3ms"

            [switch.macs]
            "00:1a:b6:00:00:99" = 4
        '''))
        s = scenario.loads(text)
        self.assertEqual(s.control_delay_of('s1'), 0.003)
        self.assertEqual(s.control_delay_of('s2'), 0.001)
        self.assertEqual(s.switch('s1').mac_table[MacAddress.parse('00:1a:b6:00:00:99')], 4)


class TestErrors(unittest.TestCase):
    def assertScenarioError(self, text: str, needle: str = None, overrides=()) -> ic2rm.ScenarioError:
        with self.assertRaises(ic2rm.ScenarioError) as cm:
            scenario.loads(text, overrides, 'bad.toml')
        e = cm.exception
        if needle is not None:
            self.assertEqual(e.line, line_of(text, needle), str(e))
            self.assertTrue(str(e).startswith(f'bad.toml:{e.line}:'), str(e))
        return e

    def test_misspelled_key(self):
        text = MINIMAL.replace('capacity = "100mbps"', 'capcity = "100mbps"')
        e = self.assertScenarioError(text, 'capcity')
        self.assertIn('capcity', e.msg)
        self.assertEqual(e.column, 1)

    def test_unknown_section(self):
        self.assertScenarioError(MINIMAL + '\n[runn]\nseed = 1\n', '[runn]')

    def test_syntax(self):
        e = self.assertScenarioError(MINIMAL.replace('duration = "1s"', 'duration = '))
        self.assertEqual(e.line, 2)

    def test_bad_values(self):
        cases = (
            ('duration = "1s"', 'duration = "0s"', 'duration'),
            ('duration = "1s"', 'duration = "1 parsec"', 'duration'),
            ('idle_timeout = "5s"', 'idle_timeout = 5', 'idle_timeout'),
            ('b = "s2"', 'b = "s3"', 'b = "s3"'),
            ('switch = "s1"', 'switch = "s9"', 's9'),
            ('class = "goose"', 'class = "gose"', 'gose'),
            ('shared_cap_max = "20mbps"', 'shared_cap_max = "200mbps"', '[broker]'),
        )
        for old, new, needle in cases:
            with self.subTest(new):
                self.assertScenarioError(MINIMAL.replace(old, new), needle)

    def test_sample_rate(self):
        for rate in ('0.5', '0', '-4000', '"4000"'):
            with self.subTest(rate):
                text = MINIMAL.replace('class = "goose"\n', f'class = "sv"\nsample_rate = {rate}\n')
                e = self.assertScenarioError(text, 'sample_rate')
                self.assertIn('sample_rate', e.msg)
        e = self.assertScenarioError(MINIMAL.replace('class = "goose"\n', 'class = "sv"\n'),
                                     overrides=['ied.relay.0.sample_rate=0.5'])
        self.assertIn('sample_rate', e.msg)

    def test_missing_key(self):
        e = self.assertScenarioError(MINIMAL.replace('idle_timeout = "5s"\n', ''), '[broker]')
        self.assertIn('idle_timeout', e.msg)

    def test_duplicate_flow(self):
        text = MINIMAL.replace('class = "goose"\n', 'class = "goose"\nappid = 7\n\n[[ied.traffic]]\n'
                                                  'class = "goose"\nappid = 7\n')
        e = self.assertScenarioError(text)
        self.assertIn('duplicates', e.msg)

    def test_local_destination(self):
        text = MINIMAL + textwrap.dedent('''\

            [[ied]]
            name = "server"
            switch = "s1"

            [[ied.traffic]]
            class = "mms"
            dst = "relay"
            load = "1mbps"
        ''')
        e = self.assertScenarioError(text)
        self.assertIn('not across link', e.msg)
        self.assertScenarioError(text.replace('dst = "relay"\n', ''))
        scenario.loads(text.replace('dst = "relay"', 'dst = "scada"'))

    def test_port_in_use(self):
        text = MINIMAL.replace('switch = "s1"\n', 'switch = "s1"\nport = 1\n')
        self.assertIn('already in use', self.assertScenarioError(text, 'port = 1').msg)

    def test_missing_file(self):
        with self.assertRaises(ic2rm.ScenarioError) as cm:
            scenario.load(os.path.join(os.path.dirname(SHIPPED), 'missing.toml'))
        self.assertIsNone(cm.exception.line)

    def test_validate(self):
        s = scenario.loads(MINIMAL)
        s.validate()
        broken = scenario.Scenario(s.links, s.switches, s.ieds, s.sources, s.broker, duration=0)
        self.assertRaises(ic2rm.InvalidScenario, broken.validate)


class TestOverrides(unittest.TestCase):
    def test_paths(self):
        s = scenario.loads(MINIMAL, [
            'run.seed=7',
            'broker.enabled=false',
            'link.wan.capacity=50mbps',
            'goose.heartbeat=2s',
            'ied.relay.0.appid=0x10',
            'timing.goose="2ms"',
        ])
        self.assertEqual(s.seed, 7)
        self.assertFalse(s.broker_enabled)
        self.assertEqual(s.links[0].capacity, 50_000_000)
        self.assertEqual(s.broker.link_capacity, 50_000_000)
        self.assertEqual(s.sources[0].profile.heartbeat_us, 2_000_000)
        self.assertEqual(s.sources[0].appid, 16)
        self.assertEqual(s.timing[MessageClass.GOOSE].max_transfer_time, 2000)

    def test_document_untouched(self):
        doc = {'run': {'duration': '1s'}}
        scenario.apply_overrides(doc, ['run.duration=2s'])
        self.assertEqual(doc, {'run': {'duration': '1s'}})

    def test_errors(self):
        for override in ('nope', 'run=1', 'foo.bar=1', 'mms.load=1mbps', 'ied.relay.5.frame=100B',
                         'link.lan.capacity=1mbps', 'ied.nobody.0.frame=100B'):
            with self.subTest(override):
                with self.assertRaises(ic2rm.ScenarioError) as cm:
                    scenario.loads(MINIMAL, [override])
                self.assertEqual(cm.exception.path, '--set')

    def test_override_is_validated(self):
        with self.assertRaises(ic2rm.ScenarioError) as cm:
            scenario.loads(MINIMAL, ['goose.frame=10B'], 'min.toml')
        self.assertIn('frame size', str(cm.exception))


if __name__ == '__main__':
    unittest.main()
