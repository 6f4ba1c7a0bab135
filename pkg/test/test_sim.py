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


import dataclasses
import os
import textwrap
import unittest
from types import SimpleNamespace

import simpy

import ic2rm
from ic2rm import report, scenario, sim
from ic2rm.broker import QueuePlan, QueueSpec
from ic2rm.classify import MessageClass

SHIPPED = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'scenarios',
                       'inter-substation-100m.toml')

BASE = textwrap.dedent('''\
    [run]
    duration = "100ms"

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
''')

ONE_GOOSE = BASE + textwrap.dedent('''\

    [[ied]]
    name = "relay"
    switch = "s1"

    [[ied.traffic]]
    class = "goose"
    heartbeat = "10s"
''')

ONE_SV = BASE.replace('"100ms"', '"1s"') + textwrap.dedent('''\

    [[ied]]
    name = "mu"
    switch = "s1"

    [[ied.traffic]]
    class = "sv"
    sample_rate = 4000
''')


class TestGolden(unittest.TestCase):
    def first_delay(self, overrides) -> float:
        result = sim.run(scenario.loads(ONE_GOOSE, overrides))
        goose = result.classes[MessageClass.GOOSE]
        self.assertEqual((goose.generated, goose.delivered), (1, 1))
        self.assertEqual(goose.delay.min, goose.delay.max)
        return result.events[0].delay

    def test_broker_off(self):
        # 150 octets at 100 Mb/s
        self.assertAlmostEqual(self.first_delay(['broker.enabled=false']), 12.0, places=6)

    def test_broker_on(self):
        # one control-channel round before the frame is forwarded
        self.assertAlmostEqual(self.first_delay([]), 1012.0, places=6)

    def test_propagation(self):
        self.assertAlmostEqual(self.first_delay(['broker.enabled=false', 'link.wan.propagation=5us']), 17.0,
                               places=6)

    def test_switch_control_delay(self):
        self.assertAlmostEqual(self.first_delay(['switch.s1.control_delay=3ms']), 3012.0, places=6)

    def test_report(self):
        result = sim.run(scenario.loads(ONE_GOOSE))
        self.assertEqual(result.events[0].queue, 2)
        self.assertEqual(result.events[0].status, 'delivered')
        self.assertEqual(result.control['packet_ins'], 1)
        self.assertEqual(result.control['flows_installed'], 1)
        self.assertEqual(result.decisions[0]['decision'], 'accepted_reserved')
        self.assertEqual(result.decisions[0]['reserved'], 300_000)
        self.assertEqual(report.verify_timing(result), [])


class TestConservation(unittest.TestCase):
    def test_sv(self):
        for overrides in ([], ['broker.enabled=false']):
            with self.subTest(overrides=overrides):
                result = sim.run(scenario.loads(ONE_SV, overrides))
                sv = result.classes[MessageClass.SV]
                self.assertEqual(sv.generated, 4000)
                self.assertEqual(sv.dropped, 0)
                self.assertEqual(sv.delivered + sv.in_flight, 4000)
                self.assertLessEqual(sv.in_flight, 1)

    def test_sv_below_one_hertz(self):
        # library callers may hand in fractional rates the scenario loader refuses
        s = scenario.loads(ONE_SV, ['run.duration=5s', 'broker.enabled=false'])
        mu = s.sources[-1]
        slow = dataclasses.replace(mu, profile=dataclasses.replace(mu.profile, sample_rate=0.5))
        result = sim.run(dataclasses.replace(s, sources=s.sources[:-1] + (slow,)))
        sv = result.classes[MessageClass.SV]
        self.assertIn(sv.generated, (2, 3))
        self.assertEqual(sv.dropped, 0)

    def test_ports(self):
        for overrides in ([], ['broker.enabled=false']):
            with self.subTest(overrides=overrides):
                simulation = sim.Simulation(scenario.load(SHIPPED, ['run.duration=300ms'] + overrides))
                result = simulation.run()
                for sw in simulation.switches.values():
                    self.assertTrue(sw.port.conserved(), sw.port.name)
                self.assertEqual(len(simulation.frames), sum(c.generated for c in result.classes.values()))
                self.assertEqual(len(result.events), len(simulation.frames))


class TestBroker(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.on = sim.Simulation(scenario.load(SHIPPED, ['run.duration=1s']))
        cls.on_report = cls.on.run()
        cls.off_report = sim.run(scenario.load(SHIPPED, ['run.duration=1s', 'broker.enabled=false']))

    def test_bounds_hold_with_broker(self):
        self.assertEqual(report.verify_timing(self.on_report), [])
        for cls in (MessageClass.GOOSE, MessageClass.SV):
            self.assertEqual(self.on_report.classes[cls].violations, 0)
            self.assertEqual(self.on_report.classes[cls].dropped, 0)

    def test_bounds_break_without_broker(self):
        violated = {v.cls for v in report.verify_timing(self.off_report)}
        self.assertTrue(violated & {MessageClass.GOOSE, MessageClass.SV})
        self.assertGreater(self.off_report.classes[MessageClass.SV].violations, 0)

    def test_sv_tail_latency(self):
        on = self.on_report.classes[MessageClass.SV].delay.p99
        off = self.off_report.classes[MessageClass.SV].delay.p99
        self.assertGreaterEqual(off, 5 * on)

    def test_goose_tail_latency(self):
        on = self.on_report.classes[MessageClass.GOOSE]
        off = self.off_report.classes[MessageClass.GOOSE]
        self.assertGreaterEqual(off.delay.p99, 5 * on.delay.p99)
        self.assertEqual(on.violations, 0)
        self.assertGreater(off.violations, 0)

    def test_one_install_per_flow(self):
        installs = [n for sw in self.on.switches.values() for n in sw.installs.values()]
        self.assertGreaterEqual(len(installs), 5)
        self.assertTrue(all(n == 1 for n in installs), installs)
        self.assertGreaterEqual(self.on_report.control['packet_ins'], len(installs))

    def test_mms_is_capped(self):
        on = self.on_report.classes[MessageClass.MMS]
        self.assertGreater(on.dropped, 0)
        self.assertIn('s1', self.on_report.ledgers)
        self.assertEqual(self.off_report.control, {})
        self.assertFalse(self.off_report.broker_enabled)

    def test_utilization(self):
        for link in self.on_report.links + self.off_report.links:
            self.assertGreaterEqual(link.utilization, 0)
            self.assertLessEqual(link.utilization, 1)


class TestDeterminism(unittest.TestCase):
    def test_same_seed(self):
        a = sim.run(scenario.load(SHIPPED, ['run.duration=200ms']))
        b = sim.run(scenario.load(SHIPPED, ['run.duration=200ms']))
        self.assertEqual(a.to_dict(), b.to_dict())
        self.assertEqual(a.events, b.events)

    def test_other_seed(self):
        a = sim.run(scenario.load(SHIPPED, ['run.duration=200ms']))
        b = sim.run(scenario.load(SHIPPED, ['run.duration=200ms', 'run.seed=7']))
        self.assertNotEqual(a.events, b.events)

    def test_invalid(self):
        s = scenario.loads(ONE_GOOSE)
        broken = scenario.Scenario(s.links, s.switches, s.ieds, s.sources, s.broker, duration=-1)
        self.assertRaises(ic2rm.InvalidScenario, sim.Simulation, broken)


def frame(name: str, octets: int) -> SimpleNamespace:
    return SimpleNamespace(name=name, octets=octets)


class TestPortModel(unittest.TestCase):
    RATE = 100_000_000

    def setUp(self):
        self.env = simpy.Environment()
        self.delivered = []

    def port(self, buffer=64 << 10, bucket=16 << 10, prioritized=True) -> sim.PortModel:
        def deliver(f):
            self.delivered.append((self.env.now, f.name))
        return sim.PortModel(self.env, 'p', self.RATE, buffer, bucket, 0.0, deliver, prioritized, record=True)

    def plan(self, shared: int) -> QueuePlan:
        return QueuePlan('p', self.RATE, (
            QueueSpec(0, frozenset(), 0, self.RATE),
            QueueSpec(1, frozenset(), 0, shared),
            QueueSpec(2, frozenset(), 0, self.RATE),
        ))

    def test_priority(self):
        port = self.port()
        for name, q in (('a', 0), ('b', 0), ('d', 1), ('c', 2)):
            self.assertTrue(port.enqueue(frame(name, 1500), q))
        self.env.run()
        self.assertEqual([name for _, name in self.delivered], ['c', 'd', 'a', 'b'])
        self.assertTrue(port.conserved())
        self.assertEqual(port.transmitted, 6000)

    def test_no_preemption(self):
        port = self.port()
        urgent = frame('c', 150)

        def late():
            yield self.env.timeout(50e-6)
            port.enqueue(urgent, 2)

        port.enqueue(frame('a', 1500), 0)
        self.env.process(late())
        self.env.run()
        (t_a, a), (t_c, c) = self.delivered
        self.assertEqual((a, c), ('a', 'c'))
        self.assertAlmostEqual(t_a, 120e-6)
        self.assertAlmostEqual(t_c, 132e-6)
        self.assertEqual(urgent.queue, 2)

    def test_fifo(self):
        port = self.port(prioritized=False)
        port.apply_plan(self.plan(10_000_000))
        first, urgent = frame('a', 1500), frame('c', 150)
        port.enqueue(first, 0)
        port.enqueue(urgent, 2)
        self.env.run()
        self.assertEqual([name for _, name in self.delivered], ['a', 'c'])
        self.assertEqual(urgent.queue, 0)

    def test_tail_drop(self):
        port = self.port(buffer=3000)
        results = [port.enqueue(frame(str(i), 1500), 0) for i in range(3)]
        self.assertEqual(results, [True, True, False])
        self.assertEqual(port.dropped, 1500)
        self.assertTrue(port.conserved())
        # queues have separate buffers
        self.assertTrue(port.enqueue(frame('x', 1500), 2))
        self.env.run()
        self.assertTrue(port.conserved())
        self.assertEqual(port.transmitted, 4500)

    def test_shaper(self):
        port = self.port(bucket=1500)
        port.apply_plan(self.plan(10_000_000))
        for i in range(5):
            port.enqueue(frame(str(i), 1500), 1)
        self.env.run()
        starts = [start for start, _, _, _ in port.transmissions]
        # one bucket of 12000 bits refills at 10 Mb/s in 1.2 ms
        for k, start in enumerate(starts):
            self.assertAlmostEqual(start, k * 1.2e-3, places=9)

    def test_work_conserving(self):
        port = self.port(bucket=1500)
        port.apply_plan(self.plan(10_000_000))
        port.enqueue(frame('s1', 1500), 1)
        port.enqueue(frame('s2', 1500), 1)
        port.enqueue(frame('b', 1500), 0)
        self.env.run()
        self.assertEqual([(q, round(start * 1e6, 3)) for start, _, q, _ in port.transmissions],
                         [(1, 0.0), (0, 120.0), (1, 1200.0)])
        self.assertAlmostEqual(port.busy_time, 360e-6)


if __name__ == '__main__':
    unittest.main()
