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


import csv
import json
import os
import tempfile
import unittest

from ic2rm import report
from ic2rm.classify import MessageClass
from ic2rm.timing import TimingTable


def stats(cls: MessageClass, max_delay: float, late: int = 0) -> report.ClassStats:
    delay = report.DelayStats(10.0, 100.0, max_delay, max_delay, max_delay)
    return report.ClassStats(cls, generated=10, delivered=10, delay=delay, violations=late)


def sim_report(**max_delays) -> report.SimReport:
    classes = {cls: report.ClassStats(cls) for cls in MessageClass}
    for name, max_delay in max_delays.items():
        cls = MessageClass(name)
        classes[cls] = stats(cls, max_delay, late=1)
    events = (
        report.FrameEvent(MessageClass.GOOSE, 'flow-a', 0.0, 12.0, 12.0, 2, 'delivered'),
        report.FrameEvent(MessageClass.MMS, 'flow-b', 5.5, None, None, 1, 'dropped'),
    )
    return report.SimReport(classes, events=events, scenario='test.toml', seed=3, duration=0.5)


class TestDelayStats(unittest.TestCase):
    def test_empty(self):
        self.assertIsNone(report.DelayStats.from_samples([]))

    def test_samples(self):
        s = report.DelayStats.from_samples(list(range(1, 101)))
        self.assertEqual((s.min, s.max), (1.0, 100.0))
        self.assertEqual(s.mean, 50.5)
        self.assertEqual(s.p95, 95.05)
        self.assertEqual(s.p99, 99.01)

    def test_rounding(self):
        s = report.DelayStats.from_samples([12.0000000001, 1012.0004])
        self.assertEqual((s.min, s.max), (12.0, 1012.0))


class TestVerifyTiming(unittest.TestCase):
    def test_within_bound(self):
        self.assertEqual(report.verify_timing(sim_report(goose=2900.0)), [])

    def test_exceeds_bound(self):
        violations = report.verify_timing(sim_report(goose=3100.0, sv=2999.999))
        self.assertEqual(len(violations), 1)
        v = violations[0]
        self.assertEqual((v.cls, v.max_delay, v.bound, v.frames), (MessageClass.GOOSE, 3100.0, 3000, 1))
        self.assertIn('3000 us bound', str(v))

    def test_bound_is_inclusive(self):
        self.assertEqual(report.verify_timing(sim_report(sv=3000.0)), [])

    def test_unbounded(self):
        self.assertEqual(report.verify_timing(sim_report(other=1e9)), [])

    def test_custom_table(self):
        timing = TimingTable({MessageClass.GOOSE: 2000})
        self.assertEqual([v.cls for v in report.verify_timing(sim_report(goose=2900.0), timing)],
                         [MessageClass.GOOSE])

    def test_no_traffic(self):
        self.assertEqual(report.verify_timing(report.SimReport({})), [])


class TestWriters(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_json(self):
        path = os.path.join(self.tmp.name, 'report.json')
        report.write_json(sim_report(goose=2900.0), path)
        with open(path, encoding='utf-8') as f:
            doc = json.load(f)
        self.assertEqual(doc['schema_version'], report.SCHEMA_VERSION)
        self.assertEqual(doc['seed'], 3)
        self.assertEqual(doc['classes']['goose']['delay_us']['max'], 2900.0)
        self.assertIsNone(doc['classes']['mms']['delay_us'])
        self.assertEqual(set(doc['classes']), {c.value for c in MessageClass})

    def test_events(self):
        path = os.path.join(self.tmp.name, 'events.csv')
        report.write_events_csv(sim_report(), path)
        with open(path, encoding='utf-8', newline='') as f:
            rows = list(csv.reader(f))
        self.assertEqual(tuple(rows[0]), report.EVENT_FIELDS)
        self.assertEqual(rows[1], ['goose', 'flow-a', '0.000', '12.000', '12.000', '2', 'delivered'])
        self.assertEqual(rows[2], ['mms', 'flow-b', '5.500', '', '', '1', 'dropped'])

    def test_summary(self):
        ok = sim_report(goose=2900.0)
        text = report.summary(ok, report.verify_timing(ok))
        self.assertTrue(text.endswith('all timing bounds met\n'))
        self.assertIn('broker on', text)

        late = sim_report(goose=3100.0)
        path = os.path.join(self.tmp.name, 'summary.txt')
        report.write_summary(late, report.verify_timing(late), path)
        with open(path, encoding='utf-8') as f:
            text = f.read()
        self.assertIn('VIOLATION goose: max delay 3100.000 us', text)
        self.assertNotIn('all timing bounds met', text)


if __name__ == '__main__':
    unittest.main()
