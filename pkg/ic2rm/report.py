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
# Simulation results: per-class delay statistics, link utilization, the
# controller's decision log, timing verification and the report.json /
# events.csv / summary.txt writers. Delays are microseconds.

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ic2rm.classify import MessageClass
from ic2rm.timing import TimingTable

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EVENT_FIELDS = ('class', 'flow', 'generated_at', 'delivered_at', 'delay', 'queue', 'status')
_LOST = frozenset(('dropped', 'rejected', 'unroutable'))


def _r(x: Optional[float]) -> Optional[float]:
    return None if x is None else round(float(x), 3)


@dataclass(frozen=True)
class DelayStats:
    min: float
    mean: float
    p95: float
    p99: float
    max: float

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> Optional['DelayStats']:
        if not len(samples):
            return None
        a = np.asarray(samples, dtype=float)
        p95, p99 = np.percentile(a, [95, 99])
        return cls(_r(a.min()), _r(a.mean()), _r(p95), _r(p99), _r(a.max()))

    def to_dict(self) -> dict:
        return {'min': self.min, 'mean': self.mean, 'p95': self.p95, 'p99': self.p99, 'max': self.max}


@dataclass(frozen=True)
class ClassStats:
    cls: MessageClass
    generated: int = 0
    delivered: int = 0
    dropped: int = 0
    in_flight: int = 0
    delay: Optional[DelayStats] = None
    violations: int = 0

    def to_dict(self) -> dict:
        return {
            'generated': self.generated,
            'delivered': self.delivered,
            'dropped': self.dropped,
            'in_flight': self.in_flight,
            'delay_us': self.delay.to_dict() if self.delay is not None else None,
            'violations': self.violations,
        }


@dataclass(frozen=True)
class LinkStats:
    port: str
    utilization: float
    offered_octets: int
    transmitted_octets: int
    dropped_octets: int

    def to_dict(self) -> dict:
        return {
            'utilization': self.utilization,
            'offered_octets': self.offered_octets,
            'transmitted_octets': self.transmitted_octets,
            'dropped_octets': self.dropped_octets,
        }


@dataclass(frozen=True)
class FrameEvent:
    cls: MessageClass
    flow: str
    generated_at: float
    delivered_at: Optional[float]
    delay: Optional[float]
    queue: Optional[int]
    status: str

    def row(self) -> list:
        return [self.cls.value, self.flow, _fmt(self.generated_at), _fmt(self.delivered_at), _fmt(self.delay),
                '' if self.queue is None else self.queue, self.status]


def _fmt(x: Optional[float]) -> str:
    return '' if x is None else f'{x:.3f}'


@dataclass(frozen=True)
class SimReport:
    classes: Dict[MessageClass, ClassStats]
    links: Tuple[LinkStats, ...] = ()
    decisions: Tuple[dict, ...] = ()
    control: Dict[str, int] = field(default_factory=dict)
    ledgers: Dict[str, dict] = field(default_factory=dict)
    events: Tuple[FrameEvent, ...] = ()
    scenario: str = ''
    seed: int = 0
    duration: float = 0.0
    broker_enabled: bool = True

    def to_dict(self) -> dict:
        return {
            'schema_version': SCHEMA_VERSION,
            'scenario': self.scenario,
            'seed': self.seed,
            'duration': self.duration,
            'broker_enabled': self.broker_enabled,
            'classes': {cls.value: stats.to_dict() for cls, stats in self.classes.items()},
            'links': {link.port: link.to_dict() for link in self.links},
            'control': dict(self.control),
            'decisions': list(self.decisions),
            'ledgers': dict(self.ledgers),
        }


@dataclass(frozen=True)
class Violation:
    cls: MessageClass
    max_delay: float
    bound: int
    frames: int = 0

    def __str__(self):
        return f'{self.cls}: max delay {self.max_delay:.3f} us exceeds the {self.bound} us bound ' \
               f'({self.frames} frames late)'


def verify_timing(report: SimReport, timing: TimingTable = None) -> List[Violation]:
    """
    One Violation per message class whose maximum delay exceeds its bound;
    unbounded classes never violate. An empty list means every bound held.
    """
    timing = timing or TimingTable()
    violations = []
    for cls in MessageClass:
        stats = report.classes.get(cls)
        bound = timing[cls].max_transfer_time
        if stats is None or stats.delay is None or bound is None:
            continue
        if stats.delay.max > bound:
            violations.append(Violation(cls, stats.delay.max, bound, stats.violations))
    return violations


def build(sim) -> SimReport:
    """Collects the report of a finished ic2rm.sim.Simulation."""
    scenario = sim.scenario
    events = []
    delays: Dict[MessageClass, List[float]] = {cls: [] for cls in MessageClass}
    counts: Dict[MessageClass, Dict[str, int]] = {cls: dict.fromkeys(('generated', 'delivered', 'dropped',
                                                                      'in_flight', 'violations'), 0)
                                                   for cls in MessageClass}
    for frame in sim.frames:
        publisher = frame.publisher
        cls = publisher.source.cls
        c = counts[cls]
        c['generated'] += 1
        delay = None
        delivered_at = None
        if frame.status == 'delivered':
            delivered_at = frame.delivered_at * 1e6
            delay = (frame.delivered_at - frame.generated_at) * 1e6
            delays[cls].append(delay)
            c['delivered'] += 1
            bound = scenario.timing[cls].max_transfer_time
            if bound is not None and delay > bound:
                c['violations'] += 1
        elif frame.status in _LOST:
            c['dropped'] += 1
        else:
            c['in_flight'] += 1
        events.append(FrameEvent(cls, str(publisher.key), frame.generated_at * 1e6, delivered_at, delay,
                                 frame.queue, frame.status))

    classes = {
        cls: ClassStats(cls, delay=DelayStats.from_samples(delays[cls]), **counts[cls])
        for cls in MessageClass
    }
    links = tuple(
        LinkStats(sw.port.name, _r(sw.port.busy_time / scenario.duration), sw.port.offered, sw.port.transmitted,
                  sw.port.dropped)
        for _, sw in sorted(sim.switches.items()) if sw.port is not None
    )

    control = dict(sim.counters)
    decisions: Tuple[dict, ...] = ()
    ledgers = {}
    if sim.controller is not None:
        control['malformed'] = sim.controller.malformed
        control['flows_installed'] = sum(len(sw.installs) for sw in sim.switches.values())
        decisions = tuple(d.to_dict() for d in sim.controller.decisions)
        ledgers = {sid: ledger.to_dict() for sid, ledger in sorted(sim.controller.state.ledgers.items())}

    return SimReport(classes, links, decisions, control, ledgers, tuple(events), scenario.path or '',
                     scenario.seed, scenario.duration, scenario.broker_enabled)


def write_json(report: SimReport, path: str):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write('\n')
    log.info('wrote %s', path)


def write_events_csv(report: SimReport, path: str):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        w = csv.writer(f)
        w.writerow(EVENT_FIELDS)
        for event in report.events:
            w.writerow(event.row())
    log.info('wrote %s (%d frames)', path, len(report.events))


def summary(report: SimReport, violations: Sequence[Violation] = ()) -> str:
    lines = [
        f'scenario {report.scenario or "-"}  seed {report.seed}  duration {report.duration:g} s  '
        f'broker {"on" if report.broker_enabled else "off"}',
        '',
        f'{"class":<10} {"generated":>9} {"delivered":>9} {"dropped":>8} {"p99 us":>11} {"max us":>11} '
        f'{"late":>6}',
    ]
    for cls, stats in report.classes.items():
        p99 = f'{stats.delay.p99:.3f}' if stats.delay else '-'
        mx = f'{stats.delay.max:.3f}' if stats.delay else '-'
        lines.append(f'{cls.value:<10} {stats.generated:>9} {stats.delivered:>9} {stats.dropped:>8} {p99:>11} '
                     f'{mx:>11} {stats.violations:>6}')
    if report.links:
        lines.append('')
        for link in report.links:
            lines.append(f'{link.port}: utilization {link.utilization:.3f}, {link.dropped_octets} octets dropped')
    lines.append('')
    if violations:
        lines.extend(f'VIOLATION {v}' for v in violations)
    else:
        lines.append('all timing bounds met')
    return '\n'.join(lines) + '\n'


def write_summary(report: SimReport, violations: Sequence[Violation], path: str):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(summary(report, violations))
    log.info('wrote %s', path)
