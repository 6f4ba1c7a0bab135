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
# Discrete-event simulation of substations joined by a constrained link.
#
# IEDs publish into their substation switch. Only the switch port toward the
# inter-substation link is modelled: frames queue there, are serialized at
# link rate and arrive after the propagation delay. With the broker enabled
# the port runs three strict-priority queues with a token bucket on the
# shared queue, and the first frame of every flow detours through the
# controller. With the broker disabled the port is a single FIFO forwarding
# by static MAC table. The clock is in seconds; reported delays are in
# microseconds.
#
# Example:
#     report = ic2rm.sim.run(ic2rm.scenario.load('scenarios/inter-substation-100m.toml'))

import logging
from collections import Counter, deque
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import simpy

from ic2rm import report as reports
from ic2rm import sdn
from ic2rm.broker import QueuePlan
from ic2rm.classify import MessageClass
from ic2rm.codec import (EthernetFrame, EthernetHeader, GoosePdu, SvPdu, Timestamp, encode_ethernet, encode_goose,
                         encode_ipv4, encode_sv)
from ic2rm.registry import ETHERTYPE_IPV4
from ic2rm.scenario import Link, Scenario, Source

log = logging.getLogger(__name__)

# UtcTime of simulated time zero
EPOCH = 1_700_000_000
_TOKEN_TOLERANCE = 1e-6

DELIVERED = 'delivered'
DROPPED = 'dropped'
REJECTED = 'rejected'
UNROUTABLE = 'unroutable'
IN_FLIGHT = 'in_flight'


class Frame:
    __slots__ = ('publisher', 'seq', 'generated_at', 'fields', 'queue', 'status', 'delivered_at')

    def __init__(self, publisher: '_Publisher', seq: int, generated_at: float, fields: tuple = ()):
        self.publisher = publisher
        self.seq = seq
        self.generated_at = generated_at
        self.fields = fields
        self.queue: Optional[int] = None
        self.status = IN_FLIGHT
        self.delivered_at: Optional[float] = None

    @property
    def octets(self) -> int:
        return self.publisher.source.profile.frame_octets

    def encode(self) -> bytes:
        return self.publisher.encode(self)


class PortModel:
    """
    An output port: per-queue tail-drop buffers of `buffer` octets, strict
    priority q2 > q1 > q0 without preemption and a token bucket of `bucket`
    octets limiting q1 to the plan's q1 max_rate. With prioritized=False it
    is one FIFO and ignores queue ids and plans.

    Octets are conserved: offered = transmitted + dropped + resident +
    in service.
    """
    def __init__(self, env: simpy.Environment, name: str, rate: int, buffer: int, bucket: int,
                 propagation: float, deliver: Callable[[Frame], None], prioritized: bool = True,
                 record: bool = False):
        self.env = env
        self.name = name
        self.rate = rate
        self.buffer = buffer
        self.propagation = propagation
        self.deliver = deliver
        self.queues = [deque() for _ in range(3 if prioritized else 1)]
        self.resident = [0] * len(self.queues)
        self.bucket_bits = bucket * 8
        self.tokens = float(self.bucket_bits)
        self.shaper_rate: Optional[int] = None
        self.offered = 0
        self.transmitted = 0
        self.dropped = 0
        self.in_service = 0
        self.busy_time = 0.0
        # (start, end, queue, octets) per transmission when recording
        self.transmissions: Optional[List[Tuple[float, float, int, int]]] = [] if record else None
        self._last_refill = 0.0
        self._wakeup = env.event()
        env.process(self._transmit())

    @property
    def prioritized(self) -> bool:
        return len(self.queues) == 3

    def apply_plan(self, plan: QueuePlan):
        if not self.prioritized:
            return
        self._refill(self.env.now)
        self.shaper_rate = plan.queue(1).max_rate
        self._kick()

    def enqueue(self, frame: Frame, queue_id: int) -> bool:
        q = queue_id if self.prioritized else 0
        octets = frame.octets
        frame.queue = q
        self.offered += octets
        if self.resident[q] + octets > self.buffer:
            self.dropped += octets
            return False
        self.queues[q].append(frame)
        self.resident[q] += octets
        self._kick()
        return True

    def conserved(self) -> bool:
        return self.offered == self.transmitted + self.dropped + sum(self.resident) + self.in_service

    def _kick(self):
        if not self._wakeup.triggered:
            self._wakeup.succeed()

    def _refill(self, now: float):
        if self.shaper_rate is not None:
            self.tokens = min(self.bucket_bits, self.tokens + (now - self._last_refill) * self.shaper_rate)
        self._last_refill = now

    def _select(self) -> Tuple[Optional[int], Optional[float]]:
        queues = self.queues
        if not self.prioritized:
            return (0, None) if queues[0] else (None, None)
        if queues[2]:
            return 2, None
        wait = None
        if queues[1]:
            need = min(queues[1][0].octets * 8, self.bucket_bits)
            if self.shaper_rate is None or self.tokens >= need - _TOKEN_TOLERANCE:
                return 1, None
            wait = (need - self.tokens) / self.shaper_rate
        if queues[0]:
            return 0, None
        return None, wait

    def _transmit(self):
        env = self.env
        while True:
            self._refill(env.now)
            q, wait = self._select()
            if q is None:
                self._wakeup = env.event()
                if wait is None:
                    yield self._wakeup
                else:
                    yield self._wakeup | env.timeout(wait)
                continue

            frame = self.queues[q].popleft()
            octets = frame.octets
            self.resident[q] -= octets
            self.in_service = octets
            if q == 1 and self.shaper_rate is not None:
                self.tokens -= octets * 8
            start = env.now
            duration = octets * 8 / self.rate
            yield env.timeout(duration)
            self.in_service = 0
            self.transmitted += octets
            self.busy_time += duration
            if self.transmissions is not None:
                self.transmissions.append((start, env.now, q, octets))
            if self.propagation:
                env.timeout(self.propagation).callbacks.append(lambda _, f=frame: self.deliver(f))
            else:
                self.deliver(frame)


class SimSwitch(sdn.Switch):
    def __init__(self, sim: 'Simulation', config: sdn.SwitchConfig, link: Optional[Link]):
        self.sim = sim
        self.config = config
        self.table = sdn.FlowTable()
        self.installs: Counter = Counter()
        self.port: Optional[PortModel] = None
        if link is not None:
            self.port = PortModel(sim.env, f'{link.name}:{config.id}>{link.peer(config.id)}', link.capacity,
                                  link.buffer, link.bucket, link.propagation_us / 1_000_000, sim.deliver,
                                  prioritized=sim.scenario.broker_enabled, record=sim.record)

    @property
    def id(self) -> str:
        return self.config.id

    def apply_flow_mod(self, mod: sdn.FlowMod, now: float):
        self.table.install(mod, now)
        self.installs[mod.match] += 1

    def apply_queue_set(self, queue_set: sdn.QueueSet, now: float):
        if self.port is not None and queue_set.port == self.config.uplink:
            self.port.apply_plan(queue_set.plan)


class _Publisher:
    def __init__(self, sim: 'Simulation', source: Source):
        self.sim = sim
        self.source = source
        self.key = source.key
        self.rng = np.random.default_rng([sim.scenario.seed, source.index])
        self.header = EthernetHeader(source.dst_mac, source.src_mac)
        self.count = 0

    def emit(self, fields: tuple = ()):
        frame = Frame(self, self.count, self.sim.env.now, fields)
        self.count += 1
        self.sim.ingress(frame)

    def encode(self, frame: Frame) -> bytes:
        s = self.source
        if s.ethertype == ETHERTYPE_IPV4:
            return encode_ipv4(self.header, s.src_ip, s.dst_ip, s.proto, s.src_port, s.dst_port)
        return encode_ethernet(EthernetFrame(s.dst_mac, s.src_mac, s.ethertype, bytes(44)))

    def run(self):
        raise NotImplementedError


class GoosePublisher(_Publisher):
    """
    Publishes at start-up, then on every heartbeat. A state change (Poisson
    events) increments stNum, resets sqNum and is repeated after each
    retransmission gap before the heartbeat resumes. timeAllowedToLive is
    twice the gap to the next scheduled transmission.
    """
    def run(self):
        env = self.sim.env
        profile = self.source.profile
        heartbeat = profile.heartbeat_us / 1_000_000
        gaps = [g / 1_000_000 for g in profile.retransmissions_us]
        st_num, sq_num = 1, 0
        schedule: List[float] = []
        next_event = self._next_event(0.0)
        while True:
            gap = schedule[0] if schedule else heartbeat
            self.emit((st_num, sq_num, gap))
            next_tx = env.now + gap
            if schedule:
                schedule.pop(0)
            if next_event < next_tx:
                yield env.timeout(next_event - env.now)
                st_num = st_num % 0xffffffff + 1
                sq_num = 0
                schedule = list(gaps)
                next_event = self._next_event(env.now)
                continue
            yield env.timeout(next_tx - env.now)
            sq_num = (sq_num + 1) & 0xffffffff

    def _next_event(self, now: float) -> float:
        rate = self.source.profile.event_rate
        if rate <= 0:
            return float('inf')
        return now + self.rng.exponential(1.0 / rate)

    def encode(self, frame: Frame) -> bytes:
        st_num, sq_num, gap = frame.fields
        label = self.source.label[:48]
        pdu = GoosePdu(
            gocb_ref=f'{label}/LLN0$GO$gcb',
            time_allowed_to_live=max(1, round(2 * gap * 1000)),
            dat_set=f'{label}/LLN0$ds',
            go_id=label,
            t=Timestamp.from_seconds(EPOCH + frame.generated_at, quality=0x0a),
            st_num=st_num,
            sq_num=sq_num,
            all_data=(st_num % 2 == 0, st_num),
        )
        return encode_goose(self.header, self.source.appid, pdu)


class SvPublisher(_Publisher):
    """Constant-rate samples; smpCnt wraps at the sample rate."""
    def run(self):
        env = self.sim.env
        rate = self.source.profile.sample_rate
        period = 1.0 / rate
        wrap = max(1, int(rate))
        offset = self.rng.uniform(0, period)
        k = 0
        while True:
            yield env.timeout(max(0.0, offset + k * period - env.now))
            self.emit((k % wrap,))
            k += 1

    def encode(self, frame: Frame) -> bytes:
        smp_cnt, = frame.fields
        pdu = SvPdu(self.source.label[:64], smp_cnt & 0xffff, conf_rev=1, smp_synch=2)
        return encode_sv(self.header, self.source.appid, pdu)


class PoissonSource(_Publisher):
    """Open-loop offered load with exponential inter-arrival times (MMS, OTHER)."""
    def run(self):
        env = self.sim.env
        profile = self.source.profile
        mean = profile.frame_bits / profile.load_bps
        while True:
            yield env.timeout(self.rng.exponential(mean))
            self.emit()


class PeriodicSource(_Publisher):
    """One frame per interval from a random phase (time synchronisation)."""
    def run(self):
        env = self.sim.env
        interval = self.source.profile.interval_us / 1_000_000
        yield env.timeout(self.rng.uniform(0, interval))
        while True:
            self.emit()
            yield env.timeout(interval)


_PUBLISHERS = {
    MessageClass.GOOSE: GoosePublisher,
    MessageClass.SV: SvPublisher,
    MessageClass.MMS: PoissonSource,
    MessageClass.OTHER: PoissonSource,
    MessageClass.TIME_SYNC: PeriodicSource,
}


class Simulation:
    """
    One run of a scenario. Build it, call run() once, read the report.
    Set record=True to keep per-port transmission logs.
    """
    def __init__(self, scenario: Scenario, record: bool = False):
        scenario.validate()
        self.scenario = scenario
        self.record = record
        self.env = simpy.Environment()
        self.frames: List[Frame] = []
        self.counters: Counter = Counter()
        self.switches: Dict[str, SimSwitch] = {
            s.id: SimSwitch(self, s, scenario.link_of(s.id)) for s in scenario.switches
        }
        self.controller: Optional[sdn.Controller] = None
        if scenario.broker_enabled:
            self.controller = sdn.Controller(scenario.controller_config())
        self.publishers = [_PUBLISHERS[s.cls](self, s) for s in scenario.sources]

    def run(self) -> reports.SimReport:
        env = self.env
        if self.controller is not None:
            self._apply(self.controller.start(), 0.0)
            env.process(self._ticker())
        for publisher in self.publishers:
            env.process(publisher.run())
        log.info('running %s for %.3f s, broker %s', self.scenario.path or 'scenario', self.scenario.duration,
                 'on' if self.controller is not None else 'off')
        env.run(until=self.scenario.duration)
        result = reports.build(self)
        log.info('run finished: %d frames generated', len(self.frames))
        return result

    def ingress(self, frame: Frame):
        self.frames.append(frame)
        sw = self.switches[frame.publisher.source.switch]
        if self.controller is None:
            port = sw.config.mac_table.get(frame.publisher.source.dst_mac)
            self._output(sw, frame, port, 0)
            return
        mod = sw.table.lookup(frame.publisher.key, self.env.now)
        if mod is None:
            self.env.process(self._packet_in(sw, frame))
        else:
            self._forward(sw, frame, mod)

    def deliver(self, frame: Frame):
        frame.status = DELIVERED
        frame.delivered_at = self.env.now

    def _packet_in(self, sw: SimSwitch, frame: Frame):
        self.counters['packet_ins'] += 1
        yield self.env.timeout(self.scenario.control_delay_of(sw.id))
        now = self.env.now
        self.controller.observe(sw.id, sw.table.last_hits())
        ev = sdn.PacketIn(sw.id, frame.publisher.source.in_port, frame.encode(), now)
        self._apply(self.controller.packet_in(ev), now)
        mod = sw.table.lookup(frame.publisher.key, now)
        if mod is None:
            frame.status = UNROUTABLE
        else:
            self._forward(sw, frame, mod)

    def _forward(self, sw: SimSwitch, frame: Frame, mod: sdn.FlowMod):
        if isinstance(mod.action, sdn.Drop):
            frame.queue = mod.queue_id
            frame.status = REJECTED
        else:
            self._output(sw, frame, mod.action.port, mod.queue_id)

    def _output(self, sw: SimSwitch, frame: Frame, port: Optional[int], queue_id: int):
        if sw.port is None or port != sw.config.uplink:
            frame.status = UNROUTABLE
        elif not sw.port.enqueue(frame, queue_id):
            frame.status = DROPPED

    def _apply(self, commands: List[sdn.Command], now: float):
        for command in commands:
            key = 'flow_mods' if isinstance(command, sdn.FlowMod) else 'queue_sets'
            self.counters[key] += 1
            self.switches[command.switch_id].apply([command], now)

    def _ticker(self):
        env = self.env
        while True:
            yield env.timeout(self.scenario.tick)
            now = env.now
            for sid in sorted(self.switches):
                sw = self.switches[sid]
                self.controller.observe(sid, sw.table.last_hits())
                sw.table.expire(now)
            self._apply(self.controller.tick(now), now)


def run(scenario: Scenario) -> reports.SimReport:
    """
    Runs a scenario to completion. Equal scenarios (seed included) give
    identical reports. Raises InvalidScenario if the scenario's references
    dangle.
    """
    return Simulation(scenario).run()
