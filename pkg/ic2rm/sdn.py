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
# The control loop between switches and the broker.
#
# The first frame of a flow that misses a switch's flow table reaches the
# controller as a PacketIn. The controller classifies it, admits it into the
# ledger of the switch's uplink port, and answers with a FlowMod for the flow
# and, when the reservations moved, a QueueSet with the new queue split.
# Later frames of the flow match in the switch and never reach the
# controller; when they stop, the switch entry and the ledger entry both age
# out after the broker's idle timeout.
#
# Example:
#     controller = ic2rm.sdn.Controller(config)
#     switch.apply(controller.start(), now=0.0)
#     switch.apply(controller.packet_in(PacketIn('s1', 3, frame, now)), now)

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Tuple, Union

import ic2rm
from ic2rm import broker
from ic2rm.broker import AllocationPolicy, AllocationState, BrokerConfig, Decision, QueuePlan, Rejected
from ic2rm.classify import FlowKey, MessageClass, classify_frame
from ic2rm.codec import MacAddress
from ic2rm.timing import DemandEstimate, TrafficProfile, estimate_demand

log = logging.getLogger(__name__)

# Demand assumed for flows nobody declared a profile for.
DEFAULT_PROFILES = {
    MessageClass.GOOSE: TrafficProfile(MessageClass.GOOSE, 150, heartbeat_us=1_000_000),
    MessageClass.SV: TrafficProfile(MessageClass.SV, 126, sample_rate=4000),
    MessageClass.MMS: TrafficProfile(MessageClass.MMS, 1500, load_bps=1_000_000),
    MessageClass.TIME_SYNC: TrafficProfile(MessageClass.TIME_SYNC, 90, interval_us=1_000_000),
    MessageClass.OTHER: TrafficProfile(MessageClass.OTHER, 1000, load_bps=1_000_000),
}


@dataclass(frozen=True)
class PacketIn:
    switch_id: str
    in_port: int
    frame: bytes
    at: float


@dataclass(frozen=True)
class Output:
    port: int


@dataclass(frozen=True)
class Drop:
    pass


Action = Union[Output, Drop]


@dataclass(frozen=True)
class FlowMod:
    switch_id: str
    match: FlowKey
    queue_id: int
    idle_timeout: float
    action: Action


@dataclass(frozen=True)
class QueueSet:
    switch_id: str
    port: Hashable
    plan: QueuePlan


Command = Union[FlowMod, QueueSet]


class Switch(ABC):
    """
    What the controller needs from a switch. The simulator provides the only
    in-tree implementation with a data plane; ic2rm.mock provides a recording
    one for tests.
    """
    @abstractmethod
    def apply_flow_mod(self, mod: FlowMod, now: float):
        pass

    @abstractmethod
    def apply_queue_set(self, queue_set: QueueSet, now: float):
        pass

    def apply(self, commands: Iterable[Command], now: float):
        for command in commands:
            if isinstance(command, FlowMod):
                self.apply_flow_mod(command, now)
            else:
                self.apply_queue_set(command, now)


@dataclass
class FlowEntry:
    mod: FlowMod
    installed_at: float
    last_hit: float
    packets: int = 0


class FlowTable:
    """
    A switch flow table with idle timeouts. Entries expire lazily on lookup
    and eagerly on expire().
    """
    def __init__(self):
        self.entries: Dict[FlowKey, FlowEntry] = {}

    def install(self, mod: FlowMod, now: float):
        self.entries[mod.match] = FlowEntry(mod, now, now)

    def lookup(self, key: FlowKey, now: float) -> Optional[FlowMod]:
        entry = self.entries.get(key)
        if entry is None:
            return None
        if now - entry.last_hit > entry.mod.idle_timeout:
            del self.entries[key]
            return None
        entry.last_hit = now
        entry.packets += 1
        return entry.mod

    def expire(self, now: float) -> List[FlowKey]:
        removed = [k for k, e in self.entries.items() if now - e.last_hit > e.mod.idle_timeout]
        for k in removed:
            del self.entries[k]
        return removed

    def last_hits(self) -> Dict[FlowKey, float]:
        return {k: e.last_hit for k, e in self.entries.items()}

    def __contains__(self, key):
        return key in self.entries

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class SwitchConfig:
    """
    One switch: its id, the port toward the inter-substation link and its
    static MAC table. control_delay, when set, overrides the run's default
    control-channel delay for this switch.
    """
    id: str
    uplink: int
    mac_table: Mapping[MacAddress, int] = field(default_factory=dict)
    control_delay: Optional[float] = None


@dataclass(frozen=True)
class ControllerConfig:
    broker: BrokerConfig
    switches: Mapping[str, SwitchConfig]
    demands: Mapping[FlowKey, DemandEstimate] = field(default_factory=dict)
    policy: Optional[AllocationPolicy] = None

    def demand_for(self, key: FlowKey, cls: MessageClass) -> DemandEstimate:
        demand = self.demands.get(key)
        if demand is None:
            demand = estimate_demand(cls, DEFAULT_PROFILES[cls])
        return demand


@dataclass(frozen=True)
class DecisionRecord:
    at: float
    switch_id: str
    key: FlowKey
    cls: MessageClass
    decision: Optional[Decision]
    action: Action

    def to_dict(self) -> dict:
        return {
            'at': round(self.at, 6),
            'switch': self.switch_id,
            'flow': str(self.key),
            'class': str(self.cls),
            'decision': self.decision.kind if self.decision is not None else 'bypass',
            'reserved': getattr(self.decision, 'reserved', 0),
            'action': f'output:{self.action.port}' if isinstance(self.action, Output) else 'drop',
        }


@dataclass(frozen=True)
class ControllerState:
    """
    One allocation ledger per switch uplink, plus the bypass cache: flows
    that got a FlowMod without a reservation (rejected, unroutable or not
    crossing the uplink), kept with their last_seen so duplicates stay
    silent until they idle out.
    """
    config: ControllerConfig
    ledgers: Dict[str, AllocationState]
    bypass: Dict[Tuple[str, FlowKey], float] = field(default_factory=dict)
    malformed: int = 0
    decisions: Tuple[DecisionRecord, ...] = ()

    @classmethod
    def initial(cls, config: ControllerConfig) -> 'ControllerState':
        return cls(config, {sid: AllocationState.empty(config.broker) for sid in config.switches})

    def plan(self, switch_id: str) -> QueuePlan:
        return broker.current_plan(self.ledgers[switch_id], self.config.switches[switch_id].uplink)


def _queue_set(state: ControllerState, switch_id: str) -> QueueSet:
    sw = state.config.switches[switch_id]
    return QueueSet(switch_id, sw.uplink, state.plan(switch_id))


def _expire(state: ControllerState, now: float, switch_id: Optional[str] = None) -> ControllerState:
    ledgers = dict(state.ledgers)
    for sid, ledger in state.ledgers.items():
        if switch_id is not None and sid != switch_id:
            continue
        ledgers[sid], removed = broker.expire(ledger, now)
        for key in removed:
            log.debug('%s: flow %s idled out', sid, key)
    timeout = state.config.broker.idle_timeout
    bypass = {(sid, k): seen for (sid, k), seen in state.bypass.items()
              if now - seen <= timeout or (switch_id is not None and sid != switch_id)}
    return replace(state, ledgers=ledgers, bypass=bypass)


def initial_commands(state: ControllerState) -> List[Command]:
    """One QueueSet per switch with the plan of its current ledger."""
    return [_queue_set(state, sid) for sid in sorted(state.ledgers)]


def observe(state: ControllerState, switch_id: str, hits: Mapping[FlowKey, float]) -> ControllerState:
    """
    Folds a switch's flow statistics (last hit per installed flow) into the
    controller: ledger and bypass entries are refreshed to the switch's view.
    """
    ledger = state.ledgers.get(switch_id)
    if ledger is None:
        return state
    bypass = None
    for key, at in hits.items():
        if key in ledger.flows:
            ledger = broker.touch(ledger, key, at)
        elif state.bypass.get((switch_id, key), at) < at:
            if bypass is None:
                bypass = dict(state.bypass)
            bypass[(switch_id, key)] = at
    ledgers = dict(state.ledgers)
    ledgers[switch_id] = ledger
    return replace(state, ledgers=ledgers, bypass=state.bypass if bypass is None else bypass)


def tick(state: ControllerState, now: float) -> Tuple[ControllerState, List[Command]]:
    """
    Expires idle flows in every ledger; a QueueSet is emitted for each
    switch whose plan changed.
    """
    after = _expire(state, now)
    commands = [_queue_set(after, sid) for sid in sorted(after.ledgers)
                if broker.plan_changed(state.ledgers[sid], after.ledgers[sid])]
    return after, commands


def on_packet_in(state: ControllerState, ev: PacketIn) -> Tuple[ControllerState, List[Command]]:
    """
    Handles the first frame of a flow.

    Live known flows are touched and produce no commands; idle entries are
    only expired here, on the PacketIn switch, when a new flow arrives, and
    everywhere by tick. A new flow that leaves through the uplink is admitted
    into that uplink's ledger and gets a FlowMod into its class queue, or a
    Drop FlowMod if it is rejected; a QueueSet follows iff the uplink's plan
    changed. New flows that stay local or have no route get a FlowMod
    without touching the ledger.
    Malformed frames are counted and ignored.
    """
    try:
        classified = classify_frame(ev.frame)
    except ic2rm.CodecError as e:
        log.warning('%s: ignoring malformed PacketIn: %s', ev.switch_id, e)
        return replace(state, malformed=state.malformed + 1), []
    sw = state.config.switches.get(ev.switch_id)
    if sw is None:
        log.warning('ignoring PacketIn from unknown switch %s', ev.switch_id)
        return replace(state, malformed=state.malformed + 1), []

    key, cls = classified.key, classified.cls
    idle_timeout = state.config.broker.idle_timeout
    before = state.ledgers[sw.id]
    record = before.flows.get(key)
    if record is not None and ev.at - record.last_seen <= idle_timeout:
        ledgers = dict(state.ledgers)
        ledgers[sw.id] = broker.touch(before, key, ev.at)
        return replace(state, ledgers=ledgers), []
    bypass_key = (sw.id, key)
    seen = state.bypass.get(bypass_key)
    if seen is not None and ev.at - seen <= idle_timeout:
        bypass = dict(state.bypass)
        bypass[bypass_key] = max(seen, ev.at)
        return replace(state, bypass=bypass), []

    state = _expire(state, ev.at, sw.id)
    ledger = state.ledgers[sw.id]
    queue_id = broker.QUEUE_FOR_CLASS[cls]
    port = sw.mac_table.get(key.dst)
    if port != sw.uplink:
        action = Drop() if port is None else Output(port)
        if port is None:
            log.warning('%s: no route to %s for %s flow %s', sw.id, key.dst, cls, key)
        state = _remember_bypass(state, ev, key, cls, None, action)
        return state, [FlowMod(sw.id, key, queue_id, idle_timeout, action)] + _plan_update(state, sw.id, before)

    ledger, decision = broker.admit(ledger, key, cls, state.config.demand_for(key, cls), ev.at,
                                    state.config.policy)
    if isinstance(decision, Rejected):
        log.info('%s: rejected %s flow %s (%s)', sw.id, cls, key, decision.reason)
        state = _remember_bypass(state, ev, key, cls, decision, Drop())
        return state, [FlowMod(sw.id, key, queue_id, idle_timeout, Drop())] + _plan_update(state, sw.id, before)

    action = Output(port)
    ledgers = dict(state.ledgers)
    ledgers[sw.id] = ledger
    state = replace(state, ledgers=ledgers,
                    decisions=state.decisions + (DecisionRecord(ev.at, sw.id, key, cls, decision, action),))
    log.debug('%s: %s flow %s -> queue %d, %s', sw.id, cls, key, queue_id, decision)
    return state, [FlowMod(sw.id, key, queue_id, idle_timeout, action)] + _plan_update(state, sw.id, before)


def _remember_bypass(state: ControllerState, ev: PacketIn, key: FlowKey, cls: MessageClass,
                     decision: Optional[Decision], action: Action) -> ControllerState:
    bypass = dict(state.bypass)
    bypass[(ev.switch_id, key)] = ev.at
    record = DecisionRecord(ev.at, ev.switch_id, key, cls, decision, action)
    return replace(state, bypass=bypass, decisions=state.decisions + (record,))


def _plan_update(state: ControllerState, switch_id: str, before: AllocationState) -> List[Command]:
    if broker.plan_changed(before, state.ledgers[switch_id]):
        return [_queue_set(state, switch_id)]
    return []


class Controller:
    """
    Holds a ControllerState and threads it through the control-loop
    functions, for callers that prefer an object to passing state around.
    """
    def __init__(self, config: ControllerConfig):
        self.state = ControllerState.initial(config)
        self.commands_sent = 0

    def _sent(self, commands: List[Command]) -> List[Command]:
        self.commands_sent += len(commands)
        return commands

    def start(self) -> List[Command]:
        return self._sent(initial_commands(self.state))

    def packet_in(self, ev: PacketIn) -> List[Command]:
        self.state, commands = on_packet_in(self.state, ev)
        return self._sent(commands)

    def tick(self, now: float) -> List[Command]:
        self.state, commands = tick(self.state, now)
        return self._sent(commands)

    def observe(self, switch_id: str, hits: Mapping[FlowKey, float]):
        self.state = observe(self.state, switch_id, hits)

    @property
    def decisions(self) -> Tuple[DecisionRecord, ...]:
        return self.state.decisions

    @property
    def malformed(self) -> int:
        return self.state.malformed
