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
# The allocation ledger of one constrained link port.
#
# GOOSE and SV flows get a private reservation each; MMS and time
# synchronisation share a capped pool; everything else rides a best-effort
# floor. When a new reservation does not fit, the shared cap yields exactly
# the deficit, down to its floor. Idle flows expire and the shared cap grows
# back with the freed headroom. Every function returns a new AllocationState
# and leaves its input untouched.
#
# Example:
#     state = AllocationState.empty(config)
#     state, decision = admit(state, key, MessageClass.GOOSE, demand, now)
#     plan = current_plan(state, 'uplink')

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Tuple, Union

import ic2rm
from ic2rm.classify import FlowKey, MessageClass
from ic2rm.timing import DemandEstimate, reservation_rate

log = logging.getLogger(__name__)

INSUFFICIENT_CAPACITY = 'InsufficientCapacity'

QUEUE_FOR_CLASS = {
    MessageClass.GOOSE: 2,
    MessageClass.SV: 2,
    MessageClass.MMS: 1,
    MessageClass.TIME_SYNC: 1,
    MessageClass.OTHER: 0,
}


@dataclass(frozen=True)
class BrokerConfig:
    """
    Rates are bits per second, idle_timeout is seconds.

    Raises InvalidConfig unless every field is positive, shared_cap_floor <=
    shared_cap_max and shared_cap_max + best_effort_floor < link_capacity.
    """
    link_capacity: int
    shared_cap_max: int
    shared_cap_floor: int
    best_effort_floor: int
    idle_timeout: float

    def __post_init__(self):
        for name in ('link_capacity', 'shared_cap_max', 'shared_cap_floor', 'best_effort_floor', 'idle_timeout'):
            if getattr(self, name) <= 0:
                raise ic2rm.InvalidConfig(f'broker {name} must be positive')
        if self.shared_cap_floor > self.shared_cap_max:
            raise ic2rm.InvalidConfig('broker shared_cap_floor exceeds shared_cap_max')
        if self.shared_cap_max + self.best_effort_floor >= self.link_capacity:
            raise ic2rm.InvalidConfig('broker shared_cap_max + best_effort_floor must stay below link_capacity')

    @property
    def priority_headroom(self) -> int:
        """Largest reserved_total the ledger can ever hold."""
        return self.link_capacity - self.shared_cap_floor - self.best_effort_floor


@dataclass(frozen=True)
class AcceptedReserved:
    reserved: int
    plan_changed: bool = True
    kind = 'accepted_reserved'


@dataclass(frozen=True)
class AcceptedShared:
    kind = 'accepted_shared'


@dataclass(frozen=True)
class AcceptedBestEffort:
    kind = 'accepted_best_effort'


@dataclass(frozen=True)
class Rejected:
    reason: str = INSUFFICIENT_CAPACITY
    kind = 'rejected'


Decision = Union[AcceptedReserved, AcceptedShared, AcceptedBestEffort, Rejected]


@dataclass(frozen=True)
class FlowRecord:
    key: FlowKey
    cls: MessageClass
    demand: DemandEstimate
    reserved: int
    admitted_at: float
    last_seen: float
    decision: Decision


@dataclass(frozen=True)
class AllocationState:
    config: BrokerConfig
    flows: Dict[FlowKey, FlowRecord] = field(default_factory=dict)
    reserved_total: int = 0
    shared_cap_current: int = 0

    @classmethod
    def empty(cls, config: BrokerConfig) -> 'AllocationState':
        return cls(config, {}, 0, config.shared_cap_max)

    def check(self):
        """
        Asserts the ledger invariants; raises AssertionError naming the first
        one that fails.
        """
        cfg = self.config
        assert self.reserved_total == sum(r.reserved for r in self.flows.values()), 'reserved_total out of sync'
        assert cfg.shared_cap_floor <= self.shared_cap_current <= cfg.shared_cap_max, 'shared cap out of range'
        assert self.reserved_total + self.shared_cap_current + cfg.best_effort_floor <= cfg.link_capacity, \
            'link oversubscribed'
        for r in self.flows.values():
            assert (r.reserved > 0) == r.cls.is_priority, f'{r.key}: reservation does not match class'
            assert r.last_seen >= r.admitted_at, f'{r.key}: last_seen before admission'

    def to_dict(self) -> dict:
        return {
            'reserved_total': self.reserved_total,
            'shared_cap_current': self.shared_cap_current,
            'flows': [
                {
                    'flow': str(r.key),
                    'class': str(r.cls),
                    'reserved': r.reserved,
                    'admitted_at': r.admitted_at,
                    'last_seen': r.last_seen,
                }
                for r in self.flows.values()
            ],
        }


@dataclass(frozen=True)
class QueueSpec:
    id: int
    classes: FrozenSet[MessageClass]
    min_rate: int
    max_rate: int


@dataclass(frozen=True)
class QueuePlan:
    port: Hashable
    max_rate: int
    queues: Tuple[QueueSpec, ...]

    def queue(self, queue_id: int) -> QueueSpec:
        return self.queues[queue_id]

    def to_dict(self) -> dict:
        return {
            'port': str(self.port),
            'max_rate': self.max_rate,
            'queues': [
                {'id': q.id, 'classes': sorted(str(c) for c in q.classes), 'min_rate': q.min_rate,
                 'max_rate': q.max_rate}
                for q in self.queues
            ],
        }


class AllocationPolicy(ABC):
    """
    Decides how much a priority flow reserves. The broker rounds the answer
    up to whole bits per second and still enforces every ledger invariant,
    so a policy can only choose, never overcommit.
    """
    @abstractmethod
    def reservation(self, state: AllocationState, key: FlowKey, cls: MessageClass,
                    demand: DemandEstimate) -> float:
        pass


class StaticReservationPolicy(AllocationPolicy):
    """GOOSE at peak rate, SV at steady rate, for the whole flow lifetime."""
    def reservation(self, state, key, cls, demand):
        return reservation_rate(cls, demand)


DEFAULT_POLICY = StaticReservationPolicy()


def _restored_cap(config: BrokerConfig, reserved_total: int) -> int:
    return min(config.shared_cap_max, config.link_capacity - reserved_total - config.best_effort_floor)


def admit(state: AllocationState, key: FlowKey, cls: MessageClass, demand: DemandEstimate, now: float,
          policy: AllocationPolicy = None) -> Tuple[AllocationState, Decision]:
    """
    Admits a new flow.

    Priority flows reserve the policy's rate. If the link cannot hold it on
    top of the current shared cap, the shared cap shrinks by exactly the
    deficit; if that would take it below its floor the flow is Rejected and
    `state` is returned unchanged. MMS and time synchronisation are accepted
    into the shared pool, everything else as best effort.

    Raises DuplicateFlow if `key` is already in the ledger; use
    admit_or_touch for PacketIn duplicates.
    """
    if key in state.flows:
        raise ic2rm.DuplicateFlow(f'flow {key} is already admitted')

    cfg = state.config
    reserved = 0
    shared = state.shared_cap_current
    if cls.is_priority:
        requested = (policy or DEFAULT_POLICY).reservation(state, key, cls, demand)
        reserved = max(1, math.ceil(requested))
        need = state.reserved_total + reserved + shared + cfg.best_effort_floor - cfg.link_capacity
        if need > 0:
            if shared - need < cfg.shared_cap_floor:
                log.debug('reject %s %s: %d b/s requested, %d reserved, shared cap %d at floor %d',
                          cls, key, reserved, state.reserved_total, shared, cfg.shared_cap_floor)
                return state, Rejected(INSUFFICIENT_CAPACITY)
            shared -= need
            log.debug('shared cap %d -> %d for %s', state.shared_cap_current, shared, key)
        decision = AcceptedReserved(reserved, plan_changed=True)
    elif cls.is_shared:
        decision = AcceptedShared()
    else:
        decision = AcceptedBestEffort()

    record = FlowRecord(key, cls, demand, reserved, now, now, decision)
    flows = dict(state.flows)
    flows[key] = record
    log.debug('admit %s %s: %s', cls, key, decision)
    return replace(state, flows=flows, reserved_total=state.reserved_total + reserved,
                   shared_cap_current=shared), decision


def touch(state: AllocationState, key: FlowKey, now: float) -> AllocationState:
    """
    Refreshes a flow's last_seen. Raises UnknownFlow if `key` is not in the
    ledger.
    """
    try:
        record = state.flows[key]
    except KeyError:
        raise ic2rm.UnknownFlow(f'flow {key} is not admitted') from None
    if now <= record.last_seen:
        return state
    flows = dict(state.flows)
    flows[key] = replace(record, last_seen=now)
    return replace(state, flows=flows)


def admit_or_touch(state: AllocationState, key: FlowKey, cls: MessageClass, demand: DemandEstimate, now: float,
                   policy: AllocationPolicy = None) -> Tuple[AllocationState, Decision]:
    """
    admit for new keys; for known keys a touch that returns the decision the
    flow was originally admitted with.
    """
    record = state.flows.get(key)
    if record is None:
        return admit(state, key, cls, demand, now, policy)
    return touch(state, key, now), record.decision


def expire(state: AllocationState, now: float) -> Tuple[AllocationState, List[FlowKey]]:
    """
    Removes every flow idle for longer than idle_timeout, returns their
    reservations and lets the shared cap grow back toward its maximum.
    Returns the new state and the removed keys in admission order.
    """
    timeout = state.config.idle_timeout
    removed = [k for k, r in state.flows.items() if now - r.last_seen > timeout]
    if not removed:
        return state, []

    flows = {k: r for k, r in state.flows.items() if now - r.last_seen <= timeout}
    reserved_total = sum(r.reserved for r in flows.values())
    shared = _restored_cap(state.config, reserved_total)
    log.debug('expire %d flows at %.6f: reserved %d -> %d, shared cap %d -> %d', len(removed), now,
              state.reserved_total, reserved_total, state.shared_cap_current, shared)
    return replace(state, flows=flows, reserved_total=reserved_total, shared_cap_current=shared), removed


def current_plan(state: AllocationState, port: Hashable) -> QueuePlan:
    """
    The queue split of `port`: q2 guarantees the priority reservations, q1
    is capped at the shared cap and q0 guarantees the best-effort floor.
    """
    cfg = state.config
    cap = cfg.link_capacity
    return QueuePlan(port, cap, (
        QueueSpec(0, frozenset((MessageClass.OTHER,)), cfg.best_effort_floor, cap),
        QueueSpec(1, frozenset((MessageClass.MMS, MessageClass.TIME_SYNC)), 0, state.shared_cap_current),
        QueueSpec(2, frozenset((MessageClass.GOOSE, MessageClass.SV)), state.reserved_total, cap),
    ))


def feasible(reservations: Iterable[int], config: BrokerConfig) -> bool:
    """
    Whether a set of priority reservations fits the link once the shared
    floor and the best-effort floor are set aside.
    """
    return sum(reservations) <= config.priority_headroom


def sequential_oracle(reservations: Iterable[int], config: BrokerConfig) -> List[bool]:
    """
    Accept/reject per request when requests arrive in order and nothing
    admitted is ever preempted: a request is accepted iff the accepted set
    plus the request is feasible.
    """
    accepted: List[int] = []
    out = []
    for r in reservations:
        ok = feasible(accepted + [r], config)
        if ok:
            accepted.append(r)
        out.append(ok)
    return out


def plan_changed(before: Optional[AllocationState], after: AllocationState) -> bool:
    return before is None or (before.reserved_total, before.shared_cap_current) != \
        (after.reserved_total, after.shared_cap_current)
