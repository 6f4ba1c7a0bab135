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
# Transfer time bounds per message class, traffic profiles and the bandwidth
# demand the broker derives from them. Bounds and periods are integer
# microseconds, rates are bits per second.

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import ic2rm
from ic2rm.classify import MessageClass
from ic2rm.registry import MAX_FRAME_OCTETS, MIN_FRAME_OCTETS

DEFAULT_BOUNDS_US = {
    MessageClass.GOOSE: 3_000,
    MessageClass.SV: 3_000,
    MessageClass.TIME_SYNC: 100_000,
    MessageClass.MMS: 500_000,
    MessageClass.OTHER: None,
}

DESCRIPTIONS = {
    MessageClass.GOOSE: 'trips and interlocking between peers',
    MessageClass.SV: 'sampled measurements from merging units',
    MessageClass.TIME_SYNC: 'PTP and SNTP time synchronisation',
    MessageClass.MMS: 'supervisory client/server exchanges',
    MessageClass.OTHER: 'background traffic, no bound',
}

DEFAULT_RETRANSMISSIONS_US = (4_000, 8_000, 16_000, 32_000)


@dataclass(frozen=True)
class TimingClass:
    cls: MessageClass
    max_transfer_time: Optional[int]
    description: str = ''

    @property
    def bounded(self) -> bool:
        return self.max_transfer_time is not None


class TimingTable:
    """
    The transfer time bound of every MessageClass, in microseconds. Classes
    missing from `bounds` keep their defaults; None means unbounded.

    Raises InvalidConfig if a bound is not a positive integer or if any
    priority class bound is not strictly below every non-priority bound.
    """
    def __init__(self, bounds: Mapping[MessageClass, Optional[int]] = None):
        merged = dict(DEFAULT_BOUNDS_US)
        merged.update(bounds or {})
        for cls, bound in merged.items():
            if bound is not None and (not isinstance(bound, int) or isinstance(bound, bool) or bound <= 0):
                raise ic2rm.InvalidConfig(f'timing bound for {cls} must be a positive number of microseconds, '
                                          f'got {bound!r}')

        slowest_priority = max(merged[c] or math.inf for c in MessageClass if c.is_priority)
        fastest_other = min(merged[c] or math.inf for c in MessageClass if not c.is_priority)
        if slowest_priority >= fastest_other:
            raise ic2rm.InvalidConfig('priority classes need strictly smaller bounds than non-priority classes')

        self._classes: Dict[MessageClass, TimingClass] = {
            cls: TimingClass(cls, merged[cls], DESCRIPTIONS[cls]) for cls in MessageClass
        }

    def __getitem__(self, cls: MessageClass) -> TimingClass:
        return self._classes[cls]

    def __iter__(self):
        return iter(self._classes.values())

    def __eq__(self, other):
        return isinstance(other, TimingTable) and self._classes == other._classes

    def __repr__(self):
        bounds = ', '.join(f'{c}={t.max_transfer_time}' for c, t in self._classes.items())
        return f'TimingTable({bounds})'

    def bounds(self) -> Dict[MessageClass, Optional[int]]:
        return {cls: t.max_transfer_time for cls, t in self._classes.items()}


def lookup_timing(cls: MessageClass, table: TimingTable = None) -> TimingClass:
    return (table or TimingTable())[cls]


@dataclass(frozen=True)
class TrafficProfile:
    """
    What a source offers. Which fields matter depends on the class:

    SV: sample_rate frames per second.
    GOOSE: heartbeat_us between unchanged-state frames, event_rate state
        changes per second (Poisson) and the retransmissions_us gaps that
        follow each change before the heartbeat resumes.
    MMS, OTHER: load_bps offered with exponential inter-arrivals.
    TIME_SYNC: one frame every interval_us.
    """
    cls: MessageClass
    frame_octets: int
    sample_rate: float = 0
    heartbeat_us: int = 0
    event_rate: float = 0
    retransmissions_us: Tuple[int, ...] = field(default=DEFAULT_RETRANSMISSIONS_US)
    load_bps: float = 0
    interval_us: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'retransmissions_us', tuple(self.retransmissions_us))
        if not MIN_FRAME_OCTETS <= self.frame_octets <= MAX_FRAME_OCTETS:
            raise ic2rm.InvalidProfile(f'frame size {self.frame_octets} outside '
                                       f'[{MIN_FRAME_OCTETS}, {MAX_FRAME_OCTETS}] octets')
        for name in ('sample_rate', 'heartbeat_us', 'event_rate', 'load_bps', 'interval_us'):
            if getattr(self, name) < 0:
                raise ic2rm.InvalidProfile(f'{name} must not be negative')

    @property
    def frame_bits(self) -> int:
        return self.frame_octets * 8

    @property
    def burst_frames(self) -> int:
        """Frames sent for one GOOSE state change: the change plus its retransmissions."""
        return 1 + len(self.retransmissions_us)


@dataclass(frozen=True)
class DemandEstimate:
    steady_rate: float
    peak_rate: float
    burst_size: float = 0


def _positive(profile: TrafficProfile, *names: str):
    for name in names:
        if getattr(profile, name) <= 0:
            raise ic2rm.InvalidProfile(f'{profile.cls} profile needs a positive {name}')


def estimate_demand(cls: MessageClass, profile: TrafficProfile) -> DemandEstimate:
    """
    Derives the bandwidth a flow of class `cls` needs from its profile.

    Raises InvalidProfile if a field the class depends on is not positive.
    """
    bits = profile.frame_bits
    if cls == MessageClass.SV:
        _positive(profile, 'sample_rate')
        steady = bits * profile.sample_rate
        return DemandEstimate(steady, steady, bits)
    if cls == MessageClass.GOOSE:
        _positive(profile, 'heartbeat_us')
        if not profile.retransmissions_us or min(profile.retransmissions_us) <= 0:
            raise ic2rm.InvalidProfile('GOOSE profile needs positive retransmission gaps')
        steady = bits * 1_000_000 / profile.heartbeat_us
        peak = bits * 1_000_000 / min(profile.retransmissions_us)
        return DemandEstimate(steady, max(peak, steady), bits * profile.burst_frames)
    if cls == MessageClass.TIME_SYNC:
        _positive(profile, 'interval_us')
        rate = bits * 1_000_000 / profile.interval_us
        return DemandEstimate(rate, rate, bits)
    _positive(profile, 'load_bps')
    return DemandEstimate(profile.load_bps, profile.load_bps, bits)


def reservation_rate(cls: MessageClass, demand: DemandEstimate) -> int:
    """
    Per-flow reservation: GOOSE at its peak rate so a retransmission burst
    fits, SV at its constant rate, nothing for non-priority classes.
    """
    if cls == MessageClass.GOOSE:
        return math.ceil(demand.peak_rate)
    if cls == MessageClass.SV:
        return math.ceil(demand.steady_rate)
    return 0
