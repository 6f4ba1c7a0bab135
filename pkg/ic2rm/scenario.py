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
# Scenario files: TOML documents describing the substations, the link
# between them, the IEDs and what they send, the broker and the timing
# bounds. Quantities carry units ("100mbps", "4ms", "256KiB"). Every problem
# is reported as a ScenarioError pointing at the offending key.
#
# Example:
#     scenario = ic2rm.scenario.load('run.toml', overrides=['mms.load=90mbps'])

import copy
import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

try:
    import tomllib
except ImportError:
    import tomli as tomllib

import ic2rm
from ic2rm.broker import BrokerConfig
from ic2rm.classify import L4, FlowKey, MessageClass
from ic2rm.codec import MacAddress
from ic2rm.registry import (ETHERTYPE_GOOSE, ETHERTYPE_IPV4, ETHERTYPE_PTP, ETHERTYPE_SV, IPPROTO_TCP, IPPROTO_UDP,
                            PORT_MMS, PORT_SNTP)
from ic2rm.sdn import ControllerConfig, SwitchConfig
from ic2rm.timing import DEFAULT_RETRANSMISSIONS_US, TimingTable, TrafficProfile, estimate_demand

log = logging.getLogger(__name__)

_RATE_UNITS = {'bps': 1, 'kbps': 10 ** 3, 'mbps': 10 ** 6, 'gbps': 10 ** 9}
_DURATION_UNITS = {'us': 1, 'ms': 10 ** 3, 's': 10 ** 6}
_SIZE_UNITS = {'b': 1, 'kib': 1 << 10, 'mib': 1 << 20}
_QUANTITY = re.compile(r'^\s*([0-9]+(?:\.[0-9]*)?)\s*([A-Za-z]+)\s*$')
_TOML_LOCATION = re.compile(r'\s*\(at line (\d+), column (\d+)\)')

DEFAULT_FRAME_OCTETS = {
    MessageClass.GOOSE: 150,
    MessageClass.SV: 126,
    MessageClass.MMS: 1500,
    MessageClass.TIME_SYNC: 90,
    MessageClass.OTHER: 1000,
}
DEFAULT_BUFFER = 256 << 10
DEFAULT_BUCKET = 16 << 10
DEFAULT_OTHER_PORT = 5000
PTP_MULTICAST = MacAddress.parse('01:1b:19:00:00:00')

_SECTIONS = {'run', 'broker', 'timing', 'link', 'switch', 'ied'}
_RUN_KEYS = {'duration', 'seed', 'control_delay', 'tick'}
_BROKER_KEYS = {'enabled', 'link_capacity', 'shared_cap_max', 'shared_cap_floor', 'best_effort_floor',
                'idle_timeout'}
_LINK_KEYS = {'name', 'a', 'b', 'capacity', 'propagation', 'buffer', 'bucket'}
_SWITCH_KEYS = {'name', 'uplink', 'control_delay', 'macs'}
_IED_KEYS = {'name', 'switch', 'port', 'mac', 'ip', 'traffic'}
_TRAFFIC_KEYS = {'class', 'dst', 'appid', 'id', 'frame', 'sample_rate', 'heartbeat', 'event_rate',
                 'retransmissions', 'load', 'interval', 'proto', 'port', 'transport'}
_UNBOUNDED = {'none', 'unbounded', 'inf'}


def _quantity(value: Any, units: Mapping[str, int], kind: str) -> Decimal:
    if isinstance(value, bool) or not isinstance(value, str):
        raise ValueError(f'{value!r} needs a unit ({", ".join(units)})')
    m = _QUANTITY.match(value)
    if not m or m.group(2).lower() not in units:
        raise ValueError(f'{value!r} is not a {kind} ({", ".join(units)})')
    try:
        return Decimal(m.group(1)) * units[m.group(2).lower()]
    except InvalidOperation as e:
        raise ValueError(f'{value!r} is not a {kind}') from e


def parse_rate(value: Any) -> int:
    """'100mbps' -> 100000000 bits per second."""
    return int(_quantity(value, _RATE_UNITS, 'rate'))


def parse_duration_us(value: Any) -> int:
    """'4ms' -> 4000 microseconds."""
    return int(_quantity(value, _DURATION_UNITS, 'duration'))


def parse_size(value: Any) -> int:
    """'256KiB' -> 262144 octets."""
    return int(_quantity(value, _SIZE_UNITS, 'size'))


@dataclass(frozen=True)
class Link:
    name: str
    a: str
    b: str
    capacity: int
    propagation_us: int = 0
    buffer: int = DEFAULT_BUFFER
    bucket: int = DEFAULT_BUCKET

    def peer(self, switch_id: str) -> str:
        return self.b if switch_id == self.a else self.a


@dataclass(frozen=True)
class Ied:
    name: str
    switch: str
    port: int
    mac: MacAddress
    ip: str


@dataclass(frozen=True)
class Source:
    """One traffic stream: a TrafficProfile bound to its publisher and addresses."""
    index: int
    name: str
    ied: str
    switch: str
    in_port: int
    cls: MessageClass
    profile: TrafficProfile
    src_mac: MacAddress
    dst_mac: MacAddress
    ethertype: int
    appid: Optional[int] = None
    label: str = ''
    src_ip: Optional[str] = None
    dst_ip: Optional[str] = None
    proto: Optional[int] = None
    src_port: int = 0
    dst_port: int = 0

    @property
    def key(self) -> FlowKey:
        if self.ethertype in (ETHERTYPE_GOOSE, ETHERTYPE_SV):
            return FlowKey(self.src_mac, self.dst_mac, self.ethertype, appid=self.appid)
        if self.ethertype == ETHERTYPE_IPV4:
            return FlowKey(self.src_mac, self.dst_mac, self.ethertype, l4=L4(self.proto, self.dst_port))
        return FlowKey(self.src_mac, self.dst_mac, self.ethertype)


@dataclass(frozen=True)
class Scenario:
    links: Tuple[Link, ...]
    switches: Tuple[SwitchConfig, ...]
    ieds: Tuple[Ied, ...]
    sources: Tuple[Source, ...]
    broker: BrokerConfig
    timing: TimingTable = field(default_factory=TimingTable)
    duration: float = 1.0
    seed: int = 0
    broker_enabled: bool = True
    control_delay: float = 0.001
    tick: float = 0.1
    path: Optional[str] = None

    def validate(self):
        """
        Raises InvalidScenario if references dangle or the run has no
        duration.
        """
        names = {s.id for s in self.switches}
        if self.duration <= 0:
            raise ic2rm.InvalidScenario('duration must be positive')
        if not 0 <= self.seed < (1 << 64):
            raise ic2rm.InvalidScenario('seed must be a 64-bit unsigned integer')
        for link in self.links:
            if link.a not in names or link.b not in names:
                raise ic2rm.InvalidScenario(f'link {link.name} references an undeclared switch')
        for ied in self.ieds:
            if ied.switch not in names:
                raise ic2rm.InvalidScenario(f'IED {ied.name} is attached to undeclared switch {ied.switch}')
        for source in self.sources:
            if self.link_of(source.switch) is None:
                raise ic2rm.InvalidScenario(f'{source.name}: switch {source.switch} has no link')

    def switch(self, switch_id: str) -> SwitchConfig:
        for s in self.switches:
            if s.id == switch_id:
                return s
        raise KeyError(switch_id)

    def link_of(self, switch_id: str) -> Optional[Link]:
        for link in self.links:
            if switch_id in (link.a, link.b):
                return link
        return None

    def control_delay_of(self, switch_id: str) -> float:
        delay = self.switch(switch_id).control_delay
        return self.control_delay if delay is None else delay

    def controller_config(self) -> ControllerConfig:
        demands = {s.key: estimate_demand(s.cls, s.profile) for s in self.sources}
        return ControllerConfig(self.broker, {s.id: s for s in self.switches}, demands)


class _Locator:
    """
    Maps document paths such as ('ied', 1, 'traffic', 0, 'load') to the
    line and column they were written at, by scanning table headers and
    key assignments in the source text.
    """
    _HEADER = re.compile(r'^\s*(\[\[?)\s*([A-Za-z0-9_.\- ]+?)\s*\]\]?')
    _KEY = re.compile(r'^(\s*)(?:"([^"]+)"|\'([^\']+)\'|([A-Za-z0-9_\-]+))\s*=')

    def __init__(self, text: str):
        self.locations: Dict[tuple, Tuple[int, int]] = {}
        arrays: Dict[tuple, int] = {}
        current: tuple = ()
        for lineno, line in enumerate(text.splitlines(), 1):
            header = self._HEADER.match(line)
            if header:
                parts = [p.strip() for p in header.group(2).split('.')]
                path: tuple = ()
                for part in parts[:-1]:
                    path += (part,)
                    if path in arrays:
                        path += (arrays[path] - 1,)
                path += (parts[-1],)
                if header.group(1) == '[[':
                    arrays[path] = arrays.get(path, 0) + 1
                    path += (arrays[path] - 1,)
                current = path
                self.locations.setdefault(current, (lineno, line.index('[') + 1))
                continue
            key = self._KEY.match(line)
            if key:
                name = key.group(2) or key.group(3) or key.group(4)
                self.locations.setdefault(current + (name,), (lineno, len(key.group(1)) + 1))

    def find(self, path: tuple) -> Tuple[Optional[int], Optional[int]]:
        while path:
            if path in self.locations:
                return self.locations[path]
            path = path[:-1]
        return None, None


class _Document:
    def __init__(self, source: str, text: str = ''):
        self.source = source
        self.locator = _Locator(text)

    def error(self, msg: str, path: tuple = ()) -> ic2rm.ScenarioError:
        line, column = self.locator.find(path)
        return ic2rm.ScenarioError(msg, self.source, line, column)


_REQUIRED = object()


class _Table:
    def __init__(self, data: Any, path: tuple, doc: _Document):
        if not isinstance(data, dict):
            raise doc.error(f'{".".join(map(str, path))} must be a table', path)
        self.data = data
        self.path = path
        self.doc = doc

    def fail(self, msg: str, key: str = None) -> ic2rm.ScenarioError:
        where = self.path + ((key,) if key is not None else ())
        return self.doc.error(msg, where)

    def check_keys(self, allowed: Iterable[str]):
        allowed = set(allowed)
        for key in self.data:
            if key not in allowed:
                raise self.fail(f'unknown key {key!r} in [{".".join(p for p in self.path if isinstance(p, str))}]',
                                key)

    def get(self, key: str, convert: Callable[[Any], Any] = None, default: Any = _REQUIRED) -> Any:
        if key not in self.data:
            if default is _REQUIRED:
                raise self.fail(f'missing key {key!r}')
            return default
        value = self.data[key]
        if convert is None:
            return value
        try:
            return convert(value)
        except (ValueError, TypeError, ic2rm.Ic2rmException) as e:
            raise self.fail(f'{key}: {e}', key) from e

    def table(self, key: str) -> '_Table':
        return _Table(self.data.get(key, {}), self.path + (key,), self.doc)

    def tables(self, key: str) -> List['_Table']:
        items = self.data.get(key, [])
        if not isinstance(items, list):
            raise self.fail(f'{key} must be an array of tables ([[{key}]])', key)
        return [_Table(item, self.path + (key, i), self.doc) for i, item in enumerate(items)]


def _integer(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f'{value!r} is not an integer')
    return value


def _count(value: Any) -> int:
    value = _integer(value)
    if value < 1:
        raise ValueError(f'{value!r} is not a positive integer')
    return value


def _number(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f'{value!r} is not a number')
    return value


def _string(value: Any) -> str:
    if not isinstance(value, str):
        raise ValueError(f'{value!r} is not a string')
    return value


def _boolean(value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f'{value!r} is not true or false')
    return value


def _seconds(value: Any) -> float:
    return parse_duration_us(value) / 1_000_000


def _bound(value: Any) -> Optional[int]:
    if isinstance(value, str) and value.strip().lower() in _UNBOUNDED:
        return None
    return parse_duration_us(value)


def _parse_value(text: str) -> Any:
    try:
        return tomllib.loads(f'v = {text}')['v']
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(doc: dict, overrides: Sequence[str]) -> dict:
    """
    Applies `key=value` overrides to a parsed scenario document and returns
    the modified copy. Paths are run.<key>, broker.<key>, timing.<class>,
    link.<name>.<key>, switch.<name>.<key>, ied.<name>.<index>.<key> and the
    class-wide <class>.<key>, which sets the key on every traffic entry of
    that class.
    """
    doc = copy.deepcopy(doc)
    for override in overrides:
        path, sep, text = override.partition('=')
        parts = path.strip().split('.')
        if not sep or len(parts) < 2 or not all(parts):
            raise ic2rm.ScenarioError(f'override {override!r} is not <path>=<value>', '--set')
        value = _parse_value(text.strip())
        head = parts[0]
        if head in ('run', 'broker', 'timing') and len(parts) == 2:
            doc.setdefault(head, {})[parts[1]] = value
        elif head in ('link', 'switch') and len(parts) == 3:
            _named(doc, head, parts[1], override)[parts[2]] = value
        elif head == 'ied' and len(parts) == 4:
            traffic = _named(doc, 'ied', parts[1], override).get('traffic', [])
            try:
                traffic[int(parts[2])][parts[3]] = value
            except (ValueError, IndexError) as e:
                raise ic2rm.ScenarioError(f'override {override!r}: no traffic entry {parts[2]}', '--set') from e
        elif head in {c.value for c in MessageClass} and len(parts) == 2:
            matched = 0
            for ied in doc.get('ied', []):
                for traffic in ied.get('traffic', []):
                    if traffic.get('class') == head:
                        traffic[parts[1]] = value
                        matched += 1
            if not matched:
                raise ic2rm.ScenarioError(f'override {override!r}: no {head} traffic in scenario', '--set')
        else:
            raise ic2rm.ScenarioError(f'override {override!r}: unknown path {path!r}', '--set')
        log.debug('override %s = %r', path, value)
    return doc


def _named(doc: dict, section: str, name: str, override: str) -> dict:
    for item in doc.get(section, []):
        if item.get('name') == name:
            return item
    raise ic2rm.ScenarioError(f'override {override!r}: no {section} named {name!r}', '--set')


def load(path: str, overrides: Sequence[str] = ()) -> Scenario:
    """
    Reads and validates a scenario file. Raises ScenarioError with the
    file, line and column of the first problem.
    """
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ic2rm.ScenarioError(str(e), str(path)) from e
    return loads(text, overrides, str(path))


def loads(text: str, overrides: Sequence[str] = (), source: str = '<scenario>') -> Scenario:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        m = _TOML_LOCATION.search(str(e))
        line, column = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ic2rm.ScenarioError(_TOML_LOCATION.sub('', str(e)), source, line, column) from e
    raw = apply_overrides(raw, overrides)
    scenario = _build(raw, _Document(source, text))
    log.info('loaded scenario %s: %d switches, %d IEDs, %d sources', source, len(scenario.switches),
             len(scenario.ieds), len(scenario.sources))
    return scenario


def _build(raw: dict, doc: _Document) -> Scenario:
    top = _Table(raw, (), doc)
    for key in raw:
        if key not in _SECTIONS:
            raise top.fail(f'unknown section [{key}]', key)

    run = top.table('run')
    run.check_keys(_RUN_KEYS)
    duration = run.get('duration', _seconds)
    if duration <= 0:
        raise run.fail('duration must be positive', 'duration')
    seed = run.get('seed', _integer, 0)
    if not 0 <= seed < (1 << 64):
        raise run.fail('seed must be a 64-bit unsigned integer', 'seed')
    control_delay = run.get('control_delay', _seconds, 0.001)
    if control_delay < 0:
        raise run.fail('control_delay must not be negative', 'control_delay')
    tick = run.get('tick', _seconds, 0.1)
    if tick <= 0:
        raise run.fail('tick must be positive', 'tick')

    timing_table = top.table('timing')
    timing_table.check_keys(c.value for c in MessageClass)
    bounds = {MessageClass(k): timing_table.get(k, _bound) for k in timing_table.data}
    try:
        timing = TimingTable(bounds)
    except ic2rm.InvalidConfig as e:
        raise timing_table.fail(str(e)) from e

    switches = _build_switches(top)
    links = _build_links(top, switches)
    ieds = _build_ieds(top, switches)

    broker_table = top.table('broker')
    broker_table.check_keys(_BROKER_KEYS)
    default_capacity = min((link.capacity for link in links), default=None)
    try:
        broker = BrokerConfig(
            link_capacity=broker_table.get('link_capacity', parse_rate, default_capacity),
            shared_cap_max=broker_table.get('shared_cap_max', parse_rate),
            shared_cap_floor=broker_table.get('shared_cap_floor', parse_rate),
            best_effort_floor=broker_table.get('best_effort_floor', parse_rate),
            idle_timeout=broker_table.get('idle_timeout', _seconds),
        )
    except (ic2rm.InvalidConfig, TypeError) as e:
        raise broker_table.fail(f'{e}') from e
    enabled = broker_table.get('enabled', _boolean, True)

    sources = _build_sources(top, switches, links, ieds)
    switch_configs = _mac_tables(top, switches, links, ieds, sources)
    return Scenario(tuple(links), switch_configs, tuple(ieds), tuple(sources), broker, timing, duration, seed,
                    enabled, control_delay, tick, doc.source)


def _build_switches(top: _Table) -> Dict[str, Tuple[_Table, int, Optional[float]]]:
    switches = {}
    for t in top.tables('switch'):
        t.check_keys(_SWITCH_KEYS)
        name = t.get('name', _string)
        if name in switches:
            raise t.fail(f'duplicate switch {name!r}', 'name')
        switches[name] = (t, t.get('uplink', _integer, 1), t.get('control_delay', _seconds, None))
    if not switches:
        raise top.fail('a scenario needs at least one [[switch]]')
    return switches


def _build_links(top: _Table, switches) -> List[Link]:
    links = []
    attached = set()
    for t in top.tables('link'):
        t.check_keys(_LINK_KEYS)
        name = t.get('name', _string, f'link{len(links)}')
        a, b = t.get('a', _string), t.get('b', _string)
        for end in ('a', 'b'):
            ref = t.data[end]
            if ref not in switches:
                raise t.fail(f'link {name}: unknown switch {ref!r}', end)
            if ref in attached:
                raise t.fail(f'link {name}: switch {ref!r} already has a link', end)
            attached.add(ref)
        if a == b:
            raise t.fail(f'link {name} connects {a!r} to itself', 'b')
        capacity = t.get('capacity', parse_rate)
        if capacity <= 0:
            raise t.fail('capacity must be positive', 'capacity')
        links.append(Link(name, a, b, capacity, t.get('propagation', parse_duration_us, 0),
                          t.get('buffer', parse_size, DEFAULT_BUFFER), t.get('bucket', parse_size, DEFAULT_BUCKET)))
    return links


def _build_ieds(top: _Table, switches) -> List[Ied]:
    ieds = []
    ports = {}
    for i, t in enumerate(top.tables('ied')):
        t.check_keys(_IED_KEYS)
        name = t.get('name', _string)
        if any(ied.name == name for ied in ieds):
            raise t.fail(f'duplicate IED {name!r}', 'name')
        switch = t.get('switch', _string)
        if switch not in switches:
            raise t.fail(f'IED {name}: unknown switch {switch!r}', 'switch')
        port = t.get('port', _integer, i + 2)
        if port == switches[switch][1] or (switch, port) in ports:
            raise t.fail(f'IED {name}: port {port} of {switch} is already in use', 'port')
        ports[(switch, port)] = name
        mac = t.get('mac', MacAddress.parse, MacAddress(bytes((0x00, 0x1a, 0xb6, 0x00, 0x00, i + 1))))
        ip = t.get('ip', _string, f'10.0.0.{i + 1}')
        ieds.append(Ied(name, switch, port, mac, ip))
    return ieds


def _build_sources(top: _Table, switches, links: List[Link], ieds: List[Ied]) -> List[Source]:
    by_name = {ied.name: ied for ied in ieds}
    sources = []
    keys = {}
    for ied, t in zip(ieds, top.tables('ied')):
        for j, tt in enumerate(t.tables('traffic')):
            source = _build_source(tt, len(sources), f'{ied.name}.{j}', ied, by_name, links)
            if source.key in keys:
                raise tt.fail(f'{source.name} duplicates the flow of {keys[source.key]}')
            keys[source.key] = source.name
            sources.append(source)
    return sources


def _build_source(t: _Table, index: int, name: str, ied: Ied, ieds: Dict[str, Ied],
                  links: List[Link]) -> Source:
    t.check_keys(_TRAFFIC_KEYS)
    cls = t.get('class', MessageClass)
    link = next((link for link in links if ied.switch in (link.a, link.b)), None)
    if link is None:
        raise t.fail(f'{name}: switch {ied.switch} has no link to cross')

    frame = t.get('frame', parse_size, DEFAULT_FRAME_OCTETS[cls])
    try:
        if cls == MessageClass.SV:
            profile = TrafficProfile(cls, frame, sample_rate=t.get('sample_rate', _count, 4000))
        elif cls == MessageClass.GOOSE:
            retransmissions = t.get('retransmissions', lambda v: tuple(parse_duration_us(x) for x in v),
                                    DEFAULT_RETRANSMISSIONS_US)
            profile = TrafficProfile(cls, frame, heartbeat_us=t.get('heartbeat', parse_duration_us, 1_000_000),
                                     event_rate=t.get('event_rate', _number, 0), retransmissions_us=retransmissions)
        elif cls == MessageClass.TIME_SYNC:
            profile = TrafficProfile(cls, frame, interval_us=t.get('interval', parse_duration_us, 1_000_000))
        else:
            profile = TrafficProfile(cls, frame, load_bps=t.get('load', parse_rate))
        estimate_demand(cls, profile)
    except ic2rm.InvalidProfile as e:
        raise t.fail(f'{name}: {e}') from e

    dst_name = t.get('dst', _string, None)
    dst_ied = ieds.get(dst_name) if dst_name is not None else None
    if dst_ied is not None and dst_ied.switch != link.peer(ied.switch):
        raise t.fail(f'{name}: {dst_ied.name} is not across link {link.name}', 'dst')

    label = t.get('id', _string, name)
    common = dict(index=index, name=name, ied=ied.name, switch=ied.switch, in_port=ied.port, cls=cls,
                  profile=profile, src_mac=ied.mac, label=label)

    if cls in (MessageClass.GOOSE, MessageClass.SV):
        appid = t.get('appid', _integer, index + 1)
        if not 0 <= appid <= 0xffff:
            raise t.fail(f'{name}: appid {appid} does not fit in 16 bits', 'appid')
        if dst_name is None:
            prefix = (0x01, 0x0c, 0xcd, 0x01 if cls == MessageClass.GOOSE else 0x04)
            dst = MacAddress(bytes(prefix) + appid.to_bytes(2, 'big'))
        else:
            dst = dst_ied.mac if dst_ied is not None else t.get('dst', MacAddress.parse)
        ethertype = ETHERTYPE_GOOSE if cls == MessageClass.GOOSE else ETHERTYPE_SV
        return Source(dst_mac=dst, ethertype=ethertype, appid=appid, **common)

    if cls == MessageClass.TIME_SYNC and t.get('transport', _string, 'sntp') == 'ptp':
        dst = dst_ied.mac if dst_ied is not None else t.get('dst', MacAddress.parse, PTP_MULTICAST)
        return Source(dst_mac=dst, ethertype=ETHERTYPE_PTP, **common)

    if dst_ied is None:
        raise t.fail(f'{name}: {cls} traffic needs an IED name as dst', 'dst')
    if cls == MessageClass.MMS:
        proto, port = IPPROTO_TCP, PORT_MMS
    elif cls == MessageClass.TIME_SYNC:
        transport = t.get('transport', _string, 'sntp')
        if transport != 'sntp':
            raise t.fail(f'{name}: transport must be sntp or ptp', 'transport')
        proto, port = IPPROTO_UDP, PORT_SNTP
    else:
        proto = {'udp': IPPROTO_UDP, 'tcp': IPPROTO_TCP}.get(t.get('proto', _string, 'udp'))
        if proto is None:
            raise t.fail(f'{name}: proto must be udp or tcp', 'proto')
        port = t.get('port', _integer, DEFAULT_OTHER_PORT)
        if not 0 <= port <= 0xffff:
            raise t.fail(f'{name}: port {port} out of range', 'port')
    return Source(dst_mac=dst_ied.mac, ethertype=ETHERTYPE_IPV4, src_ip=ied.ip, dst_ip=dst_ied.ip, proto=proto,
                  src_port=49152 + index, dst_port=port, **common)


def _mac_tables(top: _Table, switches, links: List[Link], ieds: List[Ied],
                sources: List[Source]) -> Tuple[SwitchConfig, ...]:
    configs = []
    for (name, (t, uplink, control_delay)) in switches.items():
        linked = any(name in (link.a, link.b) for link in links)
        table: Dict[MacAddress, int] = {}
        for ied in ieds:
            if ied.switch == name:
                table[ied.mac] = ied.port
            elif linked:
                table[ied.mac] = uplink
        if linked:
            for source in sources:
                if source.switch == name:
                    table.setdefault(source.dst_mac, uplink)
        macs = t.table('macs')
        for mac, port in macs.data.items():
            try:
                table[MacAddress.parse(mac)] = _integer(port)
            except (ValueError, ic2rm.Ic2rmException) as e:
                raise macs.fail(f'{mac}: {e}', mac) from e
        configs.append(SwitchConfig(name, uplink, table, control_delay))
    return tuple(configs)
