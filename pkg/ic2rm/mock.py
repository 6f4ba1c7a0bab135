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
# A mock Switch for unit testing. Calls are recorded as dictionaries to
# `Switch.calls`. Keys are as follows:
#
# f: function name
# args: arguments
# kwargs: keyword arguments
# res: results from a successful execution
# e: exception raised
#
# Applied FlowMods land in `Switch.table` (an ic2rm.sdn.FlowTable) and
# QueueSets in `Switch.plans`, keyed by port, so tests can compare the switch
# against the controller's ledger.
#
# You can make every call raise an exception by providing one through the
# `exception` argument.

from typing import Dict, Hashable, List, Mapping, Optional

from ic2rm import sdn
from ic2rm.broker import QueuePlan
from ic2rm.classify import FlowKey


def _raises(f):
    def g(*args, **kwargs):
        self = args[0]
        if self.exception:
            raise self.exception
        return f(*args, **kwargs)
    g.__name__ = f.__name__

    return g


def _records(f):
    def g(*args, **kwargs):
        call = {
            'f': f.__name__,
            'args': args[1:],
            'kwargs': kwargs,
        }
        self = args[0]
        self.calls.append(call)

        try:
            res = f(*args, **kwargs)
            call['res'] = res
            return res
        except Exception as e:
            call['e'] = e
            raise
    g.__name__ = f.__name__

    return g


class Switch(sdn.Switch):
    def __init__(self, switch_id: str = 's1', exception: Exception = None):
        self.switch_id = switch_id
        self.calls = list()
        self.exception = exception
        self.table = sdn.FlowTable()
        self.plans: Dict[Hashable, QueuePlan] = {}

    @_records
    @_raises
    def apply_flow_mod(self, mod: sdn.FlowMod, now: float):
        self.table.install(mod, now)

    @_records
    @_raises
    def apply_queue_set(self, queue_set: sdn.QueueSet, now: float):
        self.plans[queue_set.port] = queue_set.plan

    def hit(self, key: FlowKey, now: float) -> Optional[sdn.FlowMod]:
        """A frame of `key` arrives; returns the matching FlowMod, None on a miss."""
        return self.table.lookup(key, now)

    def expire(self, now: float) -> List[FlowKey]:
        return self.table.expire(now)

    def stats(self) -> Mapping[FlowKey, float]:
        return self.table.last_hits()

    def flow_mods(self) -> List[sdn.FlowMod]:
        return [c['args'][0] for c in self.calls if c['f'] == 'apply_flow_mod' and 'e' not in c]
