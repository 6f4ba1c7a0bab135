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


class Ic2rmException(Exception):
    """
    Common base class for all ic2rm exceptions.
    """


class CodecError(Ic2rmException):
    """
    Common base class for frame encoding and decoding failures.
    """


class Truncated(CodecError):
    """
    Exception raised if a buffer is shorter than the minimum header size or
    shorter than a length declared inside it.
    """


class BadEtherType(CodecError):
    """
    Exception raised if a frame carries an EtherType other than the one the
    decoder expects (e.g. an SV frame handed to the GOOSE decoder).
    """


class MalformedBer(CodecError):
    """
    Exception raised if the PDU body violates the BER subset: unexpected or
    missing tags, indefinite or oversized lengths, inner elements overrunning
    their parent, or values out of range for their field.
    """


class LengthMismatch(CodecError):
    """
    Exception raised if the IEC header length field disagrees with the PDU
    body, or if octets follow the PDU.
    """


class FieldTooLong(CodecError):
    """
    Exception raised if a string or octet field exceeds its length cap on
    encode.
    """


class InvalidDataValue(CodecError):
    """
    Exception raised if a value cannot be represented on the wire: integers
    outside their bit width, non-visible characters in a visible string,
    unsupported data value types, or a numDatSetEntries that disagrees with
    allData.
    """


class InvalidProfile(Ic2rmException):
    """
    Exception raised if a traffic profile has a non-positive rate, period or
    frame size.
    """


class InvalidConfig(Ic2rmException):
    """
    Exception raised if a broker configuration or timing table violates its
    invariants.
    """


class DuplicateFlow(Ic2rmException):
    """
    Exception raised if a flow key is admitted while already present in the
    allocation ledger.
    """


class UnknownFlow(Ic2rmException):
    """
    Exception raised if a flow key is touched that is not present in the
    allocation ledger.
    """


class InvalidScenario(Ic2rmException):
    """
    Exception raised if a scenario violates its invariants: dangling switch
    or link references, non-positive duration, unroutable traffic.
    """


class ScenarioError(InvalidScenario):
    """
    Exception raised if a scenario file cannot be parsed or validated. Carries
    the source location of the offending key when one is known.
    """
    def __init__(self, msg: str, path: str = None, line: int = None, column: int = None):
        super().__init__(msg)
        self.msg = msg
        self.path = path
        self.line = line
        self.column = column

    def __str__(self):
        where = [str(p) for p in (self.path, self.line, self.column) if p is not None]
        if where:
            return f'{":".join(where)}: {self.msg}'
        return self.msg
