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
# The BER subset used by GOOSE and SV bodies: single-octet tags, definite
# lengths of at most four length octets, primitive or constructed values.

from typing import Iterator, Tuple, Type

import ic2rm

CONSTRUCTED = 0x20
MAX_LENGTH_OCTETS = 4


def encode_length(n: int) -> bytes:
    if n < 0x80:
        return bytes((n,))
    octets = n.to_bytes((n.bit_length() + 7) // 8, 'big')
    if len(octets) > MAX_LENGTH_OCTETS:
        raise ic2rm.FieldTooLong(f'length {n} does not fit in {MAX_LENGTH_OCTETS} octets')
    return bytes((0x80 | len(octets),)) + octets


def tlv(tag: int, content: bytes) -> bytes:
    return bytes((tag,)) + encode_length(len(content)) + content


def encode_integer(value: int) -> bytes:
    """
    Minimal two's complement content octets of an INTEGER.
    """
    size = (value + (value < 0)).bit_length() // 8 + 1
    return value.to_bytes(size, 'big', signed=True)


def encode_unsigned(value: int, bits: int, field: str) -> bytes:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < (1 << bits):
        raise ic2rm.InvalidDataValue(f'{field}: {value!r} is not a {bits}-bit unsigned integer')
    return encode_integer(value)


def decode_integer(content: bytes, field: str) -> int:
    if not content:
        raise ic2rm.MalformedBer(f'{field}: empty INTEGER')
    return int.from_bytes(content, 'big', signed=True)


def decode_unsigned(content: bytes, bits: int, field: str) -> int:
    value = decode_integer(content, field)
    if not 0 <= value < (1 << bits):
        raise ic2rm.MalformedBer(f'{field}: {value} is not a {bits}-bit unsigned integer')
    return value


def read_tlv(buf: bytes, offset: int, end: int,
             overrun: Type[ic2rm.CodecError] = ic2rm.MalformedBer) -> Tuple[int, int, int]:
    """
    Reads one TLV starting at `offset` that must lie within `buf[:end]`.

    Returns (tag, content_start, content_end). `overrun` is raised when the
    element crosses `end`; callers pass Truncated for the outermost element
    and keep MalformedBer for elements nested in a parent.
    """
    if offset + 2 > end:
        raise overrun(f'TLV header at offset {offset} crosses end {end}')
    tag = buf[offset]
    if tag & 0x1f == 0x1f:
        raise ic2rm.MalformedBer(f'multi-octet tag at offset {offset}')
    first = buf[offset + 1]
    pos = offset + 2
    if first < 0x80:
        length = first
    else:
        count = first & 0x7f
        if count == 0:
            raise ic2rm.MalformedBer(f'indefinite length at offset {offset}')
        if count > MAX_LENGTH_OCTETS:
            raise ic2rm.MalformedBer(f'{count} length octets at offset {offset}')
        if pos + count > end:
            raise overrun(f'length octets at offset {offset} cross end {end}')
        length = int.from_bytes(buf[pos:pos + count], 'big')
        pos += count
    if pos + length > end:
        raise overrun(f'element at offset {offset} declares {length} octets, {end - pos} available')
    return tag, pos, pos + length


def iter_tlvs(buf: bytes, start: int, end: int) -> Iterator[Tuple[int, int, int]]:
    pos = start
    while pos < end:
        tag, s, e = read_tlv(buf, pos, end)
        yield tag, s, e
        pos = e


def expect(buf: bytes, items: Iterator[Tuple[int, int, int]], tag: int, field: str) -> bytes:
    """
    Takes the next element from `items`, checks its tag and returns its
    content octets.
    """
    try:
        got, s, e = next(items)
    except StopIteration:
        raise ic2rm.MalformedBer(f'{field}: missing element 0x{tag:02x}') from None
    if got != tag:
        raise ic2rm.MalformedBer(f'{field}: expected tag 0x{tag:02x}, got 0x{got:02x}')
    return buf[s:e]
