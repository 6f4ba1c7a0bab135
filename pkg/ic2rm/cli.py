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
# The ic2rm command.
#
#     ic2rm run SCENARIO [--out DIR] [--seed N] [--set KEY=VALUE ...]
#     ic2rm decode HEX-OR-FILE
#     ic2rm sweep SCENARIO PARAM VALUE... [--out DIR] [--jobs N]
#
# Exit status: 0 when every timing bound held, 1 on timing violations, 2 on
# scenario or decode errors.

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, TextIO

import ic2rm
from ic2rm import codec, report, scenario, sim
from ic2rm.classify import MessageClass, classify_frame

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_ERROR = 2


def _overrides(args) -> List[str]:
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f'run.seed={args.seed}')
    return overrides


def cmd_run(path: str, overrides: Sequence[str] = (), out: str = '.', stdout: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    try:
        loaded = scenario.load(path, overrides)
    except ic2rm.InvalidScenario as e:
        print(f'error: {e}', file=sys.stderr)
        return EXIT_ERROR
    result = sim.run(loaded)
    violations = report.verify_timing(result, loaded.timing)

    os.makedirs(out, exist_ok=True)
    report.write_json(result, os.path.join(out, 'report.json'))
    report.write_events_csv(result, os.path.join(out, 'events.csv'))
    report.write_summary(result, violations, os.path.join(out, 'summary.txt'))
    stdout.write(report.summary(result, violations))
    return EXIT_VIOLATIONS if violations else EXIT_OK


def read_frame(arg: str) -> bytes:
    """
    A frame given as a hex string, a file holding a hex dump (whitespace
    and # comments ignored) or a raw binary file.
    """
    if os.path.isfile(arg):
        with open(arg, 'rb') as f:
            data = f.read()
        try:
            text = data.decode('ascii')
        except UnicodeDecodeError:
            return data
        hexdump = ''.join(line.split('#', 1)[0] for line in text.splitlines())
        try:
            return bytes.fromhex(''.join(hexdump.split()))
        except ValueError:
            return data
    try:
        return bytes.fromhex(''.join(arg.replace(':', ' ').split()))
    except ValueError as e:
        raise ic2rm.InvalidDataValue(f'{arg!r} is neither a file nor hex') from e


def _describe(value) -> str:
    if isinstance(value, bool):
        return f'boolean {value}'
    if isinstance(value, int):
        return f'integer {value}'
    if isinstance(value, codec.BitString):
        return f'bit-string {value.value:0{value.size}b} ({value.size} bits)' if value.size else 'bit-string (empty)'
    if isinstance(value, str):
        return f'visible-string {value!r}'
    return f'utc-time {_timestamp(value)}'


def _timestamp(t: codec.Timestamp) -> str:
    return f'{t.seconds}.{t.fraction:06x} q=0x{t.quality:02x}'


def breakdown(data: bytes) -> List[str]:
    """Field-by-field description of a frame, followed by its classification."""
    decoded = codec.decode_frame(data)
    frame = decoded.header if isinstance(decoded, codec.IecFrame) else decoded
    ethertype = codec.decode_ethernet(data).ethertype
    lines = [f'ethernet   dst {frame.dst}  src {frame.src}  ethertype 0x{ethertype:04x} '
             f'({codec.ethertype_name(ethertype)})']
    if frame.vlan is not None:
        lines.append(f'vlan       pcp {frame.vlan.pcp}  dei {int(frame.vlan.dei)}  vid {frame.vlan.vid}')
    if isinstance(decoded, codec.IecFrame):
        iec = decoded.iec
        lines.append(f'iec        appid 0x{iec.appid:04x}  length {iec.length}  reserved1 0x{iec.reserved1:04x}  '
                     f'reserved2 0x{iec.reserved2:04x}')
        pdu = decoded.pdu
        if isinstance(pdu, codec.GoosePdu):
            lines += [
                f'goose      gocbRef {pdu.gocb_ref}',
                f'           timeAllowedToLive {pdu.time_allowed_to_live} ms',
                f'           datSet {pdu.dat_set}',
                f'           goID {pdu.go_id}',
                f'           t {_timestamp(pdu.t)}',
                f'           stNum {pdu.st_num}  sqNum {pdu.sq_num}',
                f'           test {pdu.test}  confRev {pdu.conf_rev}  ndsCom {pdu.nds_com}',
                f'           numDatSetEntries {pdu.num_dat_set_entries}',
            ]
            lines += [f'           allData[{i}] {_describe(v)}' for i, v in enumerate(pdu.all_data)]
        else:
            lines += [
                f'sv         svID {pdu.sv_id}',
                f'           smpCnt {pdu.smp_cnt}  confRev {pdu.conf_rev}  smpSynch {pdu.smp_synch}',
                f'           sample {len(pdu.sample_data)} octets {pdu.sample_data[:16].hex()}'
                f'{"..." if len(pdu.sample_data) > 16 else ""}',
            ]
    else:
        lines.append(f'payload    {len(frame.payload)} octets')
    classified = classify_frame(data)
    lines.append(f'class      {classified.cls}')
    lines.append(f'flow       {classified.key}')
    return lines


def cmd_decode(arg: str, stdout: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    try:
        data = read_frame(arg)
        lines = breakdown(data)
    except ic2rm.CodecError as e:
        print(f'error: {type(e).__name__}: {e}', file=sys.stderr)
        return EXIT_ERROR
    stdout.write('\n'.join(lines) + '\n')
    return EXIT_OK


def _sweep_one(loaded: scenario.Scenario) -> dict:
    result = sim.run(loaded)
    row = {}
    for cls in MessageClass:
        stats = result.classes[cls]
        row[f'{cls.value}_p99_us'] = '' if stats.delay is None else f'{stats.delay.p99:.3f}'
        row[f'{cls.value}_violations'] = stats.violations
    row['violated'] = bool(report.verify_timing(result, loaded.timing))
    return row


def cmd_sweep(path: str, parameter: str, values: Sequence[str], overrides: Sequence[str] = (), out: str = '.',
              jobs: int = 1, stdout: TextIO = None) -> int:
    """
    Runs the scenario once per value of `parameter` and writes sweep.csv
    with the per-class p99 delay and violation count of every run.
    """
    stdout = stdout or sys.stdout
    if not values:
        print('error: sweep needs at least one value', file=sys.stderr)
        return EXIT_ERROR
    try:
        runs = [scenario.load(path, list(overrides) + [f'{parameter}={v}']) for v in values]
    except ic2rm.InvalidScenario as e:
        print(f'error: {e}', file=sys.stderr)
        return EXIT_ERROR

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, runs))
    else:
        rows = [_sweep_one(r) for r in runs]

    fields = ['value'] + [f'{c.value}_{k}' for c in MessageClass for k in ('p99_us', 'violations')]
    os.makedirs(out, exist_ok=True)
    target = os.path.join(out, 'sweep.csv')
    with open(target, 'w', encoding='utf-8', newline='') as f:
        w = csv.DictWriter(f, fieldnames=fields, extrasaction='ignore')
        w.writeheader()
        for value, row in zip(values, rows):
            w.writerow(dict(row, value=value))
    log.info('wrote %s (%d runs)', target, len(rows))
    stdout.write(f'{len(rows)} runs written to {target}\n')
    return EXIT_VIOLATIONS if any(row['violated'] for row in rows) else EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='ic2rm', description='IEC 61850 bandwidth broker simulator')
    parser.add_argument('--version', action='version', version=f'%(prog)s {ic2rm.__version__}')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='INFO with -v, DEBUG with -vv')
    verbs = parser.add_subparsers(dest='verb', required=True)

    def scenario_options(p):
        p.add_argument('scenario', help='scenario TOML file')
        p.add_argument('--out', default='.', help='output directory (default: current directory)')
        p.add_argument('--seed', type=int, help='override run.seed')
        p.add_argument('--set', action='append', metavar='KEY=VALUE', help='override a scenario value (repeatable)')

    run = verbs.add_parser('run', help='simulate a scenario and verify timing bounds')
    scenario_options(run)

    decode = verbs.add_parser('decode', help='print the fields and class of a frame')
    decode.add_argument('input', help='hex string, hex dump file or raw frame file')

    sweep = verbs.add_parser('sweep', help='run a scenario once per parameter value')
    scenario_options(sweep)
    sweep.add_argument('parameter', help='override path, e.g. mms.load')
    sweep.add_argument('values', nargs='*', help='values to sweep, e.g. 50mbps 70mbps')
    sweep.add_argument('--jobs', type=int, default=1, help='parallel runs (default: 1)')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format='%(asctime)s %(name)s %(levelname)s %(message)s')

    if args.verb == 'run':
        return cmd_run(args.scenario, _overrides(args), args.out)
    if args.verb == 'decode':
        try:
            return cmd_decode(args.input)
        except OSError as e:
            print(f'error: {e}', file=sys.stderr)
            return EXIT_ERROR
    return cmd_sweep(args.scenario, args.parameter, args.values, _overrides(args), args.out, args.jobs)


if __name__ == '__main__':
    sys.exit(main())
