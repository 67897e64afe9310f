import datetime
import io
import json
import os
import shutil
import tempfile
import unittest

from listenmap import ListenershipModel
from listenmap.analyze.analysis_base import OUTSIDE_GRID, TimeSlotGrid
from listenmap.parsers.cdr_parser import (CallRecordParser, build_trajectories,
                                          parse_call_records,
                                          read_weekly_summaries,
                                          summarize_week, write_call_records,
                                          write_weekly_summaries)
from listenmap.records import (CallAttemptRecord, DataError, TechnicalStatus)

header = 'beneficiary_id,message_index,attempt_number,attempt_date,attempt_time,status,duration_seconds\n'


def attempt(status, duration=0.0, number=1, index=5, day=datetime.date(2022, 1, 31),
            at=datetime.time(9, 15), bid='B001'):
    return CallAttemptRecord(bid, index, number, day, at, status, duration)


class ParseCallRecordsTest(unittest.TestCase):
    def test_valid_row(self):
        records, errors = parse_call_records(io.StringIO(
            header + 'B001,12,1,2022-01-03,09:15:00,PICKED_UP,95.0\n'))
        self.assertEqual(errors, [])
        self.assertEqual(len(records), 1)
        r = records[0]
        self.assertEqual(r.beneficiary_id, 'B001')
        self.assertEqual(r.message_index, 12)
        self.assertEqual(r.attempt_date, datetime.date(2022, 1, 3))
        self.assertEqual(r.attempt_time, datetime.time(9, 15))
        self.assertIs(r.status, TechnicalStatus.PickedUp)
        self.assertEqual(r.duration_seconds, 95.0)
        self.assertEqual(TimeSlotGrid().assign(r.attempt_time), 0)

    def test_busy_with_duration_is_rejected(self):
        records, errors = parse_call_records(io.StringIO(
            header + 'B001,12,1,2022-01-03,09:15:00,BUSY,10.0\n'))
        self.assertEqual(records, [])
        self.assertEqual(len(errors), 1)
        self.assertEqual(errors[0].line, 2)
        self.assertIn('non-PickedUp', errors[0].reason)

    def test_header_only(self):
        records, errors = parse_call_records(io.StringIO(header))
        self.assertEqual((records, errors), ([], []))

    def test_missing_header(self):
        with self.assertRaises(DataError):
            parse_call_records(io.StringIO('beneficiary_id,message_index\nB001,1\n'))
        with self.assertRaises(DataError):
            parse_call_records(io.StringIO(''))

    def test_bom_and_bytes(self):
        data = ('\ufeff' + header + 'B001,1,1,2022-01-03,09:15:00,BUSY,0\n').encode('utf-8')
        records, errors = parse_call_records(io.BytesIO(data))
        self.assertEqual((len(records), errors), (1, []))

    def test_row_errors_keep_line_numbers(self):
        text = (header +
                'B001,1,1,2022-01-03,09:15:00,BUSY,0\n' +
                'B001,1,2,2022-02-30,09:15:00,BUSY,0\n' +
                '\n' +
                'B001,1,3,2022-01-03,09:15:00,RINGING,0\n' +
                'B001,1,4,2022-01-03,09:15:00\n' +
                'B001,0,5,2022-01-03,09:15:00,BUSY,0\n' +
                'B001,1,6,2022-01-03,24:00:00,BUSY,0\n')
        records, errors = parse_call_records(io.StringIO(text))
        self.assertEqual(len(records), 1)
        self.assertEqual([e.line for e in errors], [3, 5, 6, 7, 8])
        reasons = [e.reason for e in errors]
        self.assertEqual(reasons[0], 'malformed attempt_date')
        self.assertEqual(reasons[1], 'unknown status token')
        self.assertIn('expected 7 fields', reasons[2])
        self.assertIn('message_index out of range', reasons[3])
        self.assertEqual(reasons[4], 'malformed attempt_time')

    def test_huge_integer_is_a_row_error(self):
        text = (header +
                'B001,1,1,2022-01-03,09:15:00,BUSY,0\n' +
                'B001,99999999999999999999999,2,2022-01-03,09:15:00,BUSY,0\n' +
                'B001,2,0000000000000000000003,2022-01-10,09:15:00,BUSY,0\n' +
                'B001,3,1,2022-01-17,09:15:00,PICKED_UP,' + '9' * 400 + '\n')
        records, errors = parse_call_records(io.StringIO(text))
        self.assertEqual([(r.message_index, r.attempt_number) for r in records],
                         [(1, 1), (2, 3)])
        self.assertEqual([e.line for e in errors], [3, 5])
        self.assertIn('message_index out of range', errors[0].reason)
        self.assertEqual(errors[1].reason, 'duration_seconds out of range')

    def test_invalid_utf8(self):
        data = header.encode('utf-8') + b'B\xff01,1,1,2022-01-03,09:15:00,BUSY,0\n'
        with self.assertRaises(DataError):
            parse_call_records(io.BytesIO(data))

    def test_week_on_too_many_dates(self):
        rows = ['B001,4,%d,2022-01-%02d,09:15:00,BUSY,0' % (n, 2 + n) for n in range(1, 6)]
        rows += ['B001,5,1,2022-01-10,09:15:00,BUSY,0',
                 'B002,4,1,2022-01-03,09:15:00,PICKED_UP,40.0']
        records, errors = parse_call_records(io.StringIO(header + '\n'.join(rows) + '\n'))
        self.assertEqual([e.line for e in errors], [2, 3, 4, 5, 6])
        self.assertIn('5 attempt dates', errors[0].reason)
        trajectories = build_trajectories(records)
        self.assertEqual(sorted(trajectories), ['B001', 'B002'])
        self.assertEqual([w.message_index for w in trajectories['B001'].weeks], [5])

    def test_write_then_parse_is_exact(self):
        records = [attempt(TechnicalStatus.Busy, number=1),
                   attempt(TechnicalStatus.PickedUp, 0.1 + 0.2, number=2)]
        stream = io.StringIO()
        write_call_records(records, stream)
        parsed, errors = parse_call_records(io.StringIO(stream.getvalue()))
        self.assertEqual(errors, [])
        self.assertEqual(parsed, records)


class SummarizeWeekTest(unittest.TestCase):
    def test_three_attempts(self):
        week = summarize_week([attempt(TechnicalStatus.Busy, number=1),
                               attempt(TechnicalStatus.OutOfNetwork, number=2,
                                       at=datetime.time(11, 0)),
                               attempt(TechnicalStatus.PickedUp, 40.0, number=3,
                                       at=datetime.time(13, 0))])
        self.assertEqual(week.n_attempts, 3)
        self.assertTrue(week.picked)
        self.assertTrue(week.engaged)
        self.assertAlmostEqual(week.technical_success_ratio, 2.0 / 3.0)
        self.assertEqual(week.pickup_attempt, 3)
        self.assertEqual(week.pickup_slot, 2)
        self.assertEqual(week.pickup_attempt_day, 1)
        self.assertEqual(week.status_counts, (1, 1, 0, 1, 0))

    def test_engagement_threshold_is_strict(self):
        self.assertFalse(summarize_week([attempt(TechnicalStatus.PickedUp, 30.0)]).engaged)
        self.assertTrue(summarize_week([attempt(TechnicalStatus.PickedUp, 30.01)]).engaged)

    def test_all_failures(self):
        week = summarize_week([attempt(TechnicalStatus.SwitchedOff, number=1),
                               attempt(TechnicalStatus.SwitchedOff, number=2)])
        self.assertEqual(week.technical_success_ratio, 0.0)
        self.assertFalse(week.picked)
        self.assertTrue(week.technical_failure_only)

    def test_single_unpicked_attempt(self):
        week = summarize_week([attempt(TechnicalStatus.Busy)])
        self.assertFalse(week.picked)
        self.assertFalse(week.engaged)
        self.assertIsNone(week.pickup_slot)

    def test_outside_grid_counts_last(self):
        week = summarize_week([attempt(TechnicalStatus.PickedUp, 5.0,
                                       at=datetime.time(7, 59, 59))])
        self.assertEqual(week.pickup_slot, OUTSIDE_GRID)
        self.assertEqual(week.slot_attempt_counts[-1], 1)
        self.assertEqual(sum(week.slot_attempt_counts[:-1]), 0)

    def test_attempt_order_does_not_matter(self):
        attempts = [attempt(TechnicalStatus.Busy, number=1),
                    attempt(TechnicalStatus.PickedUp, 12.0, number=2,
                            day=datetime.date(2022, 2, 1))]
        self.assertEqual(summarize_week(attempts), summarize_week(attempts[::-1]))

    def test_too_many_dates(self):
        attempts = [attempt(TechnicalStatus.Busy, number=n,
                            day=datetime.date(2022, 1, 31) + datetime.timedelta(days=n))
                    for n in range(1, 6)]
        with self.assertRaises(DataError):
            summarize_week(attempts)


class BuildTrajectoriesTest(unittest.TestCase):
    def test_gap_fill(self):
        records = [attempt(TechnicalStatus.PickedUp, 40.0, index=2),
                   attempt(TechnicalStatus.Busy, index=4)]
        trajectories = build_trajectories(records)
        weeks = trajectories['B001'].weeks
        self.assertEqual([w.message_index for w in weeks], [2, 3, 4])
        self.assertEqual(weeks[1].n_attempts, 0)
        self.assertFalse(weeks[1].attempted)

    def test_duplicate_triple(self):
        records = [attempt(TechnicalStatus.Busy), attempt(TechnicalStatus.Busy)]
        with self.assertRaises(DataError) as ctx:
            build_trajectories(records)
        self.assertIn('B001', str(ctx.exception))

    def test_input_order_independent(self):
        records = [attempt(TechnicalStatus.Busy, bid='B002', index=3),
                   attempt(TechnicalStatus.PickedUp, 50.0, index=1),
                   attempt(TechnicalStatus.Busy, index=2)]
        self.assertEqual(build_trajectories(records), build_trajectories(records[::-1]))
        self.assertEqual(list(build_trajectories(records)), ['B001', 'B002'])

    def test_weekly_round_trip(self):
        records = [attempt(TechnicalStatus.PickedUp, 40.5, index=2),
                   attempt(TechnicalStatus.SwitchedOff, index=4, number=1),
                   attempt(TechnicalStatus.PickedUp, 3.25, index=4, number=2,
                           at=datetime.time(21, 30)),
                   attempt(TechnicalStatus.Busy, bid='B002', index=7)]
        trajectories = build_trajectories(records)
        stream = io.StringIO()
        write_weekly_summaries(trajectories, stream)
        self.assertEqual(read_weekly_summaries(io.StringIO(stream.getvalue())), trajectories)


class CallRecordParserTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.input_file = os.path.join(self.tmp, 'calls.csv')
        with open(self.input_file, 'w') as f:
            f.write(header +
                    'B001,1,1,2022-01-03,09:15:00,PICKED_UP,45.0\n' +
                    'B001,2,1,2022-01-10,09:15:00,BUSY,3.0\n')
        self.model = ListenershipModel(output_dir=self.tmp, verbose=0)

    def test_parse_build_write(self):
        parser = CallRecordParser(self.model)
        records = parser.parse(self.input_file)
        self.assertEqual(len(records), 1)
        with open(os.path.join(self.tmp, 'data', 'row_errors.jsonl')) as f:
            errors = [json.loads(line) for line in f]
        self.assertEqual(errors, [{'line': 3,
                                   'reason': 'duration_seconds > 0 with non-PickedUp status'}])
        trajectories = parser.build()
        path = parser.write_weekly(trajectories)
        self.assertTrue(os.path.exists(path))
        self.assertEqual(parser.read_weekly(path), trajectories)

    def test_threshold_from_model(self):
        self.model.engagement_threshold = 60.0
        parser = CallRecordParser(self.model)
        parser.parse(self.input_file)
        self.assertFalse(parser.build()['B001'].weeks[0].engaged)

    def tearDown(self):
        shutil.rmtree(self.tmp)


if __name__ == '__main__':
    unittest.main()
