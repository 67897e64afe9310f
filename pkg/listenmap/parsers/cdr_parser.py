import io
import os
from collections import defaultdict
from itertools import groupby

import listenmap
from listenmap.analyze.analysis_base import TimeSlotGrid
from listenmap.data import parameter_data
from listenmap.records import (DEFAULT_TECHNICAL_SUCCESS, STATUS_ORDER,
                               DataError, RowError, TechnicalStatus,
                               Trajectory, WeeklySummary)
from .parser_base import *

pd = listenmap.pd

weekly_headers = (['beneficiary_id', 'message_index', 'total_duration_seconds',
                   'n_attempts'] +
                  parameter_data.feature_group_columns['status'] +
                  ['picked', 'engaged', 'pickup_attempt', 'pickup_attempt_day',
                   'pickup_slot', 'pickup_weekday', 'technical_success_ratio',
                   'week_of_year', 'slot_attempt_counts', 'slot_pickup_counts',
                   'gestation_week'])


def parse_call_records(stream, linebreak='\n', separator=','):
    """
    Parse a call-detail CSV into records, collecting malformed rows.

    Returns (records, row_errors). Records keep input order. Line numbers in
    row errors are 1-based file lines, the header being line 1.

    :param stream: Text or byte stream holding the CSV.
    :type stream: file-like

    :param linebreak: Line separator.
    :type linebreak: str, optional

    :param separator: Field separator.
    :type separator: str, optional
    """
    try:
        text = stream.read()
        if isinstance(text, bytes):
            text = text.decode('utf-8')
    except UnicodeDecodeError as err:
        raise DataError('call records are not valid UTF-8: %s' % err)
    text = text.lstrip('\ufeff')
    lines = [L.rstrip('\r') for L in text.split(linebreak)]
    if not lines or not lines[0].strip():
        raise DataError('Required header is missing: ' +
                        separator.join(parameter_data.call_record_headers))

    headers = [h.strip() for h in lines.pop(0).split(separator)]
    missing = [h for h in parameter_data.call_record_headers if h not in headers]
    if missing:
        raise DataError('Required headers are missing! ' +
                        'Please be sure that all headers ' +
                        'are specified: ' + separator.join(missing))
    columns = parameter_data.call_record_headers + \
        [h for h in parameter_data.optional_call_record_headers if h in headers]

    rows = []
    row_errors = []
    for n, L in enumerate(lines, start=2):
        if not L.strip():
            continue
        fields = L.split(separator)
        if len(fields) != len(headers):
            row_errors.append(RowError(n, 'expected %d fields, found %d'
                                       % (len(headers), len(fields))))
            continue
        linedict = dict(zip(headers, (f.strip() for f in fields)))
        rows.append([n] + [linedict[c] for c in columns])

    frame = pd.DataFrame(rows, columns=['line'] + columns)
    if frame.empty:
        return [], sorted(row_errors, key=lambda e: e.line)
    frame[columns] = frame[columns].astype(str)
    reasons = validate_attempt_dates(frame[columns],
                                     validate_call_fields(frame[columns]))
    for line, reason in zip(frame['line'][reasons != ''], reasons[reasons != '']):
        row_errors.append(RowError(int(line), reason))
    records = records_from_frame(frame[reasons == ''][columns])
    return records, sorted(row_errors, key=lambda e: e.line)


def write_call_records(records, stream, include_gestation=None):
    """
    Write records in the ingest CSV schema.

    Durations are written with repr() so that re-parsing recovers the exact
    float. The gestation_week column is written when any record carries one,
    unless include_gestation says otherwise.
    """
    records = list(records)
    if include_gestation is None:
        include_gestation = any(r.gestation_week is not None for r in records)
    headers = list(parameter_data.call_record_headers)
    if include_gestation:
        headers += parameter_data.optional_call_record_headers
    stream.write(','.join(headers) + '\n')
    for r in records:
        fields = [r.beneficiary_id, str(r.message_index), str(r.attempt_number),
                  r.attempt_date.isoformat(), r.attempt_time.strftime('%H:%M:%S'),
                  r.status.value, repr(float(r.duration_seconds))]
        if include_gestation:
            fields.append('' if r.gestation_week is None else str(r.gestation_week))
        stream.write(','.join(fields) + '\n')


def summarize_week(attempts, engagement_threshold=parameter_data.engagement_threshold,
                   grid=None, technical_success=DEFAULT_TECHNICAL_SUCCESS,
                   beneficiary_id=None, message_index=None):
    """
    Roll the attempts of one beneficiary-week up into a WeeklySummary.

    :param attempts: Attempts sharing (beneficiary_id, message_index).
    :type attempts: list of CallAttemptRecord

    :param engagement_threshold: Seconds of listening that must be strictly
        exceeded for the week to count as engaged.
    :type engagement_threshold: float, optional

    :param grid: Time slot grid for pickup_slot and slot counts.
    :type grid: TimeSlotGrid, optional

    :param technical_success: Statuses that count as technically successful.
    :type technical_success: frozenset, optional

    :param beneficiary_id: Used for the zero-attempt summary of an empty week.
    :type beneficiary_id: str, optional

    :param message_index: Used for the zero-attempt summary of an empty week.
    :type message_index: int, optional
    """
    if grid is None:
        grid = TimeSlotGrid()
    attempts = sorted(attempts, key=lambda r: r.sort_key)
    if not attempts:
        return WeeklySummary.empty(beneficiary_id, message_index, grid.n_slots)

    keys = {(r.beneficiary_id, r.message_index) for r in attempts}
    if len(keys) != 1:
        raise DataError('attempts span several beneficiary-weeks: %s'
                        % sorted(keys))
    bid, idx = keys.pop()

    days = sorted({r.attempt_date for r in attempts})
    if len(days) > parameter_data.attempt_days:
        raise DataError('beneficiary %s week %d has attempts on %d dates (max %d)'
                        % (bid, idx, len(days), parameter_data.attempt_days))

    status_counts = [0] * len(STATUS_ORDER)
    slot_attempts = [0] * (grid.n_slots + 1)
    slot_pickups = [0] * (grid.n_slots + 1)
    pickups = []
    for r in attempts:
        status_counts[r.status.index] += 1
        slot = grid.assign(r.attempt_time)
        slot_attempts[slot] += 1  # OUTSIDE_GRID lands in the last entry
        if r.status is TechnicalStatus.PickedUp:
            slot_pickups[slot] += 1
            pickups.append(r)

    total_duration = float(sum(r.duration_seconds for r in pickups))
    n_success = sum(1 for r in attempts if r.status in technical_success)
    summary = dict(beneficiary_id=bid, message_index=idx,
                   total_duration_seconds=total_duration,
                   n_attempts=len(attempts),
                   status_counts=tuple(status_counts),
                   picked=bool(pickups),
                   engaged=bool(pickups) and total_duration > engagement_threshold,
                   technical_success_ratio=n_success / len(attempts),
                   week_of_year=attempts[0].attempt_date.isocalendar()[1],
                   slot_attempt_counts=tuple(slot_attempts),
                   slot_pickup_counts=tuple(slot_pickups),
                   gestation_week=next((r.gestation_week for r in attempts
                                        if r.gestation_week is not None), None))
    if pickups:
        first = pickups[0]
        summary.update(pickup_attempt=first.attempt_number,
                       pickup_attempt_day=days.index(first.attempt_date) + 1,
                       pickup_slot=grid.assign(first.attempt_time),
                       pickup_weekday=first.attempt_date.weekday())
    return WeeklySummary(**summary)


def build_trajectories(records, engagement_threshold=parameter_data.engagement_threshold,
                       grid=None, technical_success=DEFAULT_TECHNICAL_SUCCESS):
    """
    Group validated records into one contiguous Trajectory per beneficiary.

    Weeks between the first and last observed message_index that have no
    records are filled with zero-attempt summaries. The result is keyed and
    ordered by beneficiary_id and does not depend on input order.
    """
    if grid is None:
        grid = TimeSlotGrid()
    seen = set()
    by_week = defaultdict(list)
    for r in records:
        triple = (r.beneficiary_id, r.message_index, r.attempt_number)
        if triple in seen:
            raise DataError('duplicate attempt (beneficiary_id=%s, message_index=%d, '
                            'attempt_number=%d)' % triple)
        seen.add(triple)
        by_week[(r.beneficiary_id, r.message_index)].append(r)

    trajectories = {}
    for bid, keys in groupby(sorted(by_week), key=lambda k: k[0]):
        observed = [k[1] for k in keys]
        weeks = []
        for idx in range(observed[0], observed[-1] + 1):
            weeks.append(summarize_week(by_week.get((bid, idx), []),
                                        engagement_threshold, grid,
                                        technical_success, bid, idx))
        trajectories[bid] = Trajectory(bid, tuple(weeks))
    return trajectories


def _optional(value):
    return '' if value is None else str(value)


def _counts(values):
    return ';'.join(str(v) for v in values)


def write_weekly_summaries(trajectories, stream):
    "Write every week of every trajectory as one row of the weekly CSV"
    rows = []
    for bid in sorted(trajectories):
        for w in trajectories[bid].weeks:
            rows.append([w.beneficiary_id, str(w.message_index),
                         repr(float(w.total_duration_seconds)), str(w.n_attempts)] +
                        [str(c) for c in w.status_counts] +
                        [str(int(w.picked)), str(int(w.engaged)),
                         _optional(w.pickup_attempt), _optional(w.pickup_attempt_day),
                         _optional(w.pickup_slot), _optional(w.pickup_weekday),
                         repr(float(w.technical_success_ratio)),
                         _optional(w.week_of_year),
                         _counts(w.slot_attempt_counts), _counts(w.slot_pickup_counts),
                         _optional(w.gestation_week)])
    frame = pd.DataFrame(rows, columns=weekly_headers)
    frame.to_csv(stream, index=False, lineterminator='\n')


def read_weekly_summaries(stream):
    "Inverse of write_weekly_summaries"
    try:
        frame = pd.read_csv(stream, dtype=str, keep_default_na=False)
    except (UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise DataError('weekly file could not be read: %s' % err)
    missing = [h for h in weekly_headers if h not in frame.columns]
    if missing:
        raise DataError('weekly file is missing columns: ' + ','.join(missing))

    def optional_int(value):
        return int(value) if value != '' else None

    def counts(value):
        return tuple(int(v) for v in value.split(';')) if value else ()

    status_columns = parameter_data.feature_group_columns['status']
    weeks = defaultdict(list)
    for row in frame.to_dict('records'):
        weeks[row['beneficiary_id']].append(WeeklySummary(
            beneficiary_id=row['beneficiary_id'],
            message_index=int(row['message_index']),
            total_duration_seconds=float(row['total_duration_seconds']),
            n_attempts=int(row['n_attempts']),
            status_counts=tuple(int(row[c]) for c in status_columns),
            picked=row['picked'] == '1',
            engaged=row['engaged'] == '1',
            pickup_attempt=optional_int(row['pickup_attempt']),
            pickup_attempt_day=optional_int(row['pickup_attempt_day']),
            pickup_slot=optional_int(row['pickup_slot']),
            pickup_weekday=optional_int(row['pickup_weekday']),
            technical_success_ratio=float(row['technical_success_ratio']),
            week_of_year=optional_int(row['week_of_year']),
            slot_attempt_counts=counts(row['slot_attempt_counts']),
            slot_pickup_counts=counts(row['slot_pickup_counts']),
            gestation_week=optional_int(row['gestation_week'])))
    return {bid: Trajectory(bid, tuple(sorted(weeks[bid], key=lambda w: w.message_index)))
            for bid in sorted(weeks)}


class CallRecordParser(ParserBase):
    """Parses call-detail CSV exports into weekly trajectories.

    The accepted records are rolled up with the model's engagement threshold,
    time slot grid and technical success statuses; rejected rows are written
    to row_errors.jsonl next to the weekly file.
    """
    def __init__(self, pipeline_model=None, **kwargs):
        ParserBase.__init__(self, pipeline_model)
        defaults = dict(
                engagement_threshold=parameter_data.engagement_threshold,
                technical_success_statuses=list(parameter_data.technical_success_tokens),
                row_error_file='row_errors.jsonl',
                weekly_file='weekly.csv',
                )
        self._lm.update(kwargs, override=True)
        self._lm.update(defaults, override=False)
        self._log_strings = {
            'parse_success': '${n_records} records accepted, ${n_errors} rows rejected from ${path}',
            'parse_warning': 'rejected rows were written to ${path}',
            'trajectory_success': '${n_beneficiaries} trajectories, ${n_weeks} beneficiary-weeks',
            }

    def parse(self, input_file=None):
        input_file = input_file or self.input_file
        if not input_file:
            raise ValueError('No call record file given (set paths.input_file)')
        with io.open(input_file, 'rb') as f:
            records, row_errors = parse_call_records(f)
        self.records = records
        self.row_errors = row_errors
        self.log('parse_success', n_records=len(records), n_errors=len(row_errors),
                 path=input_file, priority=1)

        error_path = os.path.join(self.output_path('ingest'), self.row_error_file)
        with io.open(error_path, 'w', encoding='utf-8', newline='\n') as f:
            self.row_errors_to_jsonl(row_errors, f)
        if row_errors:
            self.log('parse_warning', path=error_path)
        return records

    def build(self, records=None):
        if records is None:
            records = self.records
        trajectories = build_trajectories(records, float(self.engagement_threshold),
                                          self.grid, self.technical_success)
        self.trajectories = trajectories
        self.log('trajectory_success', n_beneficiaries=len(trajectories),
                 n_weeks=sum(len(t) for t in trajectories.values()), priority=1)
        return trajectories

    def write_weekly(self, trajectories=None):
        if trajectories is None:
            trajectories = self.trajectories
        path = os.path.join(self.output_path('ingest'), self.weekly_file)
        with io.open(path, 'w', encoding='utf-8', newline='\n') as f:
            write_weekly_summaries(trajectories, f)
        return path

    def read_weekly(self, path=None):
        path = path or os.path.join(self.output_path('ingest'), self.weekly_file)
        with io.open(path, 'r', encoding='utf-8', newline='') as f:
            self.trajectories = read_weekly_summaries(f)
        return self.trajectories

