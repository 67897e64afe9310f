#Standard imports
import datetime

#Non-standard imports
import listenmap
from listenmap import PipelineModelWrapper
from listenmap.analyze.analysis_base import TimeSlotGrid
from listenmap.data import parameter_data, regular_expressions
from listenmap.records import (CallAttemptRecord, RowError,
                               TechnicalStatus)

np = listenmap.np
pd = listenmap.pd


def validate_call_fields(frame):
    """
    Check the raw string fields of call-detail rows column by column.

    Returns a Series holding, per row, the first violated rule or '' when the
    row is valid. Rules are checked in schema order so the reported reason is
    deterministic.

    :param frame: One string column per CSV header.
    :type frame: pandas.DataFrame
    """
    reasons = pd.Series('', index=frame.index, dtype=object)

    def flag(invalid, reason):
        mask = invalid & (reasons == '')
        reasons.loc[mask] = reason

    bid = frame['beneficiary_id'].str.strip()
    flag(bid == '', 'empty beneficiary_id')

    integer = regular_expressions['non_negative_integer'][0]
    for column, hi in [('message_index', parameter_data.program_weeks),
                       ('attempt_number', parameter_data.max_attempts)]:
        well_formed = frame[column].str.fullmatch(integer)
        flag(~well_formed, 'malformed ' + column)
        #more than 9 significant digits is out of range for both columns
        short = well_formed & (frame[column].str.lstrip('0').str.len() <= 9)
        value = frame[column].where(short, '0').map(int)
        flag(well_formed & ~short, '%s out of range [1..%d]' % (column, hi))
        flag((value < 1) | (value > hi), '%s out of range [1..%d]' % (column, hi))

    date_ok = frame['attempt_date'].str.fullmatch(
        regular_expressions['attempt_date'][0].strip('^$'))
    parsed = pd.to_datetime(frame['attempt_date'].where(date_ok, None),
                            format='%Y-%m-%d', errors='coerce')
    flag(~date_ok | parsed.isna(), 'malformed attempt_date')

    time_ok = frame['attempt_time'].str.fullmatch(
        regular_expressions['attempt_time'][0].strip('^$'))
    flag(~time_ok, 'malformed attempt_time')

    status_ok = frame['status'].isin(parameter_data.status_tokens)
    flag(~status_ok, 'unknown status token')

    duration_ok = frame['duration_seconds'].str.fullmatch(
        regular_expressions['non_negative_real'][0].strip('^$'))
    flag(~duration_ok, 'malformed duration_seconds')
    duration = frame['duration_seconds'].where(duration_ok, '0').map(float)
    flag(~np.isfinite(duration), 'duration_seconds out of range')
    flag((duration > 0) & (frame['status'] != TechnicalStatus.PickedUp.value),
         'duration_seconds > 0 with non-PickedUp status')

    if 'gestation_week' in frame.columns:
        gestation = frame['gestation_week'].str.strip()
        flag((gestation != '') & ~gestation.str.fullmatch(integer),
             'malformed gestation_week')
    return reasons


def validate_attempt_dates(frame, reasons, max_days=parameter_data.attempt_days):
    """
    Reject every row of a beneficiary-week whose valid attempts fall on
    more than max_days calendar dates. Rows already rejected do not count.

    Returns the updated reasons Series.
    """
    reasons = reasons.copy()
    valid = frame[reasons == '']
    if valid.empty:
        return reasons
    n_dates = valid.groupby([valid['beneficiary_id'].str.strip(),
                             valid['message_index'].astype(int)]
                            )['attempt_date'].transform('nunique')
    crowded = n_dates[n_dates > max_days]
    for index, n in crowded.items():
        reasons.loc[index] = ('beneficiary-week spans %d attempt dates (max %d)'
                              % (n, max_days))
    return reasons


def records_from_frame(frame):
    "Build CallAttemptRecords from rows that passed validate_call_fields"
    has_gestation = 'gestation_week' in frame.columns
    records = []
    for row in frame.itertuples(index=False):
        year, month, day = (int(v) for v in row.attempt_date.split('-'))
        hour, minute, second = (int(v) for v in row.attempt_time.split(':'))
        gestation = None
        if has_gestation and row.gestation_week.strip():
            gestation = int(row.gestation_week)
        records.append(CallAttemptRecord(
            beneficiary_id=row.beneficiary_id.strip(),
            message_index=int(row.message_index),
            attempt_number=int(row.attempt_number),
            attempt_date=datetime.date(year, month, day),
            attempt_time=datetime.time(hour, minute, second),
            status=TechnicalStatus(row.status),
            duration_seconds=float(row.duration_seconds),
            gestation_week=gestation))
    return records


class ParserBase(PipelineModelWrapper):
    def __init__(self, pipeline_model=None):
        """Class for `parsing' raw call-detail exports into validated call
        attempt records and weekly trajectories. This class acts as a base
        class to be inherited by other parser classes, but is not functional
        on its own.

        input_file: defines the file path to get call records from

        A functional derived parser class must also contain the methods:

        parse(input_file): read the input and return the accepted records;
        rejected rows are kept in row_errors.
        """
        if pipeline_model is None:
            pipeline_model = listenmap.ListenershipModel()
        self._lm = pipeline_model
        self._required = {'input_file': str, 'engagement_threshold': float}

    @property
    def technical_success(self):
        "Statuses counted as technically successful attempts"
        tokens = self.technical_success_statuses or \
            parameter_data.technical_success_tokens
        return frozenset(TechnicalStatus.from_token(t) for t in tokens)

    @property
    def grid(self):
        return TimeSlotGrid(self.slot_start_hour, self.slot_end_hour,
                            self.slot_hours)

    @staticmethod
    def row_errors_to_jsonl(row_errors, stream):
        "Write row errors as JSON lines {line, reason}"
        for error in row_errors:
            stream.write(listenmap.functions.canonical_json(error.as_dict()) + '\n')


__all__ = ['ParserBase', 'validate_call_fields', 'validate_attempt_dates',
           'records_from_frame', 'RowError']
