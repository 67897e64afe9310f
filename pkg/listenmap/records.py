"""Domain records shared by every stage: call attempts, weekly rollups and
per-beneficiary trajectories."""
from dataclasses import dataclass, field
from datetime import date, time
from enum import Enum
from typing import Optional, Tuple

from listenmap.data import parameter_data


class DataError(ValueError):
    """Input data violates the record schema or an operation's precondition."""


class TechnicalStatus(Enum):
    PickedUp = 'PICKED_UP'
    Busy = 'BUSY'
    SwitchedOff = 'SWITCHED_OFF'
    OutOfNetwork = 'OUT_OF_NETWORK'
    OtherFailure = 'OTHER'

    @classmethod
    def from_token(cls, token):
        try:
            return cls(token)
        except ValueError:
            raise DataError('unknown status token ' + repr(token))

    @property
    def index(self):
        return STATUS_ORDER.index(self)


STATUS_ORDER = [TechnicalStatus(token) for token in parameter_data.status_tokens]

DEFAULT_TECHNICAL_SUCCESS = frozenset(
    TechnicalStatus(token) for token in parameter_data.technical_success_tokens)


@dataclass(frozen=True)
class CallAttemptRecord:
    beneficiary_id: str
    message_index: int
    attempt_number: int
    attempt_date: date
    attempt_time: time
    status: TechnicalStatus
    duration_seconds: float
    gestation_week: Optional[int] = None

    def __post_init__(self):
        if not 1 <= self.message_index <= parameter_data.program_weeks:
            raise DataError('message_index out of range [1..%d]: %d'
                            % (parameter_data.program_weeks, self.message_index))
        if not 1 <= self.attempt_number <= parameter_data.max_attempts:
            raise DataError('attempt_number out of range [1..%d]: %d'
                            % (parameter_data.max_attempts, self.attempt_number))
        if self.duration_seconds < 0:
            raise DataError('negative duration_seconds: %r' % self.duration_seconds)
        if self.duration_seconds > 0 and self.status is not TechnicalStatus.PickedUp:
            raise DataError('duration_seconds > 0 with status ' + self.status.value)

    @property
    def sort_key(self):
        return (self.attempt_date, self.attempt_time, self.attempt_number)


@dataclass(frozen=True)
class WeeklySummary:
    """One beneficiary-week rollup.

    status_counts is ordered as STATUS_ORDER. slot_attempt_counts and
    slot_pickup_counts hold one entry per time slot plus a final entry for
    attempts outside the grid.
    """
    beneficiary_id: str
    message_index: int
    total_duration_seconds: float = 0.0
    n_attempts: int = 0
    status_counts: Tuple[int, ...] = (0, 0, 0, 0, 0)
    picked: bool = False
    engaged: bool = False
    pickup_attempt: Optional[int] = None
    pickup_attempt_day: Optional[int] = None
    pickup_slot: Optional[int] = None
    pickup_weekday: Optional[int] = None
    technical_success_ratio: float = 0.0
    week_of_year: Optional[int] = None
    slot_attempt_counts: Tuple[int, ...] = ()
    slot_pickup_counts: Tuple[int, ...] = ()
    gestation_week: Optional[int] = None

    @classmethod
    def empty(cls, beneficiary_id, message_index, n_slots=None):
        if n_slots is None:
            n_slots = ((parameter_data.slot_end_hour - parameter_data.slot_start_hour)
                       // parameter_data.slot_hours)
        zeros = (0,) * (n_slots + 1)
        return cls(beneficiary_id=beneficiary_id, message_index=message_index,
                   slot_attempt_counts=zeros, slot_pickup_counts=zeros)

    def status_count(self, status):
        return self.status_counts[status.index]

    def status_map(self):
        return dict(zip(STATUS_ORDER, self.status_counts))

    @property
    def attempted(self):
        return self.n_attempts > 0

    @property
    def technical_failure_only(self):
        "True if the week was attempted and no attempt got through"
        return self.n_attempts > 0 and self.technical_success_ratio == 0.0

    def model_features(self):
        "The 7 per-week model features: duration, attempts, 5 status counts"
        return [self.total_duration_seconds, float(self.n_attempts)] + \
            [float(c) for c in self.status_counts]


@dataclass(frozen=True)
class Trajectory:
    beneficiary_id: str
    weeks: Tuple[WeeklySummary, ...] = field(default_factory=tuple)

    def __post_init__(self):
        indices = [w.message_index for w in self.weeks]
        for a, b in zip(indices, indices[1:]):
            if b != a + 1:
                raise DataError('trajectory %s is not contiguous at week %d'
                                % (self.beneficiary_id, b))

    def __len__(self):
        return len(self.weeks)

    @property
    def enrollment_span(self):
        if not self.weeks:
            return 0
        return self.weeks[-1].message_index - self.weeks[0].message_index + 1

    @property
    def attempted_weeks(self):
        return [w for w in self.weeks if w.attempted]

    @property
    def n_picked_weeks(self):
        return sum(1 for w in self.weeks if w.picked)

    @property
    def n_engaged_weeks(self):
        return sum(1 for w in self.weeks if w.engaged)


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str

    def as_dict(self):
        return {'line': self.line, 'reason': self.reason}
