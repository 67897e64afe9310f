from dataclasses import dataclass
from enum import Enum

from listenmap.data import parameter_data
from listenmap.functions import modal_index
from listenmap.records import DataError
from .analysis_base import *
from .efficacy import _as_list

engagement_rate_bases = ['picked', 'attempted']
trajectory_length_bases = ['engaged', 'attempted', 'enrolled']


class Bucket(Enum):
    HPHE = 'HPHE'
    HPLE = 'HPLE'
    LPHE = 'LPHE'
    LPLE = 'LPLE'

    @classmethod
    def from_levels(cls, high_pickup, high_engagement):
        return cls(('HP' if high_pickup else 'LP') + ('HE' if high_engagement else 'LE'))


@dataclass(frozen=True)
class BucketThresholds:
    """Cuts for the pickup x engagement quadrants and the trajectory-length
    screen. A rate equal to its cut is High.

    engagement_rate_basis picks the denominator of the engagement rate:
    picked weeks ('picked') or attempted weeks ('attempted').
    trajectory_length_basis picks what the screen counts: engaged weeks,
    attempted weeks or enrolled weeks.
    """
    pickup_rate_cut: float = 0.5
    engagement_rate_cut: float = 0.5
    long_trajectory_min_weeks: int = 51
    short_trajectory_max_weeks: int = 19
    engagement_rate_basis: str = 'picked'
    trajectory_length_basis: str = 'engaged'

    def __post_init__(self):
        for name in ['pickup_rate_cut', 'engagement_rate_cut']:
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError('%s must lie in [0, 1]' % name)
        if not self.short_trajectory_max_weeks < self.long_trajectory_min_weeks:
            raise ValueError('short_trajectory_max_weeks must be below long_trajectory_min_weeks')
        if self.engagement_rate_basis not in engagement_rate_bases:
            raise ValueError('engagement_rate_basis must be one of %s' % engagement_rate_bases)
        if self.trajectory_length_basis not in trajectory_length_bases:
            raise ValueError('trajectory_length_basis must be one of %s' % trajectory_length_bases)


def trajectory_length(trajectory, basis='engaged'):
    "Listening-trajectory length used by the extreme-trajectory screen"
    if basis == 'engaged':
        return trajectory.n_engaged_weeks
    elif basis == 'attempted':
        return len(trajectory.attempted_weeks)
    elif basis == 'enrolled':
        return trajectory.enrollment_span
    raise ValueError('trajectory_length_basis must be one of %s' % trajectory_length_bases)


def screen_extremes(trajectories, thresholds=None):
    """
    Keep beneficiaries with a long (> 50 weeks by default) or short
    (< 20 weeks) listening trajectory. Returns the same container type as
    given: a dict stays keyed by beneficiary_id.

    :param trajectories: Cohort.
    :type trajectories: dict or list of Trajectory

    :param thresholds: Screening bounds and length basis.
    :type thresholds: BucketThresholds, optional
    """
    if thresholds is None:
        thresholds = BucketThresholds()

    def extreme(trajectory):
        length = trajectory_length(trajectory, thresholds.trajectory_length_basis)
        return (length >= thresholds.long_trajectory_min_weeks or
                length <= thresholds.short_trajectory_max_weeks)

    if isinstance(trajectories, dict):
        return {bid: t for bid, t in trajectories.items() if extreme(t)}
    return [t for t in trajectories if extreme(t)]


def pickup_engagement_rates(trajectory, engagement_rate_basis='picked'):
    """
    (pickup_rate, engagement_rate) of one trajectory. Pickup rate is picked
    weeks over attempted weeks; the engagement rate divides engaged weeks by
    picked weeks (0 when nothing was picked up) or by attempted weeks.
    """
    attempted = trajectory.attempted_weeks
    if not attempted:
        raise DataError('beneficiary %s has no attempted weeks' % trajectory.beneficiary_id)
    n_picked = sum(1 for w in attempted if w.picked)
    n_engaged = sum(1 for w in attempted if w.engaged)
    pickup_rate = n_picked / len(attempted)
    if engagement_rate_basis == 'attempted':
        engagement_rate = n_engaged / len(attempted)
    elif engagement_rate_basis == 'picked':
        engagement_rate = n_engaged / n_picked if n_picked else 0.0
    else:
        raise ValueError('engagement_rate_basis must be one of %s' % engagement_rate_bases)
    return pickup_rate, engagement_rate


def bucket_assign(trajectory, thresholds=None):
    """
    Pickup x engagement quadrant of one trajectory.

    :param trajectory: Trajectory with at least one attempted week.
    :type trajectory: Trajectory

    :param thresholds: Rate cuts (a rate equal to its cut is High).
    :type thresholds: BucketThresholds, optional
    """
    if thresholds is None:
        thresholds = BucketThresholds()
    pickup_rate, engagement_rate = pickup_engagement_rates(
            trajectory, thresholds.engagement_rate_basis)
    return Bucket.from_levels(pickup_rate >= thresholds.pickup_rate_cut,
                              engagement_rate >= thresholds.engagement_rate_cut)


profile_columns = ['message_index', 'n_weeks', 'n_attempted', 'n_picked',
                   'pickup_rate', 'modal_pickup_attempt_day',
                   'mean_technical_success_ratio', 'modal_pickup_slot',
                   'mean_duration_seconds', 'engagement_share',
                   'modal_pickup_weekday']


def bucket_profile(trajectories, grid=None):
    """
    Per-message-index profile of a group of beneficiaries.

    Rates and means come with their denominators (n_attempted for
    pickup_rate and mean_technical_success_ratio, n_picked for
    mean_duration_seconds and engagement_share) so that profiles of disjoint
    groups combine into the profile of their union by count weighting. Modal
    values break ties toward the smaller index and are empty for indices
    without pickups.

    :param trajectories: Members of one bucket.
    :type trajectories: dict or list of Trajectory

    :param grid: Time slot grid (sets the number of slots for the modal slot).
    :type grid: TimeSlotGrid, optional
    """
    if grid is None:
        grid = TimeSlotGrid()
    members = _as_list(trajectories)
    if not members:
        raise DataError('cannot profile an empty bucket')

    by_index = {}
    for trajectory in members:
        for w in trajectory.weeks:
            by_index.setdefault(w.message_index, []).append(w)

    rows = []
    for idx in sorted(by_index):
        weeks = by_index[idx]
        attempted = [w for w in weeks if w.attempted]
        picked = [w for w in attempted if w.picked]
        slots = [w.pickup_slot for w in picked if w.pickup_slot not in (None, OUTSIDE_GRID)]
        rows.append([idx, len(weeks), len(attempted), len(picked),
                     len(picked) / len(attempted) if attempted else None,
                     modal_index([w.pickup_attempt_day for w in picked],
                                 parameter_data.attempt_days + 1),
                     float(np.mean([w.technical_success_ratio for w in attempted]))
                     if attempted else None,
                     modal_index(slots, grid.n_slots),
                     float(np.mean([w.total_duration_seconds for w in picked]))
                     if picked else None,
                     sum(1 for w in picked if w.engaged) / len(picked) if picked else None,
                     modal_index([w.pickup_weekday for w in picked], 7)])
    frame = pd.DataFrame(rows, columns=profile_columns)
    for column in ['modal_pickup_attempt_day', 'modal_pickup_slot', 'modal_pickup_weekday']:
        frame[column] = frame[column].astype('Int64')
    return frame


class BucketAnalysis(AnalysisBase):
    """Pickup x engagement segmentation with one profile per bucket."""
    def __init__(self, pipeline_model=None, **kwargs):
        AnalysisBase.__init__(self, pipeline_model)
        defaults = dict(screen_before_bucketing=False)
        self._lm.update(kwargs, override=True)
        self._lm.update(defaults, override=False)
        self._log_strings = {
            'screen_success': '${n_kept} of ${n_total} beneficiaries kept by the trajectory-length screen',
            'bucket_warning': '${n_skipped} beneficiaries without attempted weeks were not bucketed',
            'bucket_success': 'bucket sizes ${sizes}',
            }

    def assign(self, trajectories):
        "beneficiary_id -> (Bucket, pickup_rate, engagement_rate) for every bucketable member"
        thresholds = self.bucket_thresholds
        cohort = trajectories
        if self.screen_before_bucketing:
            cohort = screen_extremes(trajectories, thresholds)
            self.log('screen_success', n_kept=len(cohort), n_total=len(trajectories))
        assignments = {}
        skipped = 0
        for trajectory in _as_list(cohort):
            if not trajectory.attempted_weeks:
                skipped += 1
                continue
            rates = pickup_engagement_rates(trajectory, thresholds.engagement_rate_basis)
            assignments[trajectory.beneficiary_id] = (bucket_assign(trajectory, thresholds),) + rates
        if skipped:
            self.log('bucket_warning', n_skipped=skipped)
        return assignments

    def analyze(self, trajectories):
        assignments = self.assign(trajectories)
        lookup = {t.beneficiary_id: t for t in _as_list(trajectories)}
        members = {b: [] for b in Bucket}
        rows = []
        for bid in sorted(assignments):
            bucket, pickup_rate, engagement_rate = assignments[bid]
            members[bucket].append(lookup[bid])
            rows.append([bid, bucket.value, pickup_rate, engagement_rate])
        tables = {'buckets': pd.DataFrame(rows, columns=['beneficiary_id', 'bucket',
                                                         'pickup_rate', 'engagement_rate'])}

        total = max(len(assignments), 1)
        reference_total = sum(parameter_data.reference_bucket_counts.values())
        tables['bucket_counts'] = pd.DataFrame(
                [[b.value, len(members[b]), len(members[b]) / total,
                  parameter_data.reference_bucket_counts[b.value] / reference_total]
                 for b in Bucket],
                columns=['bucket', 'n_beneficiaries', 'share', 'reference_share'])
        self.log('bucket_success', sizes=', '.join('%s=%d' % (b.value, len(members[b]))
                                                   for b in Bucket))
        for bucket in Bucket:
            if members[bucket]:
                tables['bucket_profile_' + bucket.value] = bucket_profile(members[bucket], self.grid)
        return tables


__all__ = ['Bucket', 'BucketThresholds', 'BucketAnalysis', 'bucket_assign',
           'bucket_profile', 'screen_extremes', 'pickup_engagement_rates',
           'trajectory_length', 'profile_columns', 'engagement_rate_bases',
           'trajectory_length_bases']
