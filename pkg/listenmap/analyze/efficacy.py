from dataclasses import dataclass
from typing import Tuple

from listenmap.data import parameter_data
from listenmap.records import DataError
from .analysis_base import *

efficacy_units = ['beneficiary_week', 'beneficiary_first_week']


@dataclass(frozen=True)
class EfficacyCurve:
    per_attempt_reach: Tuple[float, ...]
    cumulative_reach: Tuple[float, ...]
    never_reached: float
    n_units: int


def _as_list(trajectories):
    if isinstance(trajectories, dict):
        return [trajectories[k] for k in sorted(trajectories)]
    return list(trajectories)


def attempt_efficacy(trajectories, unit='beneficiary_week',
                     max_attempts=parameter_data.max_attempts):
    """
    Share of call cycles first reached at each attempt.

    A unit is a beneficiary-week with at least one attempt, or only the first
    such week of every beneficiary when unit is 'beneficiary_first_week'.

    :param trajectories: Cohort, keyed by beneficiary_id or as a sequence.
    :type trajectories: dict or list of Trajectory

    :param unit: 'beneficiary_week' or 'beneficiary_first_week'.
    :type unit: str, optional
    """
    if unit not in efficacy_units:
        raise ValueError('efficacy unit must be one of %s' % efficacy_units)
    weeks = []
    for trajectory in _as_list(trajectories):
        attempted = trajectory.attempted_weeks
        if unit == 'beneficiary_first_week':
            attempted = attempted[:1]
        weeks.extend(attempted)
    if not weeks:
        raise DataError('cohort has zero attempted beneficiary-weeks')

    counts = np.zeros(max_attempts, dtype=int)
    for w in weeks:
        if w.pickup_attempt is not None:
            counts[w.pickup_attempt - 1] += 1
    n = len(weeks)
    per_attempt = counts / n
    cumulative = np.cumsum(per_attempt)
    return EfficacyCurve(per_attempt_reach=tuple(float(x) for x in per_attempt),
                         cumulative_reach=tuple(float(x) for x in cumulative),
                         never_reached=(n - int(counts.sum())) / n,
                         n_units=n)


class EfficacyAnalysis(AnalysisBase):
    """Per-attempt and cumulative reach of the weekly call cycle."""
    def __init__(self, pipeline_model=None, **kwargs):
        AnalysisBase.__init__(self, pipeline_model)
        defaults = dict(efficacy_unit='beneficiary_week')
        self._lm.update(kwargs, override=True)
        self._lm.update(defaults, override=False)
        self._log_strings = {
            'efficacy_success': '${never} of ${n_units} call cycles never reached after ${n} attempts',
            }

    def analyze(self, trajectories):
        curve = attempt_efficacy(trajectories, self.efficacy_unit)
        self.log('efficacy_success', never='%.1f%%' % (100 * curve.never_reached),
                 n_units=curve.n_units, n=len(curve.per_attempt_reach))
        frame = pd.DataFrame({'attempt': np.arange(1, len(curve.per_attempt_reach) + 1),
                              'reach': curve.per_attempt_reach,
                              'cumulative': curve.cumulative_reach})
        return {'efficacy': frame}


__all__ = ['EfficacyCurve', 'attempt_efficacy', 'EfficacyAnalysis', 'efficacy_units']
