from dataclasses import dataclass
from typing import Optional, Tuple

from listenmap.records import DataError
from .analysis_base import *
from .buckets import Bucket, BucketAnalysis
from .efficacy import _as_list

weekday_names = ['Monday', 'Tuesday', 'Wednesday', 'Thursday', 'Friday',
                 'Saturday', 'Sunday']


@dataclass(frozen=True)
class SlotRates:
    attempts: Tuple[int, ...]
    pickups: Tuple[int, ...]
    rates: Tuple[Optional[float], ...]
    outside_attempts: int
    outside_pickups: int

    @property
    def total_attempts(self):
        return sum(self.attempts) + self.outside_attempts


def slot_pickup_rates(trajectories, grid=None):
    """
    Pickup rate per time slot: picked attempts in the slot over attempts in
    the slot. A slot without attempts has no rate (None). Attempts outside
    the grid are counted separately.

    :param trajectories: Cohort or bucket.
    :type trajectories: dict or list of Trajectory

    :param grid: Time slot grid the weekly slot counts were built with.
    :type grid: TimeSlotGrid, optional
    """
    if grid is None:
        grid = TimeSlotGrid()
    attempts = np.zeros(grid.n_slots + 1, dtype=int)
    pickups = np.zeros(grid.n_slots + 1, dtype=int)
    for trajectory in _as_list(trajectories):
        for w in trajectory.attempted_weeks:
            if len(w.slot_attempt_counts) != grid.n_slots + 1:
                raise DataError('weekly slot counts of %s do not match a %d-slot grid'
                                % (w.beneficiary_id, grid.n_slots))
            attempts += w.slot_attempt_counts
            pickups += w.slot_pickup_counts
    if attempts[:-1].sum() == 0:
        raise DataError('no attempts inside the time slot grid')
    rates = tuple(float(p / a) if a else None
                  for p, a in zip(pickups[:-1], attempts[:-1]))
    return SlotRates(attempts=tuple(int(a) for a in attempts[:-1]),
                     pickups=tuple(int(p) for p in pickups[:-1]),
                     rates=rates,
                     outside_attempts=int(attempts[-1]),
                     outside_pickups=int(pickups[-1]))


def slot_table(slot_rates, grid=None):
    "Rows slot,label,attempts,pickups,rate for every slot plus the OUTSIDE row"
    if grid is None:
        grid = TimeSlotGrid()
    rows = [[str(s), grid.slot_label(s), a, p, format_rate(r)]
            for s, (a, p, r) in enumerate(zip(slot_rates.attempts, slot_rates.pickups,
                                              slot_rates.rates))]
    outside_rate = (slot_rates.outside_pickups / slot_rates.outside_attempts
                    if slot_rates.outside_attempts else None)
    rows.append(['OUTSIDE', grid.slot_label(OUTSIDE_GRID), slot_rates.outside_attempts,
                 slot_rates.outside_pickups, format_rate(outside_rate)])
    return pd.DataFrame(rows, columns=['slot', 'label', 'attempts', 'pickups', 'rate'])


def weekday_pickups(trajectories):
    "Number and share of picked-up weeks by weekday of the first pickup"
    counts = np.zeros(7, dtype=int)
    for trajectory in _as_list(trajectories):
        for w in trajectory.weeks:
            if w.pickup_weekday is not None:
                counts[w.pickup_weekday] += 1
    total = counts.sum()
    return pd.DataFrame({'weekday': np.arange(7), 'name': weekday_names,
                         'pickups': counts,
                         'share': counts / total if total else np.zeros(7)})


class TimeSlotAnalysis(AnalysisBase):
    """Pickup rates per time slot for the cohort and for every bucket, and
    the weekday of pickups."""
    def __init__(self, pipeline_model=None):
        AnalysisBase.__init__(self, pipeline_model)
        self._log_strings = {
            'slots_success': 'best slot ${slot} (${label}) with pickup rate ${rate}',
            'slots_warning': '${n} attempts fell outside the time slot grid',
            }

    def analyze(self, trajectories):
        grid = self.grid
        rates = slot_pickup_rates(trajectories, grid)
        observed = [(r, s) for s, r in enumerate(rates.rates) if r is not None]
        best_rate, best = max(observed, key=lambda rs: (rs[0], -rs[1]))
        self.log('slots_success', slot=best, label=grid.slot_label(best),
                 rate=format_rate(best_rate), priority=1)
        if rates.outside_attempts:
            self.log('slots_warning', n=rates.outside_attempts)
        tables = {'slots': slot_table(rates, grid),
                  'weekdays': weekday_pickups(trajectories)}

        assignments = BucketAnalysis(self._lm).assign(trajectories)
        lookup = {t.beneficiary_id: t for t in _as_list(trajectories)}
        for bucket in Bucket:
            members = [lookup[bid] for bid in sorted(assignments)
                       if assignments[bid][0] is bucket]
            if not members:
                continue
            try:
                tables['slots_' + bucket.value] = slot_table(
                        slot_pickup_rates(members, grid), grid)
            except DataError:
                continue
        return tables


__all__ = ['SlotRates', 'slot_pickup_rates', 'slot_table', 'weekday_pickups',
           'TimeSlotAnalysis', 'weekday_names']
