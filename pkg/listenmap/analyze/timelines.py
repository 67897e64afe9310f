from .analysis_base import *
from .efficacy import _as_list

timeline_columns = ['message_index', 'week_of_year', 'n_attempts', 'picked',
                    'engaged', 'total_duration_seconds', 'pickup_attempt_day',
                    'pickup_slot', 'technical_success_ratio',
                    'technical_failure_only']


def beneficiary_timeline(trajectory):
    "One row per message index of a single beneficiary"
    rows = [[w.message_index, w.week_of_year, w.n_attempts, w.picked, w.engaged,
             w.total_duration_seconds, w.pickup_attempt_day, w.pickup_slot,
             w.technical_success_ratio, w.technical_failure_only]
            for w in trajectory.weeks]
    frame = pd.DataFrame(rows, columns=timeline_columns)
    for column in ['week_of_year', 'pickup_attempt_day', 'pickup_slot']:
        frame[column] = frame[column].astype('Int64')
    return frame


class TimelineAnalysis(AnalysisBase):
    """Week-by-week export for the beneficiaries named in
    timeline_beneficiaries."""
    def __init__(self, pipeline_model=None, **kwargs):
        AnalysisBase.__init__(self, pipeline_model)
        defaults = dict(timeline_beneficiaries=[])
        self._lm.update(kwargs, override=True)
        self._lm.update(defaults, override=False)
        self._log_strings = {
            'timeline_warning': 'beneficiary ${beneficiary_id} is not in the cohort',
            }

    def analyze(self, trajectories):
        lookup = {t.beneficiary_id: t for t in _as_list(trajectories)}
        tables = {}
        for bid in self.timeline_beneficiaries or []:
            if bid not in lookup:
                self.log('timeline_warning', beneficiary_id=bid)
                continue
            tables['timeline_' + bid] = beneficiary_timeline(lookup[bid])
        return tables


__all__ = ['beneficiary_timeline', 'TimelineAnalysis', 'timeline_columns']
