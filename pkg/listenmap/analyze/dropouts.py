from dataclasses import dataclass

from .analysis_base import *
from .efficacy import _as_list


@dataclass(frozen=True)
class GapEvent:
    beneficiary_id: str
    start_week: int
    end_week: int
    length_weeks: int
    technical_failure_driven: bool


def dropout_gap_scan(trajectory, gap_weeks=6):
    """
    Maximal runs of at least gap_weeks consecutive weeks without a pickup.

    A run is technical_failure_driven when it holds at least one attempt and
    none of its attempts got through technically.

    :param trajectory: Contiguous weekly trajectory.
    :type trajectory: Trajectory

    :param gap_weeks: Minimum run length reported.
    :type gap_weeks: int, optional
    """
    if gap_weeks < 1:
        raise ValueError('gap_weeks must be >= 1')
    events = []
    run = []
    for w in list(trajectory.weeks) + [None]:
        if w is not None and not w.picked:
            run.append(w)
            continue
        if len(run) >= gap_weeks:
            attempted = [r for r in run if r.attempted]
            driven = bool(attempted) and all(r.technical_failure_only for r in attempted)
            events.append(GapEvent(trajectory.beneficiary_id, run[0].message_index,
                                   run[-1].message_index, len(run), driven))
        run = []
    return events


def technical_failure_summary(trajectory, gap_weeks=6):
    "Technical success against listenership for one beneficiary"
    attempted = trajectory.attempted_weeks
    events = dropout_gap_scan(trajectory, gap_weeks)
    return dict(beneficiary_id=trajectory.beneficiary_id,
                n_attempted_weeks=len(attempted),
                mean_technical_success_ratio=(float(np.mean([w.technical_success_ratio
                                                             for w in attempted]))
                                              if attempted else None),
                pickup_rate=(sum(1 for w in attempted if w.picked) / len(attempted)
                             if attempted else None),
                n_gaps=len(events),
                n_failure_driven_gaps=sum(1 for e in events if e.technical_failure_driven))


class DropoutAnalysis(AnalysisBase):
    """Runs of weeks without listenership and their technical causes."""
    def __init__(self, pipeline_model=None, **kwargs):
        AnalysisBase.__init__(self, pipeline_model)
        defaults = dict(gap_weeks=6)
        self._lm.update(kwargs, override=True)
        self._lm.update(defaults, override=False)
        self._log_strings = {
            'gaps_success': '${n_events} gaps of >= ${gap_weeks} weeks, ${n_driven} driven by technical failures',
            }

    def analyze(self, trajectories):
        gap_weeks = int(self.gap_weeks)
        rows = []
        summaries = []
        for trajectory in _as_list(trajectories):
            for e in dropout_gap_scan(trajectory, gap_weeks):
                rows.append([e.beneficiary_id, e.start_week, e.end_week,
                             e.length_weeks, e.technical_failure_driven])
            summaries.append(technical_failure_summary(trajectory, gap_weeks))
        gaps = pd.DataFrame(rows, columns=['beneficiary_id', 'start_week', 'end_week',
                                           'length_weeks', 'technical_failure_driven'])
        self.log('gaps_success', n_events=len(gaps), gap_weeks=gap_weeks,
                 n_driven=int(gaps['technical_failure_driven'].sum()) if len(gaps) else 0)
        failures = pd.DataFrame(summaries, columns=[
                'beneficiary_id', 'n_attempted_weeks', 'mean_technical_success_ratio',
                'pickup_rate', 'n_gaps', 'n_failure_driven_gaps'])
        return {'gaps': gaps, 'technical_failures': failures}


__all__ = ['GapEvent', 'dropout_gap_scan', 'technical_failure_summary',
           'DropoutAnalysis']
