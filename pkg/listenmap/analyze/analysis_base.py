import os
from dataclasses import dataclass

import listenmap
from listenmap import PipelineModelWrapper
from listenmap.data import parameter_data

np = listenmap.np
pd = listenmap.pd

OUTSIDE_GRID = -1


@dataclass(frozen=True)
class TimeSlotGrid:
    """Equal-width call-time slots covering [start_hour, end_hour).

    :param start_hour: First hour of slot 0.
    :type start_hour: int

    :param end_hour: Hour at which the last slot ends.
    :type end_hour: int

    :param slot_hours: Width of every slot in hours.
    :type slot_hours: int
    """
    start_hour: int = parameter_data.slot_start_hour
    end_hour: int = parameter_data.slot_end_hour
    slot_hours: int = parameter_data.slot_hours

    def __post_init__(self):
        if not 0 <= self.start_hour < self.end_hour <= 24:
            raise ValueError('Time slot grid must satisfy 0 <= start_hour < end_hour <= 24')
        if self.slot_hours <= 0 or (self.end_hour - self.start_hour) % self.slot_hours:
            raise ValueError('(end_hour - start_hour) must be divisible by slot_hours')

    @property
    def n_slots(self):
        return (self.end_hour - self.start_hour) // self.slot_hours

    def assign(self, time_of_day):
        "Slot index of a time of day, or OUTSIDE_GRID"
        seconds = time_of_day.hour * 3600 + time_of_day.minute * 60 + time_of_day.second
        start = self.start_hour * 3600
        if start <= seconds < self.end_hour * 3600:
            return (seconds - start) // (self.slot_hours * 3600)
        return OUTSIDE_GRID

    def slot_label(self, slot):
        if slot == OUTSIDE_GRID:
            return 'OUTSIDE'
        lo = self.start_hour + slot * self.slot_hours
        return '%02d:00-%02d:00' % (lo, lo + self.slot_hours)


def assign_time_slot(time_of_day, grid=None):
    """
    Slot index for a time of day under grid; OUTSIDE_GRID for times before
    the first slot or at/after the end of the last one.

    :param time_of_day: Attempt time.
    :type time_of_day: datetime.time

    :param grid: Slot grid, defaults to seven two-hour slots from 8:00.
    :type grid: TimeSlotGrid, optional
    """
    if grid is None:
        grid = TimeSlotGrid()
    return grid.assign(time_of_day)


def format_rate(value):
    "Rates print as repr floats; undefined rates print empty"
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ''
    return repr(float(value))


class AnalysisBase(PipelineModelWrapper):
    def __init__(self, pipeline_model=None):
        """Class for cohort-level analyses over weekly trajectories. This
        class acts as a base class to be inherited by the individual
        analyses, but is not functional on its own.

        A functional derived analysis class must contain the methods:

        analyze(trajectories): compute the analysis and return its tables
            as a dict of name -> pandas.DataFrame.

        The base class writes every returned table as a plot-ready CSV in the
        analysis output directory via save().
        """
        if pipeline_model is None:
            pipeline_model = listenmap.ListenershipModel()
        self._lm = pipeline_model
        self._log_strings = {'save_success': 'wrote ${path}'}

    def run(self, trajectories):
        tables = self.analyze(trajectories)
        for name in sorted(tables):
            self.save(tables[name], name)
        return tables

    def save(self, frame, name):
        """
        Write one analysis table.

        :param frame: Table to write.
        :type frame: pandas.DataFrame

        :param name: File name without extension.
        :type name: str
        """
        path = os.path.join(self.output_path('analyze'), name + '.csv')
        frame.to_csv(path, index=False, lineterminator='\n')
        self.log('save_success', path=path, priority=1)
        return path
