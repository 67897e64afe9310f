import datetime
import io
import json
import os
from dataclasses import dataclass, asdict
from typing import Optional, Tuple

import listenmap
from listenmap import PipelineModelWrapper
from listenmap.data import parameter_data
from listenmap.functions import canonical_json, config_hash
from listenmap.records import DataError

np = listenmap.np

failure_statuses = ['SWITCHED_OFF', 'OUT_OF_NETWORK', 'OTHER']

#PRNG discipline recorded in every generation manifest
prng_description = ('numpy PCG64; beneficiary ordinal i uses '
                    'SeedSequence(entropy=seed, spawn_key=(key("synth"), i)) '
                    'where key(s) is the little-endian uint32 of the first four '
                    'bytes of sha256(s); per beneficiary: trajectory length, start '
                    'week and weekday offset, then a (weeks, max_attempts, 5) uniform '
                    'block and a (weeks, 2) uniform block')


def _probability(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError('%s must lie in [0, 1], got %r' % (name, value))


@dataclass(frozen=True)
class HolidayDip:
    start_week: int
    length_weeks: int
    pickup_multiplier: float

    def __post_init__(self):
        if self.length_weeks < 0:
            raise ValueError('holiday_dip.length_weeks must be >= 0')
        if self.pickup_multiplier < 0:
            raise ValueError('holiday_dip.pickup_multiplier must be >= 0')

    def covers(self, message_index):
        return self.start_week <= message_index < self.start_week + self.length_weeks


@dataclass(frozen=True)
class ArchetypeConfig:
    """Behavioural parameters shared by a group of synthetic beneficiaries.

    slot_preference is the distribution of dialing times over the slots.
    slot_pickup_weights scales the answering probability per slot; it is
    rescaled so its expectation under slot_preference is 1, and the scaled
    per-attempt probability is clipped at 1.
    """
    name: str
    pickup_prob_per_attempt: float
    engagement_prob_given_pickup: float
    technical_failure_prob: float
    slot_preference: Tuple[float, ...] = (1.0 / 7,) * 7
    trajectory_length_weeks: Tuple[int, int] = (parameter_data.program_weeks,
                                                parameter_data.program_weeks)
    holiday_dip: Optional[HolidayDip] = None
    slot_pickup_weights: Optional[Tuple[float, ...]] = None
    failure_weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        _probability('pickup_prob_per_attempt', self.pickup_prob_per_attempt)
        _probability('engagement_prob_given_pickup', self.engagement_prob_given_pickup)
        _probability('technical_failure_prob', self.technical_failure_prob)
        pref = np.asarray(self.slot_preference, dtype=float)
        if np.any(pref < 0) or abs(pref.sum() - 1.0) > 1e-9:
            raise ValueError('slot_preference of %s must be a probability vector '
                             '(sum %r)' % (self.name, float(pref.sum())))
        if self.slot_pickup_weights is not None:
            weights = np.asarray(self.slot_pickup_weights, dtype=float)
            if weights.shape != pref.shape or np.any(weights < 0) or \
                    float(np.dot(pref, weights)) <= 0:
                raise ValueError('slot_pickup_weights of %s must be %d non-negative '
                                 'weights' % (self.name, len(pref)))
        if self.failure_weights is not None:
            fw = np.asarray(self.failure_weights, dtype=float)
            if fw.shape != (len(failure_statuses),) or np.any(fw < 0) or fw.sum() <= 0:
                raise ValueError('failure_weights must be %d non-negative weights'
                                 % len(failure_statuses))
        lo, hi = self.trajectory_length_weeks
        if not 1 <= lo <= hi <= parameter_data.program_weeks:
            raise ValueError('trajectory_length_weeks must satisfy 1 <= min <= max <= %d'
                             % parameter_data.program_weeks)

    @property
    def n_slots(self):
        return len(self.slot_preference)

    @property
    def pickup_weights(self):
        "slot_pickup_weights rescaled to unit expectation under slot_preference"
        pref = np.asarray(self.slot_preference, dtype=float)
        if self.slot_pickup_weights is None:
            return np.ones_like(pref)
        weights = np.asarray(self.slot_pickup_weights, dtype=float)
        return weights / float(np.dot(pref, weights))

    @property
    def failure_mix(self):
        if self.failure_weights is None:
            return np.full(len(failure_statuses), 1.0 / len(failure_statuses))
        fw = np.asarray(self.failure_weights, dtype=float)
        return fw / fw.sum()


@dataclass(frozen=True)
class CohortConfig:
    seed: int
    archetypes: Tuple[Tuple[ArchetypeConfig, int], ...]
    max_attempts: int = parameter_data.max_attempts
    attempt_days: int = parameter_data.attempt_days
    slot_start_hour: int = parameter_data.slot_start_hour
    slot_end_hour: int = parameter_data.slot_end_hour
    slot_hours: int = parameter_data.slot_hours
    start_date: datetime.date = datetime.date(2022, 1, 3)
    program_weeks: int = parameter_data.program_weeks
    write_gestation: bool = True

    def __post_init__(self):
        if not 1 <= self.max_attempts <= parameter_data.max_attempts:
            raise ValueError('max_attempts must lie in [1..%d]' % parameter_data.max_attempts)
        if not 1 <= self.attempt_days <= min(self.max_attempts, parameter_data.attempt_days):
            raise ValueError('attempt_days must lie in [1..min(max_attempts, %d)]'
                             % parameter_data.attempt_days)
        if not 1 <= self.program_weeks <= parameter_data.program_weeks:
            raise ValueError('program_weeks must lie in [1..%d]' % parameter_data.program_weeks)
        n_slots = self.grid.n_slots
        for archetype, count in self.archetypes:
            if count < 0:
                raise ValueError('archetype %s has a negative count' % archetype.name)
            if archetype.n_slots != n_slots:
                raise ValueError('archetype %s has %d slot preferences for a %d-slot grid'
                                 % (archetype.name, archetype.n_slots, n_slots))
            if archetype.trajectory_length_weeks[1] > self.program_weeks:
                raise ValueError('archetype %s trajectories exceed program_weeks'
                                 % archetype.name)

    @property
    def grid(self):
        from listenmap.analyze.analysis_base import TimeSlotGrid
        return TimeSlotGrid(self.slot_start_hour, self.slot_end_hour, self.slot_hours)

    @property
    def n_beneficiaries(self):
        return sum(count for _, count in self.archetypes)

    def with_seed(self, seed):
        return CohortConfig(**dict(self.__dict__, seed=int(seed)))

    def to_dict(self):
        out = {k: v for k, v in self.__dict__.items() if k != 'archetypes'}
        out['start_date'] = self.start_date.isoformat()
        out['archetypes'] = []
        for archetype, count in self.archetypes:
            entry = asdict(archetype)
            for key in ['slot_preference', 'trajectory_length_weeks',
                        'slot_pickup_weights', 'failure_weights']:
                if entry[key] is not None:
                    entry[key] = list(entry[key])
            entry['count'] = count
            out['archetypes'].append(entry)
        return out


def cohort_config_from_dict(config):
    "Build a CohortConfig from its JSON form (see configs/reference_cohort.json)"
    config = dict(config)
    if 'archetypes' not in config or 'seed' not in config:
        raise ValueError('cohort config needs "seed" and "archetypes"')
    archetypes = []
    for entry in config.pop('archetypes'):
        entry = dict(entry)
        count = int(entry.pop('count'))
        dip = entry.pop('holiday_dip', None)
        for key in ['slot_preference', 'trajectory_length_weeks',
                    'slot_pickup_weights', 'failure_weights']:
            if entry.get(key) is not None:
                entry[key] = tuple(entry[key])
        if dip is not None:
            dip = HolidayDip(int(dip['start_week']), int(dip['length_weeks']),
                             float(dip['pickup_multiplier']))
        archetypes.append((ArchetypeConfig(holiday_dip=dip, **entry), count))
    if 'start_date' in config:
        config['start_date'] = datetime.date.fromisoformat(config['start_date'])
    config['seed'] = int(config['seed'])
    return CohortConfig(archetypes=tuple(archetypes), **config)


def load_cohort_config(path):
    with io.open(path, 'r', encoding='utf-8') as f:
        return cohort_config_from_dict(json.load(f))


class GeneratorBase(PipelineModelWrapper):
    def __init__(self, pipeline_model=None):
        """Class for generating call-record corpora. This class acts as
        a base class to be inherited by other generator classes, but is not
        functional on its own.

        A functional derived generator class must also contain the methods:

        cohort_config(): return the CohortConfig to generate from.
        generate(config): return the sequence of CallAttemptRecord.

        run() writes the records to calls.csv and a manifest.json that records
        the config, its hash and the PRNG discipline.
        """
        if pipeline_model is None:
            pipeline_model = listenmap.ListenershipModel()
        self._lm = pipeline_model
        self._log_strings = {
            'generate_success': '${n_records} call records for ${n_beneficiaries} beneficiaries written to ${path}',
            }

    def run(self):
        config = self.cohort_config()
        if config.n_beneficiaries == 0:
            raise DataError('cohort config has zero beneficiaries')
        records = self.generate(config)
        out = self.output_path('synth')
        path = os.path.join(out, 'calls.csv')
        from listenmap.parsers.cdr_parser import write_call_records
        with io.open(path, 'w', encoding='utf-8', newline='\n') as f:
            write_call_records(records, f, include_gestation=config.write_gestation)

        config_dict = config.to_dict()
        manifest = {'config': config_dict,
                    'config_hash': config_hash(config_dict),
                    'n_records': len(records),
                    'n_beneficiaries': config.n_beneficiaries,
                    'prng': prng_description,
                    'listenmap_version': listenmap.__version__}
        with io.open(os.path.join(out, 'manifest.json'), 'w',
                     encoding='utf-8', newline='\n') as f:
            f.write(json.dumps(json.loads(canonical_json(manifest)),
                               indent=2, sort_keys=True) + '\n')
        self.log('generate_success', n_records=len(records),
                 n_beneficiaries=config.n_beneficiaries, path=path, priority=1)
        return path


__all__ = ['ArchetypeConfig', 'CohortConfig', 'HolidayDip', 'GeneratorBase',
           'cohort_config_from_dict', 'load_cohort_config', 'failure_statuses',
           'prng_description']
