import datetime
from concurrent.futures import ProcessPoolExecutor

import listenmap
from listenmap.data import parameter_data
from listenmap.functions import largest_remainder, substream
from listenmap.records import CallAttemptRecord, DataError, TechnicalStatus
from .generator_base import *

np = listenmap.np

_failure_status = [TechnicalStatus(token) for token in failure_statuses]

#Reference archetype behaviour, one entry per bucket. Dialing is uniform over
#the slots; the answering weights plant the slot shapes.
reference_archetypes = {
    'HPHE': dict(pickup_prob_per_attempt=0.4603,
                 engagement_prob_given_pickup=0.93,
                 technical_failure_prob=0.13,
                 trajectory_length_weeks=(68, 72),
                 slot_pickup_weights=(1.5, 1.0, 1.0, 1.0, 1.0, 1.2, 1.0),
                 holiday_dip=HolidayDip(start_week=45, length_weeks=2,
                                        pickup_multiplier=0.3)),
    'HPLE': dict(pickup_prob_per_attempt=0.47,
                 engagement_prob_given_pickup=0.15,
                 technical_failure_prob=0.15,
                 trajectory_length_weeks=(68, 72),
                 slot_pickup_weights=(1.4, 1.0, 1.0, 1.0, 1.0, 1.0, 1.1)),
    'LPHE': dict(pickup_prob_per_attempt=0.0816,
                 engagement_prob_given_pickup=0.95,
                 technical_failure_prob=0.70,
                 trajectory_length_weeks=(13, 15),
                 slot_pickup_weights=(1.8, 1.4, 0.7, 0.7, 0.7, 1.3, 1.6)),
    'LPLE': dict(pickup_prob_per_attempt=0.1633,
                 engagement_prob_given_pickup=0.03,
                 technical_failure_prob=0.85,
                 trajectory_length_weeks=(13, 15),
                 slot_pickup_weights=(2.0, 0.8, 0.8, 0.8, 0.8, 0.8, 1.6)),
    }


def default_bucket_archetypes(n_beneficiaries=sum(parameter_data.reference_bucket_counts.values()),
                              seed=0):
    """
    Four-archetype cohort mirroring the reference bucket distribution.

    Counts are proportional to the reference counts (largest remainder, so
    they sum exactly to n_beneficiaries). High-pickup archetypes stay for
    most of the program; low-pickup archetypes drop out after a few months.

    :param n_beneficiaries: Cohort size.
    :type n_beneficiaries: int, optional

    :param seed: Generator seed.
    :type seed: int, optional
    """
    names = parameter_data.bucket_names
    counts = largest_remainder(int(n_beneficiaries),
                               [parameter_data.reference_bucket_counts[b] for b in names])
    archetypes = tuple((ArchetypeConfig(name=name, **reference_archetypes[name]), count)
                       for name, count in zip(names, counts))
    return CohortConfig(seed=int(seed), archetypes=archetypes)


def attempt_day_schedule(max_attempts, attempt_days):
    "Day index (0-based) of every attempt: contiguous blocks, earlier days get the extras"
    sizes = [max_attempts // attempt_days + (1 if d < max_attempts % attempt_days else 0)
             for d in range(attempt_days)]
    return np.repeat(np.arange(attempt_days), sizes)


def beneficiary_id(ordinal, n_beneficiaries):
    "Zero-padded id so that string order equals ordinal order"
    return 'B%0*d' % (max(5, len(str(n_beneficiaries))), ordinal + 1)


def generate_beneficiary(config, archetype, ordinal, n_beneficiaries=None):
    """
    Call records of one synthetic beneficiary.

    Every week draws the same number of uniforms whether or not calling
    stops early, so runs that differ only in probabilities share their
    random numbers attempt by attempt.
    """
    if n_beneficiaries is None:
        n_beneficiaries = config.n_beneficiaries
    rng = substream(config.seed, 'synth', ordinal)
    bid = beneficiary_id(ordinal, n_beneficiaries)
    grid = config.grid
    n_attempts_max = config.max_attempts

    lo, hi = archetype.trajectory_length_weeks
    n_weeks = int(rng.integers(lo, hi + 1))
    first_week = int(rng.integers(1, config.program_weeks - n_weeks + 2))
    weekday_offset = int(rng.integers(0, 7 - config.attempt_days + 1))
    u = rng.random((n_weeks, n_attempts_max, 5))
    v = rng.random((n_weeks, 2))

    days = attempt_day_schedule(n_attempts_max, config.attempt_days)
    cum_pref = np.cumsum(archetype.slot_preference)
    slots = np.minimum(np.searchsorted(cum_pref, u[:, :, 3] * cum_pref[-1], side='right'),
                       grid.n_slots - 1)
    slot_seconds = grid.slot_hours * 3600
    seconds = grid.start_hour * 3600 + slots * slot_seconds + \
        np.floor(u[:, :, 4] * slot_seconds).astype(int)
    # attempts of one day are dialed in time order
    order = np.argsort(days[None, :] * 86400 + seconds, axis=1, kind='stable')
    slots = np.take_along_axis(slots, order, axis=1)
    seconds = np.take_along_axis(seconds, order, axis=1)

    week_index = first_week + np.arange(n_weeks)
    dip = np.ones(n_weeks)
    if archetype.holiday_dip is not None:
        covered = [archetype.holiday_dip.covers(int(w)) for w in week_index]
        dip[np.array(covered, dtype=bool)] = archetype.holiday_dip.pickup_multiplier
    p_attempt = np.clip(archetype.pickup_prob_per_attempt *
                        archetype.pickup_weights[slots] * dip[:, None], 0.0, 1.0)
    failed = u[:, :, 0] < archetype.technical_failure_prob
    picked = ~failed & (u[:, :, 2] < p_attempt)
    failure_kind = np.minimum(np.searchsorted(np.cumsum(archetype.failure_mix),
                                              u[:, :, 1], side='right'),
                              len(_failure_status) - 1)

    picked_week = picked.any(axis=1)
    first_pickup = np.argmax(picked, axis=1)
    n_attempts = np.where(picked_week, first_pickup + 1, n_attempts_max)
    engaged = v[:, 0] < archetype.engagement_prob_given_pickup
    tenths = np.where(engaged, 301 + np.floor(v[:, 1] * 600),
                      1 + np.floor(v[:, 1] * 300)).astype(int)

    records = []
    for t in range(n_weeks):
        message_index = int(week_index[t])
        week_start = config.start_date + datetime.timedelta(
                days=(message_index - 1) * 7 + weekday_offset)
        gestation = message_index + 12 if config.write_gestation else None
        for k in range(int(n_attempts[t])):
            if picked_week[t] and k == first_pickup[t]:
                status = TechnicalStatus.PickedUp
                duration = tenths[t] / 10
            elif failed[t, k]:
                status = _failure_status[failure_kind[t, k]]
                duration = 0.0
            else:
                status = TechnicalStatus.Busy
                duration = 0.0
            s = int(seconds[t, k])
            records.append(CallAttemptRecord(
                beneficiary_id=bid,
                message_index=message_index,
                attempt_number=k + 1,
                attempt_date=week_start + datetime.timedelta(days=int(days[k])),
                attempt_time=datetime.time(s // 3600, (s % 3600) // 60, s % 60),
                status=status,
                duration_seconds=float(duration),
                gestation_week=gestation))
    return records


def _generate_chunk(args):
    config, plan = args
    n = config.n_beneficiaries
    records = []
    for ordinal, archetype in plan:
        records.extend(generate_beneficiary(config, archetype, ordinal, n))
    return records


def generate_cohort(config, jobs=1, chunk_size=500):
    """
    Seeded synthetic call records for a cohort.

    Beneficiary ordinals run over the archetypes in config order; each
    beneficiary draws from its own sub-stream, so the output is the same
    for any number of jobs.

    :param config: Cohort definition.
    :type config: CohortConfig

    :param jobs: Worker processes.
    :type jobs: int, optional
    """
    plan = []
    for archetype, count in config.archetypes:
        plan.extend([archetype] * count)
    if not plan:
        raise DataError('cohort config has zero beneficiaries')
    plan = list(enumerate(plan))
    chunks = [(config, plan[i:i + chunk_size]) for i in range(0, len(plan), chunk_size)]
    if jobs and jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            parts = list(executor.map(_generate_chunk, chunks))
    else:
        parts = [_generate_chunk(chunk) for chunk in chunks]
    return [r for part in parts for r in part]


class CohortGenerator(GeneratorBase):
    """Generates the synthetic corpus for a pipeline run.

    The cohort comes from synth_config when given, otherwise from
    default_bucket_archetypes(n_beneficiaries). A pipeline seed, when set,
    replaces the seed of the cohort config.
    """
    def __init__(self, pipeline_model=None, **kwargs):
        GeneratorBase.__init__(self, pipeline_model)
        defaults = dict(synth_config=None,
                        n_beneficiaries=None)
        self._lm.update(kwargs, override=True)
        self._lm.update(defaults, override=False)

    def cohort_config(self):
        if self.synth_config:
            config = load_cohort_config(self.synth_config)
            if self.n_beneficiaries:
                config = CohortConfig(**dict(config.__dict__, archetypes=tuple(
                    (a, c) for (a, _), c in zip(config.archetypes, largest_remainder(
                        int(self.n_beneficiaries), [c for _, c in config.archetypes])))))
        else:
            n = self.n_beneficiaries or sum(parameter_data.reference_bucket_counts.values())
            config = default_bucket_archetypes(int(n))
        if self.seed is not None:
            config = config.with_seed(self.seed)
        return config

    def generate(self, config):
        return generate_cohort(config, jobs=int(self.jobs or 1))


__all__ = ['CohortGenerator', 'generate_cohort', 'generate_beneficiary',
           'default_bucket_archetypes', 'reference_archetypes',
           'attempt_day_schedule', 'beneficiary_id']
