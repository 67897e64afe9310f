import json
from dataclasses import dataclass, field
from typing import Tuple

import listenmap
from listenmap import PipelineModelWrapper
from listenmap.data import parameter_data
from listenmap.functions import round_half_up, substream
from listenmap.records import DataError

np = listenmap.np
pd = listenmap.pd

#Standard deviations below this are treated as constant columns
min_feature_std = 1e-12


def canonical_feature_set(feature_set):
    "Feature groups in canonical order; unknown or empty sets are rejected"
    groups = set(feature_set)
    unknown = groups - set(parameter_data.feature_group_order)
    if unknown:
        raise ValueError('unknown feature groups %s (choose from %s)'
                         % (sorted(unknown), parameter_data.feature_group_order))
    if not groups:
        raise ValueError('feature_set must not be empty')
    return tuple(g for g in parameter_data.feature_group_order if g in groups)


def feature_set_name(feature_set):
    "File-name form of a feature set, e.g. duration+attempt+status"
    return '+'.join(canonical_feature_set(feature_set))


def feature_set_label(feature_set):
    "Report form of a feature set, e.g. duration, attempt, status"
    return ', '.join(canonical_feature_set(feature_set))


@dataclass(frozen=True)
class WindowSpec:
    """Rolling window layout: n_features_weeks of features, then
    n_offset_weeks that contribute nothing, then label_window_weeks that
    define the labels."""
    n_features_weeks: int = 6
    n_offset_weeks: int = 1
    label_window_weeks: int = parameter_data.label_window_weeks
    stride_weeks: int = 1
    feature_set: Tuple[str, ...] = ('duration', 'attempt', 'status')

    def __post_init__(self):
        if self.n_features_weeks < 1:
            raise ValueError('n_features_weeks must be >= 1')
        if self.n_offset_weeks < 0:
            raise ValueError('n_offset_weeks must be >= 0')
        if self.stride_weeks < 1:
            raise ValueError('stride_weeks must be >= 1')
        if self.label_window_weeks != parameter_data.label_window_weeks:
            raise ValueError('label_window_weeks is fixed at %d'
                             % parameter_data.label_window_weeks)
        object.__setattr__(self, 'feature_set', canonical_feature_set(self.feature_set))

    @property
    def window_length(self):
        return self.n_features_weeks + self.n_offset_weeks + self.label_window_weeks

    @property
    def week_columns(self):
        "Names of the F per-week feature columns"
        return [c for g in self.feature_set for c in parameter_data.feature_group_columns[g]]

    @property
    def n_week_features(self):
        return len(self.week_columns)

    @property
    def flat_columns(self):
        "Descriptive names of the flattened, week-major columns"
        return ['w%d_%s' % (i, c) for i in range(self.n_features_weeks)
                for c in self.week_columns]

    def n_windows(self, n_weeks):
        return max(0, (n_weeks - self.window_length) // self.stride_weeks + 1)

    def to_dict(self):
        return {'n_features_weeks': self.n_features_weeks,
                'n_offset_weeks': self.n_offset_weeks,
                'label_window_weeks': self.label_window_weeks,
                'stride_weeks': self.stride_weeks,
                'feature_set': list(self.feature_set)}


@dataclass(frozen=True, eq=False)
class FeatureWindow:
    beneficiary_id: str
    start_week: int
    feature_matrix: np.ndarray
    label_low_pickup: bool
    label_low_engagement: bool

    def label(self, target):
        if target == 'low_pickup':
            return self.label_low_pickup
        elif target == 'low_engagement':
            return self.label_low_engagement
        raise ValueError('unknown target ' + repr(target))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError('train_fraction must lie strictly between 0 and 1')

    def to_dict(self):
        return {'train_fraction': self.train_fraction, 'seed': self.seed}


@dataclass(frozen=True, eq=False)
class StandardizationStats:
    """Per feature column mean and std, pooled over windows and feature
    weeks. Columns flagged in passthrough had std < 1e-12 and are left as
    they are."""
    mean: np.ndarray
    std: np.ndarray
    passthrough: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.passthrough is None:
            object.__setattr__(self, 'passthrough', self.std < min_feature_std)

    def to_dict(self):
        return {'mean': [float(x) for x in self.mean],
                'std': [float(x) for x in self.std],
                'passthrough': [bool(x) for x in self.passthrough]}

    @classmethod
    def from_dict(cls, value):
        return cls(np.asarray(value['mean'], dtype=float),
                   np.asarray(value['std'], dtype=float),
                   np.asarray(value['passthrough'], dtype=bool))


def week_features(week, feature_set=('duration', 'attempt', 'status'),
                  n_slots=None):
    """
    Feature vector of one week for the given groups.

    Weeks without attempts are zero vectors. The date group adds the ISO
    week of year scaled to [0, 1] and the pickup slot scaled to [0, 1]
    (-1 when nothing was picked up inside the grid).
    """
    feature_set = canonical_feature_set(feature_set)
    if n_slots is None:
        n_slots = ((parameter_data.slot_end_hour - parameter_data.slot_start_hour)
                   // parameter_data.slot_hours)
    width = sum(len(parameter_data.feature_group_columns[g]) for g in feature_set)
    if not week.attempted:
        return [0.0] * width
    values = []
    for group in feature_set:
        if group == 'duration':
            values.append(float(week.total_duration_seconds))
        elif group == 'attempt':
            values.append(float(week.n_attempts))
        elif group == 'status':
            values.extend(float(c) for c in week.status_counts)
        elif group == 'date':
            values.append((week.week_of_year - 1) / 52.0 if week.week_of_year else 0.0)
            if week.pickup_slot is None or week.pickup_slot < 0:
                values.append(-1.0)
            else:
                values.append(week.pickup_slot / max(n_slots - 1, 1))
    return values


def _label_count(label_weeks, flag, window):
    label_weeks = list(label_weeks)
    if len(label_weeks) != window:
        raise DataError('label window needs exactly %d weeks, got %d'
                        % (window, len(label_weeks)))
    return sum(1 for w in label_weeks if getattr(w, flag))


def label_low_pickup(label_weeks, min_weeks=parameter_data.label_min_weeks,
                     window=parameter_data.label_window_weeks):
    "True iff fewer than min_weeks of the label weeks were picked up"
    return _label_count(label_weeks, 'picked', window) < min_weeks


def label_low_engagement(label_weeks, min_weeks=parameter_data.label_min_weeks,
                         window=parameter_data.label_window_weeks):
    "True iff fewer than min_weeks of the label weeks were engaged"
    return _label_count(label_weeks, 'engaged', window) < min_weeks


def make_windows(trajectory, spec=None, n_slots=None):
    """
    Rolling windows of one trajectory.

    Window j starts at week index j * stride_weeks; its first
    n_features_weeks give the features and its last label_window_weeks give
    both labels. A trajectory shorter than the window length gives none.

    :param trajectory: Contiguous weekly trajectory.
    :type trajectory: Trajectory

    :param spec: Window layout and feature groups.
    :type spec: WindowSpec, optional
    """
    if spec is None:
        spec = WindowSpec()
    weeks = trajectory.weeks
    nf = spec.n_features_weeks
    label_start = nf + spec.n_offset_weeks
    windows = []
    for j in range(spec.n_windows(len(weeks))):
        s = j * spec.stride_weeks
        features = np.array([week_features(w, spec.feature_set, n_slots)
                             for w in weeks[s:s + nf]], dtype=float)
        label_weeks = weeks[s + label_start:s + spec.window_length]
        windows.append(FeatureWindow(beneficiary_id=trajectory.beneficiary_id,
                                     start_week=weeks[s].message_index,
                                     feature_matrix=features,
                                     label_low_pickup=label_low_pickup(label_weeks),
                                     label_low_engagement=label_low_engagement(label_weeks)))
    return windows


def split_beneficiaries(ids, spec=None):
    """
    Seeded train/test split on beneficiaries.

    The sorted distinct ids are permuted by the split seed; the first
    floor(train_fraction * N + 0.5) go to train. Both sides are returned
    sorted.

    :param ids: Beneficiary ids.
    :type ids: iterable of str

    :param spec: Train fraction and seed.
    :type spec: SplitSpec, optional
    """
    if spec is None:
        spec = SplitSpec()
    ids = sorted(set(ids))
    n_train = round_half_up(spec.train_fraction * len(ids))
    if len(ids) < 2 or n_train < 1 or n_train > len(ids) - 1:
        raise DataError('cannot split %d beneficiaries with train_fraction %r into two '
                        'non-empty sets' % (len(ids), spec.train_fraction))
    order = substream(spec.seed, 'split').permutation(len(ids))
    train = sorted(ids[i] for i in order[:n_train])
    test = sorted(ids[i] for i in order[n_train:])
    return train, test


def stack_windows(windows, flatten=True):
    """
    (X, y_pickup, y_engagement) arrays of a window sequence. X has shape
    (n, n_features_weeks * F) flattened week-major, or (n, n_features_weeks, F).
    """
    windows = list(windows)
    if not windows:
        return np.zeros((0, 0)), np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    X = np.stack([w.feature_matrix for w in windows])
    if flatten:
        X = X.reshape(len(windows), -1)
    y_pickup = np.array([int(w.label_low_pickup) for w in windows])
    y_engagement = np.array([int(w.label_low_engagement) for w in windows])
    return X, y_pickup, y_engagement


def standardize(X, stats=None, training=None):
    """
    Z-score features per column with training statistics.

    X is (n, weeks, F) or (n, F); statistics are per feature column F,
    pooled over windows and weeks. Without stats the call is in training
    mode and computes them from X; in test mode (training=False) stats are
    required. Columns with std < 1e-12 pass through unscaled.

    :param X: Feature array.
    :type X: numpy.ndarray

    :param stats: Training statistics.
    :type stats: StandardizationStats, optional

    :param training: Defaults to True when stats is None.
    :type training: bool, optional

    Returns (X_standardized, stats).
    """
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise DataError('features contain NaN or Inf')
    if training is None:
        training = stats is None
    if stats is None:
        if not training:
            raise DataError('standardization statistics are required outside training')
        if X.shape[0] == 0:
            raise DataError('cannot compute standardization statistics from zero windows')
        pooled = X.reshape(-1, X.shape[-1])
        stats = StandardizationStats(pooled.mean(axis=0), pooled.std(axis=0))
    if X.shape[-1] != len(stats.mean):
        raise DataError('expected %d feature columns, got %d' % (len(stats.mean), X.shape[-1]))
    scale = np.where(stats.passthrough, 1.0, stats.std)
    shift = np.where(stats.passthrough, 0.0, stats.mean)
    return (X - shift) / scale, stats


@dataclass(frozen=True, eq=False)
class Dataset:
    """Materialized windows of one split: X has shape (n, weeks, F)."""
    beneficiary_ids: Tuple[str, ...]
    start_weeks: np.ndarray
    X: np.ndarray
    y_low_pickup: np.ndarray
    y_low_engagement: np.ndarray
    spec: WindowSpec

    def __len__(self):
        return len(self.beneficiary_ids)

    def features(self, flatten=True):
        if flatten:
            return self.X.reshape(len(self), -1)
        return self.X

    def labels(self, target):
        if target == 'low_pickup':
            return self.y_low_pickup
        elif target == 'low_engagement':
            return self.y_low_engagement
        raise ValueError('unknown target ' + repr(target))

    @classmethod
    def from_windows(cls, windows, spec):
        windows = list(windows)
        X, y_pickup, y_engagement = stack_windows(windows, flatten=False)
        if not windows:
            X = np.zeros((0, spec.n_features_weeks, spec.n_week_features))
        return cls(tuple(w.beneficiary_id for w in windows),
                   np.array([w.start_week for w in windows], dtype=int),
                   X, y_pickup, y_engagement, spec)

    def with_features(self, X):
        return Dataset(self.beneficiary_ids, self.start_weeks, X,
                       self.y_low_pickup, self.y_low_engagement, self.spec)


def write_dataset(dataset, stream):
    "CSV of one split: beneficiary_id,start_week,f_0..f_{K-1},label_low_pickup,label_low_engagement"
    X = dataset.features(flatten=True)
    k = dataset.spec.n_features_weeks * dataset.spec.n_week_features
    frame = pd.DataFrame(X.reshape(len(dataset), k),
                         columns=['f_%d' % i for i in range(k)])
    frame.insert(0, 'start_week', dataset.start_weeks)
    frame.insert(0, 'beneficiary_id', list(dataset.beneficiary_ids))
    frame['label_low_pickup'] = dataset.y_low_pickup.astype(int)
    frame['label_low_engagement'] = dataset.y_low_engagement.astype(int)
    frame.to_csv(stream, index=False, lineterminator='\n', float_format='%.17g')


def read_dataset(stream, spec):
    "Inverse of write_dataset for a known WindowSpec"
    frame = pd.read_csv(stream, dtype={'beneficiary_id': str}, keep_default_na=False)
    k = spec.n_features_weeks * spec.n_week_features
    columns = ['f_%d' % i for i in range(k)]
    missing = [c for c in ['beneficiary_id', 'start_week'] + columns +
               ['label_low_pickup', 'label_low_engagement'] if c not in frame.columns]
    if missing:
        raise DataError('dataset is missing columns: ' + ','.join(missing))
    X = frame[columns].to_numpy(dtype=float).reshape(len(frame), spec.n_features_weeks,
                                                     spec.n_week_features)
    return Dataset(tuple(frame['beneficiary_id']),
                   frame['start_week'].to_numpy(dtype=int), X,
                   frame['label_low_pickup'].to_numpy(dtype=int),
                   frame['label_low_engagement'].to_numpy(dtype=int), spec)


def write_sidecar(stream, spec, split, stats, n_train, n_test):
    sidecar = {'window_spec': spec.to_dict(),
               'split_spec': split.to_dict(),
               'standardization': stats.to_dict(),
               'feature_columns': spec.flat_columns,
               'week_columns': spec.week_columns,
               'n_train': n_train,
               'n_test': n_test}
    stream.write(json.dumps(sidecar, indent=2, sort_keys=True) + '\n')


def read_sidecar(stream):
    sidecar = json.load(stream)
    w = sidecar['window_spec']
    spec = WindowSpec(w['n_features_weeks'], w['n_offset_weeks'], w['label_window_weeks'],
                      w['stride_weeks'], tuple(w['feature_set']))
    split = SplitSpec(**sidecar['split_spec'])
    stats = StandardizationStats.from_dict(sidecar['standardization'])
    return spec, split, stats


class FeaturizerBase(PipelineModelWrapper):
    def __init__(self, pipeline_model=None):
        """Class for turning weekly trajectories into supervised datasets.
        This class acts as a base class to be inherited by other featurizer
        classes, but is not functional on its own.

        A functional derived featurizer class must also contain the methods:

        featurize(trajectories, spec): return the FeatureWindows of a cohort.
        """
        if pipeline_model is None:
            pipeline_model = listenmap.ListenershipModel()
        self._lm = pipeline_model
        self._log_strings = {
            'split_success': '${n_train} train and ${n_test} test beneficiaries',
            }

    def split(self, trajectories):
        train, test = split_beneficiaries(trajectories.keys(), self.split_spec)
        self.log('split_success', n_train=len(train), n_test=len(test), priority=1)
        return train, test


__all__ = ['WindowSpec', 'FeatureWindow', 'SplitSpec', 'StandardizationStats',
           'Dataset', 'FeaturizerBase', 'make_windows', 'week_features',
           'label_low_pickup', 'label_low_engagement', 'split_beneficiaries',
           'stack_windows', 'standardize', 'write_dataset', 'read_dataset',
           'write_sidecar', 'read_sidecar', 'canonical_feature_set',
           'feature_set_name', 'feature_set_label', 'min_feature_std']
