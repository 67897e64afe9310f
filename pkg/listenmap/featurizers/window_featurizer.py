import io
import os

from listenmap.data import parameter_data
from listenmap.records import DataError
from .featurizer_base import *


class WindowFeaturizer(FeaturizerBase):
    """Rolling-window datasets for every configured feature set.

    One beneficiary split is shared by all feature sets. Training windows
    set the standardization statistics, which are then applied to the test
    windows. Each feature set is written as <name>_train.csv,
    <name>_test.csv and a <name>.json sidecar in the datasets directory.
    """
    def __init__(self, pipeline_model=None, **kwargs):
        FeaturizerBase.__init__(self, pipeline_model)
        defaults = dict(n_features_weeks=6,
                        n_offset_weeks=1,
                        stride_weeks=1,
                        train_fraction=0.8,
                        feature_sets=[list(fs) for fs in parameter_data.default_feature_sets])
        self._lm.update(kwargs, override=True)
        self._lm.update(defaults, override=False)
        self._log_strings = {
            'windows_success': '${name}: ${n_train} train and ${n_test} test windows, '
                               'low_pickup prevalence ${prevalence}',
            'windows_warning': '${name}: passthrough (constant) feature columns ${columns}',
            }

    def featurize(self, trajectories, spec):
        windows = []
        n_slots = self.grid.n_slots
        for bid in sorted(trajectories):
            windows.extend(make_windows(trajectories[bid], spec, n_slots))
        return windows

    def run(self, trajectories):
        if not trajectories:
            raise DataError('cohort is empty; nothing to featurize')
        train_ids, test_ids = self.split(trajectories)
        train_ids = set(train_ids)
        out = self.output_path('featurize')
        datasets = {}
        for feature_set in self.feature_sets:
            spec = self.window_spec(feature_set)
            name = feature_set_name(spec.feature_set)
            windows = self.featurize(trajectories, spec)
            train = Dataset.from_windows([w for w in windows if w.beneficiary_id in train_ids], spec)
            test = Dataset.from_windows([w for w in windows if w.beneficiary_id not in train_ids], spec)
            X_train, stats = standardize(train.X)
            X_test, _ = standardize(test.X, stats, training=False)
            train, test = train.with_features(X_train), test.with_features(X_test)
            if stats.passthrough.any():
                self.log('windows_warning', name=name,
                         columns=','.join(c for c, p in zip(spec.week_columns, stats.passthrough) if p))

            for part, dataset in [('train', train), ('test', test)]:
                with io.open(os.path.join(out, '%s_%s.csv' % (name, part)), 'w',
                             encoding='utf-8', newline='\n') as f:
                    write_dataset(dataset, f)
            with io.open(os.path.join(out, name + '.json'), 'w',
                         encoding='utf-8', newline='\n') as f:
                write_sidecar(f, spec, self.split_spec, stats, len(train), len(test))
            prevalence = (float(train.y_low_pickup.mean()) if len(train) else float('nan'))
            self.log('windows_success', name=name, n_train=len(train), n_test=len(test),
                     prevalence='%.3f' % prevalence, priority=1)
            datasets[name] = (train, test)
        return datasets

    def load_all(self):
        """Datasets materialized by an earlier run, keyed by feature set name,
        or None if any configured feature set is missing"""
        out = self.output_path('featurize')
        datasets = {}
        for feature_set in self.feature_sets:
            name = feature_set_name(feature_set)
            sidecar = os.path.join(out, name + '.json')
            if not os.path.exists(sidecar):
                return None
            with io.open(sidecar, 'r', encoding='utf-8') as f:
                spec, _, _ = read_sidecar(f)
            if spec != self.window_spec(feature_set):
                return None
            parts = []
            for part in ['train', 'test']:
                with io.open(os.path.join(out, '%s_%s.csv' % (name, part)), 'r',
                             encoding='utf-8', newline='') as f:
                    parts.append(read_dataset(f, spec))
            datasets[name] = tuple(parts)
        return datasets


__all__ = ['WindowFeaturizer']
