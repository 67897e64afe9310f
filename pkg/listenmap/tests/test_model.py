import json
import os
import shutil
import tempfile
import unittest

import numpy as np

import listenmap
from listenmap import ListenershipModel, functions


class ListenershipModelTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def write_config(self, value):
        path = os.path.join(self.tmp, 'pipeline.json')
        with open(path, 'w') as f:
            json.dump(value, f)
        return path

    def test_defaults(self):
        model = ListenershipModel()
        self.assertEqual(model.engagement_threshold, 30.0)
        self.assertEqual(model.grid.n_slots, 7)
        self.assertEqual(model.global_seed, 0)
        self.assertEqual(model.window_spec(['status', 'duration']).feature_set,
                         ('duration', 'status'))

    def test_sections_are_flattened(self):
        path = self.write_config({'seed': 11,
                                  'paths': {'synth_config': 'cohort.json'},
                                  'features': {'train_fraction': 0.75},
                                  'train': {'epochs': 3, 'colour': 'blue'}})
        with open(os.path.join(self.tmp, 'cohort.json'), 'w') as f:
            f.write('{}')
        model = listenmap.load(path, epochs=7, verbose=0)
        self.assertEqual(model.global_seed, 11)
        self.assertEqual(model.train_fraction, 0.75)
        self.assertEqual(model.epochs, 7)
        self.assertEqual(model.synth_config, os.path.join(self.tmp, 'cohort.json'))
        self.assertTrue(any('colour' in line for line in model._log_lines))

    def test_bad_config(self):
        path = os.path.join(self.tmp, 'broken.json')
        with open(path, 'w') as f:
            f.write('{"seed": ')
        with self.assertRaises(ValueError):
            ListenershipModel(setup_file=path)

    def test_train_config_overrides_and_seeds(self):
        model = ListenershipModel(seed=5, learning_rate=0.002,
                                  model_overrides={'lstm': {'learning_rate': 0.01}})
        self.assertEqual(model.train_config('lstm').learning_rate, 0.01)
        self.assertEqual(model.train_config('feedforward_nn').learning_rate, 0.002)
        self.assertNotEqual(model.train_config('lstm').seed,
                            model.train_config('feedforward_nn').seed)
        self.assertEqual(model.train_config('lstm').seed,
                         ListenershipModel(seed=5).train_config('lstm').seed)
        self.assertNotEqual(model.split_spec.seed, ListenershipModel(seed=6).split_spec.seed)

    def test_shipped_pipeline_config(self):
        path = os.path.join(os.path.dirname(__file__), '..', '..', 'configs', 'pipeline.json')
        if not os.path.exists(path):
            self.skipTest('configs directory not available')
        model = ListenershipModel(setup_file=path, verbose=0)
        self.assertTrue(os.path.exists(model.synth_config))
        self.assertEqual(model.train_config('logistic_regression').learning_rate, 0.01)
        self.assertEqual(len(model.feature_sets), 3)
        self.assertEqual(model.bucket_thresholds.long_trajectory_min_weeks, 51)

    def test_shipped_reference_run_config(self):
        path = os.path.join(os.path.dirname(__file__), '..', '..', 'configs',
                            'reference_run.json')
        if not os.path.exists(path):
            self.skipTest('configs directory not available')
        model = ListenershipModel(setup_file=path, output_dir=self.tmp, verbose=0)
        self.assertFalse(any('unknown configuration key' in line for line in model._log_lines))
        self.assertEqual(model.generator.cohort_config().n_beneficiaries, 10000)
        self.assertEqual(int(model.jobs), 4)
        lstm = model.train_config('lstm')
        self.assertEqual((lstm.epochs, lstm.lstm_units, lstm.early_stop_patience), (10, 16, 3))
        self.assertEqual(model.train_config('feedforward_nn').hidden_units, 32)
        self.assertEqual(len(model.feature_sets), 3)

    def test_output_path(self):
        model = ListenershipModel(output_dir=self.tmp)
        path = model.output_path('featurize')
        self.assertTrue(os.path.isdir(path))
        self.assertEqual(os.path.basename(path), 'datasets')

    def tearDown(self):
        shutil.rmtree(self.tmp)


class FunctionsTest(unittest.TestCase):
    def test_substreams_are_independent(self):
        a = functions.substream(1, 'train', 'lstm').random(5)
        b = functions.substream(1, 'train', 'lstm').random(5)
        c = functions.substream(1, 'train', 'random').random(5)
        self.assertTrue(np.array_equal(a, b))
        self.assertFalse(np.array_equal(a, c))

    def test_derive_seed(self):
        seed = functions.derive_seed(0, 'split')
        self.assertEqual(seed, functions.derive_seed(0, 'split'))
        self.assertTrue(0 <= seed < 2 ** 64)
        self.assertNotEqual(seed, functions.derive_seed(1, 'split'))

    def test_largest_remainder(self):
        self.assertEqual(functions.largest_remainder(10, [1, 1, 1]), [4, 3, 3])
        self.assertEqual(sum(functions.largest_remainder(100, [1212, 2651, 1421, 6087])), 100)
        with self.assertRaises(ValueError):
            functions.largest_remainder(5, [0, 0])

    def test_modal_index(self):
        self.assertEqual(functions.modal_index([3, 1, 3, 1]), 1)
        self.assertEqual(functions.modal_index([None, 2]), 2)
        self.assertIsNone(functions.modal_index([]))

    def test_round_half_up(self):
        self.assertEqual(functions.round_half_up(2.5), 3)
        self.assertEqual(functions.round_half_up(7.9999), 8)
        self.assertEqual(functions.round_half_up(0.4), 0)

    def test_config_hash(self):
        self.assertEqual(functions.config_hash({'a': 1, 'b': [1, 2]}),
                         functions.config_hash({'b': [1, 2], 'a': 1}))
        self.assertEqual(len(functions.config_hash({})), 64)

    def test_sigmoid_stays_open(self):
        values = functions.sigmoid(np.array([-1000.0, 0.0, 1000.0]))
        self.assertTrue(np.all((values > 0) & (values < 1)))
        self.assertEqual(values[1], 0.5)


if __name__ == '__main__':
    unittest.main()
