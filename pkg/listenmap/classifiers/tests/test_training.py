import os
import shutil
import tempfile
import unittest

import numpy as np

from listenmap.classifiers import (ModelArtifact, ModelKind, RandomClassifier,
                                   TrainConfig, get_classifier, score)
from listenmap.featurizers import Dataset, StandardizationStats, WindowSpec
from listenmap.functions import substream
from listenmap.records import DataError


def separable(n=200, seed=0):
    rng = substream(seed, 'separable')
    X = rng.normal(size=(n, 4))
    s = X[:, 0] + 0.5 * X[:, 1]
    X, s = X[np.abs(s) > 0.2], s[np.abs(s) > 0.2]
    return X, (s > 0).astype(int)


def xor(n=400, seed=0):
    rng = substream(seed, 'xor')
    X = rng.uniform(-1, 1, size=(n, 2))
    keep = np.abs(X).min(axis=1) > 0.1
    X = X[keep]
    y = ((X[:, 0] > 0) != (X[:, 1] > 0)).astype(int)
    return X, y


class TrainConfigTest(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(ValueError):
            TrainConfig(epochs=-1)
        with self.assertRaises(ValueError):
            TrainConfig(learning_rate=0.0)
        with self.assertRaises(ValueError):
            TrainConfig(early_stop_patience=0)
        self.assertEqual(TrainConfig(seed=3).to_dict()['seed'], 3)


class TrainingTest(unittest.TestCase):
    def test_logistic_regression_separable(self):
        X, y = separable()
        config = TrainConfig(seed=1, epochs=200, batch_size=32, learning_rate=0.05)
        classifier = get_classifier('logistic_regression', config)
        artifact = classifier.fit(X, y)
        predictions = (classifier.score(artifact, X) >= 0.5).astype(int)
        self.assertEqual((predictions == y).mean(), 1.0)
        self.assertLess(artifact.history[-1], artifact.history[0])

    def test_feedforward_xor(self):
        X, y = xor()
        config = TrainConfig(seed=2, epochs=300, batch_size=32, learning_rate=0.01,
                             hidden_units=16, n_hidden_layers=2)
        classifier = get_classifier(ModelKind.FeedforwardNN, config)
        artifact = classifier.fit(X, y)
        accuracy = ((classifier.score(artifact, X) >= 0.5).astype(int) == y).mean()
        self.assertGreaterEqual(accuracy, 0.95)

    def test_lstm_remembers_first_week(self):
        rng = substream(3, 'sequence')
        X = rng.normal(size=(300, 6, 2))
        X = X[np.abs(X[:, 0, 0]) > 0.1]
        y = (X[:, 0, 0] > 0).astype(int)
        config = TrainConfig(seed=3, epochs=150, batch_size=32, learning_rate=0.01,
                             lstm_units=8, hidden_units=8, n_hidden_layers=1)
        classifier = get_classifier('lstm', config)
        artifact = classifier.fit(X, y)
        accuracy = ((classifier.score(artifact, X) >= 0.5).astype(int) == y).mean()
        self.assertGreaterEqual(accuracy, 0.9)
        with self.assertRaises(DataError):
            classifier.score(artifact, X.reshape(len(X), -1))

    def test_zero_epochs_keeps_initialization(self):
        X, y = separable(20)
        config = TrainConfig(seed=4, epochs=0, hidden_units=4, n_hidden_layers=1)
        classifier = get_classifier('feedforward_nn', config)
        artifact = classifier.fit(X, y)
        init = classifier.init_params(substream(config.seed, 'init'))
        for name in init:
            self.assertTrue(np.array_equal(artifact.params[name], init[name]))
        self.assertEqual(artifact.history, [])

    def test_same_seed_same_weights(self):
        X, y = separable(60)
        config = TrainConfig(seed=5, epochs=5, batch_size=16, hidden_units=4)
        a = get_classifier('feedforward_nn', config).fit(X, y)
        b = get_classifier('feedforward_nn', config).fit(X, y)
        self.assertTrue(np.array_equal(a.weights, b.weights))

    def test_duplicated_row_gets_duplicated_score(self):
        X, y = separable(30)
        artifact = get_classifier('logistic_regression', TrainConfig(epochs=3)).fit(X, y)
        scores = score(artifact, np.vstack([X, X[:1]]))
        self.assertEqual(scores[0], scores[-1])
        self.assertTrue(np.all((scores > 0) & (scores < 1)))

    def test_early_stopping_keeps_best(self):
        X, y = separable(100)
        config = TrainConfig(seed=6, epochs=40, batch_size=16, learning_rate=0.05,
                             early_stop_patience=2, validation_fraction=0.2)
        artifact = get_classifier('logistic_regression', config).fit(X, y)
        self.assertLessEqual(len(artifact.history), 40)

    def test_bad_inputs(self):
        classifier = get_classifier('logistic_regression', TrainConfig(epochs=1))
        with self.assertRaises(DataError):
            classifier.fit(np.array([[np.nan, 1.0]]), [1])
        with self.assertRaises(DataError):
            classifier.fit(np.ones((2, 2)), [0, 2])
        with self.assertRaises(DataError):
            classifier.fit(np.ones((2, 2)), [0])
        with self.assertRaises(DataError):
            get_classifier('lstm').fit(np.ones((2, 2)), [0, 1])


class RandomClassifierTest(unittest.TestCase):
    def test_deterministic_and_uniform(self):
        X = np.zeros((5000, 3))
        artifact = RandomClassifier(TrainConfig(seed=9)).fit(X, np.zeros(5000))
        a = score(artifact, X)
        b = score(artifact, X)
        self.assertTrue(np.array_equal(a, b))
        self.assertAlmostEqual(float(a.mean()), 0.5, delta=0.02)
        self.assertEqual(artifact.weights.size, 0)
        other = RandomClassifier(TrainConfig(seed=10)).fit(X, np.zeros(5000))
        self.assertFalse(np.array_equal(a, score(other, X)))


class ArtifactTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def test_save_load_scores_identical(self):
        rng = substream(7, 'artifact')
        X = rng.normal(size=(30, 3, 2))
        y = (X[:, 0, 0] > 0).astype(int)
        stats = StandardizationStats(np.zeros(2), np.ones(2))
        for kind in ModelKind:
            config = TrainConfig(seed=7, epochs=2, batch_size=8, hidden_units=4,
                                 n_hidden_layers=1, lstm_units=4)
            artifact = get_classifier(kind, config).fit(X, y, 'low_pickup',
                                                        ('duration', 'attempt'), stats)
            prefix = os.path.join(self.tmp, kind.value)
            artifact.save(prefix)
            loaded = ModelArtifact.load(prefix)
            self.assertEqual(loaded.kind, kind)
            self.assertEqual(loaded.train_config, config)
            self.assertEqual(loaded.shapes, artifact.shapes)
            self.assertTrue(np.array_equal(loaded.stats.mean, stats.mean))
            self.assertTrue(np.array_equal(score(loaded, X), score(artifact, X)))
            self.assertEqual(os.path.getsize(prefix + '.bin'), 8 * artifact.weights.size)

    def test_feature_set_must_match(self):
        spec = WindowSpec(feature_set=('duration', 'attempt'))
        rng = substream(8, 'feature_set')
        X = rng.normal(size=(20, spec.n_features_weeks, spec.n_week_features))
        y = np.arange(20) % 2
        dataset = Dataset(tuple('B%02d' % i for i in range(20)), np.ones(20, dtype=int),
                          X, y, 1 - y, spec)
        config = TrainConfig(seed=8, epochs=2, hidden_units=4, n_hidden_layers=1)
        artifact = get_classifier('feedforward_nn', config).fit(
            dataset.features(), y, 'low_pickup', spec.feature_set)
        self.assertTrue(np.array_equal(score(artifact, dataset), score(artifact, X)))
        with self.assertRaises(DataError):
            score(artifact, X, feature_set=('duration', 'status'))
        status_spec = WindowSpec(feature_set=('duration', 'status'))
        with self.assertRaises(DataError):
            score(artifact, Dataset(dataset.beneficiary_ids, dataset.start_weeks, X, y,
                                    1 - y, status_spec))

    def test_truncated_weights(self):
        X, y = separable(10)
        artifact = get_classifier('logistic_regression', TrainConfig(epochs=1)).fit(X, y)
        prefix = os.path.join(self.tmp, 'logreg')
        artifact.save(prefix)
        with open(prefix + '.bin', 'r+b') as f:
            f.truncate(8)
        with self.assertRaises(DataError):
            ModelArtifact.load(prefix)

    def tearDown(self):
        shutil.rmtree(self.tmp)


if __name__ == '__main__':
    unittest.main()
