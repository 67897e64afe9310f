import unittest

import numpy as np

from listenmap.evaluate.metrics import (auc, balanced_accuracy, precision_at_k,
                                        roc_curve_points, top_k_count)
from listenmap.functions import substream
from listenmap.records import DataError


def pairwise_auc(labels, scores):
    "Fraction of positive/negative pairs ranked correctly, ties as one half"
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


class BalancedAccuracyTest(unittest.TestCase):
    def test_known_value(self):
        self.assertEqual(balanced_accuracy([1, 1, 0, 0], [1, 0, 0, 0]), 0.75)

    def test_threshold_is_inclusive(self):
        self.assertEqual(balanced_accuracy([1, 0], [0.5, 0.49]), 1.0)
        self.assertEqual(balanced_accuracy([1, 0], [0.5, 0.49], threshold=0.6), 0.5)

    def test_single_class(self):
        with self.assertRaises(DataError):
            balanced_accuracy([1, 1, 1], [0.2, 0.4, 0.9])

    def test_bad_input(self):
        with self.assertRaises(DataError):
            balanced_accuracy([1, 0], [0.5])
        with self.assertRaises(DataError):
            balanced_accuracy([], [])
        with self.assertRaises(DataError):
            balanced_accuracy([1, 0], [np.nan, 0.3])


class PrecisionAtKTest(unittest.TestCase):
    def test_top_k_count(self):
        self.assertEqual(top_k_count(100, 5.0), 5)
        self.assertEqual(top_k_count(101, 5.0), 6)
        self.assertEqual(top_k_count(3, 5.0), 1)
        self.assertEqual(top_k_count(20, 100.0), 20)
        with self.assertRaises(ValueError):
            top_k_count(10, 0.0)
        with self.assertRaises(ValueError):
            top_k_count(10, 120.0)

    def test_top_rows(self):
        labels = [0] * 95 + [1] * 5
        scores = np.linspace(0.0, 1.0, 100)
        self.assertEqual(precision_at_k(labels, scores), 1.0)
        self.assertEqual(precision_at_k(labels, scores[::-1]), 0.0)

    def test_ties_keep_input_order(self):
        labels = [1, 0, 0, 0] + [0] * 16
        scores = [0.5] * 20
        self.assertEqual(precision_at_k(labels, scores), 1.0)
        self.assertEqual(precision_at_k(labels[::-1], scores), 0.0)

    def test_single_class_is_defined(self):
        self.assertEqual(precision_at_k([1, 1, 1], [0.1, 0.2, 0.3]), 1.0)


class AUCTest(unittest.TestCase):
    def test_tied_scores(self):
        self.assertEqual(auc([1, 0], [0.3, 0.3]), 0.5)

    def test_perfect_and_inverted(self):
        self.assertEqual(auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]), 1.0)
        self.assertEqual(auc([1, 1, 0, 0], [0.1, 0.2, 0.8, 0.9]), 0.0)

    def test_matches_pairwise_count(self):
        rng = substream(0, 'auc_test')
        labels = (rng.random(200) < 0.3).astype(int)
        scores = np.round(rng.random(200), 1)
        self.assertAlmostEqual(auc(labels, scores), pairwise_auc(labels, scores))

    def test_monotone_transform(self):
        rng = substream(1, 'auc_test')
        labels = (rng.random(100) < 0.5).astype(int)
        scores = rng.random(100)
        self.assertAlmostEqual(auc(labels, scores), auc(labels, np.log(scores + 1) ** 3))

    def test_single_class(self):
        with self.assertRaises(DataError):
            auc([0, 0], [0.1, 0.2])


class ROCTest(unittest.TestCase):
    def test_points(self):
        fpr, tpr, thresholds = roc_curve_points([1, 0, 1, 0], [0.9, 0.8, 0.8, 0.1])
        self.assertEqual(list(fpr), [0.0, 0.0, 0.5, 1.0])
        self.assertEqual(list(tpr), [0.0, 0.5, 1.0, 1.0])
        self.assertEqual(thresholds[0], np.inf)
        self.assertEqual(list(thresholds[1:]), [0.9, 0.8, 0.1])

    def test_area_matches_auc(self):
        rng = substream(2, 'roc_test')
        labels = (rng.random(150) < 0.4).astype(int)
        scores = np.round(rng.random(150), 2)
        fpr, tpr, _ = roc_curve_points(labels, scores)
        area = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
        self.assertAlmostEqual(area, auc(labels, scores))


if __name__ == '__main__':
    unittest.main()
