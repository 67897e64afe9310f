import shutil
import tempfile
import unittest

import pandas as pd

from listenmap import ListenershipModel
from listenmap.analyze.buckets import (Bucket, BucketAnalysis, BucketThresholds,
                                       bucket_assign, bucket_profile,
                                       screen_extremes)
from listenmap.records import DataError, Trajectory, WeeklySummary


def week(index, picked=False, engaged=False, n_attempts=1, bid='B1', slot=None,
         ratio=1.0, duration=0.0):
    return WeeklySummary(bid, index, total_duration_seconds=duration,
                         n_attempts=n_attempts, picked=picked,
                         engaged=engaged, pickup_attempt=1 if picked else None,
                         pickup_attempt_day=1 if picked else None,
                         pickup_slot=slot if picked else None,
                         pickup_weekday=0 if picked else None,
                         technical_success_ratio=ratio)


def trajectory(pattern, bid='B1'):
    "pattern of 'e' (engaged), 'p' (picked only), '.' (attempted, missed)"
    return Trajectory(bid, tuple(week(i + 1, c in 'ep', c == 'e', bid=bid)
                                 for i, c in enumerate(pattern)))


class ScreenTest(unittest.TestCase):
    def test_engaged_week_counts(self):
        long = trajectory('e' * 55, 'L')
        mid = trajectory('e' * 35, 'M')
        never = trajectory('.' * 40, 'N')
        kept = screen_extremes([long, mid, never])
        self.assertEqual([t.beneficiary_id for t in kept], ['L', 'N'])
        kept = screen_extremes({'L': long, 'M': mid})
        self.assertEqual(list(kept), ['L'])

    def test_boundaries(self):
        self.assertEqual(len(screen_extremes([trajectory('e' * 51)])), 1)
        self.assertEqual(len(screen_extremes([trajectory('e' * 50)])), 0)
        self.assertEqual(len(screen_extremes([trajectory('e' * 19)])), 1)
        self.assertEqual(len(screen_extremes([trajectory('e' * 20)])), 0)


class BucketAssignTest(unittest.TestCase):
    def test_quadrants(self):
        self.assertIs(bucket_assign(trajectory('pppp')), Bucket.HPLE)
        self.assertIs(bucket_assign(trajectory('eeee')), Bucket.HPHE)
        self.assertIs(bucket_assign(trajectory('e...')), Bucket.LPHE)
        self.assertIs(bucket_assign(trajectory('....')), Bucket.LPLE)

    def test_ties_are_high(self):
        self.assertIs(bucket_assign(trajectory('ep..')), Bucket.HPHE)

    def test_engagement_basis(self):
        attempted = BucketThresholds(engagement_rate_basis='attempted')
        self.assertIs(bucket_assign(trajectory('e...'), attempted), Bucket.LPLE)
        self.assertIs(bucket_assign(trajectory('eep.'), attempted), Bucket.HPHE)

    def test_no_attempts(self):
        empty = Trajectory('B1', (WeeklySummary('B1', 1),))
        with self.assertRaises(DataError):
            bucket_assign(empty)

    def test_thresholds_validate(self):
        with self.assertRaises(ValueError):
            BucketThresholds(pickup_rate_cut=1.5)
        with self.assertRaises(ValueError):
            BucketThresholds(long_trajectory_min_weeks=10, short_trajectory_max_weeks=19)


class BucketProfileTest(unittest.TestCase):
    def test_single_member_modal_slot(self):
        member = Trajectory('B1', tuple(week(i, True, slot=3) for i in range(1, 6)))
        profile = bucket_profile([member])
        self.assertEqual(list(profile['modal_pickup_slot']), [3] * 5)
        self.assertEqual(list(profile['pickup_rate']), [1.0] * 5)

    def test_union_by_count_weighting(self):
        a = Trajectory('A', (week(1, True, bid='A', ratio=1.0, duration=40.0),
                             week(2, False, bid='A', ratio=0.5)))
        b = Trajectory('B', (week(1, False, bid='B', ratio=0.0),
                             week(2, True, bid='B', ratio=0.25, duration=10.0)))
        pa, pb, union = bucket_profile([a]), bucket_profile([b]), bucket_profile([a, b])
        for row in range(2):
            n = pa['n_attempted'][row] + pb['n_attempted'][row]
            self.assertEqual(union['n_attempted'][row], n)
            weighted = (pa['mean_technical_success_ratio'][row] * pa['n_attempted'][row] +
                        pb['mean_technical_success_ratio'][row] * pb['n_attempted'][row]) / n
            self.assertAlmostEqual(union['mean_technical_success_ratio'][row], weighted)
            weighted = (pa['pickup_rate'][row] * pa['n_attempted'][row] +
                        pb['pickup_rate'][row] * pb['n_attempted'][row]) / n
            self.assertAlmostEqual(union['pickup_rate'][row], weighted)

    def test_modal_tie_prefers_smaller_slot(self):
        a = Trajectory('A', (week(1, True, bid='A', slot=4),))
        b = Trajectory('B', (week(1, True, bid='B', slot=2),))
        self.assertEqual(bucket_profile([a, b])['modal_pickup_slot'][0], 2)

    def test_empty_bucket(self):
        with self.assertRaises(DataError):
            bucket_profile([])

    def test_no_pickups_leaves_mode_empty(self):
        profile = bucket_profile([trajectory('..')])
        self.assertTrue(pd.isna(profile['modal_pickup_slot'][0]))
        self.assertTrue(pd.isna(profile['mean_duration_seconds'][0]))


class BucketAnalysisTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.model = ListenershipModel(output_dir=self.tmp, verbose=0)
        self.cohort = {'A': trajectory('eeee', 'A'), 'B': trajectory('....', 'B'),
                       'C': Trajectory('C', (WeeklySummary('C', 1),))}

    def test_assign_skips_unattempted(self):
        assignments = BucketAnalysis(self.model).assign(self.cohort)
        self.assertEqual(sorted(assignments), ['A', 'B'])
        self.assertIs(assignments['A'][0], Bucket.HPHE)

    def test_tables(self):
        tables = BucketAnalysis(self.model).run(self.cohort)
        counts = tables['bucket_counts'].set_index('bucket')['n_beneficiaries']
        self.assertEqual(counts['HPHE'], 1)
        self.assertEqual(counts['LPLE'], 1)
        self.assertIn('bucket_profile_HPHE', tables)
        self.assertNotIn('bucket_profile_HPLE', tables)

    def tearDown(self):
        shutil.rmtree(self.tmp)


if __name__ == '__main__':
    unittest.main()
