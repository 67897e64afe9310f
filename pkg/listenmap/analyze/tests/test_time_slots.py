import shutil
import tempfile
import unittest

from listenmap import ListenershipModel
from listenmap.analyze.time_slots import (TimeSlotAnalysis, slot_pickup_rates,
                                          slot_table, weekday_pickups)
from listenmap.generators import default_bucket_archetypes, generate_cohort
from listenmap.parsers.cdr_parser import build_trajectories
from listenmap.records import DataError, Trajectory, WeeklySummary


def slot_week(index, attempts, pickups, bid='B1'):
    return WeeklySummary(bid, index, n_attempts=sum(attempts), picked=sum(pickups) > 0,
                         slot_attempt_counts=tuple(attempts),
                         slot_pickup_counts=tuple(pickups))


class SlotPickupRatesTest(unittest.TestCase):
    def test_single_slot(self):
        weeks = tuple(slot_week(i, (1, 0, 0, 0, 0, 0, 0, 0), (1, 0, 0, 0, 0, 0, 0, 0))
                      for i in range(1, 4))
        rates = slot_pickup_rates([Trajectory('B1', weeks)])
        self.assertEqual(rates.rates, (1.0,) + (None,) * 6)
        self.assertEqual(rates.attempts, (3, 0, 0, 0, 0, 0, 0))
        self.assertEqual(rates.total_attempts, 3)

    def test_outside_counted_separately(self):
        weeks = (slot_week(1, (2, 0, 0, 0, 0, 0, 0, 1), (1, 0, 0, 0, 0, 0, 0, 1)),)
        rates = slot_pickup_rates([Trajectory('B1', weeks)])
        self.assertEqual(rates.rates[0], 0.5)
        self.assertEqual((rates.outside_attempts, rates.outside_pickups), (1, 1))
        table = slot_table(rates)
        self.assertEqual(len(table), 8)
        self.assertEqual(list(table['slot'])[-1], 'OUTSIDE')
        self.assertEqual(list(table['rate'])[1], '')

    def test_no_attempts_in_grid(self):
        weeks = (slot_week(1, (0, 0, 0, 0, 0, 0, 0, 2), (0, 0, 0, 0, 0, 0, 0, 0)),)
        with self.assertRaises(DataError):
            slot_pickup_rates([Trajectory('B1', weeks)])

    def test_wrong_grid(self):
        weeks = (slot_week(1, (1, 0, 0), (0, 0, 0)),)
        with self.assertRaises(DataError):
            slot_pickup_rates([Trajectory('B1', weeks)])


class PlantedSlotShapeTest(unittest.TestCase):
    def setUp(self):
        config = default_bucket_archetypes(400, seed=2)
        self.trajectories = build_trajectories(generate_cohort(config))
        self.names = {}
        ordinal = 0
        for archetype, count in config.archetypes:
            for _ in range(count):
                self.names['B%05d' % (ordinal + 1)] = archetype.name
                ordinal += 1

    def test_morning_preference(self):
        rates = slot_pickup_rates(self.trajectories).rates
        self.assertEqual(max(range(7), key=lambda s: rates[s]), 0)

    def test_first_and_last_slot_for_low_pickup(self):
        members = [t for bid, t in self.trajectories.items() if self.names[bid] == 'LPLE']
        rates = slot_pickup_rates(members).rates
        middle = sum(rates[1:6]) / 5
        self.assertGreater(rates[0], middle)
        self.assertGreater(rates[6], middle)


class TimeSlotAnalysisTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.model = ListenershipModel(output_dir=self.tmp, verbose=0)

    def test_tables(self):
        trajectories = build_trajectories(generate_cohort(default_bucket_archetypes(60, seed=4)))
        tables = TimeSlotAnalysis(self.model).run(trajectories)
        self.assertEqual(len(tables['slots']), 8)
        self.assertEqual(len(tables['weekdays']), 7)
        self.assertAlmostEqual(tables['weekdays']['share'].sum(), 1.0)
        self.assertTrue(any(name.startswith('slots_') for name in tables))

    def test_weekday_pickups_empty(self):
        frame = weekday_pickups([Trajectory('B1', (WeeklySummary('B1', 1),))])
        self.assertEqual(frame['pickups'].sum(), 0)

    def tearDown(self):
        shutil.rmtree(self.tmp)


if __name__ == '__main__':
    unittest.main()
