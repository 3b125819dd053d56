from unittest import TestCase

import numpy as np

from mdap.model import CostTensor
from mdap.oracle import RefreshableCosts, FixedCosts


class TestOracleQuery(TestCase):
    def setUp(self):
        self.rc = RefreshableCosts(4, seed=11)

    def test_exposed_returned(self):
        self.rc.set_state(5, 'exposed', 0.3)
        self.assertEqual(self.rc.oracle_query(5, 0.5), 0.3)

    def test_hidden_above(self):
        self.rc.set_state(5, 'hidden', 1.0)
        self.assertIsNone(self.rc.oracle_query(5, 0.5))
        self.assertEqual(self.rc.state(5), ('hidden', 1.0))

    def test_miss_raises_bound(self):
        # 1e-12 is all but certain to miss
        self.assertIsNone(self.rc.oracle_query(7, 1e-12))
        self.assertEqual(self.rc.state(7), ('hidden', 1e-12))

    def test_hit_stays_exposed(self):
        v = self.rc.oracle_query(3, 50.0)
        self.assertIsNotNone(v)
        self.assertEqual(self.rc.state(3), ('exposed', v))
        self.assertEqual(self.rc.oracle_query(3, 0.0), v)

    def test_out_of_range(self):
        with self.assertRaises(IndexError):
            self.rc.oracle_query(64, 1.0)
        with self.assertRaises(IndexError):
            self.rc.oracle_query(-1, 1.0)

    def test_exposed_fraction(self):
        rc = RefreshableCosts(47, seed=1)
        vals = rc.query(np.arange(100000), 0.01)
        frac = np.count_nonzero(~np.isnan(vals)) / 100000
        self.assertGreaterEqual(frac, 0.0090)
        self.assertLessEqual(frac, 0.0109)

    def test_deterministic(self):
        a = RefreshableCosts(10, seed=3)
        b = RefreshableCosts(10, seed=3)
        for w in (0.1, 0.5, 2.0):
            va = a.query(np.arange(500), w)
            vb = b.query(np.arange(500), w)
            self.assertTrue(np.array_equal(va, vb, equal_nan=True))

    def test_flat_index(self):
        self.assertEqual(self.rc.flat_index(1, 2, 3), 27)


class TestRefresh(TestCase):
    def setUp(self):
        self.rc = RefreshableCosts(3, seed=0)

    def test_large_exposed_drops(self):
        self.rc.set_state(0, 'exposed', 5.0)
        self.rc.refresh(2.0)
        self.assertEqual(self.rc.state(0), ('exposed', 3.0))

    def test_small_exposed_renewed(self):
        self.rc.set_state(0, 'exposed', 0.1)
        self.rc.refresh(0.5)
        self.assertEqual(self.rc.state(0), ('hidden', 0.0))

    def test_hidden_bound_drops(self):
        self.rc.set_state(0, 'hidden', 1.0)
        self.rc.set_state(1, 'hidden', 0.2)
        self.rc.refresh(0.25)
        kind, bound = self.rc.state(0)
        self.assertEqual(kind, 'hidden')
        self.assertAlmostEqual(bound, 0.75)
        self.rc.refresh(0.5)
        self.assertEqual(self.rc.state(1), ('hidden', 0.0))

    def test_zero_is_noop(self):
        self.rc.set_state(0, 'exposed', 0.4)
        self.rc.refresh(0)
        self.assertEqual(self.rc.state(0), ('exposed', 0.4))
        self.assertEqual(self.rc.offset, 0.0)

    def test_offset_accumulates(self):
        self.rc.refresh(0.5)
        self.rc.refresh(0.25)
        self.assertEqual(self.rc.offset, 0.75)

    def test_negative(self):
        with self.assertRaises(ValueError):
            self.rc.refresh(-0.1)

    def test_origin_includes_offset(self):
        self.rc.set_state(2, 'hidden', 0.6)
        self.rc.refresh(0.5)
        self.rc.set_state(2, 'exposed', 0.25)
        self.assertEqual(self.rc.origin([2])[0], 0.75)

    def test_memoryless(self):
        rc = RefreshableCosts(30, seed=2)
        idx = np.arange(rc.size)
        first = rc.query(idx, 1.0)
        seen = ~np.isnan(first)
        self.assertGreater(np.count_nonzero(seen), 10000)
        rc.refresh(1.0)
        again = rc.query(idx[seen], 50.0)
        self.assertFalse(np.any(np.isnan(again)))
        self.assertGreaterEqual(again.mean(), 0.95)
        self.assertLessEqual(again.mean(), 1.05)
        # the original costs never exceed the refreshed ones plus the offset
        orig = rc.origin(idx[seen])
        self.assertTrue(np.all(orig <= again + rc.offset))
        self.assertTrue(np.array_equal(orig, first[seen]))

    def test_originals_stay_exponential(self):
        # entries never looked at before a refresh keep Exp(1) originals
        rc = RefreshableCosts(30, seed=3)
        rc.refresh(0.5)
        idx = np.arange(rc.size)
        now = rc.query(idx, 60.0)
        self.assertFalse(np.any(np.isnan(now)))
        orig = rc.origin(idx)
        below = np.mean(orig < 0.5)
        self.assertGreaterEqual(below, 0.375)
        self.assertLessEqual(below, 0.41)
        self.assertGreaterEqual(orig.mean(), 0.97)
        self.assertLessEqual(orig.mean(), 1.03)
        self.assertTrue(np.all(orig <= now + rc.offset))


class TestFixedCosts(TestCase):
    def setUp(self):
        costs = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
        self.fc = FixedCosts(CostTensor(3, 2, costs))

    def test_threshold(self):
        vals = self.fc.query(np.arange(8), 0.35)
        self.assertEqual(vals[:3].tolist(), [0.1, 0.2, 0.3])
        self.assertTrue(np.all(np.isnan(vals[3:])))

    def test_refresh_shifts(self):
        self.fc.refresh(0.25)
        self.assertAlmostEqual(self.fc.oracle_query(4, 0.35), 0.25)
        self.assertIsNone(self.fc.oracle_query(6, 0.35))

    def test_origin_is_actual(self):
        self.fc.refresh(0.25)
        self.assertEqual(self.fc.origin([7])[0], 0.8)
