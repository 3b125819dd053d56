import math
from unittest import TestCase

import numpy as np

import mdap
import mdap.bdts as bdts_module
from mdap.bdts import (bdts, find_tree, greedy_match, greedy_phase, main_phase,
                       final_phase, BdtsReport, Exhausted, ModeError,
                       DimensionError)
from mdap.exact import exact_planar, planar_row_min_lower_bound
from mdap.model import CostTensor, sample_tensor
from mdap.oracle import FixedCosts, RefreshableCosts
from mdap.partial import PartialState, apply_tree
from mdap.schedule import make_schedule
from mdap.util import mix_seed


def diagonal_state(n, m):
    state = PartialState(n)
    for i in range(m):
        state.add(i, i, i, charge=0.01, origin=0.01)
    return state


def flat(n, value=0.01):
    return FixedCosts(CostTensor(3, n, np.full(n ** 3, value)))


class TestGreedyPhase(TestCase):
    def test_first_index(self):
        t = CostTensor(3, 2, [1, 2, 3, 4, 5, 6, 7, 8])
        state = greedy_match(t, 1)
        self.assertEqual(state.triple(0), (0, 0, 0))
        self.assertEqual(state.charge_total(), 1.0)

    def test_threshold_doubles(self):
        t = CostTensor(3, 2, [1, 2, 3, 4, 5, 6, 7, 8])
        state = greedy_match(t, 2)
        self.assertEqual(state.triple(1), (1, 1, 1))
        self.assertEqual(state.charge_total(), 9.0)

    def test_nothing(self):
        state = greedy_match(sample_tensor(4), 0)
        self.assertEqual(len(state), 0)
        self.assertEqual(state.charge_total(), 0.0)

    def test_cheapest_available(self):
        t = sample_tensor(8, seed=4)
        state = greedy_match(t, 5)
        for i in range(5):
            _, j, k = state.triple(i)
            # nothing cheaper was free when i was matched
            free2 = set(range(8)) - {state.triple(c)[1] for c in range(i)}
            free3 = set(range(8)) - {state.triple(c)[2] for c in range(i)}
            best = min(t[i, a, b] for a in free2 for b in free3)
            self.assertEqual(t[i, j, k], best)

    def test_distributional(self):
        rc = RefreshableCosts(20, seed=1)
        state = greedy_match(rc, 10)
        self.assertEqual(len(state), 10)
        state.validate()

    def test_from_schedule(self):
        sched = make_schedule(50, 1)
        state = greedy_phase(RefreshableCosts(50, seed=2), sched)
        self.assertEqual(len(state), sched.n1)
        self.assertEqual(state.unmatched()[0], sched.n1)


class TestFindTree(TestCase):
    def test_depth_one(self):
        state = diagonal_state(6, 4)
        tree = find_tree(state, flat(6), 4, 1.0, 1)
        self.assertIsNotNone(tree)
        self.assertEqual(len(tree.added), 3)
        self.assertEqual(len(tree.removed), 2)
        self.assertEqual(tree.root[0], 4)
        apply_tree(state, tree)
        self.assertEqual(len(state), 5)
        state.validate()

    def test_depth_two(self):
        state = diagonal_state(12, 8)
        tree = find_tree(state, flat(12), 8, 1.0, 2)
        self.assertIsNotNone(tree)
        self.assertEqual(len(tree.added), 7)
        self.assertEqual(len(tree.removed), 6)
        apply_tree(state, tree)
        self.assertEqual(len(state), 9)
        state.validate()

    def test_depth_two_every_index_used(self):
        # six matched indices are exactly the non-root nodes of a k=2 tree
        state = diagonal_state(10, 6)
        tree = find_tree(state, flat(10), 6, 1.0, 2)
        self.assertIsNotNone(tree)
        self.assertEqual(len(tree.added), 7)
        self.assertEqual(len(tree.removed), 6)
        apply_tree(state, tree)
        self.assertEqual(len(state), 7)
        state.validate()

    def test_level_pools_disjoint(self):
        offers = {2: [(0.1, 5, ['a']), (0.2, 6, ['b']), (0.3, 7, ['c'])],
                  3: [(0.1, 5, ['d']), (0.4, 8, ['e'])]}
        pools = bdts_module._deal(offers, 3)
        self.assertEqual(pools[2], {5: ['a'], 6: ['b'], 7: ['c']})
        self.assertEqual(pools[3], {8: ['e']})
        pools = bdts_module._deal(offers, 1)
        self.assertEqual(list(pools[2]), [5])
        self.assertEqual(list(pools[3]), [8])

    def test_zero_budget(self):
        state = diagonal_state(10, 6)
        costs = FixedCosts(sample_tensor(10, seed=3))
        self.assertIsNone(find_tree(state, costs, 6, 0.0, 1))

    def test_above_budget(self):
        state = diagonal_state(6, 4)
        self.assertIsNone(find_tree(state, flat(6, 2.0), 4, 1.0, 1))

    def test_charges(self):
        state = diagonal_state(6, 4)
        tree = find_tree(state, flat(6), 4, 1.0, 1)
        self.assertAlmostEqual(tree.charge(), 0.03)


class TestMainPhase(TestCase):
    def test_no_room(self):
        # one unmatched index is fewer than 2^k leaves
        state = diagonal_state(10, 9)
        sched = make_schedule(10, 1)
        main_phase(state, flat(10), sched)
        self.assertEqual(len(state), 9)

    def test_rounds_follow_targets(self):
        n = 60
        sched = make_schedule(n, 1)
        costs = RefreshableCosts(n, seed=7)
        state = greedy_phase(costs, sched)
        report = BdtsReport(n, 1, 'distributional')
        main_phase(state, costs, sched, report=report)
        first = report.rounds[0]
        self.assertEqual(first.trees, sched.x[1] - sched.x[2])
        self.assertGreater(first.trees, 1)
        self.assertEqual(len(report.rounds), sched.rounds)
        self.assertAlmostEqual(costs.offset, sched.W[sched.rounds - 1])
        self.assertEqual(state.n - len(state), sched.x[sched.rounds + 1])


class TestBdtsFixed(TestCase):
    def setUp(self):
        self.t = sample_tensor(10, seed=21)
        self.solution, self.report = bdts(self.t, 1, 'fixed')

    def test_valid(self):
        self.assertTrue(self.solution.is_valid())

    def test_cost_matches_tensor(self):
        self.assertEqual(self.report.cost, self.solution.cost(self.t))

    def test_upper_close(self):
        self.assertAlmostEqual(self.report.cost_upper, self.report.cost,
                               delta=1e-9 * self.t.n)

    def test_replay(self):
        self.assertEqual(self.report.recompute_upper(), self.report.cost_upper)

    def test_phase_split(self):
        r = self.report
        self.assertAlmostEqual(r.z1 + r.main_cost + r.final_cost, r.cost_upper)

    def test_lower_bound(self):
        self.assertGreaterEqual(self.report.cost,
                                planar_row_min_lower_bound(self.t))

    def test_summary(self):
        summary = self.report.summary()
        self.assertEqual(summary['mode'], 'fixed')
        self.assertAlmostEqual(summary['theta'], 1 / 3)


class TestBdtsSmall(TestCase):
    def test_exact_is_lower(self):
        for seed in range(5):
            t = sample_tensor(4, seed=seed)
            solution, report = bdts(t, 1, 'fixed')
            self.assertTrue(solution.is_valid())
            _, best = exact_planar(t)
            self.assertLessEqual(best, report.cost + 1e-12)

    def test_depth_two(self):
        for seed in (1, 2):
            t = sample_tensor(30, seed=seed)
            solution, report = bdts(t, 2, 'fixed')
            self.assertTrue(solution.is_valid())
            self.assertEqual(report.recompute_upper(), report.cost_upper)

    def test_depth_two_bench_instance(self):
        t = sample_tensor(30, seed=mix_seed(18, 30, 2))
        solution, report = bdts(t, 2, 'fixed')
        self.assertTrue(solution.is_valid())
        self.assertEqual(report.cost, solution.cost(t))


class TestBdtsDistributional(TestCase):
    def test_runs(self):
        for seed in (0, 1):
            solution, report = bdts(30, 1, seed=seed)
            self.assertTrue(solution.is_valid())
            self.assertLessEqual(report.cost, report.cost_upper + 1e-9)
            self.assertGreaterEqual(report.escalations, 0)
            self.assertEqual(report.recompute_upper(), report.cost_upper)

    def test_deterministic(self):
        a, ra = bdts(24, 1, seed=5)
        b, rb = bdts((24, 5), 1)
        self.assertEqual(a.triples, b.triples)
        self.assertEqual(ra.cost_upper, rb.cost_upper)

    def test_finite_cost(self):
        _, report = bdts(40, 1, seed=3)
        self.assertTrue(math.isfinite(report.cost_upper))
        self.assertGreater(report.cost, 0)


class TestBdtsErrors(TestCase):
    def test_dimension(self):
        with self.assertRaises(DimensionError):
            bdts(sample_tensor(4, 2), 1, 'fixed')

    def test_mode(self):
        with self.assertRaises(ModeError):
            bdts(10, 1, 'foo')

    def test_tensor_needs_fixed(self):
        with self.assertRaises(ModeError):
            bdts(sample_tensor(6), 1, 'distributional')

    def test_fixed_needs_tensor(self):
        with self.assertRaises(ModeError):
            bdts(10, 1, 'fixed')


class TestFinalPhase(TestCase):
    def test_complete_is_noop(self):
        state = diagonal_state(8, 8)
        costs = flat(8)
        final_phase(state, costs, make_schedule(8, 1))
        self.assertEqual(len(state.trace), 8)
        self.assertEqual(costs.offset, 0.0)

    def test_one_missing(self):
        state = diagonal_state(8, 7)
        final_phase(state, flat(8), make_schedule(8, 1))
        self.assertTrue(state.complete)
        self.assertTrue(state.to_assignment().is_valid())
        # a depth-1 tree: three triples added, two displaced
        self.assertEqual(len(state.trace), 7 + 2 + 3)


class TestExports(TestCase):
    def test_module_not_shadowed(self):
        self.assertIs(mdap.bdts, bdts_module)
        self.assertIs(bdts_module.Exhausted, Exhausted)

    def test_solver_alias(self):
        self.assertIs(mdap.solve_bdts, bdts)
