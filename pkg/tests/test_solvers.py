from unittest import TestCase
from functools import partial

from mdap import Solver
from mdap.model import (ShapeError, is_latin_assignment, is_planar_assignment,
                        sample_tensor)


class TestRegistry(TestCase):
    def test_supported(self):
        for sid in ('planar-bdts', 'axial-greedy', 'bilinear', 'assignment',
                    'exact-planar', 'exact-axial', 'exact-matching'):
            self.assertIn(sid, Solver.supported())

    def test_unknown(self):
        with self.assertRaises(ValueError):
            Solver.make('simplex')

    def test_unnamed_subclass(self):
        with self.assertRaises(ValueError):
            class Nameless(Solver):
                pass


class TestPlanarBdts(TestCase):
    def setUp(self):
        self.make = partial(Solver.make, 'planar-bdts', k=1)

    def test_distributional_run(self):
        outcome = self.make().run(16, 3)
        self.assertTrue(outcome.solution.is_valid())
        self.assertEqual(len(outcome.lines()), 16)
        self.assertLessEqual(outcome.cost, outcome.cost_upper + 1e-9)

    def test_fixed_run(self):
        solver = self.make(mode='fixed')
        outcome = solver.run(12, 4)
        tensor = solver.instance(12, 4)
        self.assertEqual(outcome.cost, outcome.solution.cost(tensor))

    def test_wrong_dimension(self):
        with self.assertRaises(ShapeError):
            self.make().solve(sample_tensor(5, 2))


class TestOtherSolvers(TestCase):
    def test_axial_lines(self):
        outcome = Solver.make('axial-greedy').run(4, 1)
        K = [[int(c) for c in line.split()] for line in outcome.lines()]
        self.assertTrue(is_latin_assignment(K))
        self.assertEqual(len(outcome.extra['slices']), 4)

    def test_bilinear_lines(self):
        outcome = Solver.make('bilinear', restarts=2).run(5, 2)
        triples = [tuple(int(c) for c in line.split())
                   for line in outcome.lines()]
        self.assertTrue(is_planar_assignment(triples, 5))
        self.assertEqual(outcome.extra['restarts'], 2)

    def test_matching_agrees(self):
        fast = Solver.make('assignment').run(6, 9)
        slow = Solver.make('exact-matching').run(6, 9)
        self.assertEqual(fast.cost, slow.cost)
        self.assertEqual(fast.lines(), slow.lines())

    def test_exact_below_heuristics(self):
        tensor = sample_tensor(4, seed=5)
        best = Solver.make('exact-planar').solve(tensor).cost
        for sid in ('bilinear', 'planar-bdts'):
            options = {'mode': 'fixed'} if sid == 'planar-bdts' else {}
            outcome = Solver.make(sid, **options).solve(tensor)
            self.assertLessEqual(best, outcome.cost + 1e-12)

    def test_exact_axial(self):
        tensor = sample_tensor(3, seed=6)
        exact = Solver.make('exact-axial').solve(tensor)
        greedy = Solver.make('axial-greedy').solve(tensor)
        self.assertLessEqual(exact.cost, greedy.cost + 1e-12)
