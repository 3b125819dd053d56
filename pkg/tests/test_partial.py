from unittest import TestCase

from mdap.partial import (PartialState, AltTree, InfeasibleTree, apply_tree,
                          check_tree)


def diagonal_state(n, m):
    """ Indices 0..m-1 matched to (i, i, i) """
    state = PartialState(n)
    for i in range(m):
        state.add(i, i, i, charge=0.5, origin=0.5)
    return state


class TestPartialState(TestCase):
    def setUp(self):
        self.state = diagonal_state(5, 3)

    def test_counts(self):
        self.assertEqual(len(self.state), 3)
        self.assertEqual(self.state.unmatched(), [3, 4])
        self.assertEqual(self.state.free2_list(), [3, 4])
        self.assertEqual(self.state.free3_list(), [3, 4])
        self.state.validate()

    def test_add_collision(self):
        with self.assertRaises(InfeasibleTree):
            self.state.add(3, 1, 4)
        with self.assertRaises(InfeasibleTree):
            self.state.add(0, 3, 3)

    def test_remove(self):
        self.assertEqual(self.state.remove(1), (1, 1))
        self.assertEqual(self.state.unmatched(), [1, 3, 4])
        self.state.validate()
        with self.assertRaises(InfeasibleTree):
            self.state.remove(1)

    def test_charges(self):
        self.assertEqual(self.state.charge_total(), 1.5)
        self.state.remove(0)
        self.assertEqual(self.state.charge_total(), 1.0)

    def test_trace(self):
        self.state.remove(2)
        self.assertEqual(self.state.trace[-1], ('remove', 2, 2, 2, 0.0))
        self.assertEqual(self.state.trace[0], ('add', 0, 0, 0, 0.5))

    def test_incomplete_assignment(self):
        with self.assertRaises(InfeasibleTree):
            self.state.to_assignment()

    def test_complete_assignment(self):
        self.state.add(3, 4, 3)
        self.state.add(4, 3, 4)
        pa = self.state.to_assignment()
        self.assertTrue(pa.is_valid())
        self.assertEqual(pa.triples[3], (3, 4, 3))


class TestApplyTree(TestCase):
    def setUp(self):
        self.state = diagonal_state(5, 3)
        # root 3 takes sigma(0) and pi(1); 0 and 1 move to free coordinates
        self.tree = AltTree.build(self.state, 1, [-1, 3, 0, 1],
                                  {2: (3, 3), 3: (4, 4)},
                                  [0.0, 0.1, 0.2, 0.3], [0.0, 0.1, 0.2, 0.3])

    def test_shape(self):
        self.assertEqual(self.tree.root, (3, 0, 1))
        self.assertEqual(len(self.tree.added), 3)
        self.assertEqual(self.tree.removed, [0, 1])
        self.assertEqual(list(self.tree.leaves()), [2, 3])

    def test_apply(self):
        apply_tree(self.state, self.tree)
        self.assertEqual(len(self.state), 4)
        self.assertEqual(self.state.free2_list(), [1])
        self.assertEqual(self.state.free3_list(), [0])
        self.assertEqual(self.state.triple(3), (3, 0, 1))
        self.assertEqual(self.state.triple(0), (0, 3, 3))
        self.state.validate()

    def test_charge_accounting(self):
        apply_tree(self.state, self.tree)
        # the displaced 0.5 charges are withdrawn
        self.assertAlmostEqual(self.state.charge_total(), 0.5 + 0.6)

    def test_matched_root(self):
        tree = AltTree.build(self.state, 1, [-1, 2, 0, 1],
                             {2: (3, 3), 3: (4, 4)},
                             [0.0] * 4, [0.0] * 4)
        before = self.state.sigma.copy()
        with self.assertRaises(InfeasibleTree):
            apply_tree(self.state, tree)
        self.assertEqual(self.state.sigma.tolist(), before.tolist())
        self.assertEqual(len(self.state), 3)

    def test_reused_leaf_coordinate(self):
        tree = AltTree.build(self.state, 1, [-1, 3, 0, 1],
                             {2: (3, 3), 3: (3, 4)},
                             [0.0] * 4, [0.0] * 4)
        with self.assertRaises(InfeasibleTree):
            check_tree(self.state, tree)

    def test_unmatched_child(self):
        tree = AltTree.build(self.state, 1, [-1, 3, 0, 1],
                             {2: (3, 3), 3: (4, 4)},
                             [0.0] * 4, [0.0] * 4)
        self.state.remove(1)
        with self.assertRaises(InfeasibleTree):
            check_tree(self.state, tree)

    def test_depth_zero(self):
        tree = AltTree(0, (-1, 4), (None, (4, 3, 4)), (0.0, 0.25), (0.0, 0.25))
        apply_tree(self.state, tree)
        self.assertEqual(len(self.state), 4)
        self.assertEqual(self.state.triple(4), (4, 3, 4))
