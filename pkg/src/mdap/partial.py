""" Partial planar assignments and the alternating trees that extend them

A tree is stored heap-style: node 1 is the root, node r has children 2r
(left) and 2r + 1 (right). Every node r carries a first coordinate p[r]; the
root's is unmatched, all others are matched and their current triples are
the ones the tree removes. An internal node is re-added as

    (p[r], sigma[p[2r]], pi[p[2r + 1]])

so the left child gives up its 2-coordinate and the right child its
3-coordinate. Leaves take their 2- and 3-coordinates from the unused ones,
plus whatever the tree itself frees: sigma of right children and pi of left
children.
"""

import logging
from dataclasses import dataclass

import numpy as np
from bitarray import bitarray
from bitarray.util import zeros

from .model import PlanarAssignment
from .util import index_sum


log = logging.getLogger(__name__)


class InfeasibleTree(ValueError):
    def __str__(self):
        return "Infeasible tree: " + super().__str__()


def ones(bits):
    """ Positions of the set bits, ascending """
    return list(bits.search(bitarray('1')))


class PartialState:
    """ A partial planar assignment with per-triple charges

    `charge[i]` is what the current triple of i was charged when committed
    (refreshed value plus the cumulative offset at exposure); `origin[i]` is
    its actual cost.
    """

    def __init__(self, n):
        self.n = n
        self.sigma = np.full(n, -1, dtype=np.int64)
        self.pi = np.full(n, -1, dtype=np.int64)
        self.owner2 = np.full(n, -1, dtype=np.int64)
        self.owner3 = np.full(n, -1, dtype=np.int64)
        self.charge = np.full(n, np.nan)
        self.origin = np.full(n, np.nan)
        self.matched = zeros(n)
        self.free2 = ~zeros(n)
        self.free3 = ~zeros(n)
        self.trace = []

    def __len__(self):
        return self.matched.count()

    @property
    def complete(self):
        return len(self) == self.n

    def matched_list(self):
        return ones(self.matched)

    def unmatched(self):
        return ones(~self.matched)

    def free2_list(self):
        return ones(self.free2)

    def free3_list(self):
        return ones(self.free3)

    def triple(self, i):
        return (i, int(self.sigma[i]), int(self.pi[i]))

    def add(self, i, j, k, charge=0.0, origin=np.nan):
        if self.matched[i] or not self.free2[j] or not self.free3[k]:
            raise InfeasibleTree(f"({i}, {j}, {k}) collides with the state")
        self.sigma[i], self.pi[i] = j, k
        self.owner2[j] = self.owner3[k] = i
        self.charge[i] = charge
        self.origin[i] = origin
        self.matched[i] = 1
        self.free2[j] = 0
        self.free3[k] = 0
        self.trace.append(('add', i, j, k, float(charge)))

    def remove(self, i):
        if not self.matched[i]:
            raise InfeasibleTree(f"index {i} is not matched")
        i, j, k = self.triple(i)
        self.owner2[j] = self.owner3[k] = -1
        self.sigma[i] = self.pi[i] = -1
        self.charge[i] = self.origin[i] = np.nan
        self.matched[i] = 0
        self.free2[j] = 1
        self.free3[k] = 1
        self.trace.append(('remove', i, j, k, 0.0))
        return j, k

    def charge_total(self):
        return index_sum(self.charge[i] for i in self.matched_list())

    def origin_total(self):
        return index_sum(self.origin[i] for i in self.matched_list())

    def validate(self):
        """ Raise AssertionError unless the bookkeeping is consistent """
        m = len(self)
        assert self.free2.count() == self.n - m, "free2 count"
        assert self.free3.count() == self.n - m, "free3 count"
        for i in range(self.n):
            j, k = self.sigma[i], self.pi[i]
            if self.matched[i]:
                assert j >= 0 and k >= 0, f"index {i} matched without a triple"
                assert self.owner2[j] == i and self.owner3[k] == i, \
                    f"index {i} owners"
                assert not self.free2[j] and not self.free3[k], \
                    f"index {i} uses a free coordinate"
            else:
                assert j < 0 and k < 0, f"index {i} unmatched with a triple"
        for j in range(self.n):
            assert (self.owner2[j] < 0) == bool(self.free2[j]), f"2-coord {j}"
            assert (self.owner3[j] < 0) == bool(self.free3[j]), f"3-coord {j}"

    def to_assignment(self):
        if not self.complete:
            raise InfeasibleTree(f"only {len(self)} of {self.n} indices matched")
        return PlanarAssignment(self.n, self.sigma.copy(), self.pi.copy())


@dataclass
class AltTree:
    """ An alternating tree of depth `depth`, see the module docstring

    `p`, `triples`, `charges` and `origins` are indexed by heap node, with
    slot 0 unused.
    """
    depth: int
    p: tuple
    triples: tuple
    charges: tuple
    origins: tuple

    @property
    def size(self):
        return 2 ** (self.depth + 1)

    @property
    def root(self):
        return self.triples[1]

    @property
    def added(self):
        return list(self.triples[1:])

    @property
    def removed(self):
        """ First coordinates whose current triples the tree displaces """
        return list(self.p[2:])

    def leaves(self):
        return range(2 ** self.depth, self.size)

    def charge(self):
        return index_sum(self.charges[1:])

    @classmethod
    def build(cls, state, depth, p, leaf_coords, charges, origins):
        """ Assemble a tree from node first coordinates and leaf coordinates

        `leaf_coords` maps each leaf node to its (j, k).
        """
        size = 2 ** (depth + 1)
        triples = [None]
        for r in range(1, size):
            if r in leaf_coords:
                j, k = leaf_coords[r]
            else:
                j, k = state.sigma[p[2 * r]], state.pi[p[2 * r + 1]]
            triples.append((p[r], int(j), int(k)))
        return cls(depth, tuple(p), tuple(triples), tuple(charges),
                   tuple(origins))


def check_tree(state, tree):
    """ Raise InfeasibleTree unless the tree applies cleanly to the state """
    size = tree.size
    if len(tree.p) != size or len(tree.triples) != size:
        raise InfeasibleTree(f"depth {tree.depth} needs {size - 1} nodes")
    p = tree.p
    if state.matched[p[1]]:
        raise InfeasibleTree(f"root index {p[1]} is already matched")
    if len(set(p[1:])) != size - 1:
        raise InfeasibleTree("node indices are not distinct")
    for c in p[2:]:
        if not state.matched[c]:
            raise InfeasibleTree(f"index {c} is not matched")

    avail2 = set(state.free2_list())
    avail3 = set(state.free3_list())
    avail2.update(int(state.sigma[c]) for c in p[2:])
    avail3.update(int(state.pi[c]) for c in p[2:])
    seen2, seen3 = set(), set()
    for r in range(1, size):
        i, j, k = tree.triples[r]
        if i != p[r]:
            raise InfeasibleTree(f"node {r} triple does not start at {p[r]}")
        if 2 * r < size:
            if j != state.sigma[p[2 * r]] or k != state.pi[p[2 * r + 1]]:
                raise InfeasibleTree(f"node {r} does not take its children's "
                                     "coordinates")
        if j in seen2 or j not in avail2:
            raise InfeasibleTree(f"2-coordinate {j} unavailable")
        if k in seen3 or k not in avail3:
            raise InfeasibleTree(f"3-coordinate {k} unavailable")
        seen2.add(j)
        seen3.add(k)


def apply_tree(state, tree):
    """ Displace the tree's matched nodes and commit its triples

    The state is left untouched when the tree does not fit.
    """
    check_tree(state, tree)
    for c in tree.removed:
        state.remove(c)
    for r in range(1, tree.size):
        state.add(*tree.triples[r], tree.charges[r], tree.origins[r])
    if __debug__:
        state.validate()
