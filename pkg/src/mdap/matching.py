""" Exact minimum-cost perfect matching on square cost matrices

Forbidden entries are absent edges, not large costs. The solver is the
shortest augmenting path form of the Hungarian method with row and column
potentials, O(n^3), vectorised over columns.
"""

import logging
from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np

from .util import index_sum, setting


log = logging.getLogger(__name__)


class Infeasible(ValueError):
    def __str__(self):
        return "Infeasible: " + super().__str__()


class TooLarge(ValueError):
    def __str__(self):
        return "Too large: " + super().__str__()


@dataclass
class MatchMatrix:
    cost: np.ndarray
    forbidden: Optional[np.ndarray] = None

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=np.float64)
        if self.cost.ndim != 2 or self.cost.shape[0] != self.cost.shape[1]:
            raise ValueError(f"expected a square matrix, got {self.cost.shape}")
        if self.forbidden is None:
            self.forbidden = np.zeros(self.cost.shape, dtype=bool)
        else:
            self.forbidden = np.asarray(self.forbidden, dtype=bool)
        allowed = self.cost[~self.forbidden]
        if not np.all(np.isfinite(allowed)) or np.any(allowed < 0):
            raise ValueError("allowed entries must be finite and nonnegative")

    @property
    def n(self):
        return self.cost.shape[0]

    def masked(self):
        """ The costs with forbidden entries set to +inf """
        return np.where(self.forbidden, np.inf, self.cost)

    def cost_of(self, perm):
        return index_sum(self.cost[j, perm[j]] for j in range(self.n))


@dataclass
class Matching:
    perm: tuple
    cost: float
    row_dual: Optional[np.ndarray] = None
    col_dual: Optional[np.ndarray] = None

    def __iter__(self):
        # Unpacks as (perm, cost)
        yield self.perm
        yield self.cost


def has_perfect_matching(m: MatchMatrix):
    """ Kuhn's augmenting path search on the allowed entries """
    n = m.n
    adj = [np.flatnonzero(~m.forbidden[row]).tolist() for row in range(n)]
    owner = [-1] * n

    def augment(row, seen):
        for col in adj[row]:
            if seen[col]:
                continue
            seen[col] = True
            if owner[col] < 0 or augment(owner[col], seen):
                owner[col] = row
                return True
        return False

    return all(augment(row, [False] * n) for row in range(n))


def min_cost_matching(m: MatchMatrix):
    """ Optimal permutation, its cost, and an optimality certificate

    The duals satisfy cost[j][k] - row_dual[j] - col_dual[k] >= 0 on allowed
    entries with equality on the matched ones (up to rounding). Ties go to
    the first column in scanning order. With forbidden entries present,
    feasibility is settled first by has_perfect_matching.
    """
    n = m.n
    if n == 0:
        return Matching((), 0.0, np.zeros(0), np.zeros(0))
    if m.forbidden.any() and not has_perfect_matching(m):
        raise Infeasible("no perfect matching avoids the forbidden entries")
    a = m.masked()
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    # p[j]: 1-based row matched to 1-based column j; column 0 is the root slot.
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = a[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            if not np.isfinite(delta):
                raise Infeasible(f"row {i - 1} has no augmenting path "
                                 "avoiding forbidden entries")
            u[p[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    perm = [0] * n
    for col in range(1, n + 1):
        perm[p[col] - 1] = col - 1
    perm = tuple(perm)
    return Matching(perm, m.cost_of(perm), u[1:].copy(), v[1:].copy())


def brute_force_matching(m: MatchMatrix, limit=None):
    """ Exhaustive minimum over all n! permutations (test oracle) """
    limit = setting('exact', 'matching_limit', limit)
    n = m.n
    if n > limit:
        raise TooLarge(f"n={n} > {limit} for exhaustive matching")
    if n == 0:
        return Matching((), 0.0)
    perms = np.array(list(permutations(range(n))), dtype=np.int64)
    totals = m.masked()[np.arange(n), perms].sum(axis=1)
    best = int(np.argmin(totals))
    if not np.isfinite(totals[best]):
        raise Infeasible("every permutation uses a forbidden entry")
    perm = tuple(int(c) for c in perms[best])
    return Matching(perm, m.cost_of(perm))
