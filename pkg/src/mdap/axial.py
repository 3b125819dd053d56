""" Sequential-matching greedy for the 3-dimensional axial problem

Slice i is solved as a minimum cost perfect matching of the (j, k) pairs no
earlier slice has used. The residual graph before slice i is
(n - i)-regular bipartite, so a perfect matching always exists.
"""

import logging
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .matching import MatchMatrix, min_cost_matching
from .model import LatinAssignment, ShapeError
from .util import index_sum


log = logging.getLogger(__name__)


def dfm_slice_bound(i, n):
    """ Expected cost bound 2n / (n - i + 1) for 1-based slice i """
    if not 1 <= i <= n:
        raise ValueError(f"slice {i} out of range 1..{n}")
    return 2 * n / (n - i + 1)


@dataclass
class AxialRunReport:
    n: int
    slices: list = field(default_factory=list)
    bounds: list = field(default_factory=list)

    @property
    def total(self):
        return index_sum(self.slices)


def axial_greedy(tensor):
    """ Solve slices 0..n-1 in order, forbidding (j, k) pairs already used """
    if tensor.d != 3:
        raise ShapeError(f"axial greedy needs d=3, got d={tensor.d}")
    n = tensor.n
    used = np.zeros((n, n), dtype=bool)
    K = np.zeros((n, n), dtype=np.int64)
    report = AxialRunReport(n)
    for i in range(n):
        perm, cost = min_cost_matching(MatchMatrix(tensor.slab(i), used.copy()))
        for j, k in enumerate(perm):
            K[i, j] = k
            used[j, k] = True
        report.slices.append(cost)
        report.bounds.append(dfm_slice_bound(i + 1, n))
        log.debug("slice %d: cost %g (bound %g)", i, cost, report.bounds[-1])
    solution = LatinAssignment(n, K)
    assert solution.is_valid(), "slice matchings overlap"
    return solution, report


def axial_lower_bound(tensor):
    """ Sum over leading-coordinate slices of each slice's assignment optimum

    For d > 3 the first d - 2 coordinates are iterated.
    """
    if tensor.d < 3:
        raise ShapeError(f"axial bound needs d >= 3, got d={tensor.d}")
    n = tensor.n
    arr = tensor.array
    total = 0.0
    for lead in product(range(n), repeat=tensor.d - 2):
        _, cost = min_cost_matching(MatchMatrix(arr[lead]))
        total += cost
    return total
