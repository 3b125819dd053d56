""" Exhaustive oracles for tiny instances and analytic reference values """

import logging
import math
from itertools import permutations

import numpy as np

from .matching import MatchMatrix, TooLarge, min_cost_matching
from .model import LatinAssignment, PlanarAssignment, ShapeError
from .schedule import theta
from .util import harmonic, index_sum, setting


log = logging.getLogger(__name__)

ZETA2 = math.pi ** 2 / 6


def _limit(key, hard_key, override):
    limit = setting('exact', key, override)
    hard = setting('exact', hard_key)
    return min(limit, hard)


def _require_d3(tensor):
    if tensor.d != 3:
        raise ShapeError(f"expected a 3-dimensional instance, got d={tensor.d}")


def exact_planar(tensor, limit=None):
    """ Minimum over all (n!)^2 permutation pairs (sigma, pi) """
    _require_d3(tensor)
    n = tensor.n
    limit = _limit('planar_limit', 'planar_hard_cap', limit)
    if n > limit:
        raise TooLarge(f"n={n} > {limit} for planar enumeration")
    perms = np.array(list(permutations(range(n))), dtype=np.int64)
    rows = np.arange(n)
    arr = tensor.array
    totals = arr[rows, perms[:, None, :], perms[None, :, :]].sum(axis=-1)
    s, p = np.unravel_index(int(np.argmin(totals)), totals.shape)
    solution = PlanarAssignment(n, perms[s], perms[p])
    return solution, solution.cost(tensor)


def exact_planar_hybrid(tensor, limit=None):
    """ Enumerate sigma, then solve pi exactly as an assignment problem """
    _require_d3(tensor)
    n = tensor.n
    limit = setting('exact', 'hybrid_limit', limit)
    if n > limit:
        raise TooLarge(f"n={n} > {limit} for hybrid planar enumeration")
    arr = tensor.array
    rows = np.arange(n)
    best, best_cost = None, math.inf
    for sigma in permutations(range(n)):
        D = MatchMatrix(arr[rows, list(sigma), :])
        pi, cost = min_cost_matching(D)
        if cost < best_cost:
            best, best_cost = (sigma, pi), cost
    solution = PlanarAssignment(n, *best)
    return solution, solution.cost(tensor)


def exact_axial(tensor, limit=None):
    """ Minimum over all Latin squares, by backtracking with cost pruning """
    _require_d3(tensor)
    n = tensor.n
    limit = _limit('axial_limit', 'axial_hard_cap', limit)
    if n > limit:
        raise TooLarge(f"n={n} > {limit} for Latin square enumeration")
    arr = tensor.array
    K = np.zeros((n, n), dtype=np.int64)
    row_used = np.zeros((n, n), dtype=bool)
    col_used = np.zeros((n, n), dtype=bool)
    best = {'cost': math.inf, 'K': None}

    def fill(cell, partial):
        if partial >= best['cost']:
            return
        if cell == n * n:
            best['cost'], best['K'] = partial, K.copy()
            return
        i, j = divmod(cell, n)
        for k in range(n):
            if row_used[i, k] or col_used[j, k]:
                continue
            K[i, j] = k
            row_used[i, k] = col_used[j, k] = True
            fill(cell + 1, partial + float(arr[i, j, k]))
            row_used[i, k] = col_used[j, k] = False

    fill(0, 0.0)
    solution = LatinAssignment(n, best['K'])
    return solution, solution.cost(tensor)


def planar_row_min_lower_bound(tensor):
    """ Sum over 1-planes of the plane minimum """
    mins = tensor.costs.reshape(tensor.n, -1).min(axis=1)
    return index_sum(mins)


def parisi_value(n):
    """ Expected optimal n x n assignment cost with Exp(1) entries """
    if n < 1:
        raise ValueError(f"n={n} < 1")
    return math.fsum(1 / i ** 2 for i in range(1, n + 1))


def planar_rowmin_mean(n, d=3):
    """ Expected row-minimum bound: n planes with minima of mean n^-(d-1) """
    return 1 / n ** (d - 2)


def planar_upper_envelope(n, d=3, K=1.0):
    """ Upper envelope K log n / n^(d-2) for the planar optimum """
    return K * math.log(n) / n ** (d - 2)


def bdts_cost_envelope(n, k):
    """ 2^k n^(theta_k - 1) log n """
    return 2 ** k * n ** (theta(k) - 1) * math.log(n)


def greedy_phase_bound(n, k):
    return 2 / n ** (1 - theta(k))


def main_phase_bound(n, k):
    """ Main Phase added cost bound (2^(k+1) - 1) * 4 n^(theta_k - 1) log n """
    return (2 ** (k + 1) - 1) * 4 * n ** (theta(k) - 1) * math.log(n)


def axial_lower_envelope(n):
    return n * ZETA2


def axial_upper_envelope(n):
    """ 2n H_n, the sum of the per-slice bounds 2n / (n - i + 1) """
    return 2 * n * harmonic(n)
