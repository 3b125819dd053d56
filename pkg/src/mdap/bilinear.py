""" Alternating heuristic for the bilinear form of the planar problem

With y and z permutation matrices, sum_{i,j,k} C[i][j][k] y[i][j] z[i][k] is
the cost of the planar assignment (i, y(i), z(i)). Fixing one block leaves
an assignment problem in the other, solved exactly by min_cost_matching.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .matching import MatchMatrix, min_cost_matching
from .model import ShapeError
from .util import index_sum, make_rng, setting


log = logging.getLogger(__name__)


@dataclass
class BilinearIterate:
    y: tuple
    z: tuple
    Z: float
    iteration: int = 0
    converged: bool = False


def _array(C):
    arr = getattr(C, 'array', C)
    arr = np.asarray(arr)
    if arr.ndim != 3:
        raise ShapeError(f"expected a 3-dimensional cost array, got {arr.shape}")
    return arr


def bilinear_objective(C, y, z):
    arr = _array(C)
    return index_sum(arr[i, y[i], z[i]] for i in range(arr.shape[0]))


def _better(a, b, maximise):
    return a > b if maximise else a < b


def _solve_block(D, incumbent, keep, maximise):
    if maximise:
        D = D.max(initial=0.0) - D
    perm, _ = min_cost_matching(MatchMatrix(D))
    value = keep(perm)
    if incumbent is not None:
        held = keep(tuple(incumbent))
        if not _better(value, held, maximise):
            return tuple(int(x) for x in incumbent), held
    return perm, value


def solve_fixed_z(C, z, incumbent=None, maximise=None):
    """ Best y for fixed z: D[i][j] = C[i][j][z(i)]

    An incumbent y is kept unless the new one is strictly better.
    """
    maximise = setting('bilinear', 'maximise', maximise)
    arr = _array(C)
    n = arr.shape[0]
    rows = np.arange(n)
    D = arr[rows, :, np.asarray(z)]
    return _solve_block(D, incumbent,
                        lambda y: bilinear_objective(arr, y, z), maximise)


def solve_fixed_y(C, y, incumbent=None, maximise=None):
    """ Best z for fixed y: D[i][k] = C[i][y(i)][k] """
    maximise = setting('bilinear', 'maximise', maximise)
    arr = _array(C)
    n = arr.shape[0]
    rows = np.arange(n)
    D = arr[rows, np.asarray(y), :]
    return _solve_block(D, incumbent,
                        lambda z: bilinear_objective(arr, y, z), maximise)


def bilinear_alternate(C, y0=None, z0=None, max_iters=None, maximise=None):
    """ Alternate the two blocks until the objective stops changing

    Returns the final iterate and the objective trace, starting with the
    value at (y0, z0). Hitting max_iters leaves `converged` False.
    """
    max_iters = setting('bilinear', 'max_iters', max_iters)
    maximise = setting('bilinear', 'maximise', maximise)
    arr = _array(C)
    n = arr.shape[0]
    y = tuple(range(n)) if y0 is None else tuple(int(v) for v in y0)
    z = tuple(range(n)) if z0 is None else tuple(int(v) for v in z0)
    Z = bilinear_objective(arr, y, z)
    trace = [Z]
    it = BilinearIterate(y, z, Z)
    for iteration in range(1, max_iters + 1):
        y, _ = solve_fixed_z(arr, z, incumbent=y, maximise=maximise)
        z, Z = solve_fixed_y(arr, y, incumbent=z, maximise=maximise)
        trace.append(Z)
        same = (y, z) == (it.y, it.z)
        converged = Z == it.Z or same
        it = BilinearIterate(y, z, Z, iteration, converged)
        if converged:
            break
    log.debug("bilinear: %d iterations, Z=%g, converged=%s",
              it.iteration, it.Z, it.converged)
    return it, trace


def bilinear_restarts(C, restarts=1, seed=0, max_iters=None, maximise=None):
    """ Best of several alternations; the first starts at the identity

    The other starting pairs are random permutations drawn from `seed`.
    """
    maximise = setting('bilinear', 'maximise', maximise)
    arr = _array(C)
    n = arr.shape[0]
    rng = make_rng(seed)
    best, finals = None, []
    for r in range(max(1, restarts)):
        if r == 0:
            y0 = z0 = None
        else:
            y0, z0 = rng.permutation(n), rng.permutation(n)
        it, _ = bilinear_alternate(arr, y0, z0, max_iters, maximise)
        finals.append(it)
        if best is None or _better(it.Z, best.Z, maximise):
            best = it
    return best, finals
