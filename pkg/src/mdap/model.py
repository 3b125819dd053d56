""" Instances and solutions of random multi-dimensional assignment problems

All indices are 0-based. A d-dimensional instance with side n is stored as a
flat array of n**d costs in row-major order: the entry (i1, ..., id) lives at
((i1 * n + i2) * n + ...) * n + id.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from bitarray.util import zeros

from .util import make_rng, exp_variates, index_sum, setting


log = logging.getLogger(__name__)

FORMAT_TAG = 'mdap-instance-v1'


class InvalidInstance(ValueError):
    def __str__(self):
        return "Invalid instance: " + super().__str__()


class FormatVersionError(InvalidInstance):
    pass


class CostLengthError(InvalidInstance):
    pass


class CapacityError(ValueError):
    def __str__(self):
        return "Capacity exceeded: " + super().__str__()


class ShapeError(ValueError):
    def __str__(self):
        return "Shape mismatch: " + super().__str__()


def check_capacity(n, d, limit=None):
    limit = setting('capacity', 'max_entries', limit)
    entries = n ** d
    if entries > limit:
        raise CapacityError(f"{n}^{d} = {entries} entries > limit {limit}")
    return entries


@dataclass(frozen=True)
class CostTensor:
    d: int
    n: int
    costs: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        if self.d < 2:
            raise InvalidInstance(f"dimension {self.d} < 2")
        if self.n < 1:
            raise InvalidInstance(f"side {self.n} < 1")
        costs = np.array(self.costs, dtype=np.float64).reshape(-1)
        if costs.size != self.n ** self.d:
            raise CostLengthError(
                    f"length {costs.size} != {self.n}^{self.d}")
        if not np.all(np.isfinite(costs)):
            raise InvalidInstance("costs must be finite")
        if np.any(costs < 0):
            raise InvalidInstance("costs must be nonnegative")
        costs.flags.writeable = False
        object.__setattr__(self, 'costs', costs)

    @property
    def array(self):
        """ Read-only view of the costs with shape (n,) * d """
        return self.costs.reshape((self.n,) * self.d)

    def flat_index(self, *coords):
        idx = 0
        for c in coords:
            idx = idx * self.n + c
        return idx

    def __getitem__(self, coords):
        return float(self.costs[self.flat_index(*coords)])

    def slab(self, i):
        """ The (n, n) matrix of a 3-dimensional instance with first coordinate i """
        return self.array[i]

    def __eq__(self, other):
        if not isinstance(other, CostTensor):
            return NotImplemented
        return (self.d == other.d and self.n == other.n
                and np.array_equal(self.costs, other.costs))

    __hash__ = None


def sample_tensor(n, d=3, seed=0, distribution=None, limit=None):
    """ Draw an instance with i.i.d. Exp(1) costs

    `distribution(rng, size)` may replace the exponential sampler.
    """
    if n < 1 or d < 2:
        raise InvalidInstance(f"need n >= 1 and d >= 2, got n={n}, d={d}")
    size = check_capacity(n, d, limit)
    rng = make_rng(seed)
    sampler = distribution or exp_variates
    costs = sampler(rng, size)
    log.debug("sampled n=%d d=%d seed=%d", n, d, seed)
    return CostTensor(d, n, costs, seed)


@dataclass
class PlanarAssignment:
    """ Triples (i, sigma[i], pi[i]) of a 3-dimensional planar assignment """
    n: int
    sigma: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=np.int64)
        self.pi = np.asarray(self.pi, dtype=np.int64)

    @classmethod
    def from_triples(cls, triples, n):
        sigma = np.full(n, -1, dtype=np.int64)
        pi = np.full(n, -1, dtype=np.int64)
        for i, j, k in triples:
            sigma[i] = j
            pi[i] = k
        return cls(n, sigma, pi)

    @property
    def triples(self):
        return [(i, int(self.sigma[i]), int(self.pi[i])) for i in range(self.n)]

    def cost(self, tensor):
        return index_sum(tensor[t] for t in self.triples)

    def is_valid(self):
        return is_planar_assignment(self.triples, self.n)


@dataclass
class LatinAssignment:
    """ Triples (i, j, K[i][j]) of a 3-dimensional axial assignment """
    n: int
    K: np.ndarray

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=np.int64)

    @property
    def triples(self):
        return [(i, j, int(self.K[i, j]))
                for i in range(self.n) for j in range(self.n)]

    def cost(self, tensor):
        return index_sum(tensor[t] for t in self.triples)

    def is_valid(self):
        return is_latin_assignment(self.K)


def is_planar_assignment(triples, n):
    """ True iff the triples hit every plane of [n]^3 exactly once """
    triples = list(triples)
    if len(triples) != n:
        return False
    for pos in range(3):
        seen = zeros(n)
        for t in triples:
            c = t[pos]
            if not 0 <= c < n or seen[c]:
                return False
            seen[c] = 1
    return True


def is_latin_assignment(K):
    """ True iff every row and every column of K is a permutation """
    K = np.asarray(K)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"expected an n x n array, got {K.shape}")
    n = K.shape[0]
    if K.size and (K.min() < 0 or K.max() >= n):
        raise ShapeError(f"entries must lie in 0..{n - 1}")
    expect = np.arange(n)
    rows_ok = np.all(np.sort(K, axis=1) == expect)
    cols_ok = np.all(np.sort(K, axis=0) == expect[:, None])
    return bool(rows_ok and cols_ok)


def write_instance(tensor, f):
    """ Write an instance document. repr() of a float round-trips exactly. """
    doc = {'format': FORMAT_TAG,
           'd': tensor.d,
           'n': tensor.n,
           'seed': tensor.seed,
           'costs': [float(c) for c in tensor.costs]}
    json.dump(doc, f)
    f.write('\n')


def save_instance(tensor, path):
    with open(path, 'w', encoding='utf-8') as f:
        write_instance(tensor, f)


def load_instance(path):
    try:
        with open(path, encoding='utf-8') as f:
            doc = json.load(f)
    except json.JSONDecodeError as ex:
        raise InvalidInstance(f"{path}: {ex}") from ex
    if not isinstance(doc, dict):
        raise InvalidInstance(f"{path}: top level must be an object")
    if doc.get('format') != FORMAT_TAG:
        raise FormatVersionError(
                f"format {doc.get('format')!r}, expected {FORMAT_TAG!r}")
    try:
        d, n, costs = int(doc['d']), int(doc['n']), doc['costs']
    except (KeyError, TypeError, ValueError) as ex:
        raise InvalidInstance(f"{path}: missing or bad field {ex}") from ex
    if not isinstance(costs, list):
        raise InvalidInstance(f"{path}: costs must be a list")
    if len(costs) != n ** d:
        raise CostLengthError(f"length {len(costs)} != {n}^{d}")
    seed = doc.get('seed')
    return CostTensor(d, n, np.array(costs, dtype=np.float64),
                      None if seed is None else int(seed))


@dataclass
class ExperimentRecord:
    algo: str
    n: int
    k: Optional[int]
    seed: int
    trial: int
    cost: float
    cost_upper: float = math.nan
    runtime_ms: float = 0.0
    escalations: int = 0
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def key(self):
        return (self.n, self.trial)

    @property
    def failed(self):
        return math.isnan(self.cost)
