import logging
import math
from abc import abstractmethod
from dataclasses import dataclass, field
from typing import Any

from .axial import axial_greedy
from .bdts import bdts
from .bilinear import bilinear_restarts
from .exact import exact_axial, exact_planar
from .matching import MatchMatrix, brute_force_matching, min_cost_matching
from .model import PlanarAssignment, ShapeError, sample_tensor
from .schedule import RetryPolicy


log = logging.getLogger(__name__)


@dataclass
class Outcome:
    """ What one solver run produced """
    solution: Any
    cost: float
    cost_upper: float = math.nan
    escalations: int = 0
    extra: dict = field(default_factory=dict)

    def lines(self):
        """ The solution as printable text lines """
        sol = self.solution
        if hasattr(sol, 'K'):
            return [' '.join(str(int(k)) for k in row) for row in sol.K]
        if hasattr(sol, 'triples'):
            return [f'{i} {j} {k}' for i, j, k in sol.triples]
        return [f'{j} {k}' for j, k in enumerate(sol)]


class Solver:
    _solvers = {}
    # This must be provided by subclasses
    sid = None  # Solver ID
    d = 3       # Dimension of the instances it solves

    def __init_subclass__(cls):
        if not cls.sid:
            raise ValueError(f"{cls} didn't specify a solver name")
        cls._solvers[cls.sid] = cls

    @classmethod
    def make(cls, sid, **options):
        try:
            solver = cls._solvers[sid]
        except KeyError:
            raise ValueError(f"unknown solver {sid!r}") from None
        return solver(**options)

    @classmethod
    def supported(cls):
        return list(cls._solvers)

    def __init__(self, k=None, mode=None, retries=None, restarts=1, **options):
        self.k = k
        self.mode = mode
        self.retries = retries
        self.restarts = restarts
        self.options = options

    def instance(self, n, seed):
        return sample_tensor(n, self.d, seed)

    def run(self, n, seed):
        """ Solve a fresh random instance drawn from `seed` """
        return self.solve(self.instance(n, seed), seed)

    def check(self, tensor):
        if tensor.d != self.d:
            raise ShapeError(f"{self.sid} needs d={self.d}, got d={tensor.d}")

    @abstractmethod
    def solve(self, tensor, seed=0):
        """ Solve a concrete instance

        Subclasses must implement this and return an Outcome.
        """
        raise NotImplementedError


class PlanarBdts(Solver):
    sid = 'planar-bdts'

    @property
    def retry(self):
        return RetryPolicy(cap=self.retries)

    def run(self, n, seed):
        if self.mode == 'fixed':
            return super().run(n, seed)
        solution, report = bdts(n, self.k or 1, 'distributional', self.retry,
                                seed=seed, **self.options)
        return self._outcome(solution, report)

    def solve(self, tensor, seed=0):
        self.check(tensor)
        solution, report = bdts(tensor, self.k or 1, 'fixed', self.retry,
                                **self.options)
        return self._outcome(solution, report)

    def _outcome(self, solution, report):
        return Outcome(solution, report.cost, report.cost_upper,
                       report.escalations, report.summary())


class AxialGreedy(Solver):
    sid = 'axial-greedy'

    def solve(self, tensor, seed=0):
        self.check(tensor)
        solution, report = axial_greedy(tensor)
        return Outcome(solution, report.total,
                       extra={'slices': report.slices, 'bounds': report.bounds})


class Bilinear(Solver):
    sid = 'bilinear'

    def solve(self, tensor, seed=0):
        self.check(tensor)
        best, finals = bilinear_restarts(tensor, self.restarts, seed,
                                         **self.options)
        solution = PlanarAssignment(tensor.n, best.y, best.z)
        return Outcome(solution, best.Z,
                       extra={'iterations': best.iteration,
                              'converged': best.converged,
                              'restarts': len(finals)})


class Assignment(Solver):
    sid = 'assignment'
    d = 2

    def solve(self, tensor, seed=0):
        self.check(tensor)
        m = min_cost_matching(MatchMatrix(tensor.array))
        return Outcome(m.perm, m.cost)


class ExactPlanar(Solver):
    sid = 'exact-planar'

    def solve(self, tensor, seed=0):
        self.check(tensor)
        solution, cost = exact_planar(tensor, self.options.get('limit'))
        return Outcome(solution, cost)


class ExactAxial(Solver):
    sid = 'exact-axial'

    def solve(self, tensor, seed=0):
        self.check(tensor)
        solution, cost = exact_axial(tensor, self.options.get('limit'))
        return Outcome(solution, cost)


class ExactMatching(Solver):
    sid = 'exact-matching'
    d = 2

    def solve(self, tensor, seed=0):
        self.check(tensor)
        m = brute_force_matching(MatchMatrix(tensor.array))
        return Outcome(m.perm, m.cost)