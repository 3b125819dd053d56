from .model import (CostTensor, PlanarAssignment, LatinAssignment,
                    ExperimentRecord, InvalidInstance, sample_tensor,
                    is_planar_assignment, is_latin_assignment,
                    save_instance, load_instance)
from .oracle import RefreshableCosts, FixedCosts
from .matching import MatchMatrix, min_cost_matching, brute_force_matching
from .bdts import Exhausted, bdts as solve_bdts
from .axial import axial_greedy
from .solvers import Solver

try:
    from .version import version
except ImportError:
    version = 'UNKNOWN'
