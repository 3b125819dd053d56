""" BDTS(k): greedy start, alternating-tree augmentation, top-down finish

The solver runs against a cost source (mdap.oracle). Against a
RefreshableCosts it samples the random model lazily and reports the
upper-bound accounting; against FixedCosts it replays the same search on a
concrete tensor, where refreshes only raise the acceptance threshold to the
cumulative budget.

Every committed triple is charged its refreshed value plus the cumulative
offset at the moment it was exposed. Removing a triple withdraws its charge,
so the reported upper cost is the sum of the charges present at the end.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .model import CostTensor
from .oracle import FixedCosts, RefreshableCosts
from .partial import AltTree, PartialState, apply_tree
from .schedule import RetryPolicy, make_schedule, theta
from .util import index_sum, setting


log = logging.getLogger(__name__)


class Exhausted(RuntimeError):
    def __str__(self):
        return "Exhausted: " + super().__str__()


class ModeError(ValueError):
    def __str__(self):
        return "Bad mode: " + super().__str__()


class DimensionError(ValueError):
    def __str__(self):
        return "Bad dimension: " + super().__str__()


class _OutOfSteps(Exception):
    pass


# One way to fill a tree node. For a leaf, (a, b) are its 2- and
# 3-coordinates; otherwise they are the first coordinates of its children.
Witness = namedtuple('Witness', 'value a b charge origin')


def _block(costs, firsts, js, ks):
    """ Flat indices of firsts x js x ks, shape (len(firsts), len(js), len(ks)) """
    n = costs.n
    f = np.asarray(firsts, dtype=np.int64)[:, None, None]
    j = np.asarray(js, dtype=np.int64)[None, :, None]
    k = np.asarray(ks, dtype=np.int64)[None, None, :]
    return (f * n + j) * n + k


def _query_block(costs, idx, w):
    """ Refreshed values of a block, nan wherever above w """
    vals = costs.query(idx.reshape(-1), w).reshape(idx.shape)
    vals[vals > w] = np.nan
    return vals


def _witnesses(costs, idx, vals, labels2, labels3, limit=None):
    """ Per first coordinate, the entries within budget, cheapest first """
    offset = costs.offset
    out = []
    for row in range(vals.shape[0]):
        hits = np.argwhere(~np.isnan(vals[row]))
        if not len(hits):
            out.append([])
            continue
        a, b = hits[:, 0], hits[:, 1]
        v = vals[row][a, b]
        origin = costs.origin(idx[row][a, b])
        order = np.argsort(v, kind='stable')[:limit]
        out.append([Witness(float(v[o]), int(labels2[a[o]]), int(labels3[b[o]]),
                            float(v[o]) + offset, float(origin[o]))
                    for o in order])
    return out


def _pool_cap(nu, pools_cap):
    return max(1, min(math.ceil(nu), pools_cap))


def _cheapest(costs, i, js, ks, w):
    """ The cheapest triple of (i, js, ks), doubling the threshold from w """
    idx = _block(costs, [i], js, ks)[0]
    while True:
        vals = _query_block(costs, idx, w)
        if not np.all(np.isnan(vals)):
            break
        w *= 2
    a, b = np.unravel_index(np.nanargmin(vals), vals.shape)
    v = float(vals[a, b])
    origin = float(costs.origin(idx[a, b]))
    return Witness(v, int(js[a]), int(ks[b]), v + costs.offset, origin)


def _insert(state, i, wt):
    tree = AltTree(0, (-1, i), (None, (i, wt.a, wt.b)),
                   (0.0, wt.charge), (0.0, wt.origin))
    apply_tree(state, tree)


def greedy_phase(costs, sched):
    """ The Greedy Phase of a BDTS schedule: match 0..n1-1 from threshold w0 """
    return greedy_match(costs, sched.n1, sched.w0)


def greedy_match(costs, n1, w0=1.0):
    """ Match 0..n1-1 in order, each to its cheapest remaining (j, k)

    The minimum over the remaining block is found by querying thresholds
    w0, 2 w0, 4 w0, ... until something is exposed. A CostTensor is wrapped
    as a fixed cost source.
    """
    if isinstance(costs, CostTensor):
        costs = FixedCosts(costs)
    if w0 <= 0:
        raise ValueError(f"greedy threshold {w0} must be positive")
    state = PartialState(costs.n)
    for i in range(n1):
        wt = _cheapest(costs, i, state.free2_list(), state.free3_list(), w0)
        _insert(state, i, wt)
    log.debug("greedy phase matched %d, Z1=%g", n1, state.charge_total())
    return state


def find_tree(state, costs, i, w, k, pools_cap=None, extract_steps=None):
    """ Bottom-up search for a depth-k alternating tree rooted at i

    Candidate pools are built from the leaves up, every witness costing at
    most w, then one tree is extracted top-down with backtracking. Pools at
    one level are disjoint, but an inner pool may draw on indices already
    pooled lower down; the extraction keeps the tree's indices distinct.
    Pool caps follow the nu_l recurrence, so they widen as the budget
    escalates. Returns None if no tree is found.
    """
    pools_cap = setting('bdts', 'pools_cap', pools_cap)
    extract_steps = setting('bdts', 'extract_steps', extract_steps)
    matched = state.matched_list()
    free2, free3 = state.free2_list(), state.free3_list()
    nleaves = 2 ** k
    if len(matched) < 2 * nleaves - 2 or len(free2) < nleaves or w <= 0:
        return None

    idx = _block(costs, matched, free2, free3)
    wits = _witnesses(costs, idx, _query_block(costs, idx, w), free2, free3)
    ranked = sorted((ws[0].value, p, ws) for p, ws in zip(matched, wits) if ws)
    nu = len(ranked) / nleaves
    cap = _pool_cap(nu, pools_cap)
    pools = {r: {} for r in range(nleaves, 2 * nleaves)}
    for rank, (_, p, ws) in enumerate(ranked):
        pool = pools[nleaves + rank % nleaves]
        if len(pool) < cap:
            pool[p] = ws

    for depth in range(k - 1, 0, -1):
        nu = w * state.n * nu ** 2 / 2
        cap = _pool_cap(nu, pools_cap)
        offers = {}
        for r in range(2 ** depth, 2 ** (depth + 1)):
            left, right = list(pools[2 * r]), list(pools[2 * r + 1])
            if not left or not right:
                return None
            idx = _block(costs, matched, state.sigma[left], state.pi[right])
            wits = _witnesses(costs, idx, _query_block(costs, idx, w), left, right)
            offers[r] = sorted((ws[0].value, p, ws)
                               for p, ws in zip(matched, wits) if ws)
        pools.update(_deal(offers, cap))

    left, right = list(pools[2]), list(pools[3])
    if not left or not right:
        return None
    idx = _block(costs, [i], state.sigma[left], state.pi[right])
    root = _witnesses(costs, idx, _query_block(costs, idx, w), left, right)[0]
    if not root:
        return None
    pools[1] = {i: root}
    return _extract(state, pools, i, k, extract_steps)


def _deal(offers, cap):
    """ Disjoint pools from ranked (value, index, witnesses) offers

    Positions take turns claiming their cheapest offer not yet claimed,
    until each is full or out of offers.
    """
    pools = {r: {} for r in offers}
    taken = set()
    pos = dict.fromkeys(offers, 0)
    busy = list(offers)
    while busy:
        for r in list(busy):
            offer = offers[r]
            while pos[r] < len(offer) and offer[pos[r]][1] in taken:
                pos[r] += 1
            if pos[r] == len(offer) or len(pools[r]) >= cap:
                busy.remove(r)
                continue
            _, p, ws = offer[pos[r]]
            pools[r][p] = ws
            taken.add(p)
            pos[r] += 1
    return pools


def _extract(state, pools, i, k, steps):
    """ Pick one witness per node so that indices and leaf coordinates are distinct """
    size = 2 ** (k + 1)
    p = [-1] * size
    p[1] = i
    chosen = [None] * size
    inside = {i}
    used2, used3 = set(), set()
    budget = [steps]

    def fill(r):
        if r == size:
            return True
        leaf = 2 * r >= size
        for wt in pools[r][p[r]]:
            budget[0] -= 1
            if budget[0] < 0:
                raise _OutOfSteps
            if leaf:
                if wt.a in used2 or wt.b in used3:
                    continue
                used2.add(wt.a)
                used3.add(wt.b)
            else:
                if wt.a == wt.b or wt.a in inside or wt.b in inside:
                    continue
                p[2 * r], p[2 * r + 1] = wt.a, wt.b
                inside.update((wt.a, wt.b))
            chosen[r] = wt
            if fill(r + 1):
                return True
            if leaf:
                used2.discard(wt.a)
                used3.discard(wt.b)
            else:
                inside.difference_update((wt.a, wt.b))
        return False

    try:
        if not fill(1):
            return None
    except _OutOfSteps:
        log.debug("tree extraction for %d ran out of steps", i)
        return None
    leaf_coords = {r: (chosen[r].a, chosen[r].b) for r in range(size // 2, size)}
    charges = [0.0] + [wt.charge for wt in chosen[1:]]
    origins = [0.0] + [wt.origin for wt in chosen[1:]]
    return AltTree.build(state, k, p, leaf_coords, charges, origins)


@dataclass
class RoundStats:
    t: int
    budget: float
    target: int
    trees: int = 0
    escalations: int = 0


@dataclass
class BdtsReport:
    n: int
    k: int
    mode: str
    z1: float = 0.0
    main_cost: float = 0.0
    main_added: float = 0.0
    final_cost: float = 0.0
    cost_upper: float = 0.0
    cost: float = 0.0
    escalations: int = 0
    rounds: list = field(default_factory=list)
    trace: list = field(default_factory=list, repr=False)

    @property
    def total(self):
        return self.cost_upper

    def recompute_upper(self):
        """ The upper cost replayed from the add/remove trace """
        charges = {}
        for kind, i, _, _, charge in self.trace:
            if kind == 'add':
                charges[i] = charge
            else:
                del charges[i]
        return index_sum(charges[i] for i in sorted(charges))

    def summary(self):
        return {'n': self.n,
                'k': self.k,
                'theta': theta(self.k),
                'mode': self.mode,
                'z1': self.z1,
                'main_cost': self.main_cost,
                'final_cost': self.final_cost,
                'cost_upper': self.cost_upper,
                'cost': self.cost,
                'escalations': self.escalations,
                'rounds': len(self.rounds)}


def main_phase(state, costs, sched, retry=None, report=None,
               pools_cap=None, extract_steps=None):
    """ Grow the greedy matching one alternating tree at a time

    Round t refreshes by w[t-1] and augments with budget w[t] until at most
    x[t+1] indices are unmatched. Budgets escalate per the retry policy when
    no tree is found.
    """
    retry = retry or RetryPolicy()
    k = sched.k
    nleaves = 2 ** k
    before = state.charge_total()
    for t in range(1, sched.rounds + 1):
        unmatched = state.n - len(state)
        if unmatched < nleaves or len(state) < 2 * nleaves - 2:
            break
        costs.refresh(sched.w[t - 1])
        stats = RoundStats(t, sched.w[t], sched.x[t + 1])
        while unmatched > stats.target and unmatched >= nleaves:
            i = state.unmatched()[0]
            for e, budget in retry.budgets(stats.budget):
                tree = find_tree(state, costs, i, budget, k,
                                 pools_cap, extract_steps)
                if tree is not None:
                    break
                log.info("round %d: no tree for %d at w=%g, escalating",
                         t, i, budget)
            else:
                raise Exhausted(f"round {t}: no tree for index {i} after "
                                f"{retry.cap} escalations")
            stats.escalations += e
            if report is not None:
                report.main_added += tree.charge()
            apply_tree(state, tree)
            stats.trees += 1
            unmatched -= 1
        log.debug("round %d: w=%g target=%d trees=%d escalations=%d",
                  t, stats.budget, stats.target, stats.trees, stats.escalations)
        if report is not None:
            report.rounds.append(stats)
            report.escalations += stats.escalations
    if report is not None:
        report.main_cost = state.charge_total() - before


def _final_depth(k, matched):
    depth = 0
    while depth < k and 2 ** (depth + 2) - 2 <= matched:
        depth += 1
    return depth


def _pairs(costs, firsts, matched, sigma, pi, w, cap):
    """ Child pairs (a, b) of distinct matched indices per first coordinate """
    idx = _block(costs, firsts, sigma[matched], pi[matched])
    wits = _witnesses(costs, idx, _query_block(costs, idx, w), matched, matched,
                      limit=2 * cap + 2)
    return {c: [wt for wt in ws if wt.a != wt.b and c not in (wt.a, wt.b)][:cap]
            for c, ws in zip(firsts, wits)}


def _frontier(lists, limit):
    """ Distinct child indices across the pair lists, cheapest first """
    ranked = sorted((wt.value, x) for ws in lists for wt in ws
                    for x in (wt.a, wt.b))
    out = []
    for _, x in ranked:
        if x not in out:
            out.append(x)
            if len(out) == limit:
                break
    return out


def _close_leaves(state, costs, leaves, p, w, steps):
    """ Give every leaf distinct 2- and 3-coordinates within budget """
    size = 2 * len(leaves)
    displaced = range(2, size)
    avail2 = state.free2_list() + [int(state.sigma[p[r]]) for r in displaced
                                   if r % 2 == 1]
    avail3 = state.free3_list() + [int(state.pi[p[r]]) for r in displaced
                                   if r % 2 == 0]
    avail2.sort()
    avail3.sort()
    firsts = [p[r] for r in leaves]
    idx = _block(costs, firsts, avail2, avail3)
    wits = _witnesses(costs, idx, _query_block(costs, idx, w), avail2, avail3)
    if not all(wits):
        return None
    chosen = [None] * len(leaves)
    used2, used3 = set(), set()
    budget = [steps]

    def fill(n):
        if n == len(leaves):
            return True
        for wt in wits[n]:
            budget[0] -= 1
            if budget[0] < 0:
                raise _OutOfSteps
            if wt.a in used2 or wt.b in used3:
                continue
            used2.add(wt.a)
            used3.add(wt.b)
            chosen[n] = wt
            if fill(n + 1):
                return True
            used2.discard(wt.a)
            used3.discard(wt.b)
        return False

    try:
        return chosen if fill(0) else None
    except _OutOfSteps:
        return None


def _final_tree(state, costs, i, w, depth, final_cap, attempts, steps):
    """ Build one tree top-down: a refresh per level, leaves closed last """
    matched = state.matched_list()
    matched_arr = np.asarray(matched, dtype=np.int64)
    costs.refresh(w)
    pairs = _pairs(costs, [i], matched_arr, state.sigma, state.pi, w, final_cap)
    frontier = _frontier(pairs.values(), 2 * final_cap)
    for _ in range(2, depth + 1):
        costs.refresh(w)
        todo = [c for c in frontier if c not in pairs]
        if todo:
            pairs.update(_pairs(costs, todo, matched_arr, state.sigma,
                                state.pi, w, final_cap))
        frontier = _frontier((pairs[c] for c in frontier), 2 * final_cap)

    size = 2 ** (depth + 1)
    leaves = range(size // 2, size)
    p = [-1] * size
    p[1] = i
    chosen = [None] * size
    inside = {i}
    tries = [attempts]
    found = []

    def skeleton(r):
        if r == size // 2:
            tries[0] -= 1
            closed = _close_leaves(state, costs, leaves, p, w, steps)
            if closed is not None:
                found.append(closed)
                return True
            return tries[0] <= 0
        for wt in pairs.get(p[r], ()):
            if wt.a in inside or wt.b in inside:
                continue
            p[2 * r], p[2 * r + 1] = wt.a, wt.b
            inside.update((wt.a, wt.b))
            chosen[r] = wt
            if skeleton(r + 1):
                return True
            inside.difference_update((wt.a, wt.b))
        return False

    skeleton(1)
    if not found:
        return None
    closed = found[0]
    leaf_coords = {r: (wt.a, wt.b) for r, wt in zip(leaves, closed)}
    nodes = chosen[:size // 2] + closed
    charges = [0.0] + [wt.charge for wt in nodes[1:]]
    origins = [0.0] + [wt.origin for wt in nodes[1:]]
    return AltTree.build(state, depth, p, leaf_coords, charges, origins)


def final_phase(state, costs, sched, retry=None, report=None, final_cap=None,
                attempts=None, extract_steps=None):
    """ Add the remaining indices one at a time with top-down trees

    Tree depth is k, reduced while too few indices are matched to fill it;
    at depth 0 the index is inserted at its cheapest unused (j, k).
    """
    retry = retry or RetryPolicy()
    final_cap = setting('bdts', 'final_cap', final_cap)
    attempts = setting('bdts', 'final_attempts', attempts)
    steps = setting('bdts', 'extract_steps', extract_steps)
    w = sched.final_budget
    before = state.charge_total()
    for i in state.unmatched():
        depth = _final_depth(sched.k, len(state))
        if depth == 0:
            costs.refresh(w)
            wt = _cheapest(costs, i, state.free2_list(), state.free3_list(), w)
            _insert(state, i, wt)
            log.debug("final phase: inserted %d directly", i)
            continue
        for e, budget in retry.budgets(w):
            tree = _final_tree(state, costs, i, budget, depth, final_cap,
                               attempts, steps)
            if tree is not None:
                break
            log.info("final phase: no depth-%d tree for %d at w=%g, escalating",
                     depth, i, budget)
        else:
            raise Exhausted(f"final phase: no tree for index {i} after "
                            f"{retry.cap} escalations")
        apply_tree(state, tree)
        if report is not None:
            report.escalations += e
        log.debug("final phase: added %d with a depth-%d tree", i, depth)
    if report is not None:
        report.final_cost = state.charge_total() - before


def bdts(source, k, mode='distributional', retry=None, seed=0, tail=None,
         final_constant=None, pools_cap=None, final_cap=None, attempts=None,
         extract_steps=None, round_fraction=None):
    """ Solve a 3-dimensional planar instance with BDTS(k)

    `source` is a CostTensor (fixed mode) or a side length n (distributional
    mode, costs drawn lazily from `seed`). Returns the PlanarAssignment and a
    BdtsReport.
    """
    if mode not in ('distributional', 'fixed'):
        raise ModeError(f"unknown mode {mode!r}")
    if isinstance(source, CostTensor):
        if source.d != 3:
            raise DimensionError(f"planar BDTS needs d=3, got d={source.d}")
        if mode != 'fixed':
            raise ModeError("a concrete tensor can only be solved in fixed mode")
        costs = FixedCosts(source)
    else:
        if mode != 'distributional':
            raise ModeError("fixed mode needs a concrete tensor")
        if isinstance(source, tuple):
            source, seed = source
        costs = RefreshableCosts(int(source), seed)
    n = costs.n
    sched = make_schedule(n, k, tail, final_constant, round_fraction)
    report = BdtsReport(n, k, mode)

    state = greedy_phase(costs, sched)
    report.z1 = state.charge_total()
    main_phase(state, costs, sched, retry, report, pools_cap, extract_steps)
    log.debug("main phase done: %d of %d matched", len(state), n)
    final_phase(state, costs, sched, retry, report, final_cap, attempts,
                extract_steps)

    report.cost_upper = state.charge_total()
    report.cost = state.origin_total()
    report.trace = state.trace
    log.info("bdts n=%d k=%d %s: cost %g, upper %g, %d escalations",
             n, k, mode, report.cost, report.cost_upper, report.escalations)
    return state.to_assignment(), report
