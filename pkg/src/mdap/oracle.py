""" Cost sources for the planar solvers

A cost source answers threshold queries on flat triple indices and can be
refreshed. Both sources share the interface used by mdap.bdts:

    query(idx, w)   refreshed values of the entries, nan where known to lie
                    above w (RefreshableCosts also returns exposed values
                    above w; callers mask them)
    refresh(w)      advance the cumulative offset by w
    offset          cumulative offset W_acc
    origin(idx)     original (pre-refresh) values of exposed entries

RefreshableCosts reveals a random Exp(1) instance lazily. FixedCosts wraps a
concrete tensor; its refreshed value of an entry is the actual cost minus the
offset, so a budget w accepts actual costs up to offset + w.
"""

import logging
import math

import numpy as np

from .model import CostTensor, check_capacity
from .util import make_rng, exp_variates


log = logging.getLogger(__name__)


class RefreshableCosts:
    """ Lazily revealed Exp(1) costs with memoryless refreshes

    Every entry is either exposed with a known value, or hidden with a known
    lower bound. A fresh entry is hidden with bound 0.
    """

    def __init__(self, n, seed=0, d=3, limit=None):
        self.n = n
        self.d = d
        self.size = check_capacity(n, d, limit)
        self.seed = seed
        self.rng = make_rng(seed)
        self.offset = 0.0
        self._value = np.zeros(self.size)
        self._exposed = np.zeros(self.size, dtype=bool)
        self._origin = np.full(self.size, np.nan)

    def flat_index(self, *coords):
        idx = 0
        for c in coords:
            idx = idx * self.n + c
        return idx

    def _check(self, idx):
        if idx.size and (idx.min() < 0 or idx.max() >= self.size):
            raise IndexError(f"triple index out of range 0..{self.size - 1}")

    def state(self, e):
        """ ('exposed', value) or ('hidden', bound) """
        self._check(np.asarray([e]))
        kind = 'exposed' if self._exposed[e] else 'hidden'
        return kind, float(self._value[e])

    def set_state(self, e, kind, value):
        """ Force entry e to ('exposed', value) or ('hidden', bound) """
        if kind not in ('exposed', 'hidden'):
            raise ValueError(f"unknown entry state {kind!r}")
        if not (value >= 0 and math.isfinite(value)):
            raise ValueError(f"entry value {value} must be finite and >= 0")
        self._check(np.asarray([e]))
        self._value[e] = value
        self._exposed[e] = kind == 'exposed'
        if kind == 'exposed' and math.isnan(self._origin[e]):
            self._origin[e] = value + self.offset

    def query(self, idx, w):
        """ Vectorised threshold query on distinct flat indices """
        idx = np.asarray(idx, dtype=np.int64).reshape(-1)
        self._check(idx)
        value = self._value[idx]
        exposed = self._exposed[idx]
        out = np.where(exposed, value, np.nan)

        pending = ~exposed & (value < w)
        if pending.any():
            draws = value[pending] + exp_variates(self.rng, int(pending.sum()))
            hit = draws <= w
            where = idx[pending]
            hits = where[hit]
            self._value[hits] = draws[hit]
            self._exposed[hits] = True
            unknown = np.isnan(self._origin[hits])
            self._origin[hits[unknown]] = draws[hit][unknown] + self.offset
            self._value[where[~hit]] = w

            landed = out[pending]
            landed[hit] = draws[hit]
            out[pending] = landed
        return out

    def oracle_query(self, e, w):
        """ Single-entry query: the exposed value, or None if above w """
        v = self.query([e], w)[0]
        return None if math.isnan(v) else float(v)

    def refresh(self, w):
        """ Replace the costs by C' with C <= C' + w, C' i.i.d. Exp(1)

        Exposed values at most w become fresh hidden entries, larger exposed
        values drop by w, hidden bounds drop by w (not below zero).

        A hidden entry whose original is still open and whose bound b is
        below w has its current value X in (b, w] with probability
        1 - exp(b - w). That branch is decided here: X is drawn from b plus
        an exponential, and if it lands at or below w the entry's original
        becomes X plus the offset before this refresh. Otherwise X - w is
        again Exp(1) and the original stays tied to the next exposure.
        """
        if w < 0:
            raise ValueError(f"refresh amount {w} < 0")
        if w == 0:
            return
        value = self._value
        open_ = np.flatnonzero(~self._exposed & np.isnan(self._origin)
                               & (value < w))
        if open_.size:
            draws = value[open_] + exp_variates(self.rng, open_.size)
            settled = draws <= w
            self._origin[open_[settled]] = draws[settled] + self.offset
        fresh = self._exposed & (value <= w)
        value -= w
        np.maximum(value, 0.0, out=value, where=~self._exposed)
        value[fresh] = 0.0
        self._exposed[fresh] = False
        self.offset += w
        log.debug("refresh %g, offset now %g, %d entries renewed",
                  w, self.offset, int(fresh.sum()))

    def origin(self, idx):
        return self._origin[np.asarray(idx, dtype=np.int64)]


class FixedCosts:
    """ A concrete tensor behind the cost source interface """

    def __init__(self, tensor: CostTensor):
        self.tensor = tensor
        self.n = tensor.n
        self.d = tensor.d
        self.size = tensor.costs.size
        self.offset = 0.0

    flat_index = RefreshableCosts.flat_index

    def query(self, idx, w):
        idx = np.asarray(idx, dtype=np.int64).reshape(-1)
        value = self.tensor.costs[idx] - self.offset
        return np.where(value <= w, value, np.nan)

    def oracle_query(self, e, w):
        v = self.query([e], w)[0]
        return None if math.isnan(v) else float(v)

    def refresh(self, w):
        if w < 0:
            raise ValueError(f"refresh amount {w} < 0")
        self.offset += w

    def origin(self, idx):
        return self.tensor.costs[np.asarray(idx, dtype=np.int64)]
