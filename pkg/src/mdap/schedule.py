""" Parameter schedule and retry policy for BDTS(k)

The schedule is indexed like the round structure it drives: x[0] = n (all
indices unmatched before the Greedy Phase), x[1] = x1 = n - n1 is what the
Greedy Phase leaves, and round t of the Main Phase takes the unmatched count
from x[t] down to x[t + 1] with budget w[t]. w[0] is the Greedy Phase
threshold w0 and W[t] = w[0] + ... + w[t].

Each round refreshes once and then adds `step` x[t] indices, so the targets
shrink by beta = 1 - step per round. With step = alpha(k) a round adds less
than one index until x1 is in the thousands, and every refresh is paid by
all later trees; the packaged default is a much coarser step.
"""

import logging
import math
from dataclasses import dataclass
from itertools import accumulate

from .util import setting


log = logging.getLogger(__name__)


class ScheduleError(ValueError):
    def __str__(self):
        return "Bad schedule: " + super().__str__()


def theta(k):
    """ The cost exponent theta_k = 1 / (2^(k+1) - 1) """
    return 1 / (2 ** (k + 1) - 1)


def alpha(k):
    return 2 ** (-2 * k - 2) * (1 - math.sqrt(2 / 3))


@dataclass(frozen=True)
class BdtsSchedule:
    n: int
    k: int
    theta: float
    n1: int
    x1: int
    alpha: float
    step: float
    beta: float
    L: float
    t0: int
    x: tuple
    w: tuple
    W: tuple
    final_budget: float

    @property
    def rounds(self):
        """ Number of Main Phase rounds that can make progress """
        return max(0, min(self.t0, len(self.x) - 2))

    @property
    def w0(self):
        return self.w[0]

    def summary(self):
        return {'n': self.n,
                'k': self.k,
                'theta': self.theta,
                'n1': self.n1,
                'x1': self.x1,
                'step': self.step,
                't0': self.t0,
                'rounds': self.rounds,
                'w0': self.w[0],
                'W_final': self.W[-1],
                'final_budget': self.final_budget}


def _targets(x1, beta, t0, floor):
    """ round(beta^(t-1) x1) for t = 1..t0+1, repeats dropped

    The sequence stops after its first value below `floor`.
    """
    out = []
    for t in range(1, t0 + 2):
        x = max(1, round(beta ** (t - 1) * x1))
        if out and x >= out[-1]:
            continue
        out.append(x)
        if x < floor:
            break
    return out


def make_schedule(n, k, tail=None, final_constant=None, round_fraction=None):
    L = setting('bdts', 'tail_constant', tail)
    K = setting('bdts', 'final_constant', final_constant)
    step = setting('bdts', 'round_fraction', round_fraction)
    if n < 4:
        raise ScheduleError(f"n={n} < 4")
    if k < 1:
        raise ScheduleError(f"k={k} < 1")
    if not 0 < step < 1:
        raise ScheduleError(f"round fraction {step} outside (0, 1)")
    th = theta(k)
    rest = n ** (1 - th)
    if rest < 2:
        raise ScheduleError(f"k={k} too large for n={n}: n^(1-theta)={rest:.3f} < 2")

    x1 = max(1, round(rest))
    n1 = n - x1
    b = 1 - step
    t0 = max(0, math.ceil(math.log(x1 / L) / math.log(1 / b))) if x1 > L else 0

    x = [n] + _targets(x1, b, t0, 2 ** k)
    logn = math.log(n)
    w = [2 * n ** (-2 * (1 - th)) * logn]
    w += [2 * xt ** (-1 - th) * n ** (th - 1) * logn ** th for xt in x[1:]]
    W = list(accumulate(w))
    final = K * logn ** th / n ** (1 - th)

    sched = BdtsSchedule(n=n, k=k, theta=th, n1=n1, x1=x1, alpha=alpha(k),
                         step=step, beta=b, L=L, t0=t0, x=tuple(x),
                         w=tuple(w), W=tuple(W),
                         final_budget=final)
    log.debug("schedule n=%d k=%d theta=%.5f n1=%d t0=%d rounds=%d",
              n, k, th, n1, t0, sched.rounds)
    return sched


@dataclass(frozen=True)
class RetryPolicy:
    """ Budget escalation: w, w*factor, ..., w*factor^cap """
    cap: int = None
    factor: float = None

    def __post_init__(self):
        object.__setattr__(self, 'cap', setting('retry', 'cap', self.cap))
        object.__setattr__(self, 'factor', setting('retry', 'factor', self.factor))
        if self.cap < 0 or self.factor <= 1:
            raise ScheduleError(f"retry cap {self.cap} / factor {self.factor}")

    def budgets(self, w):
        for e in range(self.cap + 1):
            yield e, w * self.factor ** e
