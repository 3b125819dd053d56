import csv
import math
from functools import lru_cache
from os.path import dirname, realpath

import numpy as np
import yaml


libroot = dirname(realpath(__file__))
csv.register_dialect(
        'records',
        delimiter=',',
        lineterminator='\n',
        quoting=csv.QUOTE_MINIMAL,
        strict=True,
        )

MASK64 = (1 << 64) - 1


def readyaml(path):
    with open(path) as f:
        return yaml.safe_load(f) or {}


@lru_cache()
def defaults():
    """ The packaged default settings, see data/defaults.yaml """
    return readyaml(f'{libroot}/data/defaults.yaml')


def setting(section, key, override=None):
    """ Return `override` unless it is None, else the packaged default. """
    if override is not None:
        return override
    return defaults()[section][key]


def splitmix64(x):
    """ The splitmix64 finaliser on a 64-bit word. """
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix_seed(master, *words):
    """ Derive a 64-bit seed from a master seed and any number of words

    h = splitmix64(master), then h = splitmix64(h ^ word) for each word in
    order. The derivation is part of the output format and must not change.
    """
    h = splitmix64(master & MASK64)
    for word in words:
        h = splitmix64(h ^ (word & MASK64))
    return h


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def exp_variates(rng, size=None):
    """ Exp(1) variates by inverse CDF, -ln(1 - U) """
    return -np.log1p(-rng.random(size))


def index_sum(values):
    """ Sum floats strictly in index order

    Matching and enumeration code compare costs for exact equality, so all of
    it sums the same way.
    """
    total = 0.0
    for v in values:
        total += float(v)
    return total


def harmonic(n):
    return math.fsum(1.0 / i for i in range(1, n + 1))


def dump(mapping):
    """ Format a mapping as aligned `key: value` lines """
    out = ''
    colw = max(len(str(k)) for k in mapping) + 2
    for key, val in mapping.items():
        key = f'{key}:'
        out += f'{key:{colw}}{val}\n'
    return out
