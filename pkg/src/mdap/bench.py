""" Monte-Carlo harness: repeated trials, record files, scaling fits

Trial (n, t) of an experiment solves the instance drawn from
mix_seed(master_seed, n, t), so results do not depend on the order or the
process in which trials run.
"""

import csv
import json
import logging
import math
import os
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .bdts import Exhausted
from .model import ExperimentRecord
from .solvers import Solver
from .util import mix_seed, readyaml, setting


log = logging.getLogger(__name__)

FIELDS = ['algo', 'n', 'k', 'seed', 'trial', 'cost', 'cost_upper',
          'runtime_ms', 'escalations']
FORMATS = ('csv', 'jsonl')


class ConfigError(ValueError):
    def __str__(self):
        return "Bad experiment config: " + super().__str__()


class DegenerateFit(ValueError):
    def __str__(self):
        return "Degenerate fit: " + super().__str__()


@dataclass
class ExperimentConfig:
    algo: str
    ns: list
    k: Optional[int] = None
    trials: int = 1
    seed: int = 0
    mode: str = 'distributional'
    retries: Optional[int] = None
    restarts: int = 1
    out: Optional[str] = None
    format: Optional[str] = None
    jobs: Optional[int] = None
    timing: Optional[bool] = None

    def __post_init__(self):
        self.format = setting('bench', 'format', self.format)
        self.jobs = setting('bench', 'jobs', self.jobs)
        self.timing = setting('bench', 'timing', self.timing)
        if self.algo not in Solver.supported():
            raise ConfigError(f"unknown algorithm {self.algo!r}")
        if isinstance(self.ns, int):
            self.ns = [self.ns]
        if not self.ns:
            raise ConfigError("no n values")
        self.ns = sorted(set(int(n) for n in self.ns))
        if self.ns[0] < 1:
            raise ConfigError(f"n={self.ns[0]} < 1")
        if self.trials < 1:
            raise ConfigError(f"trials={self.trials} < 1")
        if self.mode not in ('distributional', 'fixed'):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs={self.jobs} < 1")

    @classmethod
    def from_yaml(cls, path, **overrides):
        """ Load a config file; overrides that are not None win """
        doc = readyaml(path)
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: expected a mapping")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
        doc.update((k, v) for k, v in overrides.items() if v is not None)
        try:
            return cls(**doc)
        except TypeError as ex:
            raise ConfigError(f"{path}: {ex}") from ex

    def solver(self):
        return Solver.make(self.algo, k=self.k, mode=self.mode,
                           retries=self.retries, restarts=self.restarts)


def trial_seed(master, n, trial):
    return mix_seed(master, n, trial)


def run_trial(config, n, trial):
    """ One record; an Exhausted solver gives nan costs """
    seed = trial_seed(config.seed, n, trial)
    solver = config.solver()
    start = time.perf_counter()
    try:
        outcome = solver.run(n, seed)
        cost, upper = outcome.cost, outcome.cost_upper
        escalations, extra = outcome.escalations, outcome.extra
    except Exhausted as ex:
        log.warning("%s n=%d trial %d: %s", config.algo, n, trial, ex)
        cost = upper = math.nan
        escalations, extra = 0, {}
    elapsed = (time.perf_counter() - start) * 1000 if config.timing else 0.0
    return ExperimentRecord(config.algo, n, config.k, seed, trial, cost, upper,
                            elapsed, escalations, extra)


def run_trials(config, on_record=None):
    """ Run every (n, trial) pair and return the records sorted by (n, trial)

    `on_record` is called with each record as it completes.
    """
    tasks = [(n, t) for n in config.ns for t in range(config.trials)]
    records = []
    if config.jobs == 1:
        for n, t in tasks:
            record = run_trial(config, n, t)
            records.append(record)
            if on_record:
                on_record(record)
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(run_trial, config, n, t) for n, t in tasks]
            for future in as_completed(futures):
                record = future.result()
                records.append(record)
                if on_record:
                    on_record(record)
    records.sort(key=lambda r: r.key)
    failed = sum(r.failed for r in records)
    log.info("%s: %d records, %d failed", config.algo, len(records), failed)
    return records


def _row(record):
    return {'algo': record.algo,
            'n': record.n,
            'k': '' if record.k is None else record.k,
            'seed': record.seed,
            'trial': record.trial,
            'cost': repr(float(record.cost)),
            'cost_upper': repr(float(record.cost_upper)),
            'runtime_ms': repr(float(record.runtime_ms)),
            'escalations': record.escalations}


class RecordWriter:
    """ Writes records one at a time, flushing after each """

    def __init__(self, f, fmt='csv'):
        if fmt not in FORMATS:
            raise ConfigError(f"unknown format {fmt!r}")
        self.f = f
        self.fmt = fmt
        if fmt == 'csv':
            self._csv = csv.DictWriter(f, FIELDS, dialect='records')
            self._csv.writeheader()

    def write(self, record):
        if self.fmt == 'csv':
            self._csv.writerow(_row(record))
        else:
            doc = asdict(record)
            doc.pop('extra')
            self.f.write(json.dumps(doc) + '\n')
        self.f.flush()


def write_records(records, f, fmt='csv'):
    writer = RecordWriter(f, fmt)
    for record in records:
        writer.write(record)


def run_to_file(config, path, on_record=None):
    """ Run the trials, streaming each record to `path` as it completes

    Once every trial is done the file is replaced by the records sorted by
    (n, trial), so the finished file does not depend on completion order.
    """
    with open(path, 'w', newline='') as f:
        writer = RecordWriter(f, config.format)

        def emit(record):
            writer.write(record)
            if on_record:
                on_record(record)

        records = run_trials(config, emit)
    tmp = path + '.tmp'
    with open(tmp, 'w', newline='') as f:
        write_records(records, f, config.format)
    os.replace(tmp, path)
    return records


def _record(doc):
    k = doc['k']
    return ExperimentRecord(algo=doc['algo'],
                            n=int(doc['n']),
                            k=None if k in ('', None) else int(k),
                            seed=int(doc['seed']),
                            trial=int(doc['trial']),
                            cost=float(doc['cost']),
                            cost_upper=float(doc['cost_upper']),
                            runtime_ms=float(doc['runtime_ms']),
                            escalations=int(doc['escalations']))


def read_records(f, fmt='csv'):
    if fmt == 'csv':
        return [_record(row) for row in csv.DictReader(f, dialect='records')]
    if fmt == 'jsonl':
        return [_record(json.loads(line)) for line in f if line.strip()]
    raise ConfigError(f"unknown format {fmt!r}")


def group_means(records, metric='cost'):
    """ Mean of `metric` per n over the trials that did not fail """
    if metric not in ('cost', 'cost_upper'):
        raise ConfigError(f"unknown metric {metric!r}")
    groups = defaultdict(list)
    for record in records:
        value = getattr(record, metric)
        if not math.isnan(value):
            groups[record.n].append(value)
    return {n: math.fsum(vals) / len(vals)
            for n, vals in sorted(groups.items())}


def fit_scaling(data, metric='cost'):
    """ Least-squares fit of log(mean cost) against log(n)

    `data` is a mapping of n to mean cost, or records to average per n.
    Returns (slope, intercept, rms residual).
    """
    means = dict(data) if isinstance(data, dict) else group_means(data, metric)
    if len(means) < 3:
        raise DegenerateFit(f"{len(means)} distinct n values, need 3")
    if any(m <= 0 for m in means.values()):
        raise DegenerateFit("mean costs must be positive")
    x = np.log(np.array(sorted(means), dtype=float))
    y = np.log(np.array([means[n] for n in sorted(means)], dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2)))
