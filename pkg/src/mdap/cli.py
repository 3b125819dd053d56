import sys
import argparse
import logging
from functools import partial

import mdap
from . import bench
from .axial import axial_lower_bound, dfm_slice_bound
from .exact import parisi_value, planar_row_min_lower_bound
from .model import load_instance, sample_tensor, save_instance, write_instance
from .solvers import Solver
from .util import dump, setting


log = logging.getLogger(__name__)

SOLVE = {'planar-bdts': 'planar-bdts',
         'axial-greedy': 'axial-greedy',
         'bilinear': 'bilinear'}
EXACT = {'planar': 'exact-planar',
         'axial': 'exact-axial',
         'matching': 'exact-matching'}
BOUNDS = ['parisi', 'planar-rowmin', 'axial-slices', 'dfm']


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """ An argument parser that reports usage errors instead of exiting """
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _parser():
    desc = "random multi-dimensional assignment solvers and benchmarks"
    common = Parser(add_help=False)
    addflag = partial(common.add_argument, action='store_true')
    addflag("-v", "--verbose", help="verbose logging")
    addflag("-D", "--debug", help="debug logging")
    addflag("-V", "--version", help="print program version")

    parser = Parser(description=desc)
    sub = parser.add_subparsers(dest='command', parser_class=Parser)
    sub.required = True

    def instance_args(p):
        p.add_argument("--input", help="instance file to solve")
        p.add_argument("--n", type=int, help="side of a generated instance")
        p.add_argument("--d", type=int, help="dimension")
        p.add_argument("--seed", type=int, default=0, help="instance seed")

    p = sub.add_parser('gen', parents=[common], help="generate an instance")
    p.add_argument("--n", type=int, required=True, help="side length")
    p.add_argument("--d", type=int, default=3, help="dimension")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser('solve', parents=[common], help="run a heuristic")
    p.add_argument("algo", choices=list(SOLVE))
    instance_args(p)
    p.add_argument("--k", type=int, default=1, help="BDTS tree depth")
    p.add_argument("--mode", choices=['distributional', 'fixed'],
                   help="BDTS cost model (default: fixed for --input)")
    p.add_argument("--retries", type=int, help="escalation cap")
    p.add_argument("--restarts", type=int, default=1,
                   help="bilinear restarts")
    p.add_argument("--dump", action='store_true', help="print the run report")

    p = sub.add_parser('exact', parents=[common], help="solve exhaustively")
    p.add_argument("problem", choices=list(EXACT))
    instance_args(p)

    p = sub.add_parser('bound', parents=[common], help="reference values")
    p.add_argument("which", choices=BOUNDS)
    instance_args(p)
    p.add_argument("--i", type=int, help="1-based slice for the dfm bound")

    p = sub.add_parser('bench', parents=[common], help="run an experiment")
    p.add_argument("algo", nargs='?', choices=Solver.supported())
    p.add_argument("--n", type=int, nargs='+', help="side lengths")
    p.add_argument("--k", type=int, help="BDTS tree depth")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--trials", type=int, help="trials per n")
    p.add_argument("--mode", choices=['distributional', 'fixed'])
    p.add_argument("--retries", type=int, help="escalation cap")
    p.add_argument("--restarts", type=int, help="bilinear restarts")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=list(bench.FORMATS))
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("-c", "--conf", help="experiment config file (YAML)")
    p.add_argument("--metric", choices=['cost', 'cost_upper'],
                   default=setting('bench', 'metric'), help="metric to fit")
    p.add_argument("--fit", action='store_true',
                   help="fit log(mean cost) against log(n)")
    p.add_argument("--no-timing", dest='timing', action='store_false',
                   default=None, help="write runtime_ms as 0")
    p.add_argument("--from", dest='source',
                   help="read records from a file instead of running")
    return parser


def _tensor(args, d=3):
    if args.input:
        return load_instance(args.input)
    if args.n is None:
        raise UsageError("need --input or --n")
    return sample_tensor(args.n, args.d or d, args.seed)


def cmd_gen(args):
    tensor = sample_tensor(args.n, args.d, args.seed)
    if args.out:
        save_instance(tensor, args.out)
    else:
        write_instance(tensor, sys.stdout)


def cmd_solve(args):
    mode = args.mode or ('fixed' if args.input else 'distributional')
    solver = Solver.make(SOLVE[args.algo], k=args.k, mode=mode,
                         retries=args.retries, restarts=args.restarts)
    if args.algo == 'planar-bdts' and mode == 'distributional':
        if args.input or args.n is None:
            raise UsageError("distributional mode needs --n and no --input")
        outcome = solver.run(args.n, args.seed)
    else:
        outcome = solver.solve(_tensor(args), args.seed)
    print('\n'.join(outcome.lines()))
    print(f'cost: {outcome.cost!r}')
    if args.dump:
        print(dump(outcome.extra), end='')


def cmd_exact(args):
    d = 2 if args.problem == 'matching' else 3
    solver = Solver.make(EXACT[args.problem])
    outcome = solver.solve(_tensor(args, d))
    print('\n'.join(outcome.lines()))
    print(f'cost: {outcome.cost!r}')


def cmd_bound(args):
    if args.which == 'parisi':
        if args.n is None:
            raise UsageError("need --n")
        print(f'{parisi_value(args.n):.6f}')
    elif args.which == 'dfm':
        if args.n is None:
            raise UsageError("need --n")
        slices = [args.i] if args.i else range(1, args.n + 1)
        for i in slices:
            print(f'{i} {dfm_slice_bound(i, args.n)!r}')
    elif args.which == 'planar-rowmin':
        print(repr(planar_row_min_lower_bound(_tensor(args))))
    else:
        print(repr(axial_lower_bound(_tensor(args))))


def _config(args):
    flags = {'algo': args.algo, 'ns': args.n, 'k': args.k, 'seed': args.seed,
             'trials': args.trials, 'mode': args.mode, 'retries': args.retries,
             'restarts': args.restarts, 'out': args.out, 'format': args.format,
             'jobs': args.jobs, 'timing': args.timing}
    if args.conf:
        return bench.ExperimentConfig.from_yaml(args.conf, **flags)
    if not args.algo or not args.n:
        raise UsageError("bench needs an algorithm and --n, or --conf")
    return bench.ExperimentConfig(**{k: v for k, v in flags.items()
                                     if v is not None})


def _progress(record):
    log.info("%s n=%d trial %d: cost %r", record.algo, record.n,
             record.trial, record.cost)


def cmd_bench(args):
    if args.source:
        fmt = args.format or setting('bench', 'format')
        with open(args.source, newline='') as f:
            records = bench.read_records(f, fmt)
    else:
        config = _config(args)
        if config.out:
            records = bench.run_to_file(config, config.out, _progress)
        else:
            records = bench.run_trials(config, _progress)
            bench.write_records(records, sys.stdout, config.format)
    if args.fit:
        slope, intercept, resid = bench.fit_scaling(records, args.metric)
        print(f"slope {slope:.6f} intercept {intercept:.6f} "
              f"residual {resid:.6f}", file=sys.stderr)


COMMANDS = {'gen': cmd_gen,
            'solve': cmd_solve,
            'exact': cmd_exact,
            'bound': cmd_bound,
            'bench': cmd_bench}


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]

    # Check for the version option before normal parsing, so the parser doesn't
    # choke on missing args:
    if "-V" in argv or "--version" in argv:
        print('mdap v' + mdap.version)
        return 0

    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as ex:
        print(ex, file=sys.stderr)
        return 1

    level = (logging.DEBUG if args.debug
             else logging.INFO if args.verbose
             else logging.WARN)
    lfmt = '%(levelname)s\t%(module)s:%(lineno)d\t%(message)s'
    logging.basicConfig(level=level, format=lfmt)
    log.debug("debug logging on")
    log.info("verbose logging on")

    try:
        COMMANDS[args.command](args)
    except UsageError as ex:
        print(f"{parser.prog}: error: {ex}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, OSError) as ex:
        log.error(ex)
        return 2
    return 0


if __name__ == '__main__':
    sys.exit(main())
