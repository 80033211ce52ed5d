'''
Command-line interface. Results go to stdout, logging to stderr. Exit codes: 0 on success, 1 on a
usage error, 2 on a data error (invalid network, impossible evidence, ...), 3 when a resource cap
is hit.
'''

import argparse
import json
import logging
import sys

from . import DEFAULT_SAMPLES, LBP_BASELINE_ITERATIONS, SMALL_PROBABILITY, lbp
from .exact import posteriors
from .harness import format_records, format_summary, paired_ttest, run_experiment, summarize
from .importance import dump_icpts
from .model_io import (parse_gen_spec, read_evidence, read_experiment_config,
                       read_network, serialize_evidence, serialize_network, write_evidence,
                       write_network)
from .netgen import generate_evidence, generate_network, small_probability_fraction
from .network import validate
from .sampling import get_sampler
from .utils import (Algorithm, DataError, ResourceCapError, SamplerConfig, UsageError,
                    format_float)



EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CAP = 3


class ArgumentParser(argparse.ArgumentParser):
    '''argparse parser that raises UsageError instead of exiting.'''
    def error(self, message):
        raise UsageError(message)


def _number(value):
    return f"{value:.10g}"


def _load(args):
    network = read_network(args.network)
    evidence = read_evidence(args.evidence, network) if args.evidence else {}
    return network, evidence


def _print_marginals(network, evidence, marginals, prefix='P'):
    given = '|E' if evidence else ''
    for node_id in network.ids:
        if node_id not in marginals:
            continue
        for label, p in zip(network[node_id].states, marginals[node_id]):
            print(f"{prefix}({node_id}={label}{given})={_number(float(p))}")


def cmd_validate(args):
    network = read_network(args.network, check=False)
    violations = validate(network)
    for violation in violations:
        print(f"{violation.kind}: {violation.message}")
    if violations:
        logging.error(f"'{args.network}' has {len(violations)} violations.")
        return EXIT_DATA
    print(f"ok: '{network.name}' with {len(network)} nodes")
    return EXIT_OK


def cmd_exact(args):
    network, evidence = _load(args)
    result = posteriors(network, evidence, method=args.method)
    print(f"P(E)={_number(result.evidence_probability)}")
    if not result.defined:
        logging.error("The evidence has probability zero.")
        return EXIT_DATA
    _print_marginals(network, evidence, result.marginals)
    return EXIT_OK


def cmd_lbp(args):
    if args.iters < 0:
        raise UsageError(f"--iters must be >= 0, got {args.iters}.")
    network, evidence = _load(args)
    state = lbp.run(network, evidence, args.iters)
    beliefs = {node_id: belief for node_id, belief in lbp.beliefs(state, network).items()
               if node_id not in evidence}
    _print_marginals(network, evidence, beliefs, prefix='BEL')
    if state.conflicts:
        print(f"conflicts={len(state.conflicts)}")
    return EXIT_OK


def cmd_sample(args):
    network, evidence = _load(args)
    config = SamplerConfig(algorithm=Algorithm[args.algo], m=args.samples, d=args.prop_len,
                           cutoff=args.cutoff == 'on', epsilon=args.epsilon, seed=args.seed,
                           shards=args.shards)
    if args.dump_icpts and config.algorithm != Algorithm.epis:
        raise UsageError("--dump-icpts needs --algo epis.")
    sampler = get_sampler(network, evidence, config)
    estimate = sampler.run()

    print(f"P(E)={_number(estimate.evidence_probability)}")
    _print_marginals(network, evidence, estimate.marginals)
    print(f"ess={_number(estimate.ess)}")
    print(f"rejected={estimate.rejected}")
    if estimate.propagation_length is not None:
        print(f"d={estimate.propagation_length}")
        print(f"cutoff={'on' if estimate.cutoff else 'off'}")
    logging.info(f"Setup {estimate.setup_ms:.1f} ms, sampling {estimate.sample_ms:.1f} ms.")

    if args.dump_icpts:
        with open(args.dump_icpts, 'w', encoding='utf-8') as dump:
            dump.write(dump_icpts(sampler.icpts, network))
        logging.info(f"Wrote ICPTs to {args.dump_icpts}.")
    return EXIT_OK


def cmd_gen(args):
    text = args.spec
    if not text.lstrip().startswith('{'):
        with open(text, 'r', encoding='utf-8') as doc:
            text = doc.read()
    try:
        spec = parse_gen_spec(json.loads(text))
    except json.JSONDecodeError as err:
        raise UsageError(f"--spec is not valid JSON: {err.msg}")

    network = generate_network(spec)
    fraction = small_probability_fraction(network, SMALL_PROBABILITY)
    logging.info(f"Generated '{network.name}'; {fraction:.3f} of CPT entries are below "
                 f"{SMALL_PROBABILITY}.")
    if args.out:
        write_network(args.out, network)
    else:
        sys.stdout.write(serialize_network(network))

    if args.k is not None:
        seed = spec.seed if args.evidence_seed is None else args.evidence_seed
        evidence = generate_evidence(network, args.k, seed, leaves_only=args.leaves_only,
                                     require_positive=args.require_positive)
        if args.evidence_out:
            write_evidence(args.evidence_out, evidence, network)
        else:
            sys.stdout.write(serialize_evidence(evidence, network))
    return EXIT_OK


def cmd_experiment(args):
    cfg = read_experiment_config(args.config)
    if args.shards is not None:
        if args.shards < 1:
            raise UsageError(f"--shards must be >= 1, got {args.shards}.")
        cfg = cfg._replace(arms=tuple(arm._replace(shards=args.shards) for arm in cfg.arms))
    out = args.out or cfg.output
    records = run_experiment(cfg, out=out)
    if not out:
        sys.stdout.write(format_records(records))

    rows = summarize(records, arms=list(dict.fromkeys(record.algorithm for record in records)))
    report = print if out else logging.info
    report(format_summary(rows))
    if args.compare:
        first, second = args.compare
        result = paired_ttest(records, first, second, metric=args.metric)
        report(f"paired t-test {first} < {second} on {args.metric}: "
               f"t={format_float(float(result.statistic))} p={format_float(float(result.pvalue))}")
    return EXIT_OK


def build_parser():
    '''The argparse tree of every subcommand.'''
    parser = ArgumentParser(prog='episbn', description="Importance sampling for discrete "
                                                       "Bayesian networks")
    commands = parser.add_subparsers(dest='command', required=True)

    validate_cmd = commands.add_parser('validate', help="check a network and list violations")
    validate_cmd.add_argument('network')
    validate_cmd.set_defaults(handler=cmd_validate)

    exact_cmd = commands.add_parser('exact', help="exact posteriors and P(E)")
    exact_cmd.add_argument('network')
    exact_cmd.add_argument('evidence', nargs='?')
    exact_cmd.add_argument('--method', choices=('auto', 'enumerate', 've'), default='auto')
    exact_cmd.set_defaults(handler=cmd_exact)

    lbp_cmd = commands.add_parser('lbp', help="loopy belief propagation beliefs")
    lbp_cmd.add_argument('network')
    lbp_cmd.add_argument('evidence', nargs='?')
    lbp_cmd.add_argument('--iters', type=int, default=LBP_BASELINE_ITERATIONS)
    lbp_cmd.set_defaults(handler=cmd_lbp)

    sample_cmd = commands.add_parser('sample', help="estimate posteriors by sampling")
    sample_cmd.add_argument('network')
    sample_cmd.add_argument('evidence', nargs='?')
    sample_cmd.add_argument('--algo', choices=('epis', 'lw', 'pls'), default='epis')
    sample_cmd.add_argument('--samples', type=int, default=DEFAULT_SAMPLES)
    sample_cmd.add_argument('--prop-len', type=int, default=None)
    sample_cmd.add_argument('--cutoff', choices=('on', 'off'), default='on')
    sample_cmd.add_argument('--epsilon', type=float, default=None,
                            help="one cutoff threshold for every node")
    sample_cmd.add_argument('--seed', type=int, default=0)
    sample_cmd.add_argument('--shards', type=int, default=1)
    sample_cmd.add_argument('--dump-icpts', metavar='PATH')
    sample_cmd.set_defaults(handler=cmd_sample)

    gen_cmd = commands.add_parser('gen', help="generate a random network and evidence")
    gen_cmd.add_argument('--spec', required=True, help="generator spec: JSON text or a path")
    gen_cmd.add_argument('--out')
    gen_cmd.add_argument('--k', type=int, help="also generate this many evidence nodes")
    gen_cmd.add_argument('--evidence-out')
    gen_cmd.add_argument('--evidence-seed', type=int)
    gen_cmd.add_argument('--leaves-only', action='store_true')
    gen_cmd.add_argument('--require-positive', action='store_true')
    gen_cmd.set_defaults(handler=cmd_gen)

    experiment_cmd = commands.add_parser('experiment', help="run a benchmark config")
    experiment_cmd.add_argument('--config', required=True)
    experiment_cmd.add_argument('--out')
    experiment_cmd.add_argument('--shards', type=int)
    experiment_cmd.add_argument('--compare', nargs=2, metavar=('A', 'B'))
    experiment_cmd.add_argument('--metric', choices=('hellinger', 'mse'), default='hellinger')
    experiment_cmd.set_defaults(handler=cmd_experiment)
    return parser


def main(argv=None):
    '''Parses argv, runs the subcommand, and returns the exit code.'''
    try:
        args = build_parser().parse_args(argv)
        return args.handler(args)
    except UsageError as err:
        logging.error(err)
        return EXIT_USAGE
    except OSError as err:
        logging.error(f"Cannot read or write {err.filename}: {err.strerror}")
        return EXIT_USAGE
    except DataError as err:
        logging.error(err)
        return EXIT_DATA
    except ResourceCapError as err:
        logging.error(err)
        return EXIT_CAP
