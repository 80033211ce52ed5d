'''
Accuracy metrics against the exact oracle, experiment orchestration over sample-count schedules,
and per-arm summaries. Experiments write CSV for external plotting.
'''

import csv
import io
import logging
import math
import time

from typing import NamedTuple, Optional

import numpy as np
from scipy import stats

from . import LBP_BASELINE_ITERATIONS, lbp
from .exact import posteriors
from .model_io import read_evidence, read_network
from .netgen import generate_evidence, generate_network
from .sampling import run_sampler
from .utils import (Algorithm, EvidenceSpec, GenSpec, MetricError, ZeroWeightError,
                    format_float)



CSV_HEADER = ('algorithm', 'seed', 'm', 'd', 'cutoff', 'hellinger', 'mse', 'pe_hat', 'ess',
              'setup_ms', 'sample_ms')
METRICS = ('hellinger', 'mse')


class MetricReport(NamedTuple):
    '''Both accuracy metrics for one estimate, and how many nodes went into them.'''
    hellinger: float
    mse: float
    nodes: int
    evidence_excluded: int


class RunRecord(NamedTuple):
    '''One CSV row. None stands for NA.'''
    algorithm: str
    seed: int
    m: int
    d: Optional[int]
    cutoff: bool
    hellinger: Optional[float]
    mse: Optional[float]
    pe_hat: Optional[float]
    ess: Optional[float]
    setup_ms: Optional[float]
    sample_ms: Optional[float]


class SummaryRow(NamedTuple):
    '''Mean, standard deviation, min, median and max of one metric over one arm's records.'''
    arm: str
    metric: str
    mean: float
    std: float
    min: float
    median: float
    max: float
    count: int


def _marginals(distributions):
    '''Accepts a MarginalSet, a PosteriorEstimate, or a plain dict of vectors.'''
    return getattr(distributions, 'marginals', distributions)


def _paired_vectors(exact, estimate, evidence):
    first, second = _marginals(exact), _marginals(estimate)
    nodes = [node_id for node_id in first if node_id not in evidence]
    if set(nodes) != {node_id for node_id in second if node_id not in evidence}:
        raise MetricError("The two distributions cover different nodes.")
    pairs = []
    for node_id in nodes:
        p, q = np.asarray(first[node_id], dtype=float), np.asarray(second[node_id], dtype=float)
        if p.shape != q.shape:
            raise MetricError(f"Node '{node_id}' has {p.shape[0]} states in one distribution "
                              f"and {q.shape[0]} in the other.")
        pairs.append((p, q))
    if not pairs:
        raise MetricError("There are no non-evidence nodes to compare.")
    return pairs


def hellinger(exact, estimate, evidence):
    '''
    Hellinger distance averaged over the non-evidence nodes:
    sqrt( sum over nodes and states of (sqrt(p) - sqrt(q))^2 / total number of states ).
    Zeros are fine.
    '''
    pairs = _paired_vectors(exact, estimate, evidence)
    squared = math.fsum(float(np.sum((np.sqrt(p) - np.sqrt(q)) ** 2)) for p, q in pairs)
    return math.sqrt(squared / sum(p.shape[0] for p, _ in pairs))


def mse(exact, estimate, evidence):
    '''Mean over all (non-evidence node, state) pairs of the squared probability difference.'''
    pairs = _paired_vectors(exact, estimate, evidence)
    squared = math.fsum(float(np.sum((p - q) ** 2)) for p, q in pairs)
    return squared / sum(p.shape[0] for p, _ in pairs)


def compare(exact, estimate, evidence):
    '''Both metrics in one MetricReport.'''
    nodes = [node_id for node_id in _marginals(exact) if node_id not in evidence]
    return MetricReport(hellinger=hellinger(exact, estimate, evidence),
                        mse=mse(exact, estimate, evidence),
                        nodes=len(nodes),
                        evidence_excluded=len(evidence))


def arm_label(arm):
    '''
    The label an arm's rows carry. EPIS arms are named by which heuristics they use: E, E+P, E+C or
    E+PC (d = 0 means no propagation); other arms by their algorithm. run_experiment fills in the
    default d before labelling, so an arm whose default works out to 0 is labelled without P.
    '''
    if arm.label:
        return arm.label
    if arm.algorithm != Algorithm.epis:
        return arm.algorithm.name
    heuristics = ('P' if arm.d != 0 else '') + ('C' if arm.cutoff else '')
    return f"E+{heuristics}" if heuristics else 'E'


def _with_default_d(arm, network, evidence):
    '''The arm with d set to the propagation length EPIS would pick for this case.'''
    if arm.algorithm != Algorithm.epis or arm.d is not None:
        return arm
    return arm._replace(d=lbp.default_propagation_length(network, evidence))


def run_seed(base, case, rep):
    '''Seed of one (case, repetition) run; arms share it so their rows pair up.'''
    sequence = np.random.SeedSequence([base & (2 ** 64 - 1), case, rep])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _load_case(cfg, network, case):
    if cfg.evidence is None:
        return {}
    if isinstance(cfg.evidence, EvidenceSpec):
        spec = cfg.evidence
        return generate_evidence(network, spec.k, cfg.seed + case, leaves_only=spec.leaves_only,
                                 require_positive=spec.require_positive)
    return read_evidence(cfg.evidence, network)


def _lbp_record(network, evidence, arm, exact, seed, m, timing, cache):
    d = LBP_BASELINE_ITERATIONS if arm.d is None else arm.d
    if d not in cache:
        start = time.perf_counter()
        state = lbp.run(network, evidence, d)
        beliefs = {node_id: belief for node_id, belief in lbp.beliefs(state, network).items()
                   if node_id not in evidence}
        cache[d] = (beliefs, (time.perf_counter() - start) * 1000.0)
    beliefs, setup_ms = cache[d]
    report = compare(exact, beliefs, evidence) if exact.defined else None
    return RunRecord(algorithm=arm_label(arm), seed=seed, m=m, d=d, cutoff=False,
                     hellinger=report.hellinger if report else None,
                     mse=report.mse if report else None,
                     pe_hat=None, ess=None,
                     setup_ms=setup_ms if timing else None, sample_ms=None)


def _sampler_record(network, evidence, arm, exact, seed, m, timing):
    config = arm._replace(m=m, seed=seed)
    try:
        estimate = run_sampler(network, evidence, config)
    except ZeroWeightError as err:
        logging.warning(f"{arm_label(arm)} at m={m}, seed={seed}: {err}")
        return RunRecord(algorithm=arm_label(arm), seed=seed, m=m,
                         d=arm.d if arm.algorithm == Algorithm.epis else None,
                         cutoff=arm.cutoff and arm.algorithm == Algorithm.epis,
                         hellinger=None, mse=None, pe_hat=0.0, ess=None,
                         setup_ms=None, sample_ms=None)
    report = compare(exact, estimate, evidence) if exact.defined else None
    return RunRecord(algorithm=arm_label(arm), seed=seed, m=m,
                     d=estimate.propagation_length, cutoff=estimate.cutoff,
                     hellinger=report.hellinger if report else None,
                     mse=report.mse if report else None,
                     pe_hat=estimate.evidence_probability, ess=estimate.ess,
                     setup_ms=estimate.setup_ms if timing else None,
                     sample_ms=estimate.sample_ms if timing else None)


def run_experiment(cfg, out=None):
    '''
    Runs every (case, arm, m, repetition) of an ExperimentConfig against the exact oracle, which
    is computed once per case. Rows come back in that loop order. If out (or cfg.output) is set,
    the CSV is written there as well.
    '''
    if isinstance(cfg.network, GenSpec):
        network = generate_network(cfg.network)
    else:
        network = read_network(cfg.network)
    runs_logger = logging.getLogger('runs')

    records = []
    for case in range(cfg.cases):
        evidence = _load_case(cfg, network, case)
        logging.info(f"Case {case}: {len(evidence)} evidence nodes on '{network.name}'.")
        exact = posteriors(network, evidence)
        if not exact.defined:
            logging.warning(f"Case {case} has impossible evidence; metrics will be NA.")
        lbp_cache = {}
        for arm in cfg.arms:
            arm = _with_default_d(arm, network, evidence)
            base = cfg.seed if arm.seed is None else arm.seed
            for m in cfg.schedule:
                for rep in range(cfg.reps):
                    seed = run_seed(base, case, rep)
                    if arm.algorithm == Algorithm.lbp:
                        record = _lbp_record(network, evidence, arm, exact, seed, m, cfg.timing,
                                             lbp_cache)
                    else:
                        record = _sampler_record(network, evidence, arm, exact, seed, m,
                                                 cfg.timing)
                    runs_logger.info(format_records([record], header=False).strip())
                    records.append(record)

    out = out or cfg.output
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as csv_file:
            csv_file.write(format_records(records))
        logging.info(f"Wrote {len(records)} rows to {out}.")
    return records


def _cell(value):
    if isinstance(value, bool):
        return 'on' if value else 'off'
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return 'NA'
    return str(value)


def format_records(records, header=True):
    '''CSV text with a fixed column order and 17 significant digits per float.'''
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    if header:
        writer.writerow(CSV_HEADER)
    for record in records:
        writer.writerow([_cell(value) for value in record])
    return buffer.getvalue()


def summarize(records, arms=None):
    '''
    Per (arm, metric): mean, population standard deviation, min, median and max over the records
    with a defined value. An arm with no usable record gets a NaN row and a warning.
    arms -- labels to report, in order; defaults to the labels in record order.
    '''
    if arms is None:
        arms = list(dict.fromkeys(record.algorithm for record in records))
    rows = []
    for arm in arms:
        for metric in METRICS:
            values = np.array([getattr(r, metric) for r in records
                               if r.algorithm == arm and getattr(r, metric) is not None])
            if values.size == 0:
                logging.warning(f"Arm {arm} has no defined {metric} values.")
                rows.append(SummaryRow(arm, metric, math.nan, math.nan, math.nan, math.nan,
                                       math.nan, 0))
                continue
            rows.append(SummaryRow(arm, metric, float(values.mean()), float(values.std()),
                                   float(values.min()), float(np.median(values)),
                                   float(values.max()), int(values.size)))
    return rows


def format_summary(rows):
    '''Summary rows as an aligned text table.'''
    lines = [f"{'arm':<10} {'metric':<10} {'mean':>12} {'std':>12} {'min':>12} {'median':>12} "
             f"{'max':>12} {'n':>5}"]
    for row in rows:
        lines.append(f"{row.arm:<10} {row.metric:<10} {row.mean:>12.4e} {row.std:>12.4e} "
                     f"{row.min:>12.4e} {row.median:>12.4e} {row.max:>12.4e} {row.count:>5}")
    return '\n'.join(lines)


def paired_ttest(records, first, second, metric='hellinger'):
    '''
    One-tailed paired t-test that arm first has a lower metric than arm second. Rows are paired by
    (seed, m). Returns scipy's result (statistic, pvalue).
    '''
    def by_key(arm):
        return {(r.seed, r.m): getattr(r, metric) for r in records
                if r.algorithm == arm and getattr(r, metric) is not None}

    a, b = by_key(first), by_key(second)
    keys = [key for key in a if key in b]
    if len(keys) < 2:
        raise MetricError(f"Need at least two paired rows of {first} and {second}, "
                          f"found {len(keys)}.")
    return stats.ttest_rel([a[key] for key in keys], [b[key] for key in keys],
                           alternative='less')
