'''
ForwardSampler is an abstract base class for forward stochastic samplers over a Bayesian network.
Child classes decide which proposal tables the nodes are drawn from; the base class does the
drawing, the weighting, and the score-table bookkeeping.

Samples are drawn in blocks of BLOCK_SIZE. Block b takes its uniforms from a Philox generator keyed
by (seed, b), one uniform per node in topological order, so a sample's randomness depends only on
the seed and its position. Shards own contiguous ranges of blocks and block results are reduced in
block order, which makes every estimate independent of the shard count.
'''

import logging
import math
import time

from abc import ABC, abstractmethod
from multiprocessing.pool import ThreadPool
from typing import NamedTuple, Optional

import numpy as np

from .. import BLOCK_SIZE
from ..network import check_evidence, topological_order
from ..utils import UsageError, ZeroWeightError



SEED_MASK = 2 ** 64 - 1


class BlockResult(NamedTuple):
    '''
    Score sums of one block, scaled by exp(-log_max) where log_max is the block's largest log
    weight.
    '''
    log_max: float
    scores: dict
    total: float
    second_moment: float
    count: int
    rejected: int


class PosteriorEstimate(NamedTuple):
    '''Normalized score tables plus run diagnostics.'''
    marginals: dict
    evidence_probability: float
    ess: float
    rejected: int
    m: int
    propagation_length: Optional[int] = None
    cutoff: bool = False
    setup_ms: float = 0.0
    sample_ms: float = 0.0


class ScoreTables:
    '''
    Per-node accumulators of importance weight by sampled state, with the total weight and the sum
    of squared weights. Sums are Kahan-compensated and kept relative to exp(log_scale), the largest
    log weight seen so far; a larger one rescales what was accumulated before.
    '''
    def __init__(self, cardinalities):
        self.log_scale = -math.inf
        self.samples = 0
        self.rejected = 0
        self._sums = {key: np.zeros(size) for key, size in cardinalities.items()}
        self._sums['total'] = np.zeros(1)
        self._sums['second_moment'] = np.zeros(1)
        self._carry = {key: np.zeros_like(value) for key, value in self._sums.items()}


    def _add(self, key, value):
        y = value - self._carry[key]
        t = self._sums[key] + y
        self._carry[key] = (t - self._sums[key]) - y
        self._sums[key] = t

    def add(self, block):
        '''Folds one block into the tables.'''
        self.samples += block.count
        self.rejected += block.rejected
        if block.log_max == -math.inf:
            return
        if block.log_max > self.log_scale:
            if self.log_scale > -math.inf:
                factor = math.exp(self.log_scale - block.log_max)
                for key in self._sums:
                    power = 2 if key == 'second_moment' else 1
                    self._sums[key] = self._sums[key] * factor ** power
                    self._carry[key] = self._carry[key] * factor ** power
            self.log_scale = block.log_max
        factor = math.exp(block.log_max - self.log_scale)

        for node_id, scores in block.scores.items():
            self._add(node_id, scores * factor)
        self._add('total', np.array([block.total * factor]))
        self._add('second_moment', np.array([block.second_moment * factor * factor]))

    @property
    def scores(self):
        '''Accumulated scores per node, relative to exp(log_scale).'''
        return {key: value for key, value in self._sums.items()
                if key not in ('total', 'second_moment')}

    @property
    def total(self):
        '''Total weight relative to exp(log_scale).'''
        return float(self._sums['total'][0])

    @property
    def second_moment(self):
        return float(self._sums['second_moment'][0])

    @property
    def ess(self):
        '''Effective sample size (sum w)^2 / sum w^2.'''
        if self.second_moment <= 0:
            return 0.0
        return self.total ** 2 / self.second_moment


def estimate_evidence_probability(tables, m):
    '''Total weight over m: the sample-mean estimate of P(E).'''
    if tables.total <= 0:
        return 0.0
    return math.exp(tables.log_scale + math.log(tables.total) - math.log(m))


def block_generator(seed, block):
    '''The counter-based generator for one block of samples.'''
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & SEED_MASK, block])))


def choose(probabilities, uniforms):
    '''
    Inverse-CDF draw of one state per row. uniforms are scaled by each row's total so a state with
    zero probability is never picked.
    '''
    cumulative = np.cumsum(probabilities, axis=1)
    targets = uniforms * cumulative[:, -1]
    picked = (cumulative <= targets[:, None]).sum(axis=1)
    return np.minimum(picked, probabilities.shape[1] - 1)


def forward(network, order, proposals, evidence, uniforms, sample_evidence=False):
    '''
    Draws one sample per row of uniforms (columns follow order). Non-evidence nodes are drawn from
    their proposal rows; evidence nodes are clamped unless sample_evidence is set, in which case
    they are drawn too. Returns states (samples x nodes, declaration order) and the log importance
    weights log P(x) - log g(x).
    '''
    count = uniforms.shape[0]
    states = np.zeros((count, len(network)), dtype=np.int64)
    log_weights = np.zeros(count)
    with np.errstate(divide='ignore', invalid='ignore'):
        for position, node_id in enumerate(order):
            column = network.index[node_id]
            node = network[node_id]
            rows = np.zeros(count, dtype=np.int64)
            for parent in node.parents:
                rows = rows * network.cardinality(parent) + states[:, network.index[parent]]
            log_cpt = np.log(network.table(node_id))

            if node_id in evidence and not sample_evidence:
                states[:, column] = evidence[node_id]
                log_weights += log_cpt[rows, evidence[node_id]]
                continue

            proposal = proposals[node_id]
            drawn = choose(proposal[rows], uniforms[:, position])
            states[:, column] = drawn
            log_weights += log_cpt[rows, drawn] - np.log(proposal[rows, drawn])
    return states, log_weights


class ForwardSampler(ABC):
    '''
    Does forward sampling of a network under evidence. Use as a base class where child classes
    know which proposal distribution to draw from.
    '''
    # Logic sampling draws evidence nodes as well and rejects disagreeing samples.
    SAMPLES_EVIDENCE = False

    def __init__(self, network, evidence, config):
        if config.m < 1:
            raise UsageError(f"Sample count must be >= 1, got {config.m}.")
        if config.d is not None and config.d < 0:
            raise UsageError(f"Propagation length must be >= 0, got {config.d}.")
        if config.shards < 1:
            raise UsageError(f"Shard count must be >= 1, got {config.shards}.")
        if config.epsilon is not None and not 0 < config.epsilon < 1:
            raise UsageError(f"Cutoff epsilon must be in (0, 1), got {config.epsilon}.")
        check_evidence(network, evidence)

        self.network = network
        self.evidence = dict(evidence)
        self.config = config
        self.order = topological_order(network)
        self.proposals = None
        self.setup_ms = 0.0
        self.sample_ms = 0.0


    @property
    def propagation_length(self):
        '''Sweeps run before sampling, if the algorithm propagates at all.'''
        return None

    @property
    def cutoff_applied(self):
        '''Whether the proposal went through the epsilon-cutoff.'''
        return False

    @abstractmethod
    def build_proposals(self):
        '''
        Returns a dict node id -> (rows, cardinality) array of proposal probabilities for every
        node that gets drawn.
        '''
        ...


    def prepare(self):
        '''Builds the proposal tables (the setup phase, timed separately from sampling).'''
        if self.proposals is None:
            start = time.perf_counter()
            self.proposals = self.build_proposals()
            self.setup_ms = (time.perf_counter() - start) * 1000.0
        return self.proposals

    def _block_sizes(self):
        blocks = -(-self.config.m // BLOCK_SIZE)
        return [min(BLOCK_SIZE, self.config.m - b * BLOCK_SIZE) for b in range(blocks)]

    def run_block(self, block, size):
        '''Draws and scores one block of samples.'''
        uniforms = block_generator(self.config.seed, block).random((size, len(self.order)))
        states, log_weights = forward(self.network, self.order, self.proposals, self.evidence,
                                      uniforms, sample_evidence=self.SAMPLES_EVIDENCE)
        rejected = 0
        if self.SAMPLES_EVIDENCE:
            agree = np.ones(size, dtype=bool)
            for node_id, state in self.evidence.items():
                agree &= states[:, self.network.index[node_id]] == state
            rejected = int(size - agree.sum())
            log_weights = np.where(agree, log_weights, -np.inf)

        finite = np.isfinite(log_weights)
        if not finite.any():
            return BlockResult(-math.inf, {}, 0.0, 0.0, size, rejected)
        log_max = float(log_weights[finite].max())
        weights = np.where(finite, np.exp(log_weights - log_max), 0.0)

        scores = {}
        for node_id in self.network.ids:
            if node_id in self.evidence:
                continue
            scores[node_id] = np.bincount(states[:, self.network.index[node_id]], weights=weights,
                                          minlength=self.network.cardinality(node_id))
        return BlockResult(log_max, scores, math.fsum(weights), math.fsum(weights * weights),
                           size, rejected)

    def _run_shard(self, blocks):
        return [self.run_block(block, size) for block, size in blocks]

    def sample(self):
        '''Draws all m samples and returns the filled score tables.'''
        self.prepare()
        start = time.perf_counter()
        blocks = list(enumerate(self._block_sizes()))
        shards = [list(chunk) for chunk in np.array_split(np.arange(len(blocks)),
                                                          min(self.config.shards, len(blocks)))]
        shards = [[blocks[i] for i in chunk] for chunk in shards]
        if len(shards) > 1:
            with ThreadPool(processes=len(shards)) as pool:
                results = pool.map(self._run_shard, shards)
        else:
            results = [self._run_shard(shards[0])]

        tables = ScoreTables({node_id: self.network.cardinality(node_id)
                              for node_id in self.network.ids if node_id not in self.evidence})
        for shard in results:
            for block in shard:
                tables.add(block)
        self.sample_ms = (time.perf_counter() - start) * 1000.0
        logging.info(f"{type(self).__name__} drew {tables.samples} samples in "
                     f"{len(shards)} shards; ESS {tables.ess:.1f}.")
        return tables

    def estimate(self, tables):
        '''Normalizes the score tables into posterior marginals.'''
        if tables.total <= 0:
            if self.SAMPLES_EVIDENCE:
                raise ZeroWeightError(f"No sample out of {tables.samples} agreed with the evidence "
                                      f"({tables.rejected} rejected).")
            raise ZeroWeightError(f"All {tables.samples} samples have zero weight; the evidence "
                                  f"may have probability zero.")
        marginals = {node_id: scores / scores.sum() for node_id, scores in tables.scores.items()}
        return PosteriorEstimate(marginals=marginals,
                                 evidence_probability=estimate_evidence_probability(
                                     tables, self.config.m),
                                 ess=tables.ess,
                                 rejected=tables.rejected,
                                 m=self.config.m,
                                 propagation_length=self.propagation_length,
                                 cutoff=self.cutoff_applied,
                                 setup_ms=self.setup_ms,
                                 sample_ms=self.sample_ms)

    def run(self):
        '''Setup, sampling, and normalization in one go.'''
        return self.estimate(self.sample())
