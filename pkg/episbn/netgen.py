'''
Seeded random networks and evidence for property tests and benchmarks.

CPT rows are drawn from a symmetric Dirichlet (concentration 1). With probability p_ext a row then
has one random entry pushed down to the floor value and is renormalized, which controls how many
extreme probabilities the network carries.
'''

import logging

import numpy as np

from . import EVIDENCE_RETRIES
from .exact import evidence_probability
from .network import Network, Node, check_evidence
from .utils import GenerationError



def _check_spec(spec):
    low, high = spec.states
    if spec.nodes < 1:
        raise GenerationError(f"Need at least one node, got {spec.nodes}.")
    if spec.max_parents < 0:
        raise GenerationError(f"max_parents must be >= 0, got {spec.max_parents}.")
    if not 1 <= low <= high:
        raise GenerationError(f"State range {spec.states} is empty.")
    if not 0.0 <= spec.p_ext <= 1.0:
        raise GenerationError(f"p_ext must lie in [0, 1], got {spec.p_ext}.")
    if not 0.0 < spec.floor < 1.0:
        raise GenerationError(f"floor must lie in (0, 1), got {spec.floor}.")
    if spec.topology not in ('polytree', 'dag'):
        raise GenerationError(f"Unknown topology {spec.topology!r}.")
    if spec.topology == 'polytree' and spec.max_parents == 0 and spec.nodes > 1:
        raise GenerationError("A connected polytree with more than one node needs "
                              "max_parents >= 1.")
    if spec.depth is not None:
        if spec.depth >= spec.nodes or spec.depth < 0:
            raise GenerationError(f"Depth {spec.depth} needs more than {spec.nodes} nodes.")
        if spec.depth > 0 and spec.max_parents == 0:
            raise GenerationError("A positive depth needs max_parents >= 1.")


def _polytree_parents(spec, rng):
    '''Random tree skeleton with random edge directions, respecting max_parents.'''
    parents = [[] for _ in range(spec.nodes)]
    start = 1
    if spec.depth:
        for j in range(1, spec.depth + 1):
            parents[j].append(j - 1)
        start = spec.depth + 1
    for j in range(start, spec.nodes):
        other = int(rng.integers(j))
        downward = rng.random() < 0.5
        if not downward and len(parents[other]) >= spec.max_parents:
            downward = True
        if downward:
            parents[j].append(other)
        else:
            parents[other].append(j)
    return parents


def _dag_parents(spec, rng):
    '''Each node picks up to max_parents distinct parents among the nodes declared before it.'''
    parents = [[] for _ in range(spec.nodes)]
    if spec.depth:
        for j in range(1, spec.depth + 1):
            parents[j].append(j - 1)
    for j in range(spec.nodes):
        free = [i for i in range(j) if i not in parents[j]]
        room = min(spec.max_parents - len(parents[j]), len(free))
        if room <= 0:
            continue
        count = int(rng.integers(room + 1))
        if count:
            picked = rng.choice(len(free), size=count, replace=False)
            parents[j].extend(sorted(free[i] for i in picked))
    return parents


def _cpt_rows(spec, rng, row_count, size):
    rows = []
    for _ in range(row_count):
        row = rng.dirichlet(np.ones(size))
        if size > 1 and rng.random() < spec.p_ext:
            row[int(rng.integers(size))] = spec.floor
            row = row / row.sum()
        rows.append(tuple(float(p) for p in row))
    return tuple(rows)


def generate_network(spec):
    '''
    Builds a valid random network from a GenSpec. Node ids are X0, X1, ...; states are labelled
    0, 1, .... The same spec (seed included) always gives the same network.
    '''
    _check_spec(spec)
    rng = np.random.default_rng(spec.seed)
    if spec.topology == 'polytree':
        parents = _polytree_parents(spec, rng)
    else:
        parents = _dag_parents(spec, rng)

    low, high = spec.states
    sizes = [int(rng.integers(low, high + 1)) for _ in range(spec.nodes)]
    nodes = []
    for j in range(spec.nodes):
        row_count = int(np.prod([sizes[p] for p in parents[j]], dtype=np.int64))
        nodes.append(Node(id=f"X{j}",
                          states=tuple(str(s) for s in range(sizes[j])),
                          parents=tuple(f"X{p}" for p in parents[j]),
                          cpt=_cpt_rows(spec, rng, row_count, sizes[j])))

    network = Network(f"{spec.topology}-{spec.nodes}-{spec.seed}", nodes)
    logging.debug(f"Generated {network!r} with "
                  f"{sum(len(p) for p in parents)} edges.")
    return network


def leaves(network):
    '''Nodes without children, in declaration order.'''
    return [node_id for node_id in network.ids if not network.children(node_id)]


def generate_evidence(network, k, seed, leaves_only=False, require_positive=False, retries=None):
    '''
    Picks k distinct nodes (only leaves if leaves_only) and a uniformly random state for each.
    With require_positive, evidence sets of probability zero are thrown away and regenerated, up
    to retries times.
    '''
    retries = EVIDENCE_RETRIES if retries is None else retries
    candidates = leaves(network) if leaves_only else network.ids
    if k < 0 or k > len(candidates):
        raise GenerationError(f"Cannot pick {k} evidence nodes out of {len(candidates)} "
                              f"candidates.")

    rng = np.random.default_rng(seed)
    for attempt in range(retries + 1):
        picked = set(candidates[i] for i in rng.choice(len(candidates), size=k, replace=False))
        evidence = {node_id: int(rng.integers(network.cardinality(node_id)))
                    for node_id in network.ids if node_id in picked}
        check_evidence(network, evidence)
        if not require_positive or not evidence or evidence_probability(network, evidence) > 0:
            if attempt:
                logging.info(f"Found evidence with positive probability after {attempt} retries.")
            return evidence
        logging.debug(f"Evidence attempt {attempt} has probability zero; retrying.")
    raise GenerationError(f"No evidence with positive probability after {retries} retries.")


def small_probability_fraction(network, threshold):
    '''Share of CPT entries strictly below threshold.'''
    entries = [p for node in network.nodes for row in node.cpt for p in row]
    if not entries:
        return 0.0
    return sum(1 for p in entries if p < threshold) / len(entries)
