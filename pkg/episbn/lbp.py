'''
Loopy belief propagation with Pearl's polytree update rules, run for a fixed number of synchronous
sweeps. Every message lives on a directed edge (parent U -> child X) and is a vector over U's
states: pi[(U, X)] is what U tells X, lam[(U, X)] is what X tells U.

All outgoing messages of a sweep are computed from the previous sweep's messages only, and each is
normalized to sum 1. A message that comes out all zeros (conflicting deterministic evidence) is
replaced by a uniform vector and the edge is recorded as a conflict.
'''

import logging

import numpy as np

from . import MAX_PROPAGATION_LENGTH
from .network import check_evidence, deepest_evidence_depth
from .utils import UsageError, is_flat, normalize



class MessageState:
    '''
    Messages after some number of sweeps, plus the per-node self-evidence vectors. Treat as
    immutable: sweep builds a new state.
    '''
    def __init__(self, pi, lam, self_vectors, parents, children, iteration=0,
                 conflicts=frozenset()):
        self.pi = pi
        self.lam = lam
        self.self_vectors = self_vectors
        self.parents = parents
        self.children = children
        self.iteration = iteration
        self.conflicts = conflicts

    def __repr__(self):
        return (f"MessageState(iteration={self.iteration}, edges={len(self.pi)}, "
                f"conflicts={len(self.conflicts)})")


def init_messages(network, evidence):
    '''
    Evidence nodes send themselves an indicator of the observed state, every other node a vector
    of ones; every message between nodes starts as a vector of ones.
    '''
    check_evidence(network, evidence)
    self_vectors = {}
    for node_id in network.ids:
        vector = np.ones(network.cardinality(node_id))
        if node_id in evidence:
            vector = np.zeros_like(vector)
            vector[evidence[node_id]] = 1.0
        self_vectors[node_id] = vector

    pi, lam = {}, {}
    for node in network.nodes:
        for parent in node.parents:
            pi[(parent, node.id)] = np.ones(network.cardinality(parent))
            lam[(parent, node.id)] = np.ones(network.cardinality(parent))

    parents = {node.id: node.parents for node in network.nodes}
    children = {node_id: network.children(node_id) for node_id in network.ids}
    return MessageState(pi, lam, self_vectors, parents, children)


def _weighted(factor, vectors, skip=None):
    '''Multiplies each parent axis of a CPT factor by the matching vector, except axis skip.'''
    out = factor
    for axis, vector in enumerate(vectors):
        if axis == skip:
            continue
        shape = [1] * factor.ndim
        shape[axis] = -1
        out = out * vector.reshape(shape)
    return out


def _pi_aggregate(state, network, node_id):
    '''pi(x): the CPT mixed by the incoming pi messages.'''
    factor = network.factor(node_id)
    parents = state.parents[node_id]
    if not parents:
        return factor.copy()
    incoming = [state.pi[(parent, node_id)] for parent in parents]
    return _weighted(factor, incoming).sum(axis=tuple(range(len(parents))))


def _lambda_aggregate(state, node_id, skip=None):
    '''lambda(x): self-evidence times the lambda messages from the children, except child skip.'''
    vector = state.self_vectors[node_id].copy()
    for child in state.children[node_id]:
        if child != skip:
            vector = vector * state.lam[(node_id, child)]
    return vector


def sweep(state, network):
    '''
    One synchronous update: recomputes every pi and lambda message from the previous messages.
    '''
    pi, lam = {}, {}
    conflicts = set(state.conflicts)
    pi_parts = {node_id: _pi_aggregate(state, network, node_id) for node_id in network.ids}

    for node_id in network.ids:
        lam_x = _lambda_aggregate(state, node_id)

        # pi message to each child: our pi, self-evidence, and the other children's lambdas.
        for child in state.children[node_id]:
            message, ok = normalize(pi_parts[node_id] * _lambda_aggregate(state, node_id, child))
            if not ok:
                conflicts.add(('pi', node_id, child))
            pi[(node_id, child)] = message

        # lambda message to each parent: sum out x against lambda(x) and the other parents' pis.
        parents = state.parents[node_id]
        if not parents:
            continue
        factor = network.factor(node_id)
        incoming = [state.pi[(parent, node_id)] for parent in parents]
        for axis, parent in enumerate(parents):
            size = network.cardinality(parent)
            if is_flat(lam_x) and lam_x[0] > 0:
                # Rows of the CPT sum to one, so a flat lambda says nothing about the parent.
                lam[(parent, node_id)] = np.full(size, 1.0 / size)
                continue
            weighted = _weighted(factor, incoming, skip=axis) * lam_x
            others = tuple(a for a in range(factor.ndim) if a != axis)
            message, ok = normalize(weighted.sum(axis=others))
            if not ok:
                conflicts.add(('lambda', parent, node_id))
            lam[(parent, node_id)] = message

    new_conflicts = len(conflicts) - len(state.conflicts)
    if new_conflicts:
        logging.warning(f"Sweep {state.iteration + 1}: {new_conflicts} messages had no mass and "
                        f"were reset to uniform.")
    return MessageState(pi, lam, state.self_vectors, state.parents, state.children,
                        iteration=state.iteration + 1, conflicts=frozenset(conflicts))


def run(network, evidence, d):
    '''init_messages followed by d sweeps.'''
    if d < 0:
        raise UsageError(f"Propagation length must be >= 0, got {d}.")
    state = init_messages(network, evidence)
    for _ in range(d):
        state = sweep(state, network)
    logging.debug(f"Propagated {d} sweeps over {len(network)} nodes.")
    return state


def lambda_vector(state, node_id):
    '''
    lambda(x) = P(E-|x) up to scale: self-evidence times every child's lambda message, normalized.
    '''
    vector, _ = normalize(_lambda_aggregate(state, node_id))
    return vector


def beliefs(state, network):
    '''BEL(x) = alpha lambda(x) pi(x) for every node.'''
    result = {}
    for node_id in network.ids:
        belief, ok = normalize(_lambda_aggregate(state, node_id)
                               * _pi_aggregate(state, network, node_id))
        if not ok:
            logging.warning(f"Belief of '{node_id}' has no mass; reporting uniform.")
        result[node_id] = belief
    return result


def default_propagation_length(network, evidence):
    '''Depth of the deepest evidence node, capped at MAX_PROPAGATION_LENGTH.'''
    return min(MAX_PROPAGATION_LENGTH, deepest_evidence_depth(network, evidence))
