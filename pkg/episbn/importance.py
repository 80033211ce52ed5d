'''
The importance function: one ICPT per non-evidence node, computed from propagated lambda vectors,
then optionally thickened in the tails by the epsilon-cutoff heuristic.

For a node X with parent configuration pa, the ICPT row is alpha(pa) P(X | pa) lambda(X), with
lambda(X) the node's own lambda aggregate (self-evidence and all children). On a polytree, with
enough sweeps, this is exactly P(X | pa, E).
'''

import json
import logging
import math

from typing import NamedTuple

import numpy as np

from . import lbp
from .exact import IcptTable
from .utils import CutoffError, UsageError, is_flat



class IcptSet(NamedTuple):
    '''
    ICPTs keyed by node id (evidence nodes have none). conflicts names nodes with a row that had
    no mass and was replaced by a uniform row; fallbacks names nodes where the cutoff had to clamp
    and renormalize.
    '''
    tables: dict
    propagation_length: int
    cutoff_applied: bool = False
    conflicts: frozenset = frozenset()
    fallbacks: frozenset = frozenset()


def compute_icpts(network, evidence, d, state=None):
    '''
    Builds ICPTs from the lambda vectors after d sweeps. A node whose lambda is flat keeps its CPT
    exactly.
    state -- an already propagated MessageState to reuse instead of running d sweeps here.
    '''
    if d < 0:
        raise UsageError(f"Propagation length must be >= 0, got {d}.")
    if state is None:
        state = lbp.run(network, evidence, d)

    tables = {}
    conflicts = set()
    for node_id in network.ids:
        if node_id in evidence:
            continue
        cpt = network.table(node_id)
        lam = lbp.lambda_vector(state, node_id)
        if is_flat(lam):
            rows = np.array(cpt, dtype=float)
        else:
            rows = cpt * lam
            totals = rows.sum(axis=1)
            empty = ~(totals > 0)
            if empty.any():
                conflicts.add(node_id)
                logging.warning(f"ICPT of '{node_id}' has {int(empty.sum())} rows orthogonal to "
                                f"lambda; using uniform rows there.")
            totals[empty] = 1.0
            rows = rows / totals[:, None]
            rows[empty] = 1.0 / rows.shape[1]
        tables[node_id] = IcptTable(rows, np.ones(rows.shape[0], dtype=bool))

    logging.info(f"Computed {len(tables)} ICPTs after {d} propagation sweeps.")
    return IcptSet(tables, d, conflicts=frozenset(conflicts))


def epsilon_for(outcome_count):
    '''Cutoff threshold by number of outcomes: 0.006 below 5, 0.001 up to 8, else 0.0005.'''
    if outcome_count < 5:
        return 0.006
    if outcome_count <= 8:
        return 0.001
    return 0.0005


def _cutoff_row(row, epsilon):
    '''cutoff_row that also says whether it had to fall back to clamp-and-renormalize.'''
    row = np.asarray(row, dtype=float)
    if epsilon * row.shape[0] >= 1:
        raise CutoffError(f"epsilon {epsilon} is too large for a row of {row.shape[0]} entries.")

    low = row < epsilon
    if not low.any():
        return row.copy(), False

    largest = int(np.argmax(row))
    result = np.where(low, epsilon, row)
    others = math.fsum(result[i] for i in range(result.shape[0]) if i != largest)
    remainder = math.fsum(row) - others
    if remainder >= epsilon:
        result[largest] = remainder
        return result, False

    clamped = np.maximum(row, epsilon)
    return clamped / math.fsum(clamped), True


def cutoff_row(row, epsilon):
    '''
    Raises every entry below epsilon to epsilon and takes the added mass from the largest entry
    (lowest index on ties). If the largest entry cannot absorb it, clamps everything to epsilon and
    renormalizes instead.
    '''
    result, fell_back = _cutoff_row(row, epsilon)
    if fell_back:
        logging.warning(f"Cutoff at {epsilon} could not be compensated from the largest entry; "
                        f"clamped and renormalized instead.")
    return result


def apply_cutoff(icpts, epsilon=None):
    '''
    Applies cutoff_row to every ICPT row.
    epsilon -- one threshold for every node; None takes epsilon_for each node's outcome count.
    '''
    tables = {}
    fallbacks = set(icpts.fallbacks)
    for node_id, table in icpts.tables.items():
        threshold = epsilon_for(table.rows.shape[1]) if epsilon is None else epsilon
        rows = np.empty_like(table.rows)
        for r, row in enumerate(table.rows):
            rows[r], fell_back = _cutoff_row(row, threshold)
            if fell_back:
                fallbacks.add(node_id)
        tables[node_id] = IcptTable(rows, table.defined)
    if fallbacks:
        logging.warning(f"Cutoff fell back to clamping on {len(fallbacks)} nodes.")
    return icpts._replace(tables=tables, cutoff_applied=True, fallbacks=frozenset(fallbacks))


def dump_icpts(icpts, network):
    '''ICPTs as JSON in the same table layout as network CPTs, with per-node markers.'''
    nodes = []
    for node_id, table in icpts.tables.items():
        nodes.append({'id': node_id,
                      'states': list(network[node_id].states),
                      'parents': list(network[node_id].parents),
                      'cutoff': icpts.cutoff_applied,
                      'conflict': node_id in icpts.conflicts,
                      'fallback': node_id in icpts.fallbacks,
                      'icpt': [[float(p) for p in row] for row in table.rows]})
    doc = {'name': network.name, 'propagationLength': icpts.propagation_length, 'nodes': nodes}
    return json.dumps(doc, indent=2) + '\n'
