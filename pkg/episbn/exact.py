'''
Exact inference for desk-scale networks: brute-force enumeration of the joint, and variable
elimination for networks whose joint does not fit. Both serve as ground truth for propagation,
ICPTs and samplers, and they cross-check each other.
'''

import functools
import logging
import math

from typing import NamedTuple, Tuple

import networkx as nx
import numpy as np

from . import ENUMERATION_CAP, FACTOR_CAP
from .network import check_evidence
from .utils import ResourceCapError



class MarginalSet(NamedTuple):
    '''
    Exact posterior marginals of the non-evidence nodes and the probability of the evidence. When
    the evidence is impossible the marginals are undefined and left empty.
    '''
    marginals: dict
    evidence_probability: float

    @property
    def defined(self):
        return self.evidence_probability > 0


class IcptTable(NamedTuple):
    '''
    One row per parent configuration of a node. Rows whose parent configuration is impossible
    under the evidence are NaN and marked undefined.
    '''
    rows: np.ndarray
    defined: np.ndarray


class Factor(NamedTuple):
    '''A table over the variables in scope, one array axis per variable in scope order.'''
    scope: Tuple[str, ...]
    values: np.ndarray

    def align(self, scope):
        '''
        Transposes and reshapes values so they broadcast against an array whose axes follow scope.
        '''
        present = [v for v in scope if v in self.scope]
        values = np.transpose(self.values, [self.scope.index(v) for v in present])
        shape = [values.shape[present.index(v)] if v in self.scope else 1 for v in scope]
        return values.reshape(shape)

    def product(self, other):
        scope = self.scope + tuple(v for v in other.scope if v not in self.scope)
        return Factor(scope, self.align(scope) * other.align(scope))

    def marginalize(self, variable):
        axis = self.scope.index(variable)
        return Factor(self.scope[:axis] + self.scope[axis + 1:], self.values.sum(axis=axis))

    def reduce(self, evidence):
        '''Slices out every evidence variable in scope at its observed state.'''
        index = tuple(evidence[v] if v in evidence else slice(None) for v in self.scope)
        return Factor(tuple(v for v in self.scope if v not in evidence), self.values[index])


def _cpt_factor(network, node_id):
    return Factor(network[node_id].parents + (node_id,), network.factor(node_id))


def joint_table(network, evidence, cap=None):
    '''
    The full joint as an array with one axis per node in declaration order, zeroed wherever it
    disagrees with the evidence. Each entry is the product of the CPT entries of that assignment.
    '''
    cap = ENUMERATION_CAP if cap is None else cap
    check_evidence(network, evidence)
    ids = tuple(network.ids)
    size = math.prod(network.cardinality(node_id) for node_id in ids)
    if size > cap:
        raise ResourceCapError(f"Enumerating {size} joint assignments exceeds the cap of {cap}.")

    joint = np.ones([network.cardinality(node_id) for node_id in ids])
    for node_id in ids:
        joint = joint * _cpt_factor(network, node_id).align(ids)
    for node_id, state in evidence.items():
        mask = np.zeros(network.cardinality(node_id))
        mask[state] = 1.0
        joint = joint * Factor((node_id,), mask).align(ids)
    return joint


def enumerate_posteriors(network, evidence, cap=None):
    '''
    Exact P(X = x | E) for every non-evidence node and exact P(E), by summing the joint over all
    assignments consistent with the evidence.
    '''
    joint = joint_table(network, evidence, cap)
    ids = network.ids
    evidence_probability = float(joint.sum())
    if evidence_probability <= 0:
        logging.warning("The evidence has probability 0; posteriors are undefined.")
        return MarginalSet({}, 0.0)

    marginals = {}
    for axis, node_id in enumerate(ids):
        if node_id in evidence:
            continue
        others = tuple(a for a in range(len(ids)) if a != axis)
        marginal = joint.sum(axis=others)
        marginals[node_id] = marginal / marginal.sum()
    return MarginalSet(marginals, evidence_probability)


def min_degree_order(network, factors, variables):
    '''
    Greedy min-degree elimination order over the interaction graph of the factors, ties broken by
    declaration order.
    '''
    graph = nx.Graph()
    graph.add_nodes_from(variables)
    for factor in factors:
        for i, u in enumerate(factor.scope):
            for v in factor.scope[i + 1:]:
                graph.add_edge(u, v)

    order = []
    remaining = set(variables)
    while remaining:
        variable = min(remaining, key=lambda v: (graph.degree(v), network.index[v]))
        neighbours = list(graph.neighbors(variable))
        for i, u in enumerate(neighbours):
            for v in neighbours[i + 1:]:
                graph.add_edge(u, v)
        graph.remove_node(variable)
        remaining.remove(variable)
        order.append(variable)
    return order


def ve_marginal(network, evidence, keep=(), order=None, cap=None):
    '''
    Unnormalized P(keep, E) as a Factor whose scope is keep, by sum-product variable elimination.
    Evidence variables in keep stay as full axes, zero off the observed state.
    order -- elimination order; variables it leaves out are eliminated afterwards in min-degree
        order.
    cap -- largest intermediate factor (in entries) we are willing to build.
    '''
    cap = FACTOR_CAP if cap is None else cap
    check_evidence(network, evidence)
    keep = tuple(keep)
    hidden_evidence = {v: s for v, s in evidence.items() if v not in keep}

    factors = [_cpt_factor(network, node_id).reduce(hidden_evidence) for node_id in network.ids]
    for node_id in keep:
        if node_id in evidence:
            mask = np.zeros(network.cardinality(node_id))
            mask[evidence[node_id]] = 1.0
            factors.append(Factor((node_id,), mask))

    eliminate = [v for v in network.ids if v not in keep and v not in evidence]
    if order is None:
        order = min_degree_order(network, factors, eliminate)
    else:
        order = [v for v in order if v in eliminate]
        rest = [v for v in eliminate if v not in order]
        order += min_degree_order(network, factors, rest) if rest else []

    for variable in order:
        involved = [f for f in factors if variable in f.scope]
        factors = [f for f in factors if variable not in f.scope]
        if not involved:
            continue
        scope = set()
        for factor in involved:
            scope.update(factor.scope)
        size = math.prod(network.cardinality(v) for v in scope)
        if size > cap:
            raise ResourceCapError(f"Eliminating '{variable}' needs a factor of {size} entries, "
                                   f"over the cap of {cap}.")
        product = functools.reduce(lambda a, b: a.product(b), involved)
        factors.append(product.marginalize(variable))

    result = functools.reduce(lambda a, b: a.product(b), factors, Factor((), np.array(1.0)))
    return Factor(keep, result.align(keep) * np.ones([network.cardinality(v) for v in keep]))


def evidence_probability(network, evidence):
    '''Exact P(E) by variable elimination.'''
    return float(ve_marginal(network, evidence).values)


def ve_posteriors(network, evidence, order=None, cap=None):
    '''
    Same result as enumerate_posteriors, computed by variable elimination (one elimination per
    query node, min-degree order unless order is given).
    '''
    probability = float(ve_marginal(network, evidence, order=order, cap=cap).values)
    if probability <= 0:
        logging.warning("The evidence has probability 0; posteriors are undefined.")
        return MarginalSet({}, 0.0)

    marginals = {}
    for node_id in network.ids:
        if node_id in evidence:
            continue
        values = ve_marginal(network, evidence, keep=(node_id,), order=order, cap=cap).values
        marginals[node_id] = values / values.sum()
    return MarginalSet(marginals, probability)


def joint_fits(network, cap=None):
    '''True when the full joint is small enough to enumerate.'''
    cap = ENUMERATION_CAP if cap is None else cap
    return math.prod(network.cardinality(node_id) for node_id in network.ids) <= cap


def posteriors(network, evidence, method='auto'):
    '''
    Exact posteriors by enumeration or variable elimination. auto enumerates when the joint fits
    the enumeration cap.
    '''
    if method == 'auto':
        method = 'enumerate' if joint_fits(network) else 've'
    if method == 'enumerate':
        return enumerate_posteriors(network, evidence)
    return ve_posteriors(network, evidence)


def exact_icpt(network, node_id, evidence, method='auto'):
    '''
    The exact ICPT P(X | PA(X), E) of one node: row pa is P(X, pa, E) / P(pa, E). Rows with
    P(pa, E) = 0 are undefined. auto enumerates when the joint fits, else eliminates down to the
    node's family.
    '''
    node = network[node_id]
    family = node.parents + (node_id,)
    if method == 'auto':
        method = 'enumerate' if joint_fits(network) else 've'

    if method == 'enumerate':
        joint = joint_table(network, evidence)
        ids = network.ids
        axes = [ids.index(v) for v in family]
        others = tuple(a for a in range(len(ids)) if a not in axes)
        values = Factor(tuple(v for v in ids if v in family), joint.sum(axis=others)).align(family)
    else:
        values = ve_marginal(network, evidence, keep=family).values

    table = values.reshape(len(node.cpt), len(node.states))
    totals = table.sum(axis=1)
    defined = totals > 0
    rows = np.full(table.shape, np.nan)
    rows[defined] = table[defined] / totals[defined, None]
    return IcptTable(rows, defined)
