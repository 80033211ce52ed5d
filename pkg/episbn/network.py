'''
Discrete Bayesian networks: the node and network structures, validation, topological ordering, and
exact evaluation of complete assignments.

CPTs are stored dense and row-major. The row for a parent configuration is found by reading the
parent states as digits, first-declared parent most significant. A node with k parents therefore
costs the product of the k parent cardinalities in rows; nothing sparse is attempted.
'''

import logging
import math

from typing import NamedTuple, Tuple

import networkx as nx
import numpy as np

from . import ROW_SUM_TOLERANCE
from .utils import CycleError, EvidenceError, IncompleteAssignmentError



class Node(NamedTuple):
    '''A discrete chance node. cpt holds one tuple of probabilities per parent configuration.'''
    id: str
    states: Tuple[str, ...]
    parents: Tuple[str, ...]
    cpt: Tuple[Tuple[float, ...], ...]


class Violation(NamedTuple):
    '''One broken invariant found by validate.'''
    node: str
    kind: str
    message: str


class Network:
    '''
    A DAG of discrete chance nodes. Immutable once built; derived arrays (factors, the graph) are
    computed on first use and cached.
    '''
    def __init__(self, name, nodes):
        self.name = name
        self.nodes = tuple(Node(id=node.id,
                                states=tuple(node.states),
                                parents=tuple(node.parents),
                                cpt=tuple(tuple(float(p) for p in row) for row in node.cpt))
                           for node in nodes)
        # First declaration wins for duplicate ids; validate reports the duplicate.
        self.index = {}
        for i, node in enumerate(self.nodes):
            self.index.setdefault(node.id, i)

        self._factors = {}
        self._children = None
        self._graph = None


    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.name == other.name and self.nodes == other.nodes

    __hash__ = None

    def __repr__(self):
        return f"Network(name={self.name!r}, nodes={len(self.nodes)})"

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __contains__(self, node_id):
        return node_id in self.index

    def __getitem__(self, node_id):
        return self.nodes[self.index[node_id]]


    @property
    def ids(self):
        '''Node ids in declaration order.'''
        return [node.id for node in self.nodes]

    def cardinality(self, node_id):
        '''Number of states of a node.'''
        return len(self[node_id].states)

    def children(self, node_id):
        '''Children of a node, in declaration order.'''
        if self._children is None:
            children = {node.id: [] for node in self.nodes}
            for node in self.nodes:
                for parent in node.parents:
                    if parent in children:
                        children[parent].append(node.id)
            self._children = {key: tuple(value) for key, value in children.items()}
        return self._children[node_id]

    def graph(self):
        '''
        The parent relation as a networkx DiGraph, edges parent -> child. Edges to undeclared
        parents are left out.
        '''
        if self._graph is None:
            graph = nx.DiGraph()
            graph.add_nodes_from(self.ids)
            for node in self.nodes:
                for parent in node.parents:
                    if parent in self.index:
                        graph.add_edge(parent, node.id)
            self._graph = graph
        return self._graph

    def factor(self, node_id):
        '''
        The CPT of a node as a read-only array of shape (*parent cardinalities, cardinality).
        '''
        if node_id not in self._factors:
            node = self[node_id]
            shape = tuple(self.cardinality(p) for p in node.parents) + (len(node.states),)
            array = np.array(node.cpt, dtype=float).reshape(shape)
            array.setflags(write=False)
            self._factors[node_id] = array
        return self._factors[node_id]

    def table(self, node_id):
        '''The CPT of a node as a (rows, cardinality) array.'''
        node = self[node_id]
        return self.factor(node_id).reshape(len(node.cpt), len(node.states))

    def row_index(self, node_id, assignment):
        '''
        Row of a node's CPT selected by the parent states in assignment (a mapping id -> state).
        '''
        row = 0
        for parent in self[node_id].parents:
            row = row * self.cardinality(parent) + assignment[parent]
        return row


def validate(network):
    '''
    Checks every network, node and CPT invariant. Returns a list of Violation records; an empty
    list means the network is valid. Never raises.
    '''
    violations = []
    seen = set()
    for node in network.nodes:
        if node.id in seen:
            violations.append(Violation(node.id, 'duplicate-id',
                                        f"node id '{node.id}' is declared more than once"))
        seen.add(node.id)

    for node in network.nodes:
        if len(node.states) < 1:
            violations.append(Violation(node.id, 'state-count',
                                        f"node '{node.id}' has no states"))
        if len(set(node.states)) != len(node.states):
            violations.append(Violation(node.id, 'state-count',
                                        f"node '{node.id}' repeats a state label"))

        unknown = [p for p in node.parents if p not in network.index]
        for parent in unknown:
            violations.append(Violation(node.id, 'unknown-parent',
                                        f"node '{node.id}' has unknown parent '{parent}'"))
        if len(set(node.parents)) != len(node.parents):
            violations.append(Violation(node.id, 'arity',
                                        f"node '{node.id}' lists a parent twice"))
        if unknown:
            continue

        expected_rows = math.prod(len(network[p].states) for p in node.parents)
        if len(node.cpt) != expected_rows:
            violations.append(Violation(node.id, 'row-count',
                                        f"node '{node.id}' has row count {len(node.cpt)}, "
                                        f"expected {expected_rows}"))
            continue

        for r, row in enumerate(node.cpt):
            if len(row) != len(node.states):
                violations.append(Violation(node.id, 'arity',
                                            f"node '{node.id}' row {r} has {len(row)} entries "
                                            f"for {len(node.states)} states"))
                continue
            if any(not 0.0 <= p <= 1.0 for p in row):
                violations.append(Violation(node.id, 'range',
                                            f"node '{node.id}' row {r} has an entry outside "
                                            f"[0, 1]"))
                continue
            total = math.fsum(row)
            if abs(total - 1.0) > ROW_SUM_TOLERANCE:
                violations.append(Violation(node.id, 'row-sum',
                                            f"node '{node.id}' row {r} sums to {total!r}"))

    # A directed cycle shows up as a strongly connected component with more than one node, or a
    # node that is its own parent.
    graph = nx.DiGraph()
    graph.add_nodes_from(network.index)
    for node in network.nodes:
        for parent in node.parents:
            if parent in network.index:
                graph.add_edge(parent, node.id)
    for component in nx.strongly_connected_components(graph):
        if len(component) > 1:
            members = sorted(component, key=network.index.get)
            violations.append(Violation(members[0], 'cycle',
                                        f"directed cycle through {', '.join(members)}"))
    for node_id, _ in nx.selfloop_edges(graph):
        violations.append(Violation(node_id, 'cycle', f"node '{node_id}' is its own parent"))

    if violations:
        logging.debug(f"Network '{network.name}' has {len(violations)} violations.")
    return violations


def topological_order(network):
    '''
    Returns node ids so that every node comes after all of its parents. Ties are broken by
    declaration order, so the result is deterministic.
    '''
    graph = network.graph()
    try:
        return list(nx.lexicographical_topological_sort(graph, key=network.index.get))
    except (nx.NetworkXUnfeasible, nx.NetworkXError):
        cycle = nx.find_cycle(graph)
        node = cycle[0][0]
        raise CycleError(f"The network has a directed cycle through '{node}'.", node=node)


def check_evidence(network, evidence):
    '''
    Raises EvidenceError unless every evidence node exists and every observed state index is
    valid for it.
    '''
    for node_id, state in evidence.items():
        if node_id not in network:
            raise EvidenceError(f"Evidence names unknown node '{node_id}'.")
        valid = isinstance(state, (int, np.integer)) and 0 <= state < network.cardinality(node_id)
        if not valid:
            raise EvidenceError(f"Evidence state {state!r} is not valid for node '{node_id}'.")


def joint_probability(network, assignment):
    '''
    Product over all nodes of the CPT entry picked by assignment (a mapping id -> state index).
    '''
    missing = [node_id for node_id in network.ids if node_id not in assignment]
    if missing:
        raise IncompleteAssignmentError(f"Assignment has no state for {', '.join(missing)}.")

    probability = 1.0
    for node in network.nodes:
        probability *= node.cpt[network.row_index(node.id, assignment)][assignment[node.id]]
    return probability


def node_depths(network):
    '''Length of the longest directed path from any root to each node.'''
    depths = {}
    for node_id in topological_order(network):
        parents = network[node_id].parents
        depths[node_id] = 1 + max(depths[p] for p in parents) if parents else 0
    return depths


def deepest_evidence_depth(network, evidence):
    '''
    Depth of the deepest evidence node, where roots have depth 0. Empty evidence has depth 0.
    '''
    if not evidence:
        return 0
    depths = node_depths(network)
    return max(depths[node_id] for node_id in evidence)


def skeleton_diameter(network):
    '''
    Longest shortest path in the undirected skeleton, taken over every connected component. On a
    polytree this many synchronous propagation sweeps make every message exact.
    '''
    skeleton = network.graph().to_undirected()
    diameter = 0
    for component in nx.connected_components(skeleton):
        if len(component) > 1:
            diameter = max(diameter, nx.diameter(skeleton.subgraph(component)))
    return diameter


def is_polytree(network):
    '''True when the undirected skeleton has no cycle.'''
    return nx.is_forest(network.graph().to_undirected())
