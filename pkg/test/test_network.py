'''
Provide tests for the network structures: validation, ordering, and joint probabilities.
'''

import pytest

from episbn import (CycleError, EvidenceError, IncompleteAssignmentError, Network, Node,
                    check_evidence, deepest_evidence_depth, is_polytree, joint_probability,
                    node_depths, skeleton_diameter, topological_order, validate)

from test.utils import chain3



def kinds(network):
    return sorted(v.kind for v in validate(network))


def test_chain3_is_valid():
    '''
    Test that the reference chain has no violations and reads back its structure.
    '''
    network = chain3()
    assert validate(network) == []
    assert network.ids == ['A', 'B', 'C']
    assert network.children('A') == ('B',)
    assert network.cardinality('C') == 2
    assert network.factor('B').shape == (2, 2)


def test_unknown_parent_is_reported():
    '''
    Test that a parent that was never declared shows up as an unknown-parent violation.
    '''
    network = Network('bad', [Node('X', ('0', '1'), ('Y',), ((0.5, 0.5), (0.5, 0.5)))])
    violations = validate(network)
    assert [v.kind for v in violations] == ['unknown-parent']
    assert 'unknown parent' in violations[0].message


def test_row_count_and_row_sum():
    '''
    Test that a CPT with the wrong number of rows, and a row that does not sum to one, are both
    flagged.
    '''
    network = Network('bad', [
        Node('A', ('0', '1'), (), ((0.5, 0.5),)),
        Node('B', ('0', '1'), ('A',), ((0.5, 0.5),)),
        Node('C', ('0', '1'), (), ((0.5, 0.6),)),
    ])
    assert kinds(network) == ['row-count', 'row-sum']


def test_row_sum_tolerance():
    '''
    Test that rounding noise well below the tolerance is accepted.
    '''
    network = Network('ok', [Node('A', ('0', '1', '2'), (), ((0.1, 0.2, 0.7000000000001),))])
    assert validate(network) == []


def test_cycle_is_reported_and_blocks_ordering():
    '''
    Test that a directed cycle is a violation and that topological_order raises CycleError.
    '''
    network = Network('cyclic', [
        Node('A', ('0', '1'), ('B',), ((0.5, 0.5), (0.5, 0.5))),
        Node('B', ('0', '1'), ('A',), ((0.5, 0.5), (0.5, 0.5))),
    ])
    assert kinds(network) == ['cycle']
    with pytest.raises(CycleError) as err:
        topological_order(network)
    assert err.value.node in ('A', 'B')


def test_duplicate_ids_and_states():
    '''
    Test that duplicate node ids and repeated state labels are reported.
    '''
    network = Network('dup', [
        Node('A', ('0', '0'), (), ((0.5, 0.5),)),
        Node('A', ('0', '1'), (), ((0.5, 0.5),)),
    ])
    assert 'duplicate-id' in kinds(network)
    assert 'state-count' in kinds(network)


def test_topological_order_breaks_ties_by_declaration():
    '''
    Test that nodes with no ordering constraint between them come out in declaration order.
    '''
    network = Network('v', [
        Node('C', ('0', '1'), ('A', 'B'), ((1, 0), (1, 0), (0, 1), (0, 1))),
        Node('B', ('0', '1'), (), ((0.5, 0.5),)),
        Node('A', ('0', '1'), (), ((0.5, 0.5),)),
    ])
    assert topological_order(network) == ['B', 'A', 'C']


def test_joint_probability():
    '''
    Test the joint of one full assignment of the chain against the hand product.
    '''
    network = chain3()
    assert joint_probability(network, {'A': 1, 'B': 1, 'C': 1}) == pytest.approx(0.2 * 0.8 * 0.9)
    assert joint_probability(network, {'A': 0, 'B': 0, 'C': 0}) == pytest.approx(0.8 * 0.9 * 0.8)
    with pytest.raises(IncompleteAssignmentError):
        joint_probability(network, {'A': 1, 'B': 1})


def test_row_index_first_parent_most_significant():
    '''
    Test that CPT rows are indexed with the first parent as the most significant digit.
    '''
    network = Network('v', [
        Node('A', ('0', '1'), (), ((0.5, 0.5),)),
        Node('B', ('0', '1', '2'), (), ((0.2, 0.3, 0.5),)),
        Node('C', ('0', '1'), ('A', 'B'), tuple((0.5, 0.5) for _ in range(6))),
    ])
    assert network.row_index('C', {'A': 1, 'B': 2}) == 5
    assert network.row_index('C', {'A': 0, 'B': 1}) == 1


def test_evidence_checks():
    '''
    Test that unknown nodes and out-of-range states are rejected.
    '''
    network = chain3()
    check_evidence(network, {'C': 1})
    with pytest.raises(EvidenceError):
        check_evidence(network, {'D': 0})
    with pytest.raises(EvidenceError):
        check_evidence(network, {'C': 2})


def test_depths_and_diameter():
    '''
    Test node depths, the evidence depth used for the default propagation length, and the
    skeleton diameter.
    '''
    network = chain3()
    assert node_depths(network) == {'A': 0, 'B': 1, 'C': 2}
    assert deepest_evidence_depth(network, {'C': 1}) == 2
    assert deepest_evidence_depth(network, {}) == 0
    assert skeleton_diameter(network) == 2
    assert is_polytree(network)


def test_loop_is_not_a_polytree():
    '''
    Test that a diamond A -> B, A -> C, B -> D, C -> D is a DAG but not a polytree.
    '''
    half = ((0.5, 0.5), (0.5, 0.5))
    network = Network('diamond', [
        Node('A', ('0', '1'), (), ((0.5, 0.5),)),
        Node('B', ('0', '1'), ('A',), half),
        Node('C', ('0', '1'), ('A',), half),
        Node('D', ('0', '1'), ('B', 'C'), half + half),
    ])
    assert validate(network) == []
    assert not is_polytree(network)
