'''
Provide tests for the random network and evidence generators.
'''

import pytest

from episbn import (GenSpec, GenerationError, Network, Node, evidence_probability,
                    generate_evidence, generate_network, is_polytree, leaves, serialize_network,
                    small_probability_fraction, validate)

from test.utils import chain3



def test_same_spec_same_network():
    '''
    Test that generating twice from one spec gives byte-identical documents.
    '''
    spec = GenSpec(nodes=10, topology='polytree', states=(2, 4), p_ext=0.3, seed=7)
    assert serialize_network(generate_network(spec)) == serialize_network(generate_network(spec))
    assert generate_network(spec) != generate_network(spec._replace(seed=8))


def test_polytrees_are_trees():
    '''
    Test that polytree output is valid, acyclic in the skeleton, and has n - 1 edges.
    '''
    for seed in range(20):
        network = generate_network(GenSpec(nodes=12, max_parents=2, topology='polytree',
                                           seed=seed))
        assert validate(network) == []
        assert is_polytree(network)
        assert sum(len(node.parents) for node in network.nodes) == 11
        assert all(len(node.parents) <= 2 for node in network.nodes)


def test_dags_are_valid():
    '''
    Test that DAG output always validates and respects max_parents.
    '''
    for seed in range(20):
        network = generate_network(GenSpec(nodes=15, max_parents=3, states=(2, 3), p_ext=0.5,
                                           seed=seed))
        assert validate(network) == []
        assert all(len(node.parents) <= 3 for node in network.nodes)


def test_depth_target():
    '''
    Test that a depth target puts a directed chain of that length at the front.
    '''
    network = generate_network(GenSpec(nodes=10, max_parents=2, depth=6, seed=2))
    for j in range(1, 7):
        assert f"X{j - 1}" in network[f"X{j}"].parents


def test_extreme_probabilities():
    '''
    Test that p_ext controls how many CPT entries sit near the floor.
    '''
    plain = generate_network(GenSpec(nodes=30, max_parents=2, p_ext=0.0, seed=1))
    extreme = generate_network(GenSpec(nodes=30, max_parents=2, p_ext=1.0, floor=1e-4, seed=1))
    assert small_probability_fraction(extreme, 0.01) > small_probability_fraction(plain, 0.01)
    assert small_probability_fraction(extreme, 0.01) > 0.2


@pytest.mark.parametrize('spec', [GenSpec(nodes=0),
                                  GenSpec(max_parents=-1),
                                  GenSpec(states=(3, 2)),
                                  GenSpec(p_ext=1.5),
                                  GenSpec(topology='tree'),
                                  GenSpec(nodes=5, max_parents=0, topology='polytree'),
                                  GenSpec(nodes=5, depth=5)])
def test_unsatisfiable_specs(spec):
    '''
    Test that specs the generator cannot honour raise GenerationError.
    '''
    with pytest.raises(GenerationError):
        generate_network(spec)


def test_evidence_generation():
    '''
    Test empty evidence, leaf-only evidence on the chain, and determinism in the seed.
    '''
    network = chain3()
    assert generate_evidence(network, 0, seed=1) == {}
    assert list(generate_evidence(network, 1, seed=3, leaves_only=True)) == ['C']
    assert leaves(network) == ['C']

    big = generate_network(GenSpec(nodes=20, seed=4))
    assert generate_evidence(big, 5, seed=9) == generate_evidence(big, 5, seed=9)
    assert len(generate_evidence(big, 5, seed=9)) == 5
    with pytest.raises(GenerationError):
        generate_evidence(network, 2, seed=1, leaves_only=True)


def test_require_positive_skips_impossible_evidence():
    '''
    Test that with require_positive every returned evidence set has positive probability, on a
    network where half the single-node choices are impossible.
    '''
    network = Network('zeros', [
        Node('A', ('0', '1'), (), ((1.0, 0.0),)),
        Node('B', ('0', '1'), ('A',), ((0.0, 1.0), (0.5, 0.5))),
    ])
    for seed in range(30):
        evidence = generate_evidence(network, 1, seed, require_positive=True)
        assert evidence_probability(network, evidence) > 0
