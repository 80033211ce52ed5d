'''
Provide utils for running tests.

chain3 is the three-node chain A -> B -> C whose posteriors are easy to work out by hand. The suite
builders generate the seeded random networks the property tests run over; sizes and seeds come from
test/config.ini.
'''

import configparser
import functools
import itertools
import os

import numpy as np

from episbn import (GenSpec, Network, Node, generate_evidence, generate_network, joint_table,
                    leaves, write_network)



CFG = configparser.ConfigParser()
CFG.read(os.path.join(os.path.dirname(os.path.abspath(__file__)), 'config.ini'))

# Hand-checked values for chain3 with evidence C = 1.
CHAIN3_PE = 0.368
CHAIN3_B1 = 0.216 / 0.368
CHAIN3_A1 = 0.152 / 0.368


def chain3():
    '''P(A=1) = 0.2, P(B=1|A) = (0.1, 0.8), P(C=1|B) = (0.2, 0.9).'''
    return Network('chain3', [
        Node('A', ('0', '1'), (), ((0.8, 0.2),)),
        Node('B', ('0', '1'), ('A',), ((0.9, 0.1), (0.2, 0.8))),
        Node('C', ('0', '1'), ('B',), ((0.8, 0.2), (0.1, 0.9))),
    ])


def conflicting_chain():
    '''
    A -> B -> C where B copies A and C copies B; evidence C = 1 makes every row of B that does not
    lead to B = 1 orthogonal to lambda(B).
    '''
    return Network('copy-chain', [
        Node('A', ('0', '1'), (), ((0.5, 0.5),)),
        Node('B', ('0', '1'), ('A',), ((1.0, 0.0), (0.0, 1.0))),
        Node('C', ('0', '1'), ('B',), ((1.0, 0.0), (0.0, 1.0))),
    ])


def write_files(tmp_path, network, evidence_text=None, stem='net'):
    '''
    Writes a network (and optionally an evidence document) under tmp_path and returns their paths
    as strings.
    '''
    network_path = tmp_path / f"{stem}.bn.json"
    write_network(str(network_path), network)
    if evidence_text is None:
        return str(network_path), None
    evidence_path = tmp_path / f"{stem}.ev.json"
    evidence_path.write_text(evidence_text)
    return str(network_path), str(evidence_path)


@functools.lru_cache(maxsize=None)
def polytree_suite(single_parent=False):
    '''
    Random polytrees with random evidence, as (network, evidence) pairs. With single_parent every
    node has at most one parent, which makes the graph a directed tree.
    '''
    section = CFG['POLYTREE_SUITE']
    seed = CFG.getint('TREE_SUITE' if single_parent else 'POLYTREE_SUITE', 'SEED')
    count = CFG.getint('TREE_SUITE' if single_parent else 'POLYTREE_SUITE', 'COUNT')
    rng = np.random.default_rng(seed)

    suite = []
    for i in range(count):
        spec = GenSpec(nodes=int(rng.integers(section.getint('MIN_NODES'),
                                              section.getint('MAX_NODES') + 1)),
                       max_parents=1 if single_parent else 2,
                       states=(section.getint('MIN_STATES'), section.getint('MAX_STATES')),
                       topology='polytree',
                       seed=seed + i)
        network = generate_network(spec)
        evidence = generate_evidence(network, section.getint('EVIDENCE'), seed + i,
                                     require_positive=True)
        suite.append((network, evidence))
    return tuple(suite)


@functools.lru_cache(maxsize=None)
def dag_suite():
    '''Random binary-to-ternary DAGs with a few evidence nodes.'''
    section = CFG['DAG_SUITE']
    seed = section.getint('SEED')
    suite = []
    for i in range(section.getint('COUNT')):
        network = generate_network(GenSpec(nodes=section.getint('NODES'),
                                           max_parents=section.getint('MAX_PARENTS'),
                                           states=(2, 3), topology='dag', p_ext=0.1,
                                           seed=seed + i))
        evidence = generate_evidence(network, 1 + i % 3, seed + i, require_positive=True)
        suite.append((network, evidence))
    return tuple(suite)


def oracle_suite():
    '''Small random binary networks of every topology, sized so the joint can be enumerated.'''
    section = CFG['ORACLE_SUITE']
    seed = section.getint('SEED')
    rng = np.random.default_rng(seed)
    for i in range(section.getint('COUNT')):
        spec = GenSpec(nodes=int(rng.integers(2, section.getint('MAX_NODES') + 1)),
                       max_parents=int(rng.integers(1, 4)),
                       states=(2, 2),
                       topology='dag' if i % 2 else 'polytree',
                       p_ext=0.2,
                       seed=seed + i)
        network = generate_network(spec)
        k = int(rng.integers(0, min(4, len(network)) + 1))
        yield network, generate_evidence(network, k, seed + i)


def least_likely_leaf_evidence(network, k):
    '''
    Among all assignments to k leaves, the one with the smallest positive probability, as
    (probability, evidence). None when the network has fewer than k leaves.
    '''
    candidates = leaves(network)
    if len(candidates) < k:
        return None
    ids = network.ids
    axes = [ids.index(node_id) for node_id in candidates]
    joint = joint_table(network, {})
    marginal = joint.sum(axis=tuple(a for a in range(len(ids)) if a not in axes))

    best = None
    for picked in itertools.combinations(range(len(candidates)), k):
        table = marginal.sum(axis=tuple(a for a in range(len(candidates)) if a not in picked))
        masked = np.where(table > 0, table, np.inf)
        state = np.unravel_index(int(np.argmin(masked)), table.shape)
        probability = float(table[state])
        if probability > 0 and (best is None or probability < best[0]):
            best = (probability, {candidates[p]: int(s) for p, s in zip(picked, state)})
    return best


@functools.lru_cache(maxsize=None)
def unlikely_evidence_cases():
    '''
    Random DAGs with leaf evidence less likely than THRESHOLD, as (network, evidence) pairs.
    Networks without such evidence are skipped.
    '''
    section = CFG['UNLIKELY_EVIDENCE']
    seed = section.getint('SEED')
    cases = []
    for attempt in range(section.getint('MAX_ATTEMPTS')):
        network = generate_network(GenSpec(nodes=section.getint('NODES'),
                                           max_parents=section.getint('MAX_PARENTS'),
                                           states=(2, 2), topology='dag',
                                           p_ext=section.getfloat('P_EXT'),
                                           seed=seed + attempt))
        best = least_likely_leaf_evidence(network, section.getint('EVIDENCE'))
        if best is None or best[0] >= section.getfloat('THRESHOLD'):
            continue
        cases.append((network, best[1]))
        if len(cases) == section.getint('CASES'):
            break
    return tuple(cases)
