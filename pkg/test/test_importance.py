'''
Provide tests for the importance function: ICPT exactness on polytrees, the flat-lambda shortcut,
conflicting rows, and the epsilon-cutoff.
'''

import json
import math

import numpy as np
import pytest

from episbn import (CutoffError, UsageError, apply_cutoff, compute_icpts, cutoff_row, dump_icpts,
                    epsilon_for, exact_icpt, skeleton_diameter)

from test.utils import chain3, conflicting_chain, polytree_suite



def test_chain3_icpts_are_exact():
    '''
    Test that after two sweeps the chain's ICPTs are P(A | C=1) and P(B | A, C=1).
    '''
    network = chain3()
    icpts = compute_icpts(network, {'C': 1}, 2)
    assert set(icpts.tables) == {'A', 'B'}
    for node_id in ('A', 'B'):
        exact = exact_icpt(network, node_id, {'C': 1})
        assert np.max(np.abs(icpts.tables[node_id].rows - exact.rows)) < 1e-12
    assert icpts.tables['B'].rows[0] == pytest.approx([2 / 3, 1 / 3])


def test_polytree_icpts_are_exact():
    '''
    Test that on every polytree of the suite the ICPTs after diameter sweeps match the exact
    P(X | PA(X), E) on every defined row, within 1e-9.
    '''
    for network, evidence in polytree_suite():
        icpts = compute_icpts(network, evidence, skeleton_diameter(network))
        for node_id, table in icpts.tables.items():
            exact = exact_icpt(network, node_id, evidence)
            error = np.abs(table.rows[exact.defined] - exact.rows[exact.defined])
            assert error.size == 0 or error.max() < 1e-9, (network.name, node_id)


def test_no_propagation_copies_cpts():
    '''
    Test that with zero sweeps every ICPT is the CPT, bit for bit.
    '''
    network, evidence = polytree_suite()[2]
    icpts = compute_icpts(network, evidence, 0)
    for node_id, table in icpts.tables.items():
        assert np.array_equal(table.rows, network.table(node_id))
    assert icpts.propagation_length == 0
    assert not icpts.cutoff_applied


def test_conflicting_rows_become_uniform():
    '''
    Test that an ICPT row orthogonal to lambda is replaced by a uniform row and the node is
    flagged.
    '''
    network = conflicting_chain()
    icpts = compute_icpts(network, {'C': 1}, 2)
    assert 'B' in icpts.conflicts
    assert list(icpts.tables['B'].rows[0]) == [0.5, 0.5]
    assert list(icpts.tables['B'].rows[1]) == [0.0, 1.0]
    assert icpts.tables['A'].rows[0] == pytest.approx([0.0, 1.0])


def test_negative_propagation_length():
    '''
    Test that compute_icpts refuses a negative number of sweeps.
    '''
    with pytest.raises(UsageError):
        compute_icpts(chain3(), {}, -1)


def test_epsilon_schedule():
    '''
    Test the threshold by number of outcomes: 0.006 below five, 0.001 up to eight, else 0.0005.
    '''
    assert epsilon_for(2) == 0.006
    assert epsilon_for(4) == 0.006
    assert epsilon_for(5) == 0.001
    assert epsilon_for(6) == 0.001
    assert epsilon_for(8) == 0.001
    assert epsilon_for(9) == 0.0005


def test_cutoff_worked_example():
    '''
    Test (0.9985, 0.001, 0.0005) at 0.006 -> (0.988, 0.006, 0.006).
    '''
    result = cutoff_row([0.9985, 0.001, 0.0005], 0.006)
    assert result == pytest.approx([0.988, 0.006, 0.006], abs=1e-15)


def test_cutoff_properties():
    '''
    Test on random rows that the cutoff keeps the row sum, puts every entry at or above epsilon,
    and changes nothing when applied a second time.
    '''
    rng = np.random.default_rng(7)
    for _ in range(500):
        size = int(rng.integers(2, 12))
        row = rng.dirichlet(np.full(size, 0.3))
        epsilon = epsilon_for(size)
        result = cutoff_row(row, epsilon)
        assert abs(math.fsum(result) - math.fsum(row)) < 1e-15
        assert (result >= epsilon).all()
        assert np.array_equal(cutoff_row(result, epsilon), result)


def test_cutoff_leaves_thick_rows_alone():
    '''
    Test that a row with nothing below epsilon comes back unchanged.
    '''
    row = np.array([0.25, 0.25, 0.5])
    assert np.array_equal(cutoff_row(row, 0.006), row)


def test_cutoff_fallback(caplog):
    '''
    Test that when the largest entry cannot absorb the added mass, the row is clamped and
    renormalized with a warning.
    '''
    result = cutoff_row([0.0] * 99 + [1.0], 0.006)
    assert result[-1] == pytest.approx(1.0 - 99 * 0.006)
    assert 'clamped' not in caplog.text

    # Four entries raised to 0.15 plus the untouched 0.3 leave only 0.1 for the largest entry.
    result = cutoff_row([0.3, 0.0, 0.0, 0.0, 0.0, 0.7], 0.15)
    assert result.sum() == pytest.approx(1.0)
    assert result == pytest.approx(np.array([0.3, 0.15, 0.15, 0.15, 0.15, 0.7]) / 1.6)
    assert 'clamped' in caplog.text


def test_cutoff_epsilon_too_large():
    '''
    Test that epsilon times the row length reaching one is an error.
    '''
    with pytest.raises(CutoffError):
        cutoff_row([0.5, 0.5], 0.5)


def test_apply_cutoff_marks_tables():
    '''
    Test that apply_cutoff thickens every ICPT row and flags the set.
    '''
    network = conflicting_chain()
    icpts = apply_cutoff(compute_icpts(network, {'C': 1}, 2))
    assert icpts.cutoff_applied
    assert list(icpts.tables['B'].rows[1]) == pytest.approx([0.006, 0.994])
    for table in icpts.tables.values():
        assert (table.rows >= 0.006).all()


def test_dump_icpts():
    '''
    Test that the ICPT dump is JSON in the network's table layout.
    '''
    network = chain3()
    icpts = compute_icpts(network, {'C': 1}, 2)
    doc = json.loads(dump_icpts(icpts, network))
    assert doc['propagationLength'] == 2
    assert [node['id'] for node in doc['nodes']] == ['A', 'B']
    assert doc['nodes'][1]['parents'] == ['A']
    assert doc['nodes'][1]['icpt'][0] == pytest.approx([2 / 3, 1 / 3])


def test_apply_cutoff_with_one_epsilon():
    '''
    Test that an explicit epsilon is used for every node instead of the per-size threshold.
    '''
    network = chain3()
    icpts = compute_icpts(network, {'C': 1}, 2)
    assert np.array_equal(apply_cutoff(icpts).tables['B'].rows, icpts.tables['B'].rows)
    thick = apply_cutoff(icpts, epsilon=0.1)
    assert list(thick.tables['B'].rows[1]) == pytest.approx([0.1, 0.9], abs=1e-12)
    assert list(thick.tables['B'].rows[0]) == pytest.approx([2 / 3, 1 / 3])
    with pytest.raises(CutoffError):
        apply_cutoff(icpts, epsilon=0.5)
