'''
EpisSampler inherits from ForwardSampler and draws from the evidence pre-propagation importance
function: ICPTs computed from loopy belief propagation, optionally cut off at epsilon.
'''

import logging

import numpy as np

from .sampler import ForwardSampler, forward
from .. import lbp
from ..importance import apply_cutoff, compute_icpts
from ..network import topological_order
from ..utils import Algorithm



class EpisSampler(ForwardSampler):
    '''
    Inherits from ForwardSampler; proposals are the ICPTs. With d = 0 and the cutoff off the ICPTs
    are the CPTs and this sampler coincides with likelihood weighting draw for draw.
    '''
    ALGORITHM = Algorithm.epis

    def __init__(self, network, evidence, config):
        super().__init__(network, evidence, config)
        if config.d is None:
            self.d = lbp.default_propagation_length(network, self.evidence)
        else:
            self.d = config.d
        self.icpts = None


    @property
    def propagation_length(self):
        return self.d

    @property
    def cutoff_applied(self):
        return self.config.cutoff

    def build_proposals(self):
        '''
        Propagates d sweeps, computes the ICPTs and, if configured, applies the cutoff.
        '''
        logging.info(f"Building the importance function with d={self.d}, "
                     f"cutoff {'on' if self.config.cutoff else 'off'}...")
        icpts = compute_icpts(self.network, self.evidence, self.d)
        if self.config.cutoff:
            icpts = apply_cutoff(icpts, self.config.epsilon)
        self.icpts = icpts
        return {node_id: table.rows for node_id, table in icpts.tables.items()}


def draw_sample(network, icpts, evidence, rng):
    '''
    Draws one sample from the ICPTs with evidence clamped. Returns the assignment (node id ->
    state index) and its importance weight P(x) / g(x).
    rng -- a numpy Generator supplying the uniforms.
    '''
    order = topological_order(network)
    proposals = {node_id: table.rows for node_id, table in icpts.tables.items()}
    states, log_weights = forward(network, order, proposals, evidence,
                                  rng.random((1, len(order))))
    assignment = {node_id: int(states[0, network.index[node_id]]) for node_id in network.ids}
    return assignment, float(np.exp(log_weights[0]))


def run_epis(network, evidence, config):
    '''Runs EPIS end to end and returns the PosteriorEstimate.'''
    return EpisSampler(network, evidence, config).run()
