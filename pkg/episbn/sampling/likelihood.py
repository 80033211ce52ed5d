'''
LikelihoodWeightingSampler inherits from ForwardSampler and draws every non-evidence node from its
CPT, so each sample's weight is the likelihood of the evidence given its sampled parents.
'''

from .sampler import ForwardSampler
from ..utils import Algorithm



class LikelihoodWeightingSampler(ForwardSampler):
    '''Inherits from ForwardSampler; proposals are the network's own CPTs.'''
    ALGORITHM = Algorithm.lw

    def build_proposals(self):
        return {node_id: self.network.table(node_id)
                for node_id in self.network.ids if node_id not in self.evidence}


def run_lw(network, evidence, config):
    '''Runs likelihood weighting and returns the PosteriorEstimate.'''
    return LikelihoodWeightingSampler(network, evidence, config).run()
