'''
LogicSampler inherits from ForwardSampler and implements probabilistic logic sampling: every node,
evidence included, is drawn from its CPT and samples that disagree with the evidence are rejected.
'''

from .sampler import ForwardSampler
from ..utils import Algorithm



class LogicSampler(ForwardSampler):
    '''Inherits from ForwardSampler; accepted samples weigh 1, rejected ones 0.'''
    ALGORITHM = Algorithm.pls
    SAMPLES_EVIDENCE = True

    def build_proposals(self):
        return {node_id: self.network.table(node_id) for node_id in self.network.ids}


def run_pls(network, evidence, config):
    '''Runs probabilistic logic sampling and returns the PosteriorEstimate.'''
    return LogicSampler(network, evidence, config).run()
