from .sampler import *
from .epis import *
from .likelihood import *
from .logic import *

from ..utils import Algorithm, UsageError



SAMPLERS = {sampler.ALGORITHM: sampler
            for sampler in (EpisSampler, LikelihoodWeightingSampler, LogicSampler)}


def get_sampler(network, evidence, config):
    '''
    Creates an instance of the applicable ForwardSampler child class based on config.algorithm.
    '''
    algorithm = config.algorithm
    if isinstance(algorithm, str):
        algorithm = Algorithm[algorithm]
    if algorithm not in SAMPLERS:
        raise UsageError(f"{algorithm.name} is not a sampling algorithm.")
    return SAMPLERS[algorithm](network, evidence, config)


def run_sampler(network, evidence, config):
    '''Runs whichever sampler config.algorithm names.'''
    return get_sampler(network, evidence, config).run()
