'''
Provides structures, custom errors, and global helper functions for the rest of the code.
'''

import math

from enum import Enum
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np



Algorithm = Enum('Algorithm', 'epis lw pls lbp')


class SamplerConfig(NamedTuple):
    '''
    One sampler run (or one experiment arm). d of None means the default propagation length;
    epsilon of None means the cutoff threshold goes by each node's outcome count; label of None
    means the label is derived from the other fields.
    '''
    algorithm: Algorithm = Algorithm.epis
    m: int = 1000
    d: Optional[int] = None
    cutoff: bool = True
    epsilon: Optional[float] = None
    seed: int = 0
    shards: int = 1
    label: Optional[str] = None


class GenSpec(NamedTuple):
    '''Knobs for the random network generator.'''
    nodes: int = 10
    max_parents: int = 2
    states: Tuple[int, int] = (2, 2)
    topology: str = 'dag'
    depth: Optional[int] = None
    p_ext: float = 0.0
    floor: float = 0.001
    seed: int = 0


class EvidenceSpec(NamedTuple):
    '''How an experiment generates its evidence when no evidence file is given.'''
    k: int = 0
    leaves_only: bool = False
    require_positive: bool = True


class ExperimentConfig(NamedTuple):
    '''
    A whole benchmark: where the network and evidence come from, which arms to run, and at which
    sample counts. network is a path or a GenSpec; evidence is a path, an EvidenceSpec, or None for
    no evidence.
    '''
    network: Union[str, GenSpec]
    evidence: Union[str, EvidenceSpec, None]
    arms: Tuple[SamplerConfig, ...]
    schedule: Tuple[int, ...]
    reps: int = 1
    seed: int = 0
    cases: int = 1
    timing: bool = False
    output: Optional[str] = None


class EpisError(Exception):
    '''Base class for everything this package raises on purpose.'''


class UsageError(EpisError):
    '''The caller asked for something that makes no sense (bad arguments or options).'''


class ConfigError(UsageError):
    '''An experiment configuration is malformed.'''


class DataError(EpisError, ValueError):
    '''A network, evidence set, or estimate is unusable.'''


class NetworkError(DataError):
    '''The network violates a structural invariant.'''


class CycleError(NetworkError):
    '''The parent relation has a directed cycle.'''
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class IncompleteAssignmentError(DataError):
    '''An assignment does not give a state to every node.'''


class DocumentError(DataError):
    '''A network, evidence, or config document could not be read.'''


class DocumentSyntaxError(DocumentError):
    '''The document is not well-formed.'''
    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class DocumentSemanticError(DocumentError):
    '''The document is well-formed but describes an invalid model.'''


class EvidenceError(DataError):
    '''Evidence names an unknown node or state.'''


class ZeroWeightError(DataError):
    '''Every sample got zero weight, so no estimate exists.'''


class CutoffError(DataError):
    '''The epsilon threshold is too large for the row it should be applied to.'''


class GenerationError(DataError):
    '''The generator was asked for something it cannot produce.'''


class MetricError(DataError):
    '''Two distributions being compared do not cover the same nodes and states.'''


class ResourceCapError(EpisError):
    '''The computation would exceed a configured size cap.'''


def normalize(vector):
    '''
    Scales a non-negative vector to sum 1. Returns the normalized vector and whether it had any
    mass; a vector with no mass comes back uniform.
    '''
    total = vector.sum()
    if total > 0 and np.isfinite(total):
        return vector / total, True
    return np.full(vector.shape, 1.0 / vector.shape[0]), False


def is_flat(vector):
    '''True when every entry equals the first one (bit for bit).'''
    return bool(np.all(vector == vector[0]))


def format_float(value):
    '''
    Formats a number with 17 significant digits, or NA when it is missing or not finite.
    '''
    if value is None or not math.isfinite(value):
        return 'NA'
    return f"{value:.17g}"
