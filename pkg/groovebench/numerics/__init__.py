from groovebench.numerics.matrix import Matrix, as_matrix, read_grvm, write_grvm
from groovebench.numerics.rng import RngStream, sample_distribution
from groovebench.numerics.tape import Tape, Node, backward
from groovebench.numerics.layers import RunningStats, dense_forward, batchnorm_forward
from groovebench.numerics.adam import AdamState, adam_step

__all__ = [
    'Matrix', 'as_matrix', 'read_grvm', 'write_grvm',
    'RngStream', 'sample_distribution',
    'Tape', 'Node', 'backward',
    'RunningStats', 'dense_forward', 'batchnorm_forward',
    'AdamState', 'adam_step',
]
