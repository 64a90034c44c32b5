from enum import Enum


class Architectures(Enum):
    """The six autoencoder families. Declaration order is the tie-break order of the ensemble."""

    AE = 'AE'
    AAE = 'AAE'
    RNNAE = 'RNNAE'
    LSTMAE = 'LSTMAE'
    GRUAE = 'GRUAE'
    ATAE = 'ATAE'


class Activations(Enum):
    TANH = 'tanh'
    SIGMOID = 'sigmoid'
    RELU = 'relu'
    IDENTITY = 'identity'


class Similarities(Enum):
    SCALED_DOT = 'scaled_dot'
    DOT = 'dot'


class Views(Enum):
    """Dataset facets. Declaration order is the tie-break order of a suite."""

    PA = 'PA'
    PE = 'PE'
    PX = 'PX'
    PP = 'PP'
    PN = 'PN'


class JobTypes(Enum):
    INLINE = 'inline'
    THREAD = 'thread'
    PROCESS = 'process'


class DataFormats(Enum):
    DENSE = 'dense'
    SPARSE = 'sparse'


class FigureFormats(Enum):
    SVG = 'svg'
    PGM = 'pgm'
