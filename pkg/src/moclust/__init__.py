"""Multi-objective evolutionary clustering: MOCK, Delta-MOCK and MOCLE."""

from .dataset import (
    Dataset,
    NeighborTable,
    Partition,
    build_neighbor_table,
    euclidean,
    load_dataset,
    partition_from_labels,
)
from .kernels import BACKEND

__version__ = "0.1.0"
