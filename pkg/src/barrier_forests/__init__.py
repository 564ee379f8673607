"""Minimum spanning entering forests of potential graphs and their barrier digraphs."""
from .conversion import (
    GraphStructureError,
    InconsistentBarrierError,
    ingest_potential_1d,
    potential_to_barrier,
    recover_potential,
    shift_potential,
)
from .graphs import BarrierDigraph, EnteringForest, PotentialGraph, UndirectedForest, orient_tree, unorient
from .minima import (
    lambda_bullet,
    lambda_circ,
    lambda_circ_q,
    min_spanning_entering_tree,
    nu,
    subset_minima,
)
from .msf import Dendrogram, MergeEvent, run
from .oracle import EnumerationBudget, lambda_oracle, mu_oracle, phi_oracle, phi_table

__all__ = [
    "BarrierDigraph",
    "Dendrogram",
    "EnteringForest",
    "EnumerationBudget",
    "GraphStructureError",
    "InconsistentBarrierError",
    "MergeEvent",
    "PotentialGraph",
    "UndirectedForest",
    "ingest_potential_1d",
    "lambda_bullet",
    "lambda_circ",
    "lambda_circ_q",
    "lambda_oracle",
    "min_spanning_entering_tree",
    "mu_oracle",
    "nu",
    "orient_tree",
    "phi_oracle",
    "phi_table",
    "potential_to_barrier",
    "recover_potential",
    "run",
    "shift_potential",
    "subset_minima",
    "unorient",
]
