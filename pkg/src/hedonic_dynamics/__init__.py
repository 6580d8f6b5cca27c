"""Exact dynamics of coalition formation under history-dependent utilities."""

from .deviations import NEW, Group, Single, Stability, classify_deviation, enumerate_deviations, is_stable
from .dynamics import certify_cycle, reverse_periodic, run, shortest_sequence, step
from .estimator import CoalitionFormation
from .game import Game, Partition, aggregate
from .perception import PerceptionModel
from .validation import check_utility_matrix

__version__ = "0.1.0"

__all__ = [
    "NEW", "CoalitionFormation", "Game", "Group", "Partition", "PerceptionModel", "Single", "Stability",
    "aggregate", "certify_cycle", "check_utility_matrix", "classify_deviation", "enumerate_deviations",
    "is_stable", "reverse_periodic", "run", "shortest_sequence", "step",
]
