"""Fault-tree evaluation: laws, BDD engine and the MooN case-study builder."""
from .case import (DEFAULT_POINTS_PER_INTERVAL, FaultTreeResult, TimeCurve, average_pfd_ft,
                   build_case_tree)
from .laws import Exponential, Glm, Law, PeriodicTest, q_exponential, q_glm, q_periodic_test
from .tree import (And, BasicEvent, Bdd, FaultTree, FaultTreeError, Gate, Or, Vote,
                   minimal_cut_sets, top_probability)

__all__ = [
    "And", "BasicEvent", "Bdd", "DEFAULT_POINTS_PER_INTERVAL", "Exponential", "FaultTree",
    "FaultTreeError", "FaultTreeResult", "Gate", "Glm", "Law", "Or", "PeriodicTest",
    "TimeCurve", "Vote", "average_pfd_ft", "build_case_tree", "minimal_cut_sets",
    "q_exponential", "q_glm", "q_periodic_test", "top_probability",
]
