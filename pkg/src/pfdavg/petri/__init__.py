"""Stochastic Petri nets with predicates and their Monte Carlo estimator."""
from .case import (EstimateWithCI, build_case_net, estimate_pfd, history_fractions,
                   simulate_history, write_histories_csv)
from .engine import run_histories, run_one
from .net import (Assignment, CompiledNet, Condition, Dirac, Exp, Ipa, NetState, PetriError,
                  PetriNet, Transition, make_transition, parse_affectation, parse_guard,
                  schedule_time)

__all__ = [
    "Assignment", "CompiledNet", "Condition", "Dirac", "EstimateWithCI", "Exp", "Ipa",
    "NetState", "PetriError", "PetriNet", "Transition", "build_case_net", "estimate_pfd",
    "history_fractions", "make_transition", "parse_affectation", "parse_guard",
    "run_histories", "run_one", "schedule_time", "simulate_history", "write_histories_csv",
]
