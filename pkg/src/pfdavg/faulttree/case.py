from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from ..scenario import Scenario, derive_rates
from .laws import Exponential, Glm, PeriodicTest
from .tree import BasicEvent, FaultTree, Or, Vote, top_probability

__all__ = ["FaultTreeResult", "TimeCurve", "average_pfd_ft", "build_case_tree",
           "DEFAULT_POINTS_PER_INTERVAL"]

DEFAULT_POINTS_PER_INTERVAL = 201


@dataclass(frozen=True)
class TimeCurve:
    t: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        if self.t.shape != self.p.shape or self.t.ndim != 1:
            raise ValueError("t and p must be matching 1-D arrays")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("time grid must be strictly increasing")

    def write_csv(self, path, value_header: str = "p_top"):
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_hours", value_header])
            for t, p in zip(self.t, self.p):
                writer.writerow([repr(float(t)), repr(float(p))])


@dataclass(frozen=True)
class FaultTreeResult:
    pfd_avg: float
    curve: TimeCurve
    points_per_interval: int


def build_case_tree(s: Scenario) -> FaultTree:
    """Vote over channel failures; each channel ORs its own three modes with the shared CCF events."""
    r = derive_rates(s)
    gamma = 0.0
    if s.n == 1:
        own = [
            BasicEvent("C1_DD", Glm(gamma, r.lambda_dd, s.mu_dd)),
            BasicEvent("C1_DUT", PeriodicTest(r.lambda_dut, s.mu_dut, s.t1, s.t1)),
            BasicEvent("C1_DUU", Exponential(r.lambda_duu)),
        ]
        return FaultTree(Vote(1, Or(*own, name="C1"), name="TOP"))

    ccf = [
        BasicEvent("CCF_DD", Glm(gamma, r.dd.ccf, s.n * s.mu_dd)),
        BasicEvent("CCF_DUT", PeriodicTest(r.dut.ccf, s.n * s.mu_dut, s.t1, s.t1)),
        BasicEvent("CCF_DUU", Exponential(r.duu.ccf)),
    ]
    channels = []
    for c in range(1, s.n + 1):
        own = [
            BasicEvent(f"C{c}_DD", Glm(gamma, r.dd.independent, s.mu_dd)),
            BasicEvent(f"C{c}_DUT", PeriodicTest(r.dut.independent, s.mu_dut, s.t1, s.t1)),
            BasicEvent(f"C{c}_DUU", Exponential(r.duu.independent)),
        ]
        channels.append(Or(*own, *ccf, name=f"C{c}"))
    return FaultTree(Vote(s.n - s.m + 1, *channels, name="TOP"))


def _interval_grid(s: Scenario, points: int) -> np.ndarray:
    """(n_tests, points) array; row k spans [k*t1, (k+1)*t1] endpoints included."""
    k = np.arange(s.n_tests, dtype=float)[:, None]
    frac = np.linspace(0.0, 1.0, points)[None, :]
    return (k + frac) * s.t1


def average_pfd_ft(s: Scenario, points_per_interval: int = DEFAULT_POINTS_PER_INTERVAL,
                   tree: FaultTree | None = None) -> FaultTreeResult:
    """Time-averaged top-event probability over [0, t0].

    Composite Simpson per test interval; the kinks sit on the interval ends.
    """
    if points_per_interval < 3:
        raise ValueError("need at least 3 points per interval")
    tree = tree if tree is not None else build_case_tree(s)
    grid = _interval_grid(s, points_per_interval)
    q = {name: ev.law(grid) for name, ev in tree.events.items()}
    p = np.asarray(top_probability(tree, q), dtype=float) * np.ones_like(grid)
    areas = [simpson(p[k], x=grid[k]) for k in range(grid.shape[0])]
    mean = math.fsum(areas) / s.t0
    t_flat = np.concatenate([grid[0], *(row[1:] for row in grid[1:])])
    p_flat = np.concatenate([p[0], *(row[1:] for row in p[1:])])
    return FaultTreeResult(pfd_avg=mean, curve=TimeCurve(t_flat, p_flat),
                           points_per_interval=points_per_interval)
