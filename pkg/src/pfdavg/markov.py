"""Multi-phase Markov model on aggregated channel-mode counts.

A state counts how many channels sit in each of the five channel modes.
One phase lasts a proof-test period; between phases a deterministic linking
map sends every channel found failed-undetected into repair.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .scenario import Scenario, derive_rates

__all__ = [
    "ChannelMode", "MarkovModel", "MarkovResult", "SolverError", "apply_linking",
    "build_markov", "enumerate_states", "pfd_avg_markov", "phase_transient",
    "unavailability_curve", "TRUNCATION_TOL",
]

TRUNCATION_TOL = 1e-12
MAX_POISSON_TERMS = 5_000_000


class SolverError(RuntimeError):
    pass


class ChannelMode(enum.IntEnum):
    OK = 0
    DD = 1
    DUT = 2
    REPDUT = 3
    DUU = 4


def enumerate_states(n: int) -> list[tuple[int, ...]]:
    """All 5-compositions of ``n``, all-OK first."""
    states = []

    def fill(prefix, remaining, slots):
        if slots == 1:
            states.append(prefix + (remaining,))
            return
        for k in range(remaining, -1, -1):
            fill(prefix + (k,), remaining - k, slots - 1)

    fill((), n, len(ChannelMode))
    return states


@dataclass(frozen=True)
class MarkovModel:
    states: tuple[tuple[int, ...], ...]
    generator: np.ndarray
    eff: np.ndarray
    phase_duration: float
    linking: np.ndarray
    initial: np.ndarray

    @property
    def size(self) -> int:
        return len(self.states)

    def write_states_csv(self, path):
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["state_index", "ok", "dd", "dut", "repdut", "duu", "eff"])
            for i, st in enumerate(self.states):
                writer.writerow([i, *st, int(self.eff[i])])


def build_markov(s: Scenario) -> MarkovModel:
    r = derive_rates(s)
    states = enumerate_states(s.n)
    index = {st: i for i, st in enumerate(states)}
    q = np.zeros((len(states), len(states)))
    if s.n == 1:
        # a lone channel has no common cause partner: rates merge
        failures = [(ChannelMode.DD, r.lambda_dd, 0.0), (ChannelMode.DUT, r.lambda_dut, 0.0),
                    (ChannelMode.DUU, r.lambda_duu, 0.0)]
    else:
        failures = [(ChannelMode.DD, r.dd.independent, r.dd.ccf),
                    (ChannelMode.DUT, r.dut.independent, r.dut.ccf),
                    (ChannelMode.DUU, r.duu.independent, r.duu.ccf)]

    def move(st, src, dst, count=1):
        out = list(st)
        out[src] -= count
        out[dst] += count
        return index[tuple(out)]

    for i, st in enumerate(states):
        ok = st[ChannelMode.OK]
        if ok:
            for mode, independent, ccf in failures:
                if independent > 0:
                    q[i, move(st, ChannelMode.OK, mode)] += ok * independent
                if ccf > 0:
                    q[i, move(st, ChannelMode.OK, mode, ok)] += ccf
        if st[ChannelMode.DD] and s.mu_dd > 0:
            q[i, move(st, ChannelMode.DD, ChannelMode.OK)] += st[ChannelMode.DD] * s.mu_dd
        if st[ChannelMode.REPDUT] and s.mu_dut > 0:
            q[i, move(st, ChannelMode.REPDUT, ChannelMode.OK)] += (
                st[ChannelMode.REPDUT] * s.mu_dut)
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))

    linking = np.empty(len(states), dtype=np.int64)
    for i, st in enumerate(states):
        linking[i] = (move(st, ChannelMode.DUT, ChannelMode.REPDUT, st[ChannelMode.DUT])
                      if st[ChannelMode.DUT] else i)
    eff = np.array([1.0 if st[ChannelMode.OK] < s.m else 0.0 for st in states])
    initial = np.zeros(len(states))
    initial[index[(s.n, 0, 0, 0, 0)]] = 1.0
    return MarkovModel(tuple(states), q, eff, float(s.t1), linking, initial)


def _poisson_terms(rate_time: float, tol: float) -> tuple[int, np.ndarray, np.ndarray]:
    """Truncation point and Poisson pmf / survival weights for uniformization.

    ``K`` is chosen so that both the dropped pmf mass and the dropped
    cumulative tail sum(k > K) P(N > k) stay below ``tol``.
    """
    if rate_time == 0:
        return 0, np.array([1.0]), np.array([0.0])
    dist = stats.poisson(rate_time)
    k = int(dist.ppf(1.0 - tol)) + 1
    while True:
        if k > MAX_POISSON_TERMS:
            achieved = float(dist.sf(MAX_POISSON_TERMS))
            raise SolverError(
                f"uniformization needs more than {MAX_POISSON_TERMS} terms "
                f"(achieved tolerance {achieved:.3g}, wanted {tol:.3g})"
            )
        # E[(N - K - 1)^+] bounds the dropped part of the cumulative sum
        tail = rate_time * dist.sf(k - 1) - (k + 1) * dist.sf(k)
        if dist.sf(k) <= tol and max(tail, 0.0) <= tol * max(rate_time, 1.0):
            break
        k += max(1, int(math.sqrt(rate_time)))
    ks = np.arange(k + 1)
    return k, dist.pmf(ks), dist.sf(ks)


def phase_transient(model: MarkovModel, p0, duration: float,
                    tol: float = TRUNCATION_TOL) -> tuple[np.ndarray, float]:
    """Distribution after ``duration`` hours and the integrated unavailability.

    The integral of eff . p(t) comes from the same uniformized power series:
    int_0^T p(t) dt = (1/L) * sum_k P(N_T > k) v_k with v_k = p0 P^k.
    """
    p0 = np.asarray(p0, dtype=float)
    if abs(p0.sum() - 1.0) > 1e-9:
        raise ValueError(f"initial distribution sums to {p0.sum():.12g}, not 1")
    q = model.generator
    rate = float(np.max(-np.diag(q))) if q.size else 0.0
    if rate == 0 or duration == 0:
        return p0.copy(), duration * float(model.eff @ p0)
    rate *= 1.02  # keep the uniformized diagonal strictly positive
    jump = np.eye(len(p0)) + q / rate
    k_max, pmf, sf = _poisson_terms(rate * duration, tol)
    v = p0.copy()
    p_end = np.zeros_like(p0)
    acc = 0.0
    for k in range(k_max + 1):
        p_end += pmf[k] * v
        acc += sf[k] * float(model.eff @ v)
        v = v @ jump
    p_end = np.where((p_end < 0) & (p_end > -1e-12), 0.0, p_end)
    return p_end, acc / rate


def apply_linking(model: MarkovModel, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"distribution sums to {p.sum():.12g}, not 1")
    out = np.zeros_like(p)
    np.add.at(out, model.linking, p)
    return out


@dataclass(frozen=True)
class MarkovResult:
    pfd_avg: float
    phase_integrals: tuple[float, ...]
    states: int
    tolerance: float


def pfd_avg_markov(s: Scenario, model: MarkovModel | None = None,
                   tol: float = TRUNCATION_TOL) -> MarkovResult:
    model = model if model is not None else build_markov(s)
    p = model.initial
    integrals = []
    for _ in range(s.n_tests):
        p, area = phase_transient(model, p, model.phase_duration, tol)
        integrals.append(area)
        p = apply_linking(model, p)
    return MarkovResult(pfd_avg=math.fsum(integrals) / s.t0, phase_integrals=tuple(integrals),
                        states=model.size, tolerance=tol)


def unavailability_curve(s: Scenario, points_per_interval: int = 201,
                         model: MarkovModel | None = None) -> tuple[np.ndarray, np.ndarray]:
    """eff . p(t) on the same interval-aligned grid the fault tree uses."""
    from scipy.linalg import expm

    model = model if model is not None else build_markov(s)
    step = s.t1 / (points_per_interval - 1)
    transfer = expm(model.generator * step)
    p = model.initial.copy()
    times = [0.0]
    values = [float(model.eff @ p)]
    for k in range(s.n_tests):
        for j in range(1, points_per_interval):
            p = p @ transfer
            times.append(k * s.t1 + j * step)
            values.append(float(model.eff @ p))
        p = apply_linking(model, p / p.sum())
    return np.array(times), np.array(values)
