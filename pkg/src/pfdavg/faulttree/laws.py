"""Time-dependent unavailability laws for fault-tree basic events.

Every law maps a time (scalar or array, hours) to the probability that the
component is failed at that time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = ["Exponential", "Glm", "Law", "PeriodicTest", "q_exponential", "q_glm",
           "q_periodic_test"]


def _check_rate(name, value):
    if not value >= 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class Glm:
    """Failure revealed immediately, then repaired at rate ``mu``.

    ``gamma`` is the probability of being failed at t = 0 (failure to start).
    """

    gamma: float
    lam: float
    mu: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        _check_rate("lam", self.lam)
        _check_rate("mu", self.mu)

    def __call__(self, t):
        return q_glm(self, t)


@dataclass(frozen=True)
class PeriodicTest:
    """Failure hidden until a proof test at ``theta + k * tau``, then repaired at rate ``mu``."""

    lam: float
    mu: float
    tau: float
    theta: float

    def __post_init__(self):
        _check_rate("lam", self.lam)
        _check_rate("mu", self.mu)
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau!r}")
        if not 0.0 <= self.theta <= self.tau:
            raise ValueError(f"theta must lie in [0, tau], got {self.theta!r}")

    def __call__(self, t):
        return q_periodic_test(self, t)


@dataclass(frozen=True)
class Exponential:
    """Failure never revealed nor repaired."""

    lam: float

    def __post_init__(self):
        _check_rate("lam", self.lam)

    def __call__(self, t):
        return q_exponential(self, t)


Law = Union[Glm, PeriodicTest, Exponential]


def _as_times(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("laws are defined for t >= 0 only")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def q_glm(law: Glm, t):
    ts = _as_times(t)
    total = law.lam + law.mu
    if total == 0:
        return _out(np.full_like(ts, law.gamma), t)
    q_inf = law.lam / total
    q = q_inf + (law.gamma - q_inf) * np.exp(-total * ts)
    return _out(np.clip(q, 0.0, 1.0), t)


def q_exponential(law: Exponential, t):
    ts = _as_times(t)
    return _out(-np.expm1(-law.lam * ts), t)


def _evolve(w0, r0, lam, mu, s):
    """Advance the (working, under-repair) probabilities by ``s`` hours without a test.

    Returns ``(w, r)``; the failed-undetected share is ``1 - w - r``.
    """
    r = r0 * np.exp(-mu * s)
    slow, fast = min(lam, mu), max(lam, mu)
    gap = fast - slow
    if gap > 1e-12 * max(fast, 1e-300):
        # (e^{-mu s} - e^{-lam s}) / (lam - mu), symmetric in lam and mu
        mixing = -np.exp(-slow * s) * np.expm1(-gap * s) / gap
    else:
        mixing = s * np.exp(-lam * s)
    w = w0 * np.exp(-lam * s) + mu * r0 * mixing
    return w, r


def q_periodic_test(law: PeriodicTest, t):
    """Three-state (working / undetected / repairing) solution with test transfers.

    At each test instant the undetected probability moves into repair.  The
    phase start states are propagated exactly, then each time is evaluated
    from the start of its own phase.
    """
    ts = _as_times(t)
    flat = np.atleast_1d(ts).ravel()
    if law.lam == 0:
        return _out(np.zeros_like(ts), t)
    # tests performed at or before each time
    n_done = np.where(flat < law.theta, 0,
                      np.floor((flat - law.theta) / law.tau).astype(np.int64) + 1)
    n_done = np.maximum(n_done, 0)
    top = int(n_done.max()) if flat.size else 0
    w_start = np.empty(top + 1)
    r_start = np.empty(top + 1)
    w, r = 1.0, 0.0
    w_start[0], r_start[0] = w, r
    for k in range(1, top + 1):
        span = law.theta if k == 1 else law.tau
        w, r = _evolve(w, r, law.lam, law.mu, span)
        r = 1.0 - w  # transfer of the undetected share into repair
        w_start[k], r_start[k] = w, r
    phase_start = np.where(n_done == 0, 0.0, law.theta + (n_done - 1) * law.tau)
    w_t, _ = _evolve(w_start[n_done], r_start[n_done], law.lam, law.mu, flat - phase_start)
    q = np.clip(1.0 - w_t, 0.0, 1.0).reshape(ts.shape)
    return _out(q, t)
