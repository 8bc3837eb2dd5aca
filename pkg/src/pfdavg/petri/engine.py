"""Compiled Monte Carlo engine for :class:`PetriNet` histories.

Each history draws from its own SplitMix64 stream keyed by (seed, history
index), so a history's outcome depends on nothing but those two numbers and
results are identical for any thread count or execution order.
"""
from __future__ import annotations

import os

import numba as nb
import numpy as np

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the TBB build shipped here is too old for numba; workqueue is always present
    nb.config.THREADING_LAYER = "workqueue"

from .net import CompiledNet, PetriError

__all__ = ["STATUS_MESSAGES", "run_histories", "run_one"]

STATUS_OK = 0
STATUS_DISABLED_FIRING = 1
STATUS_NEGATIVE_TIME = 2
STATUS_TOKEN_GROUP = 3
STATUS_COUNTER = 4
STATUS_CASCADE = 5
STATUS_NEGATIVE_MARKING = 6

STATUS_MESSAGES = {
    STATUS_DISABLED_FIRING: "transition fired while disabled",
    STATUS_NEGATIVE_TIME: "event scheduled in the past",
    STATUS_TOKEN_GROUP: "token conservation violated",
    STATUS_COUNTER: "counter variable out of sync with its places",
    STATUS_CASCADE: "immediate-transition cascade exceeded its bound",
    STATUS_NEGATIVE_MARKING: "negative marking",
}

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def _stream_start(seed, index):
    return _mix(seed ^ _mix(np.uint64(index) * _GOLDEN + _GOLDEN))


@nb.njit(cache=True)
def _cmp(a, op, b):
    if op == 0:
        return a < b
    if op == 1:
        return a <= b
    if op == 2:
        return a == b
    if op == 3:
        return a != b
    if op == 4:
        return a >= b
    return a > b


@nb.njit(cache=True)
def _enabled(t, marking, variables, in_start, in_place, in_weight,
             guard_start, guard_var, guard_op, guard_val):
    for a in range(in_start[t], in_start[t + 1]):
        if marking[in_place[a]] < in_weight[a]:
            return False
    for g in range(guard_start[t], guard_start[t + 1]):
        if not _cmp(variables[guard_var[g]], guard_op[g], guard_val[g]):
            return False
    return True


@nb.njit(cache=True)
def _failed(variables, fail_var, fail_op, fail_val):
    if fail_var.shape[0] == 0:
        return False
    for i in range(fail_var.shape[0]):
        if not _cmp(variables[fail_var[i]], fail_op[i], fail_val[i]):
            return False
    return True


@nb.njit(cache=True)
def _simulate(marking0, vars0, law_kind, law_param, in_start, in_place, in_weight,
              out_start, out_place, out_weight, guard_start, guard_var, guard_op, guard_val,
              aff_start, aff_var, aff_op, aff_val, fail_var, fail_op, fail_val,
              group_start, group_place, group_total, count_var, count_start, count_place,
              max_cascade, t_end, seed, index, check):
    """One history; returns (time spent failed, status, events fired)."""
    n_tr = law_kind.shape[0]
    marking = marking0.copy()
    variables = vars0.copy()
    due = np.full(n_tr, np.inf)
    state = _stream_start(seed, index)
    now = 0.0
    failed_time = 0.0
    fired = -1
    cascade = 0
    events = 0
    while True:
        # (re)schedule after the previous firing
        for t in range(n_tr):
            if _enabled(t, marking, variables, in_start, in_place, in_weight,
                        guard_start, guard_var, guard_op, guard_val):
                if due[t] == np.inf:
                    kind = law_kind[t]
                    if kind == 0:
                        state += _GOLDEN
                        u = np.float64(_mix(state) >> _S11) * _INV53
                        due[t] = now - np.log1p(-u) / law_param[t]
                    elif kind == 1:
                        due[t] = now + law_param[t]
                    else:
                        period = law_param[t]
                        k = np.floor(now / period)
                        if k * period < now:
                            k += 1.0
                        nxt = k * period
                        if t == fired and nxt <= now:
                            nxt = (k + 1.0) * period
                        due[t] = nxt
            else:
                due[t] = np.inf
        # pick the earliest; zero-delay diracs first at equal dates, then declaration order
        best = -1
        best_time = np.inf
        best_immediate = False
        for t in range(n_tr):
            d = due[t]
            if d == np.inf:
                continue
            immediate = law_kind[t] == 1 and law_param[t] == 0.0
            if d < best_time or (d == best_time and immediate and not best_immediate):
                best = t
                best_time = d
                best_immediate = immediate
        failed = _failed(variables, fail_var, fail_op, fail_val)
        if best < 0 or best_time > t_end:
            if failed:
                failed_time += t_end - now
            return failed_time, STATUS_OK, events
        if best_time < now:
            return failed_time, STATUS_NEGATIVE_TIME, events
        if failed:
            failed_time += best_time - now
        if best_time == now and best_immediate:
            cascade += 1
            if cascade > max_cascade:
                return failed_time, STATUS_CASCADE, events
        else:
            cascade = 1 if best_immediate else 0
        now = best_time
        if not _enabled(best, marking, variables, in_start, in_place, in_weight,
                        guard_start, guard_var, guard_op, guard_val):
            return failed_time, STATUS_DISABLED_FIRING, events
        for a in range(in_start[best], in_start[best + 1]):
            marking[in_place[a]] -= in_weight[a]
        for a in range(out_start[best], out_start[best + 1]):
            marking[out_place[a]] += out_weight[a]
        for a in range(aff_start[best], aff_start[best + 1]):
            if aff_op[a] == 0:
                variables[aff_var[a]] = aff_val[a]
            else:
                variables[aff_var[a]] += aff_val[a]
        due[best] = np.inf
        fired = best
        events += 1
        if check:
            for p in range(marking.shape[0]):
                if marking[p] < 0:
                    return failed_time, STATUS_NEGATIVE_MARKING, events
            for g in range(group_total.shape[0]):
                total = 0
                for a in range(group_start[g], group_start[g + 1]):
                    total += marking[group_place[a]]
                if total != group_total[g]:
                    return failed_time, STATUS_TOKEN_GROUP, events
            for c in range(count_var.shape[0]):
                total = 0
                for a in range(count_start[c], count_start[c + 1]):
                    total += marking[count_place[a]]
                if total != variables[count_var[c]]:
                    return failed_time, STATUS_COUNTER, events


@nb.njit(cache=True, parallel=True)
def _simulate_many(marking0, vars0, law_kind, law_param, in_start, in_place, in_weight,
                   out_start, out_place, out_weight, guard_start, guard_var, guard_op,
                   guard_val, aff_start, aff_var, aff_op, aff_val, fail_var, fail_op,
                   fail_val, group_start, group_place, group_total, count_var, count_start,
                   count_place, max_cascade, t_end, seed, first, count, check):
    out = np.empty(count)
    status = np.zeros(count, dtype=np.int64)
    events = np.zeros(count, dtype=np.int64)
    for h in nb.prange(count):
        out[h], status[h], events[h] = _simulate(
            marking0, vars0, law_kind, law_param, in_start, in_place, in_weight,
            out_start, out_place, out_weight, guard_start, guard_var, guard_op, guard_val,
            aff_start, aff_var, aff_op, aff_val, fail_var, fail_op, fail_val,
            group_start, group_place, group_total, count_var, count_start, count_place,
            max_cascade, t_end, seed, first + h, check)
    return out, status, events


def _seed(seed: int) -> np.uint64:
    return np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)


def _raise_on(status: np.ndarray, first: int):
    bad = np.flatnonzero(status)
    if bad.size:
        code = int(status[bad[0]])
        raise PetriError(f"history {first + int(bad[0])}: {STATUS_MESSAGES[code]}")


def run_one(net: CompiledNet, t_end: float, seed: int, index: int,
            check: bool = False) -> tuple[float, int]:
    """Simulate one history; returns (time spent failed, events fired)."""
    failed, status, events = _simulate(*net[:-1], net.max_cascade, float(t_end), _seed(seed),
                                       int(index), bool(check))
    if status:
        raise PetriError(f"history {index}: {STATUS_MESSAGES[int(status)]}")
    return float(failed), int(events)


def run_histories(net: CompiledNet, t_end: float, seed: int, count: int, first: int = 0,
                  check: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Simulate histories ``first .. first + count - 1``.

    Returns per-history failed time and fired-event counts, ordered by index.
    """
    failed, status, events = _simulate_many(*net[:-1], net.max_cascade, float(t_end),
                                            _seed(seed), int(first), int(count), bool(check))
    _raise_on(status, first)
    return failed, events
