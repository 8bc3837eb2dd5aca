"""Stochastic Petri nets with predicates.

Guards are conjunctions of ``var <op> int`` comparisons; affectations are
``var := value`` or ``var := var +/- value``.  Booleans are stored as 0/1.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "Assignment", "CompiledNet", "Condition", "Dirac", "Exp", "Ipa", "NetState", "PetriError",
    "PetriNet", "Transition", "parse_affectation", "parse_guard", "schedule_time",
]


class PetriError(RuntimeError):
    pass


@dataclass(frozen=True)
class Exp:
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"exponential rate must be > 0, got {self.rate!r}")


@dataclass(frozen=True)
class Dirac:
    delay: float = 0.0

    def __post_init__(self):
        if not self.delay >= 0:
            raise ValueError(f"dirac delay must be >= 0, got {self.delay!r}")


@dataclass(frozen=True)
class Ipa:
    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f"ipa period must be > 0, got {self.period!r}")


LAW_EXP, LAW_DIRAC, LAW_IPA = 0, 1, 2
OPS = ("<", "<=", "==", "!=", ">=", ">")
_CMP = {
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b, "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b, ">=": lambda a, b: a >= b, ">": lambda a, b: a > b,
}
ASSIGN_SET, ASSIGN_ADD = 0, 1


def _literal(text: str) -> int:
    text = text.strip()
    low = text.lower()
    if low == "true":
        return 1
    if low == "false":
        return 0
    try:
        return int(text)
    except ValueError:
        raise PetriError(f"expected an integer or boolean literal, got {text!r}") from None


@dataclass(frozen=True)
class Condition:
    var: str
    op: str
    value: int

    def holds(self, variables) -> bool:
        return _CMP[self.op](variables[self.var], self.value)


@dataclass(frozen=True)
class Assignment:
    var: str
    op: int  # ASSIGN_SET or ASSIGN_ADD
    value: int

    def apply(self, variables):
        if self.op == ASSIGN_SET:
            variables[self.var] = self.value
        else:
            variables[self.var] += self.value


_COND_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*(<=|>=|==|!=|<|>)\s*(\S+)\s*$")
_ASSIGN_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*:=\s*(.+?)\s*$")
_INCR_RE = re.compile(r"^([A-Za-z_]\w*)\s*([+-])\s*(\d+)$")


def parse_guard(text: str) -> tuple[Condition, ...]:
    """``"nbOK > 0 & CCF_DD == true"`` -> conditions; ``&`` and ``&&`` both join."""
    text = text.strip()
    if text.startswith("??"):
        text = text[2:]
    if not text.strip():
        return ()
    conditions = []
    for part in re.split(r"&&?", text):
        match = _COND_RE.match(part)
        if not match:
            raise PetriError(f"cannot parse guard clause {part.strip()!r}")
        var, op, value = match.groups()
        conditions.append(Condition(var, op, _literal(value)))
    return tuple(conditions)


def parse_affectation(text: str) -> tuple[Assignment, ...]:
    """``"nbOK := nbOK - 1; CCF_DD := false"`` -> assignments."""
    text = text.strip()
    if text.startswith("!!"):
        text = text[2:]
    out = []
    for part in filter(str.strip, text.split(";")):
        match = _ASSIGN_RE.match(part)
        if not match:
            raise PetriError(f"cannot parse affectation {part.strip()!r}")
        var, rhs = match.groups()
        incr = _INCR_RE.match(rhs)
        if incr:
            if incr.group(1) != var:
                raise PetriError(f"only self increments are supported: {part.strip()!r}")
            step = int(incr.group(3))
            out.append(Assignment(var, ASSIGN_ADD, step if incr.group(2) == "+" else -step))
        else:
            out.append(Assignment(var, ASSIGN_SET, _literal(rhs)))
    return tuple(out)


@dataclass(frozen=True)
class Transition:
    name: str
    inputs: tuple[tuple[str, int], ...]
    outputs: tuple[tuple[str, int], ...]
    law: Exp | Dirac | Ipa
    guard: tuple[Condition, ...] = ()
    affectation: tuple[Assignment, ...] = ()

    def __post_init__(self):
        for place, weight in (*self.inputs, *self.outputs):
            if weight < 1:
                raise PetriError(f"{self.name}: arc weight on {place!r} must be >= 1")

    @property
    def immediate(self) -> bool:
        return isinstance(self.law, Dirac) and self.law.delay == 0


def schedule_time(law, now: float, uniform: float, refire: bool = False) -> float:
    """Firing date for a transition enabled at ``now``.

    ``uniform`` is a U[0, 1) draw used by exponential laws. ``refire`` marks an
    ipa transition rescheduled right after its own firing, which must wait for
    the next period rather than fire again at ``now``.
    """
    if isinstance(law, Exp):
        return now - math.log1p(-uniform) / law.rate
    if isinstance(law, Dirac):
        return now + law.delay
    k = math.floor(now / law.period)
    if k * law.period < now:
        k += 1
    due = k * law.period
    if refire and due <= now:
        due = (k + 1) * law.period
    return due


class NetState(NamedTuple):
    marking: dict[str, int]
    variables: dict[str, int]


class CompiledNet(NamedTuple):
    """Flat integer/float arrays consumed by the compiled engine."""

    marking0: np.ndarray
    vars0: np.ndarray
    law_kind: np.ndarray
    law_param: np.ndarray
    in_start: np.ndarray
    in_place: np.ndarray
    in_weight: np.ndarray
    out_start: np.ndarray
    out_place: np.ndarray
    out_weight: np.ndarray
    guard_start: np.ndarray
    guard_var: np.ndarray
    guard_op: np.ndarray
    guard_val: np.ndarray
    aff_start: np.ndarray
    aff_var: np.ndarray
    aff_op: np.ndarray
    aff_val: np.ndarray
    fail_var: np.ndarray
    fail_op: np.ndarray
    fail_val: np.ndarray
    group_start: np.ndarray
    group_place: np.ndarray
    group_total: np.ndarray
    count_var: np.ndarray
    count_start: np.ndarray
    count_place: np.ndarray
    max_cascade: int


def _offsets(rows) -> tuple[np.ndarray, list]:
    start = [0]
    flat = []
    for row in rows:
        flat.extend(row)
        start.append(len(flat))
    return np.array(start, dtype=np.int64), flat


@dataclass(frozen=True)
class PetriNet:
    """Immutable net definition.

    ``failed_when`` is the condition on variables under which the modelled
    system counts as unavailable. ``token_groups`` (places, total) and
    ``counters`` (variable, places) are invariants the engine can assert at
    every event when checking is switched on.
    """

    places: tuple[tuple[str, int], ...]
    transitions: tuple[Transition, ...]
    variables: tuple[tuple[str, int], ...] = ()
    failed_when: tuple[Condition, ...] = ()
    token_groups: tuple[tuple[tuple[str, ...], int], ...] = ()
    counters: tuple[tuple[str, tuple[str, ...]], ...] = ()
    max_cascade: int = 10_000
    place_index: dict = field(init=False, repr=False, compare=False)
    var_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        place_index = {name: i for i, (name, _) in enumerate(self.places)}
        var_index = {name: i for i, (name, _) in enumerate(self.variables)}
        if len(place_index) != len(self.places):
            raise PetriError("duplicate place names")
        for name, marking in self.places:
            if marking < 0:
                raise PetriError(f"place {name!r} has negative initial marking")
        for tr in self.transitions:
            for place, _ in (*tr.inputs, *tr.outputs):
                if place not in place_index:
                    raise PetriError(f"{tr.name}: unknown place {place!r}")
            for item in (*tr.guard, *tr.affectation):
                if item.var not in var_index:
                    raise PetriError(f"{tr.name}: unknown variable {item.var!r}")
        for cond in self.failed_when:
            if cond.var not in var_index:
                raise PetriError(f"failed_when: unknown variable {cond.var!r}")
        object.__setattr__(self, "place_index", place_index)
        object.__setattr__(self, "var_index", var_index)

    def transition(self, name: str) -> Transition:
        for tr in self.transitions:
            if tr.name == name:
                return tr
        raise KeyError(name)

    def initial_state(self) -> NetState:
        return NetState(dict(self.places), dict(self.variables))

    def is_enabled(self, state: NetState, tr: Transition) -> bool:
        if any(state.marking[p] < w for p, w in tr.inputs):
            return False
        return all(c.holds(state.variables) for c in tr.guard)

    def enabled(self, state: NetState) -> list[Transition]:
        return [tr for tr in self.transitions if self.is_enabled(state, tr)]

    def fire(self, state: NetState, tr: Transition | str) -> NetState:
        """Remove input tokens, deposit output tokens, then run the affectation."""
        if isinstance(tr, str):
            tr = self.transition(tr)
        if not self.is_enabled(state, tr):
            raise PetriError(f"transition {tr.name!r} fired while disabled")
        marking = dict(state.marking)
        variables = dict(state.variables)
        for p, w in tr.inputs:
            marking[p] -= w
        for p, w in tr.outputs:
            marking[p] += w
        for assignment in tr.affectation:
            assignment.apply(variables)
        return NetState(marking, variables)

    def is_failed(self, state: NetState) -> bool:
        return bool(self.failed_when) and all(c.holds(state.variables) for c in self.failed_when)

    def compile(self) -> CompiledNet:
        pi, vi = self.place_index, self.var_index
        trs = self.transitions
        kinds, params = [], []
        for tr in trs:
            if isinstance(tr.law, Exp):
                kinds.append(LAW_EXP)
                params.append(tr.law.rate)
            elif isinstance(tr.law, Dirac):
                kinds.append(LAW_DIRAC)
                params.append(tr.law.delay)
            else:
                kinds.append(LAW_IPA)
                params.append(tr.law.period)
        in_start, ins = _offsets([[(pi[p], w) for p, w in tr.inputs] for tr in trs])
        out_start, outs = _offsets([[(pi[p], w) for p, w in tr.outputs] for tr in trs])
        guard_start, guards = _offsets(
            [[(vi[c.var], OPS.index(c.op), c.value) for c in tr.guard] for tr in trs])
        aff_start, affs = _offsets(
            [[(vi[a.var], a.op, a.value) for a in tr.affectation] for tr in trs])
        group_start, group_places = _offsets([[pi[p] for p in g] for g, _ in self.token_groups])
        count_start, count_places = _offsets([[pi[p] for p in ps] for _, ps in self.counters])

        def col(rows, j):
            return np.array([r[j] for r in rows], dtype=np.int64)

        return CompiledNet(
            marking0=np.array([m for _, m in self.places], dtype=np.int64),
            vars0=np.array([v for _, v in self.variables], dtype=np.int64),
            law_kind=np.array(kinds, dtype=np.int64),
            law_param=np.array(params, dtype=np.float64),
            in_start=in_start, in_place=col(ins, 0), in_weight=col(ins, 1),
            out_start=out_start, out_place=col(outs, 0), out_weight=col(outs, 1),
            guard_start=guard_start, guard_var=col(guards, 0), guard_op=col(guards, 1),
            guard_val=col(guards, 2),
            aff_start=aff_start, aff_var=col(affs, 0), aff_op=col(affs, 1),
            aff_val=col(affs, 2),
            fail_var=np.array([vi[c.var] for c in self.failed_when], dtype=np.int64),
            fail_op=np.array([OPS.index(c.op) for c in self.failed_when], dtype=np.int64),
            fail_val=np.array([c.value for c in self.failed_when], dtype=np.int64),
            group_start=group_start, group_place=np.array(group_places, dtype=np.int64),
            group_total=np.array([t for _, t in self.token_groups], dtype=np.int64),
            count_var=np.array([vi[v] for v, _ in self.counters], dtype=np.int64),
            count_start=count_start, count_place=np.array(count_places, dtype=np.int64),
            max_cascade=int(self.max_cascade),
        )


def make_transition(name: str, inputs: Sequence, outputs: Sequence, law, guard: str = "",
                    affectation: str = "") -> Transition:
    """Convenience constructor taking place names (weight 1) and predicate strings."""

    def arcs(items):
        return tuple((p, 1) if isinstance(p, str) else tuple(p) for p in items)

    return Transition(name, arcs(inputs), arcs(outputs), law, parse_guard(guard),
                      parse_affectation(affectation))
