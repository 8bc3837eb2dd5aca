from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from ..scenario import Scenario, derive_rates
from .engine import run_histories, run_one
from .net import Dirac, Exp, Ipa, PetriNet, make_transition, parse_guard

__all__ = ["EstimateWithCI", "build_case_net", "estimate_pfd", "history_fractions",
           "simulate_history", "write_histories_csv"]

_MODES = ("DD", "DUT", "DUU")


def build_case_net(s: Scenario) -> PetriNet:
    """Five mode places per channel plus a two-place trigger/reset cycle per CCF mode."""
    r = derive_rates(s)
    n = s.n
    places: list[tuple[str, int]] = []
    transitions = []
    counted = []
    groups = []
    for c in range(1, n + 1):
        names = [f"C{c}_{mode}" for mode in ("OK", "DD", "DUT", "RepDUT", "DUU")]
        places += [(names[0], 1)] + [(p, 0) for p in names[1:]]
        groups.append((tuple(names), 1))
        counted.append(names[0])

    independent = {
        "DD": r.lambda_dd if n == 1 else r.dd.independent,
        "DUT": r.lambda_dut if n == 1 else r.dut.independent,
        "DUU": r.lambda_duu if n == 1 else r.duu.independent,
    }
    for c in range(1, n + 1):
        ok = f"C{c}_OK"
        for mode in _MODES:
            if independent[mode] > 0:
                transitions.append(make_transition(
                    f"C{c}_fail_{mode}", [ok], [f"C{c}_{mode}"], Exp(independent[mode]),
                    affectation="nbOK := nbOK - 1"))
        if s.mu_dd > 0:
            transitions.append(make_transition(
                f"C{c}_repair_DD", [f"C{c}_DD"], [ok], Exp(s.mu_dd),
                affectation="nbOK := nbOK + 1"))
        transitions.append(make_transition(
            f"C{c}_proof_test", [f"C{c}_DUT"], [f"C{c}_RepDUT"], Ipa(s.t1)))
        if s.mu_dut > 0:
            transitions.append(make_transition(
                f"C{c}_repair_DUT", [f"C{c}_RepDUT"], [ok], Exp(s.mu_dut),
                affectation="nbOK := nbOK + 1"))

    variables = [("nbOK", n)]
    if n > 1:
        ccf_rate = {"DD": r.dd.ccf, "DUT": r.dut.ccf, "DUU": r.duu.ccf}
        for mode in _MODES:
            flag = f"CCF_{mode}"
            idle, active = f"CCF_{mode}_idle", f"CCF_{mode}_active"
            places += [(idle, 1), (active, 0)]
            variables.append((flag, 0))
            if ccf_rate[mode] > 0:
                transitions.append(make_transition(
                    f"{flag}_occurs", [idle], [active], Exp(ccf_rate[mode]),
                    guard="nbOK > 0", affectation=f"{flag} := true"))
            for c in range(1, n + 1):
                transitions.append(make_transition(
                    f"C{c}_{flag}", [f"C{c}_OK"], [f"C{c}_{mode}"], Dirac(0.0),
                    guard=f"{flag} == true", affectation="nbOK := nbOK - 1"))
            transitions.append(make_transition(
                f"{flag}_reset", [active], [idle], Dirac(0.0),
                guard="nbOK == 0", affectation=f"{flag} := false"))
            groups.append(((idle, active), 1))

    return PetriNet(
        places=tuple(places),
        transitions=tuple(transitions),
        variables=tuple(variables),
        failed_when=parse_guard(f"nbOK < {s.m}"),
        token_groups=tuple(groups),
        counters=(("nbOK", tuple(counted)),),
        max_cascade=n + 1,
    )


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    half_width: float
    confidence: float
    histories: int
    seed: int
    std: float = field(default=0.0)

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width

    @property
    def relative_half_width(self) -> float:
        return self.half_width / self.mean if self.mean > 0 else 0.0

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high


def simulate_history(net: PetriNet, s: Scenario, seed: int, index: int = 0,
                     check: bool = False) -> float:
    """Fraction of [0, t0] spent with fewer than m channels operating."""
    failed, _ = run_one(net.compile(), s.t0, seed, index, check)
    return failed / s.t0


def history_fractions(s: Scenario, histories: int, seed: int, net: PetriNet | None = None,
                      check: bool = False) -> np.ndarray:
    net = net if net is not None else build_case_net(s)
    failed, _ = run_histories(net.compile(), s.t0, seed, histories, check=check)
    return failed / s.t0


def estimate_pfd(s: Scenario, histories: int = 1_000_000, seed: int = 0,
                 confidence: float = 0.90, net: PetriNet | None = None,
                 check: bool = False, samples: np.ndarray | None = None) -> EstimateWithCI:
    """Mean failed fraction over independent histories with a normal-approximation CI."""
    if histories < 100:
        raise ValueError("need at least 100 histories")
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence!r}")
    if samples is None:
        samples = history_fractions(s, histories, seed, net, check)
    mean = float(np.mean(samples))
    std = float(np.std(samples, ddof=1))
    z = float(stats.norm.ppf(0.5 + confidence / 2))
    return EstimateWithCI(mean=mean, half_width=z * std / math.sqrt(histories),
                          confidence=confidence, histories=histories, seed=seed, std=std)


def write_histories_csv(path, fractions) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["history_index", "fraction_failed"])
        for i, f in enumerate(fractions):
            writer.writerow([i, repr(float(f))])
