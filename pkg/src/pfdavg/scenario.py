"""Scenario parameters for an MooN safety-instrumented subsystem.

All rates are per hour and all durations are in hours.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, fields

__all__ = [
    "CASE_IDS",
    "DerivedRates",
    "ModeRates",
    "Scenario",
    "ScenarioError",
    "builtin_case",
    "derive_rates",
    "parse_scenario",
    "render_scenario",
]


class ScenarioError(ValueError):
    """Invalid or unparsable scenario."""


FIELD_NAMES = (
    "m", "n", "lambda_d", "dc", "ptc", "beta_dd", "beta_dut", "beta_duu",
    "mu_dd", "mu_dut", "t1", "t0",
)
_FRACTIONS = ("dc", "ptc", "beta_dd", "beta_dut", "beta_duu")
_RATES = ("lambda_d", "mu_dd", "mu_dut")


@dataclass(frozen=True)
class Scenario:
    m: int
    n: int
    lambda_d: float
    dc: float
    ptc: float
    beta_dd: float
    beta_dut: float
    beta_duu: float
    mu_dd: float
    mu_dut: float
    t1: float
    t0: float

    def __post_init__(self):
        for name in ("m", "n"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ScenarioError(f"{name} must be an integer, got {value!r}")
        if self.n < 1:
            raise ScenarioError("n must be at least 1")
        if self.m < 1:
            raise ScenarioError("m must be at least 1")
        if self.m > self.n:
            raise ScenarioError(f"m exceeds n ({self.m} > {self.n})")
        for name in _RATES:
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ScenarioError(f"{name} must be a finite rate >= 0, got {value!r}")
        for name in _FRACTIONS:
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ScenarioError(f"{name} must lie in [0, 1], got {value!r}")
        if not (math.isfinite(self.t1) and self.t1 > 0):
            raise ScenarioError(f"t1 must be > 0, got {self.t1!r}")
        if not (math.isfinite(self.t0) and self.t0 >= self.t1):
            raise ScenarioError(f"t0 must be >= t1, got t0={self.t0!r}, t1={self.t1!r}")
        ratio = self.t0 / self.t1
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ScenarioError(
                f"t0 must be an integer multiple of t1 (t0/t1 = {ratio:.6g})"
            )

    @property
    def n_tests(self) -> int:
        """Number of whole proof-test periods in the horizon."""
        return int(round(self.t0 / self.t1))

    def replace(self, **changes) -> "Scenario":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return Scenario(**values)


@dataclass(frozen=True)
class ModeRates:
    total: float
    independent: float
    ccf: float


@dataclass(frozen=True)
class DerivedRates:
    lambda_dd: float
    lambda_du: float
    lambda_dut: float
    lambda_duu: float
    dd: ModeRates
    dut: ModeRates
    duu: ModeRates

    def mode(self, name: str) -> ModeRates:
        return getattr(self, name)


def _split(rate: float, beta: float) -> ModeRates:
    return ModeRates(total=rate, independent=(1.0 - beta) * rate, ccf=beta * rate)


def derive_rates(s: Scenario) -> DerivedRates:
    lambda_dd = s.dc * s.lambda_d
    lambda_du = (1.0 - s.dc) * s.lambda_d
    lambda_dut = s.ptc * lambda_du
    lambda_duu = (1.0 - s.ptc) * lambda_du
    return DerivedRates(
        lambda_dd=lambda_dd,
        lambda_du=lambda_du,
        lambda_dut=lambda_dut,
        lambda_duu=lambda_duu,
        dd=_split(lambda_dd, s.beta_dd),
        dut=_split(lambda_dut, s.beta_dut),
        duu=_split(lambda_duu, s.beta_duu),
    )


# Two parameter sets, each applied to 1oo1, 1oo2 and 2oo3.
_LOW = dict(lambda_d=2.7e-6, dc=0.50, ptc=0.90, beta_dd=0.02, beta_dut=0.05,
            beta_duu=0.05, mu_dd=0.0417, mu_dut=0.0417, t1=4383.0)
_HIGH = dict(lambda_d=1.35e-5, dc=0.25, ptc=0.70, beta_dd=0.05, beta_dut=0.10,
             beta_duu=0.10, mu_dd=0.0833, mu_dut=0.0833, t1=8766.0)
_HORIZON = 70128.0

_CASES = {
    "i": (1, 1, _LOW),
    "ii": (1, 1, _HIGH),
    "iii": (1, 2, _LOW),
    "iv": (1, 2, _HIGH),
    "v": (2, 3, _LOW),
    "vi": (2, 3, _HIGH),
}
CASE_IDS = tuple(_CASES)


def builtin_case(case_id: str) -> Scenario:
    """Return one of the six reference parameter sets, ``"i"`` to ``"vi"``."""
    try:
        m, n, params = _CASES[case_id]
    except KeyError:
        raise ScenarioError(
            f"unknown case {case_id!r}; valid ids are {', '.join(CASE_IDS)}"
        ) from None
    return Scenario(m=m, n=n, t0=_HORIZON, **params)


def _line_of(text: str, key: str) -> int | None:
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*[=:]", re.IGNORECASE)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return lineno
    return None


def parse_scenario(text: str) -> Scenario:
    """Parse the ``[scenario]`` key/value format into a validated Scenario."""
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#",), comment_prefixes=("#",),
        interpolation=None,
    )
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        detail = exc.message.splitlines()[0]
        if getattr(exc, "errors", None):
            lineno, line = exc.errors[0]
            detail = f"expected 'key = value', got {line.strip()!r}"
        where = f"line {lineno}: " if lineno is not None else ""
        raise ScenarioError(f"syntax error: {where}{detail}") from None
    if not parser.has_section("scenario"):
        raise ScenarioError("missing [scenario] section")
    section = parser["scenario"]
    unknown = sorted(set(section) - set(FIELD_NAMES))
    if unknown:
        raise ScenarioError(
            f"unknown key {unknown[0]!r} at line {_line_of(text, unknown[0])}"
        )
    values: dict[str, int | float] = {}
    for name in FIELD_NAMES:
        if name not in section:
            raise ScenarioError(f"missing field {name!r}")
        raw = section[name].strip()
        try:
            values[name] = int(raw) if name in ("m", "n") else float(raw)
        except ValueError:
            raise ScenarioError(
                f"syntax error: line {_line_of(text, name)}: "
                f"cannot read {name} = {raw!r} as a number"
            ) from None
    return Scenario(**values)


def render_scenario(s: Scenario) -> str:
    """Inverse of :func:`parse_scenario`; floats are written with ``repr``."""
    lines = ["[scenario]"]
    for name in FIELD_NAMES:
        lines.append(f"{name} = {getattr(s, name)!r}")
    return "\n".join(lines) + "\n"
