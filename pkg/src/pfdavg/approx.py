"""Closed-form first-order PFD_avg approximation for MooN architectures."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .scenario import Scenario, derive_rates

__all__ = ["ApproxResult", "approx_pfd", "binomial", "f_factor", "VALIDITY_LIMIT"]

VALIDITY_LIMIT = 0.1


@dataclass(frozen=True)
class ApproxResult:
    pfd_avg: float
    valid_dut: bool
    valid_duu: bool
    dut_exposure: float
    duu_exposure: float
    term_breakdown: tuple[tuple[str, float], ...]

    @property
    def valid(self) -> bool:
        return self.valid_dut and self.valid_duu


def f_factor(x: int, b: float) -> float:
    """CCF correction used inside the mixed sums: 1 for a single failure, else 1 - b."""
    if x < 1:
        raise ValueError(f"f_factor needs x >= 1, got {x}")
    return 1.0 if x == 1 else 1.0 - b


def binomial(n: int, k: int) -> int:
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"binomial({n}, {k}) undefined: need 0 <= k <= n")
    return math.comb(n, k)


def approx_pfd(s: Scenario) -> ApproxResult:
    r = derive_rates(s)
    if (r.lambda_dd > 0 and s.mu_dd == 0) or (r.lambda_dut > 0 and s.mu_dut == 0):
        raise ValueError("the approximation needs non-zero repair rates for repairable modes")
    n, m = s.n, s.m
    t1, t0 = s.t1, s.t0
    b_dd, b_dut, b_duu = s.beta_dd, s.beta_dut, s.beta_duu
    l_dd, l_dut, l_duu = r.lambda_dd, r.lambda_dut, r.lambda_duu
    u_dd = l_dd / s.mu_dd if l_dd > 0 else 0.0
    k = n - m + 1  # failures needed to lose the function
    c = binomial(n, k)

    def dut_window(j: int) -> float:
        return t1 / (j + 1) + 1.0 / s.mu_dut if l_dut > 0 else 0.0

    dd_only = c * ((1 - b_dd) * u_dd) ** k
    dut_only = c * ((1 - b_dut) * l_dut) ** k * t1 ** (n - m) * dut_window(k)
    duu_only = c * ((1 - b_duu) * l_duu) ** k * t0 ** (n - m) * (t0 / (n - m + 2))

    dd_dut = dd_duu = dut_duu = 0.0
    for i in range(1, n - m + 1):
        kd = k - i
        dd_part = binomial(n - i, kd) * (f_factor(kd, b_dd) * u_dd) ** kd * binomial(n, i)
        dd_dut += (dd_part * (f_factor(i, b_dut) * l_dut) ** i
                   * t1 ** (i - 1) * dut_window(i))
        dd_duu += (dd_part * (f_factor(i, b_duu) * l_duu) ** i
                   * t0 ** (i - 1) * (t0 / (i + 1)))
        dut_duu += (binomial(n - i, kd) * ((1 - b_dut) * l_dut) ** kd
                    * t1 ** (n - m - i) * dut_window(kd)
                    * binomial(n, i) * ((1 - b_duu) * l_duu) ** i
                    * t0 ** (i - 1) * (t0 / (i + 1)))

    triple = 0.0
    for i in range(1, n - m):
        for j in range(1, n - m - i + 1):
            kd = k - i - j
            triple += (binomial(n - i - j, kd) * (f_factor(kd, b_dd) * u_dd) ** kd
                       * binomial(n - i, j) * ((1 - b_dut) * l_dut) ** j
                       * t1 ** (j - 1) * dut_window(j)
                       * binomial(n, i) * ((1 - b_duu) * l_duu) ** i
                       * t0 ** (i - 1) * (t0 / (i + 1)))

    ccf = b_dd * u_dd + b_dut * l_dut * dut_window(1) + b_duu * l_duu * (t0 / 2)

    terms = (
        ("dd", dd_only),
        ("dut", dut_only),
        ("duu", duu_only),
        ("dd+dut", dd_dut),
        ("dd+duu", dd_duu),
        ("dut+duu", dut_duu),
        ("dd+dut+duu", triple),
        ("ccf", ccf),
    )
    exposure_dut = l_dut * t1
    exposure_duu = l_duu * t0
    return ApproxResult(
        pfd_avg=math.fsum(v for _, v in terms),
        valid_dut=exposure_dut < VALIDITY_LIMIT,
        valid_duu=exposure_duu < VALIDITY_LIMIT,
        dut_exposure=exposure_dut,
        duu_exposure=exposure_duu,
        term_breakdown=terms,
    )
