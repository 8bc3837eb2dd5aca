"""Method dispatch and cross-method comparison reports."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .approx import approx_pfd
from .faulttree import DEFAULT_POINTS_PER_INTERVAL, average_pfd_ft
from .markov import pfd_avg_markov
from .petri import estimate_pfd
from .scenario import CASE_IDS, Scenario, builtin_case

__all__ = ["METHODS", "Cell", "ComparisonReport", "MethodOptions", "case_seed",
           "format_sig", "run_method", "table2"]

METHODS = ("equations", "fault_tree", "markov", "petri")


@dataclass(frozen=True)
class MethodOptions:
    histories: int = 1_000_000
    seed: int = 0
    confidence: float = 0.90
    points_per_interval: int = DEFAULT_POINTS_PER_INTERVAL
    markov_max_channels: int = 8


@dataclass
class Cell:
    case: str
    method: str
    value: float | None
    meta: dict = field(default_factory=dict)
    error: str | None = None


def format_sig(value: float | None, digits: int = 3) -> str:
    if value is None or not math.isfinite(value):
        return "-"
    return f"{value:.{digits - 1}e}"


def case_seed(master: int, case_index: int) -> int:
    """Independent per-case seed derived from the master seed."""
    state = np.random.SeedSequence([int(master), int(case_index)]).generate_state(1, np.uint64)
    return int(state[0])


def run_method(s: Scenario, method: str, options: MethodOptions = MethodOptions(),
               case: str = "scenario", seed: int | None = None) -> Cell:
    """Evaluate one method; exceptions propagate to the caller."""
    if method == "equations":
        res = approx_pfd(s)
        return Cell(case, method, res.pfd_avg, {
            "valid_dut": res.valid_dut, "valid_duu": res.valid_duu,
            "dut_exposure": res.dut_exposure, "duu_exposure": res.duu_exposure})
    if method == "fault_tree":
        res = average_pfd_ft(s, options.points_per_interval)
        return Cell(case, method, res.pfd_avg, {"grid_points": res.points_per_interval})
    if method == "markov":
        if s.n > options.markov_max_channels:
            raise ValueError(
                f"markov refused for n = {s.n} > {options.markov_max_channels} channels")
        res = pfd_avg_markov(s)
        return Cell(case, method, res.pfd_avg, {"states": res.states,
                                                "tolerance": res.tolerance})
    if method == "petri":
        est = estimate_pfd(s, options.histories, options.seed if seed is None else seed,
                           options.confidence)
        return Cell(case, method, est.mean, {
            "half_width": est.half_width, "confidence": est.confidence,
            "histories": est.histories, "seed": est.seed})
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


_CSV_FIELDS = ("case", "method", "value", "deviation_vs_petri", "half_width", "confidence",
               "histories", "seed", "valid_dut", "valid_duu", "dut_exposure",
               "duu_exposure", "grid_points", "states", "tolerance", "error")
_META_TYPES = {"half_width": float, "confidence": float, "histories": int, "seed": int,
               "valid_dut": lambda v: v == "true", "valid_duu": lambda v: v == "true",
               "dut_exposure": float, "duu_exposure": float, "grid_points": int,
               "states": int, "tolerance": float}


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class ComparisonReport:
    cells: list[Cell]

    def cell(self, case: str, method: str) -> Cell | None:
        for c in self.cells:
            if c.case == case and c.method == method:
                return c
        return None

    def value(self, case: str, method: str) -> float | None:
        c = self.cell(case, method)
        return None if c is None else c.value

    @property
    def cases(self) -> list[str]:
        return list(dict.fromkeys(c.case for c in self.cells))

    @property
    def methods(self) -> list[str]:
        present = {c.method for c in self.cells}
        return [m for m in METHODS if m in present]

    def deviation(self, case: str, method: str) -> float | None:
        """(value - petri) / petri for the same case."""
        ref = self.value(case, "petri")
        v = self.value(case, method)
        if ref is None or v is None or ref == 0:
            return None
        return (v - ref) / ref

    def to_text(self) -> str:
        cases, methods = self.cases, self.methods
        width = max(12, *(len(m) + 2 for m in methods))
        lines = ["".ljust(width) + "".join(f"case {c}".rjust(12) for c in cases)]
        for m in methods:
            lines.append(m.ljust(width) + "".join(
                format_sig(self.value(c, m)).rjust(12) for c in cases))
        if "petri" in methods:
            lines.append("")
            lines.append("deviation vs petri [%]")
            for m in methods:
                if m == "petri":
                    continue
                row = []
                for c in cases:
                    d = self.deviation(c, m)
                    row.append(("-" if d is None else f"{100 * d:+.2f}").rjust(12))
                lines.append(m.ljust(width) + "".join(row))
            row = []
            for c in cases:
                cell = self.cell(c, "petri")
                if cell is None or cell.value is None or not cell.value:
                    row.append("-".rjust(12))
                else:
                    row.append(f"±{100 * cell.meta['half_width'] / cell.value:.2f}".rjust(12))
            lines.append("petri CI [%]".ljust(width) + "".join(row))
        errors = [c for c in self.cells if c.error]
        if errors:
            lines.append("")
            lines.extend(f"error in case {c.case} / {c.method}: {c.error}" for c in errors)
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=_CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for c in self.cells:
            row = {k: _csv_value(v) for k, v in c.meta.items()}
            row.update(case=c.case, method=c.method, value=_csv_value(c.value),
                       deviation_vs_petri=_csv_value(self.deviation(c.case, c.method)),
                       error=c.error or "")
            writer.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ComparisonReport":
        cells = []
        for row in csv.DictReader(io.StringIO(text)):
            meta = {k: conv(row[k]) for k, conv in _META_TYPES.items() if row.get(k)}
            cells.append(Cell(row["case"], row["method"],
                              float(row["value"]) if row["value"] else None,
                              meta, row["error"] or None))
        return cls(cells)


def table2(options: MethodOptions = MethodOptions(), cases: Iterable[str] = CASE_IDS,
           methods: Iterable[str] = METHODS) -> ComparisonReport:
    """All requested methods on the built-in cases; a failing cell is recorded, not raised."""
    cells = []
    methods = list(methods)
    for case in cases:
        s = builtin_case(case)
        index = CASE_IDS.index(case)
        for method in methods:
            try:
                cells.append(run_method(s, method, options, case=case,
                                        seed=case_seed(options.seed, index)))
            except Exception as exc:  # recorded in-cell so the table completes
                cells.append(Cell(case, method, None, error=f"{type(exc).__name__}: {exc}"))
    return ComparisonReport(cells)
