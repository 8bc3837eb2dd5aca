"""How often the sampling-dependent checks hold across master seeds at a fixed history count.

For each seed the Petri row is recomputed and three checks are evaluated:
Markov inside the Petri CI for cases v and vi, equations >= Petri on every
case, and the case vi equations-vs-Petri deviation within 28.5 +/- 2 points.
"""
import argparse

from pfdavg.approx import approx_pfd
from pfdavg.markov import pfd_avg_markov
from pfdavg.report import MethodOptions, table2
from pfdavg.scenario import CASE_IDS, builtin_case


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--histories", type=int, default=1_000_000)
    parser.add_argument("--seeds", type=int, default=20)
    args = parser.parse_args()

    eq = {c: approx_pfd(builtin_case(c)).pfd_avg for c in CASE_IDS}
    mk = {c: pfd_avg_markov(builtin_case(c)).pfd_avg for c in CASE_IDS}
    tally = {"markov in CI (v, vi)": 0, "equations >= petri (all)": 0, "vi deviation": 0}
    per_case = dict.fromkeys(CASE_IDS, 0)
    for seed in range(args.seeds):
        report = table2(MethodOptions(histories=args.histories, seed=seed), methods=["petri"])
        cells = {c: report.cell(c, "petri") for c in CASE_IDS}
        inside = all(abs(mk[c] - cells[c].value) <= cells[c].meta["half_width"]
                     for c in ("v", "vi"))
        ordered = {c: eq[c] >= cells[c].value for c in CASE_IDS}
        dev_vi = 100 * (eq["vi"] - cells["vi"].value) / cells["vi"].value
        tally["markov in CI (v, vi)"] += inside
        tally["equations >= petri (all)"] += all(ordered.values())
        tally["vi deviation"] += abs(dev_vi - 28.5) <= 2
        for c, flag in ordered.items():
            per_case[c] += flag
        print(f"seed {seed:3d}: markov-in-CI={inside} ordered={all(ordered.values())} "
              f"failing={[c for c, f in ordered.items() if not f]} vi={dev_vi:+.2f}%",
              flush=True)
    print()
    for name, hits in tally.items():
        print(f"{name:<28} {hits}/{args.seeds}")
    print("equations >= petri per case:",
          ", ".join(f"{c}={n}/{args.seeds}" for c, n in per_case.items()))


if __name__ == "__main__":
    main()
