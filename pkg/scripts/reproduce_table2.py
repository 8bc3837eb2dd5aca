"""Rebuild the four-method results table and save it as text and CSV.

    python scripts/reproduce_table2.py --histories 1000000 --seed 0 --out results/
"""
import argparse
import time
from pathlib import Path

from pfdavg.report import MethodOptions, table2


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--histories", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args()

    start = time.perf_counter()
    report = table2(MethodOptions(histories=args.histories, seed=args.seed))
    elapsed = time.perf_counter() - start
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "table2.csv").write_text(report.to_csv())
    (args.out / "table2.txt").write_text(report.to_text())
    print(report.to_text())
    print(f"{elapsed:.1f} s total")


if __name__ == "__main__":
    main()
