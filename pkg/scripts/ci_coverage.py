"""Fraction of Petri confidence intervals that contain the exact Markov value."""
import argparse

from pfdavg.markov import pfd_avg_markov
from pfdavg.petri import estimate_pfd
from pfdavg.scenario import CASE_IDS, builtin_case


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--case", choices=CASE_IDS, default="i")
    parser.add_argument("--histories", type=int, default=1_000_000)
    parser.add_argument("--repetitions", type=int, default=50)
    parser.add_argument("--confidence", type=float, default=0.90)
    args = parser.parse_args()

    s = builtin_case(args.case)
    exact = pfd_avg_markov(s).pfd_avg
    hits = 0
    for k in range(args.repetitions):
        est = estimate_pfd(s, args.histories, seed=1000 + k, confidence=args.confidence)
        hits += est.contains(exact)
    print(f"case {args.case}: {hits}/{args.repetitions} intervals contain {exact:.5e}")


if __name__ == "__main__":
    main()
