#!/usr/bin/env python3
"""Empirical check of the detectability threshold: inject a lift at a chosen
multiple of the computed minimum and report fire rates against clean replays."""

import argparse

from flowtel.experiments import detectability_rates


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--lift", type=float, default=2.0,
                    help="injected lift as a multiple of the computed threshold")
    ap.add_argument("--width", type=int, default=256)
    ap.add_argument("--beta", type=float, default=0.3)
    args = ap.parse_args()
    hit, false = detectability_rates(
        trials=args.trials, lift_factor=args.lift, width=args.width, beta=args.beta
    )
    print(f"lift {args.lift}x threshold: fired {hit * 100:.1f}% of {args.trials} trials")
    print(f"clean replays:              fired {false * 100:.1f}% of {args.trials} trials")


if __name__ == "__main__":
    main()
