#!/usr/bin/env python3
"""Print the full statistics block for a confusion matrix given directly
as counts, with the relative-error baseline taken from training-set class
counts.

Example reproducing the reference 36-instance evaluation:

    python scripts/report_from_counts.py --tp 14 --fp 2 --fn 0 --tn 20 \\
        --train-positives 90 --train-size 188
"""

import argparse

from gpcrsvm.evaluation import ConfusionMatrix, render_text, report_from_matrix


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tp", type=int, required=True)
    parser.add_argument("--fp", type=int, required=True)
    parser.add_argument("--fn", type=int, required=True)
    parser.add_argument("--tn", type=int, required=True)
    parser.add_argument("--train-positives", type=int)
    parser.add_argument("--train-size", type=int)
    args = parser.parse_args()

    prior = None
    if args.train_positives is not None and args.train_size is not None:
        prior = args.train_positives / args.train_size
    matrix = ConfusionMatrix(tp=args.tp, fp=args.fp, fn=args.fn, tn=args.tn)
    print(render_text(report_from_matrix(matrix, baseline_prior=prior)), end="")


if __name__ == "__main__":
    main()
