#!/usr/bin/env python3
"""Neighboring-pixel correlation of block-subsampled images.

Reports, per image: the correlation of the original after top-left
subsampling, and the mean correlation of N encrypted outputs. Near-zero
output values indicate the block shuffle leaves no exploitable inter-block
structure.
"""

import argparse

import numpy as np

from blockmark import (
    correlation_report,
    embed_plain_then_encrypt,
    generate_keys,
    load_image,
    resize_topleft,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("images", nargs="+")
    parser.add_argument("--block", type=int, default=16)
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    header = f"{'image':<24} {'kind':<10} {'horizontal':>11} {'vertical':>10} {'diagonal':>10}"
    print(header)
    for path in args.images:
        image = load_image(path)
        resized = resize_topleft(image, args.block)
        h, w = resized.planes[0].shape
        pairs = min(args.pairs, h * (w - 1), (h - 1) * w, (h - 1) * (w - 1))
        if pairs < args.pairs:
            print(f"# {path}: subsampled image admits only {pairs} distinct pairs")
        report = correlation_report(resized.planes[0], pairs=pairs, seed=args.seed)
        print(
            f"{path:<24} {'original':<10} {report.horizontal:>11.4f} "
            f"{report.vertical:>10.4f} {report.diagonal:>10.4f}"
        )
        sums = np.zeros(3)
        for trial in range(args.trials):
            keys = generate_keys(seed=args.seed * 1000 + trial)
            output, _ = embed_plain_then_encrypt(image, [], keys, args.block)
            res = resize_topleft(output, args.block)
            rep = correlation_report(res.planes[0], pairs=pairs, seed=trial)
            sums += (rep.horizontal, rep.vertical, rep.diagonal)
        mean = sums / args.trials
        print(
            f"{'':<24} {'output':<10} {mean[0]:>11.4f} {mean[1]:>10.4f} {mean[2]:>10.4f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
