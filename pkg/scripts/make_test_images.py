#!/usr/bin/env python3
"""Synthesize natural-looking test images (smooth random fields).

Real photographic test material is preferable when available; these fields
reproduce the two properties the experiments rely on: strong neighboring
correlation and a histogram with empty tail bins.
"""

import argparse
from pathlib import Path

import numpy as np

from blockmark import Image, save_image


def box_blur(field: np.ndarray, radius: int) -> np.ndarray:
    out = field
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (radius + 1, radius)
        padded = np.pad(out, pad, mode="edge")
        csum = np.cumsum(padded, axis=axis)
        width = 2 * radius + 1
        out = (
            (csum[width:, :] - csum[:-width, :]) / width
            if axis == 0
            else (csum[:, width:] - csum[:, :-width]) / width
        )
    return out


def natural_plane(h: int, w: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    field = box_blur(box_blur(rng.normal(size=(h, w)), 24), 24)
    field -= field.min()
    field /= field.max()
    field = field * 0.7 + np.linspace(0.0, 0.3, w)[None, :]
    field -= field.min()
    field /= field.max()
    return (30 + field * 195).astype(np.uint8)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="testdata")
    parser.add_argument("--size", type=int, default=512)
    parser.add_argument("--count", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + 10 * i
        gray = Image((natural_plane(args.size, args.size, seed),))
        rgb = Image(
            tuple(natural_plane(args.size, args.size, seed + j) for j in range(3))
        )
        save_image(gray, out_dir / f"synth{i + 1}.pgm")
        save_image(rgb, out_dir / f"synth{i + 1}.ppm")
        print(f"wrote {out_dir}/synth{i + 1}.pgm and .ppm ({args.size}x{args.size})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
