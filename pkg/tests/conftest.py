"""Shared fixtures, generators, and independent reference implementations.

The reference functions deliberately avoid the library's vectorized code
paths (pure-Python loops, Counter-based histograms, list-based matrix
transforms) so tests compare two independent routes to the same answer.
"""

from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from hypothesis import settings

from blockmark import HistPair, Image

settings.register_profile("ci", deadline=None)
settings.load_profile("ci")


def synth_plane(h: int, w: int, rng: np.random.Generator) -> np.ndarray:
    """Random plane with a guaranteed empty histogram tail on both sides."""
    values = rng.normal(128.0, 40.0, size=(h, w))
    return np.clip(values, 8, 247).astype(np.uint8)


def synth_image(h: int, w: int, rng: np.random.Generator, color: bool) -> Image:
    n = 3 if color else 1
    return Image(tuple(synth_plane(h, w, rng) for _ in range(n)))


def _box_blur(field: np.ndarray, radius: int) -> np.ndarray:
    """Separable box blur via cumulative sums (zero-padded edges)."""
    out = field
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (radius + 1, radius)
        padded = np.pad(out, pad, mode="edge")
        csum = np.cumsum(padded, axis=axis)
        width = 2 * radius + 1
        if axis == 0:
            out = (csum[width:, :] - csum[:-width, :]) / width
        else:
            out = (csum[:, width:] - csum[:, :-width]) / width
    return out


def natural_plane(h: int, w: int, seed: int) -> np.ndarray:
    """Smooth, natural-looking plane: strongly correlated across blocks."""
    rng = np.random.default_rng(seed)
    field = rng.normal(size=(h, w))
    field = _box_blur(_box_blur(field, 24), 24)
    field -= field.min()
    field /= field.max()
    gradient = np.linspace(0.0, 1.0, w)[None, :] * 0.3
    field = field * 0.7 + gradient
    field -= field.min()
    field /= field.max()
    return (30 + field * 195).astype(np.uint8)


def natural_image(h: int, w: int, seed: int, color: bool = False) -> Image:
    if not color:
        return Image((natural_plane(h, w, seed),))
    return Image(tuple(natural_plane(h, w, seed + i) for i in range(3)))


# ---------------------------------------------------------------------------
# Reference implementations (oracles)
# ---------------------------------------------------------------------------

def ref_find_pp_zp(plane: np.ndarray) -> tuple[int, int]:
    """Exhaustive pair search with explicit tie handling."""
    counts = Counter(int(v) for v in plane.ravel())
    hist = [counts.get(v, 0) for v in range(256)]
    peak = max(hist)
    pp = min(v for v in range(256) if hist[v] == peak)
    zeros = [v for v in range(256) if hist[v] == 0]
    assert zeros, "oracle needs an empty bin"
    best = min(abs(v - pp) for v in zeros)
    zp = max(v for v in zeros if abs(v - pp) == best)
    return pp, zp


def ref_shift(plane: np.ndarray, pp: int, zp: int) -> np.ndarray:
    out = plane.astype(int).copy()
    for idx, v in np.ndenumerate(out):
        if pp < zp and pp < v < zp:
            out[idx] = v + 1
        elif pp > zp and zp < v < pp:
            out[idx] = v - 1
    return out.astype(np.uint8)


def ref_rot90_cw(mat: list[list]) -> list[list]:
    return [list(row) for row in zip(*mat[::-1])]


def ref_flip_h(mat: list[list]) -> list[list]:
    return [row[::-1] for row in mat]


def ref_all_orientations(mat: list[list]) -> list[list[list]]:
    """All 8 square symmetries, built from CW rotations and a mirror."""
    out = []
    current = [list(row) for row in mat]
    for _ in range(4):
        out.append(current)
        out.append(ref_flip_h(current))
        current = ref_rot90_cw(current)
    return out


def ref_signature(mask: list[list[bool]]) -> tuple[int, ...]:
    n = len(mask[0])
    return tuple(
        r * n + c
        for r in range(len(mask))
        for c in range(n)
        if mask[r][c]
    )


def ref_canonical_signature(mask: np.ndarray) -> tuple[tuple[int, ...], bool]:
    """Minimal signature over all 8 orientations and whether several tie."""
    sigs = [ref_signature(m) for m in ref_all_orientations(mask.tolist())]
    best = min(sigs)
    return best, sigs.count(best) > 1


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0xB10C)


def valid_pair_plane(rng: np.random.Generator, h: int = 16, w: int = 16) -> np.ndarray:
    """Small random plane guaranteed to admit a pair."""
    return rng.integers(0, 200, size=(h, w), dtype=np.uint8)


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def make_pair(pp: int, zp: int) -> HistPair:
    return HistPair(pp=pp, zp=zp)
