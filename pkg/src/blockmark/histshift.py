"""Histogram-shift embedding primitives for a single 8-bit plane.

A pair (pp, zp) of a peak bin and an empty bin defines the scheme: every
value strictly between them moves one step toward zp, which frees the bin
adjacent to pp. Peak-valued pixels then carry one bit each: value pp means 0,
the freed adjacent value means 1. Every changed pixel moves by exactly one
level, so the marked plane never differs from the original by more than 1
per sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceededError, NoZeroPointError


@dataclass(frozen=True)
class HistPair:
    """Peak point / zero point pair. Direction is up when pp < zp."""

    pp: int
    zp: int

    def __post_init__(self):
        if not (0 <= self.pp <= 255 and 0 <= self.zp <= 255):
            raise ValueError(f"pp/zp must lie in [0, 255], got ({self.pp}, {self.zp})")
        if self.pp == self.zp:
            raise ValueError("pp and zp must differ")

    @property
    def up(self) -> bool:
        return self.pp < self.zp

    @property
    def marked_value(self) -> int:
        """Pixel value that encodes an embedded 1-bit."""
        return self.pp + 1 if self.up else self.pp - 1

    @property
    def band(self) -> tuple[int, int]:
        """Inclusive value range holding shifted pixels; empty when lo > hi."""
        if self.up:
            return self.pp + 2, self.zp
        return self.zp, self.pp - 2


def histogram(plane: np.ndarray) -> np.ndarray:
    return np.bincount(plane.ravel(), minlength=256)


def find_pp_zp(plane: np.ndarray) -> HistPair:
    """Select the maximal bin and its nearest empty bin.

    Ties: the smallest value wins among equally tall peaks; the larger value
    wins among equidistant empty bins. Raises NoZeroPointError when every bin
    is occupied.
    """
    if plane.size == 0:
        raise ValueError("plane is empty")
    hist = histogram(plane)
    pp = int(np.argmax(hist))
    zeros = np.flatnonzero(hist == 0)
    if zeros.size == 0:
        raise NoZeroPointError("histogram has no empty bin")
    dist = np.abs(zeros - pp)
    nearest = zeros[dist == dist.min()]
    return HistPair(pp=pp, zp=int(nearest.max()))


def shift_histogram(plane: np.ndarray, pair: HistPair) -> np.ndarray:
    """Move every value strictly between pp and zp one step toward zp."""
    out = plane.copy()
    if pair.up:
        sel = (out > pair.pp) & (out < pair.zp)
        out[sel] += 1
    else:
        sel = (out > pair.zp) & (out < pair.pp)
        out[sel] -= 1
    return out


def unshift_histogram(plane: np.ndarray, pair: HistPair) -> np.ndarray:
    """Exact inverse of shift_histogram on a plane without 1-bit pixels."""
    out = plane.copy()
    lo, hi = pair.band
    if lo > hi:
        return out
    sel = (out >= lo) & (out <= hi)
    if pair.up:
        out[sel] -= 1
    else:
        out[sel] += 1
    return out


def marked_mask(plane: np.ndarray, pair: HistPair) -> np.ndarray:
    """Boolean mask of payload slots: pixels valued pp or pp +/- 1.

    The same positions are selected on the intermediate plane (where the
    adjacent bin is empty) and on a marked plane, so ordering decisions made
    before embedding can be reproduced afterwards.
    """
    return (plane == pair.pp) | (plane == pair.marked_value)


def capacity(plane: np.ndarray, pair: HistPair) -> int:
    """Number of embeddable bits: the count of peak-valued pixels.

    Defined on the plane the pair came from; shifting does not touch the
    peak bin, so the original and intermediate planes agree.
    """
    return int(histogram(plane)[pair.pp])


def embed_bits(
    plane: np.ndarray, pair: HistPair, slots: np.ndarray, bits: np.ndarray
) -> np.ndarray:
    """Write bits into slot pixels (flat indices, caller's order).

    Slot k moves to the marked value for a 1-bit and stays at pp for a
    0-bit; slots beyond len(bits) are untouched.
    """
    slots = np.asarray(slots, dtype=np.intp)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size > slots.size:
        raise CapacityExceededError(
            f"payload of {bits.size} bits exceeds {slots.size} available slots"
        )
    if np.any(bits > 1):
        raise ValueError("payload bits must be 0 or 1")
    out = plane.copy()
    flat = out.ravel()
    used = slots[: bits.size]
    if np.any(flat[used] != pair.pp):
        raise ValueError("slots must address pp-valued pixels")
    flat[used[bits == 1]] = pair.marked_value
    return out


def extract_bits(
    plane: np.ndarray, pair: HistPair, slots: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Read bits back from slot pixels and restore them to pp."""
    slots = np.asarray(slots, dtype=np.intp)
    out = plane.copy()
    flat = out.ravel()
    values = flat[slots]
    bits = (values == pair.marked_value).astype(np.uint8)
    flat[slots] = pair.pp
    return bits, out
