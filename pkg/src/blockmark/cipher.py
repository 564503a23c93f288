"""Keyed, reversible block-permutation encryption.

Two operations, both restricted to an explicit eligible set of block
positions and both histogram-preserving: position scrambling (an unbiased
keyed shuffle of the eligible blocks) and per-block rotation/flip (3 key
bits per eligible block select one of the 8 square symmetries).

All randomness comes from a deterministic keyed stream: BLAKE2b in counter
mode, ``blake2b(tag + counter_be64, key=key)``, 64 bytes per counter step.
Identical (key, tag) always reproduces the identical stream; distinct tags
give independent streams. Bits are consumed most-significant first, and
bounded draws use rejection sampling so every permutation is equally likely.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, KeyFormatError
from .image_io import BlockGrid, block_stack, stack_to_plane
from .ordering import apply_orientation, invert_orientation

KEY_BYTES = 16

TAG_SCRAMBLE = b"scramble"
TAG_ORIENT = b"orient"
TAG_REGION = b"region"


class KeyedBitStream:
    """Deterministic bit stream derived from (key, tag)."""

    _BLOCK = 64

    def __init__(self, key: bytes, tag: bytes = b""):
        if not isinstance(key, (bytes, bytearray)) or len(key) == 0:
            raise KeyFormatError("stream key must be non-empty bytes")
        if len(key) > 64:
            raise KeyFormatError("stream key must be at most 64 bytes")
        self._key = bytes(key)
        self._tag = bytes(tag)
        self._counter = 0
        self._bitbuf = 0
        self._bitcount = 0

    def next_bytes(self, n: int) -> bytes:
        """Next n raw stream bytes (independent of any buffered bits)."""
        out = bytearray()
        while len(out) < n:
            out.extend(self._next_block())
        return bytes(out[:n])

    def _next_block(self) -> bytes:
        digest = hashlib.blake2b(
            self._tag + self._counter.to_bytes(8, "big"), key=self._key
        ).digest()
        self._counter += 1
        return digest

    def take_bits(self, n: int) -> int:
        """Consume n bits, most-significant first."""
        while self._bitcount < n:
            block = self._next_block()
            self._bitbuf = (self._bitbuf << (8 * len(block))) | int.from_bytes(block, "big")
            self._bitcount += 8 * len(block)
        shift = self._bitcount - n
        value = self._bitbuf >> shift
        self._bitbuf &= (1 << shift) - 1
        self._bitcount = shift
        return value

    def randbelow(self, n: int) -> int:
        """Uniform draw from [0, n) via rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("randbelow needs a positive bound")
        if n == 1:
            return 0
        k = (n - 1).bit_length()
        while True:
            v = self.take_bits(k)
            if v < n:
                return v

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates shuffle driven by the stream."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]


@dataclass(frozen=True)
class KeySet:
    """Scramble, orientation, and optional region-assignment keys."""

    k_scramble: bytes
    k_orient: bytes
    k_region: bytes | None = None
    per_plane: bool = True

    def __post_init__(self):
        for name in ("k_scramble", "k_orient"):
            if len(getattr(self, name)) != KEY_BYTES:
                raise KeyFormatError(f"{name} must be {KEY_BYTES} bytes")
        if self.k_region is not None and len(self.k_region) != KEY_BYTES:
            raise KeyFormatError(f"k_region must be {KEY_BYTES} bytes")


def plane_key(key: bytes, plane: int | None) -> bytes:
    """Per-plane subkey: append the plane tag byte; None means shared key."""
    if plane is None:
        return key
    if not 0 <= plane < 256:
        raise ValueError("plane index must fit one byte")
    return key + bytes([plane])


def generate_keys(
    two_domain: bool = False, per_plane: bool = True, seed: int | None = None
) -> KeySet:
    """Fresh keys from the OS, or derived from a seed for reproducibility."""
    if seed is None:
        material = [os.urandom(KEY_BYTES) for _ in range(3)]
    else:
        stream = KeyedBitStream(seed.to_bytes(8, "big", signed=True), b"keygen")
        material = [stream.next_bytes(KEY_BYTES) for _ in range(3)]
    return KeySet(
        k_scramble=material[0],
        k_orient=material[1],
        k_region=material[2] if two_domain else None,
        per_plane=per_plane,
    )


def save_key_file(keys: KeySet, path) -> None:
    lines = [keys.k_scramble.hex(), keys.k_orient.hex()]
    if keys.k_region is not None:
        lines.append(keys.k_region.hex())
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_key_file(path, per_plane: bool = True) -> KeySet:
    """Parse 32-hex-digit keys, one per line: scramble, orient, [region]."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) not in (2, 3):
        raise KeyFormatError(f"key file must hold 2 or 3 keys, found {len(lines)}")
    material = []
    for i, line in enumerate(lines):
        try:
            raw = bytes.fromhex(line)
        except ValueError:
            raise KeyFormatError(f"key line {i + 1} is not valid hex") from None
        if len(raw) != KEY_BYTES:
            raise KeyFormatError(
                f"key line {i + 1} must encode {KEY_BYTES} bytes, got {len(raw)}"
            )
        material.append(raw)
    return KeySet(
        k_scramble=material[0],
        k_orient=material[1],
        k_region=material[2] if len(material) == 3 else None,
        per_plane=per_plane,
    )


def _eligible_array(eligible) -> np.ndarray:
    return np.asarray(sorted(int(a) for a in eligible), dtype=np.intp)


def _permutation(n: int, key: bytes, tag: bytes) -> list[int]:
    order = list(range(n))
    KeyedBitStream(key, tag).shuffle(order)
    return order


def scramble_blocks(
    plane: np.ndarray,
    grid: BlockGrid,
    eligible,
    key: bytes,
    tag: bytes = TAG_SCRAMBLE,
) -> np.ndarray:
    """Permute the eligible blocks among their own positions."""
    e = _eligible_array(eligible)
    blocks = block_stack(plane, grid)
    if e.size > 1:
        perm = _permutation(e.size, key, tag)
        out = blocks.copy()
        out[e] = blocks[e[perm]]
        blocks = out
    return stack_to_plane(blocks, grid)


def unscramble_blocks(
    plane: np.ndarray,
    grid: BlockGrid,
    eligible,
    key: bytes,
    tag: bytes = TAG_SCRAMBLE,
) -> np.ndarray:
    e = _eligible_array(eligible)
    blocks = block_stack(plane, grid)
    if e.size > 1:
        perm = _permutation(e.size, key, tag)
        out = blocks.copy()
        out[e[perm]] = blocks[e]
        blocks = out
    return stack_to_plane(blocks, grid)


def _transform_blocks(plane, grid, eligible, key, tag, inverse: bool) -> np.ndarray:
    if grid.block_w != grid.block_h:
        raise GeometryError("rotation/flip requires square blocks")
    e = _eligible_array(eligible)
    blocks = block_stack(plane, grid).copy()
    stream = KeyedBitStream(key, tag)
    for a in e:
        o = stream.take_bits(3)
        if inverse:
            o = invert_orientation(o)
        blocks[a] = apply_orientation(blocks[a], o)
    return stack_to_plane(blocks, grid)


def rotate_flip_blocks(
    plane: np.ndarray,
    grid: BlockGrid,
    eligible,
    key: bytes,
    tag: bytes = TAG_ORIENT,
) -> np.ndarray:
    """Apply a key-drawn symmetry (identity allowed) to each eligible block."""
    return _transform_blocks(plane, grid, eligible, key, tag, inverse=False)


def unrotate_blocks(
    plane: np.ndarray,
    grid: BlockGrid,
    eligible,
    key: bytes,
    tag: bytes = TAG_ORIENT,
) -> np.ndarray:
    return _transform_blocks(plane, grid, eligible, key, tag, inverse=True)
