"""Image containers, binary PGM/PPM codec, and block-grid arithmetic.

Images are one (grayscale) or three (RGB) planes of 8-bit samples stored as
``(height, width)`` uint8 arrays. Only binary netpbm files (P5/P6) with
maxval 255 are supported: they are the simplest containers that round-trip
pixel payloads byte-for-byte. Comments are tolerated on read and never
emitted on write.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import GeometryError, ImageFormatError

_WHITESPACE = b" \t\r\n\x0b\x0c"


@dataclass(frozen=True)
class Image:
    """One grayscale plane or three RGB planes of identical shape."""

    planes: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.planes) not in (1, 3):
            raise ValueError(f"expected 1 or 3 planes, got {len(self.planes)}")
        norm = []
        shape = None
        for p in self.planes:
            a = np.asarray(p)
            if a.ndim != 2:
                raise ValueError("plane must be a 2-D array")
            if a.dtype != np.uint8:
                if a.min() < 0 or a.max() > 255:
                    raise ValueError("samples must lie in [0, 255]")
                a = a.astype(np.uint8)
            if shape is None:
                shape = a.shape
            elif a.shape != shape:
                raise ValueError("planes must share dimensions")
            norm.append(a)
        object.__setattr__(self, "planes", tuple(norm))

    @property
    def height(self) -> int:
        return self.planes[0].shape[0]

    @property
    def width(self) -> int:
        return self.planes[0].shape[1]

    @property
    def is_color(self) -> bool:
        return len(self.planes) == 3

    def copy(self) -> "Image":
        return Image(tuple(p.copy() for p in self.planes))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return len(self.planes) == len(other.planes) and all(
            np.array_equal(a, b) for a, b in zip(self.planes, other.planes)
        )


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in _WHITESPACE:
            pos += 1
        elif c == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise ImageFormatError("unexpected end of header", offset=pos)
    start = pos
    while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
        pos += 1
    return data[start:pos], pos


def _int_token(data: bytes, pos: int, what: str) -> tuple[int, int]:
    tok, end = _next_token(data, pos)
    try:
        value = int(tok)
    except ValueError:
        raise ImageFormatError(f"invalid {what} token {tok!r}", offset=end - len(tok)) from None
    return value, end


def decode_image(data: bytes) -> Image:
    """Decode a binary PGM (P5) or PPM (P6) byte string."""
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"unsupported magic {magic!r}", offset=0)
    n_planes = 1 if magic == b"P5" else 3
    pos = 2
    width, pos = _int_token(data, pos, "width")
    height, pos = _int_token(data, pos, "height")
    maxval, pos = _int_token(data, pos, "maxval")
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"invalid dimensions {width}x{height}", offset=pos)
    if maxval != 255:
        raise ImageFormatError(f"unsupported maxval {maxval}", offset=pos)
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise ImageFormatError("missing whitespace before pixel data", offset=pos)
    pos += 1
    need = width * height * n_planes
    raster = data[pos : pos + need]
    if len(raster) < need:
        raise ImageFormatError(
            f"truncated pixel data: expected {need} bytes, found {len(raster)}",
            offset=len(data),
        )
    arr = np.frombuffer(raster, dtype=np.uint8)
    if n_planes == 1:
        return Image((arr.reshape(height, width).copy(),))
    rgb = arr.reshape(height, width, 3)
    return Image((rgb[:, :, 0].copy(), rgb[:, :, 1].copy(), rgb[:, :, 2].copy()))


def encode_image(image: Image) -> bytes:
    """Serialize to canonical binary PGM/PPM (no comments, maxval 255)."""
    magic = b"P6" if image.is_color else b"P5"
    header = b"%s\n%d %d\n255\n" % (magic, image.width, image.height)
    if image.is_color:
        raster = np.stack(image.planes, axis=-1).tobytes()
    else:
        raster = image.planes[0].tobytes()
    return header + raster


def load_image(path: str | Path) -> Image:
    return decode_image(Path(path).read_bytes())


def save_image(image: Image, path: str | Path) -> None:
    Path(path).write_bytes(encode_image(image))


@dataclass(frozen=True)
class BlockGrid:
    """Partition of a plane into rows x cols blocks of block_h x block_w pixels."""

    block_w: int
    block_h: int
    cols: int
    rows: int

    @property
    def n_blocks(self) -> int:
        return self.rows * self.cols

    @property
    def plane_shape(self) -> tuple[int, int]:
        return (self.rows * self.block_h, self.cols * self.block_w)

    def origin(self, index: int) -> tuple[int, int]:
        """Top-left pixel (row, col) of block `index` in raster order."""
        if not 0 <= index < self.n_blocks:
            raise IndexError(f"block index {index} out of range [0, {self.n_blocks})")
        br, bc = divmod(index, self.cols)
        return br * self.block_h, bc * self.block_w

    def block_slice(self, index: int) -> tuple[slice, slice]:
        r0, c0 = self.origin(index)
        return slice(r0, r0 + self.block_h), slice(c0, c0 + self.block_w)


def split_blocks(plane: np.ndarray, block_w: int, block_h: int) -> BlockGrid:
    """Build the block grid for a plane; partial blocks are unsupported."""
    if block_w <= 0 or block_h <= 0:
        raise GeometryError(f"block size must be positive, got {block_w}x{block_h}")
    h, w = plane.shape
    if w % block_w or h % block_h:
        raise GeometryError(
            f"plane {w}x{h} is not divisible into {block_w}x{block_h} blocks"
        )
    return BlockGrid(block_w=block_w, block_h=block_h, cols=w // block_w, rows=h // block_h)


def get_block(plane: np.ndarray, grid: BlockGrid, index: int) -> np.ndarray:
    rs, cs = grid.block_slice(index)
    return plane[rs, cs].copy()


def concat_blocks(
    grid: BlockGrid,
    blocks: Mapping[int, np.ndarray] | Iterable[tuple[int, np.ndarray]],
) -> np.ndarray:
    """Reassemble a plane from (index, block) pairs; every slot exactly once."""
    if isinstance(blocks, Mapping):
        items = blocks.items()
    else:
        items = blocks
    out = np.empty(grid.plane_shape, dtype=np.uint8)
    seen = np.zeros(grid.n_blocks, dtype=bool)
    count = 0
    for index, block in items:
        if not 0 <= index < grid.n_blocks:
            raise ValueError(f"block index {index} out of range")
        if seen[index]:
            raise ValueError(f"duplicate block slot {index}")
        block = np.asarray(block, dtype=np.uint8)
        if block.shape != (grid.block_h, grid.block_w):
            raise ValueError(
                f"block {index} has shape {block.shape}, "
                f"expected {(grid.block_h, grid.block_w)}"
            )
        rs, cs = grid.block_slice(index)
        out[rs, cs] = block
        seen[index] = True
        count += 1
    if count != grid.n_blocks:
        missing = int(np.flatnonzero(~seen)[0])
        raise ValueError(f"missing block slot {missing}")
    return out


def block_stack(plane: np.ndarray, grid: BlockGrid) -> np.ndarray:
    """All blocks as an (n_blocks, block_h, block_w) array in raster order."""
    h, w = grid.plane_shape
    if plane.shape != (h, w):
        raise GeometryError(f"plane shape {plane.shape} does not match grid {h}x{w}")
    return (
        plane.reshape(grid.rows, grid.block_h, grid.cols, grid.block_w)
        .swapaxes(1, 2)
        .reshape(grid.n_blocks, grid.block_h, grid.block_w)
    )


def stack_to_plane(blocks: np.ndarray, grid: BlockGrid) -> np.ndarray:
    """Inverse of block_stack."""
    return (
        blocks.reshape(grid.rows, grid.cols, grid.block_h, grid.block_w)
        .swapaxes(1, 2)
        .reshape(grid.plane_shape)
    )
