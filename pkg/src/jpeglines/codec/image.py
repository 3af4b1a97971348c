"""Container types shared by the decoder, encoder and analysis modules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class JpegError(Exception):
    """Base class for every error raised while reading a JPEG stream."""


class UnsupportedMode(JpegError):
    pass


class TruncatedStream(JpegError):
    pass


class BadMarker(JpegError):
    pass


class BadHuffman(JpegError):
    pass


class InvalidQuality(ValueError):
    pass


@dataclass(frozen=True)
class QuantTable:
    """64 quantizer steps in natural (row-major) order."""

    q: tuple

    def __post_init__(self):
        if len(self.q) != 64:
            raise ValueError("quantization table needs 64 entries")
        if min(self.q) < 1:
            raise ValueError("quantizer entries must be >= 1")
        arr = np.asarray(self.q, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "_array", arr)

    def as_array(self) -> np.ndarray:
        """Read-only int64 view of the table."""
        return self._array


@dataclass(frozen=True)
class PixelImage:
    """Row-major 8-bit grayscale raster."""

    width_px: int
    height_px: int
    samples: np.ndarray

    def __post_init__(self):
        if self.width_px < 1 or self.height_px < 1:
            raise ValueError("image must be non-empty")
        samples = np.asarray(self.samples, dtype=np.uint8)
        if samples.size != self.width_px * self.height_px:
            raise ValueError("samples length does not match geometry")
        object.__setattr__(self, "samples", samples.reshape(self.height_px, self.width_px))

    @classmethod
    def from_array(cls, array) -> PixelImage:
        array = np.asarray(array)
        if array.ndim != 2:
            raise ValueError("expected a 2-D grayscale array")
        return cls(array.shape[1], array.shape[0], array.astype(np.uint8))


@dataclass(frozen=True)
class CoefficientImage:
    """Quantized DCT blocks of one image component.

    ``coef`` has shape ``(blocks_high, blocks_wide, 64)``; the last axis is in
    natural order so ``coef[..., r * 8 + c]`` holds F(v=r, u=c).
    ``has_ac[r, c]`` says whether block (r, c) has any non-zero AC term; the
    entropy decoder fills it as a by-product, otherwise it is derived from
    ``coef``.  ``dc`` is a contiguous copy of the quantized DC plane.
    """

    width_px: int
    height_px: int
    coef: np.ndarray
    quant_table: QuantTable
    source_component: int = 1
    has_ac: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        coef = np.asarray(self.coef)
        expected = (-(-self.height_px // 8), -(-self.width_px // 8), 64)
        if coef.shape != expected:
            raise ValueError(f"coefficient grid {coef.shape} does not match {expected}")
        coef.setflags(write=False)
        object.__setattr__(self, "coef", coef)
        if self.has_ac is None:
            has_ac = np.any(coef[..., 1:] != 0, axis=-1)
        else:
            has_ac = np.asarray(self.has_ac, dtype=bool)
            if has_ac.shape != expected[:2]:
                raise ValueError("has_ac does not match the block grid")
        has_ac.setflags(write=False)
        object.__setattr__(self, "has_ac", has_ac)
        dc = np.ascontiguousarray(coef[..., 0], dtype=np.int32)
        dc.setflags(write=False)
        object.__setattr__(self, "dc", dc)

    @property
    def blocks_wide(self) -> int:
        return self.coef.shape[1]

    @property
    def blocks_high(self) -> int:
        return self.coef.shape[0]

    @property
    def n_blocks(self) -> int:
        return self.blocks_wide * self.blocks_high

    def block(self, row: int, col: int) -> np.ndarray:
        return self.coef[row, col]

    @property
    def blocks(self):
        """Row-major nested list view of the block grid."""
        return [[self.coef[r, c] for c in range(self.blocks_wide)] for r in range(self.blocks_high)]
