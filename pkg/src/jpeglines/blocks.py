"""Per-block math: dequantization, reference IDCT, and ink-placement classification.

Coefficients are indexed in natural order, ``coef[v * 8 + u]`` = F(v, u).
The two AC terms the classifier reads are F10 = F(v=1, u=0) at index 8 (the
first vertical frequency, top-versus-bottom contrast) and F11 = F(v=1, u=1)
at index 9.

For dark ink on a light page, ink in the upper rows makes F10 negative:
the level-shifted samples are low on top and high below, and the v=1 basis
function is positive on top.  ``ClassifierParams.invert_f10_sign`` flips
this for experiments.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .codec.image import QuantTable
from .dct import forward_dct, idct_to_samples

DC, F10, F11 = 0, 8, 9


class BlockCategory(enum.IntEnum):
    EMPTY = 0
    TOP_INK = 1
    BOTTOM_INK = 2
    FULL_INK = 3
    INTERIOR = 4


_EMPTY, _TOP, _BOTTOM, _FULL, _INTERIOR = (int(c) for c in BlockCategory)


@dataclass(frozen=True)
class DctBlock:
    """64 dequantized coefficients in natural order."""

    coef: np.ndarray

    def __post_init__(self):
        coef = np.asarray(self.coef, dtype=np.int64).reshape(64)
        object.__setattr__(self, "coef", coef)

    def dc(self) -> int:
        return int(self.coef[DC])

    def f10(self) -> int:
        return int(self.coef[F10])

    def f11(self) -> int:
        return int(self.coef[F11])


@dataclass(frozen=True)
class ClassifierParams:
    """Thresholds for :func:`classify_block`.

    ``ac_energy_threshold=None`` means ``(2 * min quantizer step) ** 2`` for
    the table the block came from.
    """

    ac_energy_threshold: float | None = None
    f10_dead_zone: float = 0.0
    invert_f10_sign: bool = False

    def __post_init__(self):
        if self.ac_energy_threshold is not None and not self.ac_energy_threshold > 0:
            raise ValueError("ac_energy_threshold must be > 0")
        if not self.f10_dead_zone >= 0:
            raise ValueError("f10_dead_zone must be >= 0")

    def energy_threshold(self, qt: QuantTable | None) -> float:
        if self.ac_energy_threshold is not None:
            return float(self.ac_energy_threshold)
        if qt is None:
            raise ValueError("need a quantization table for the default energy threshold")
        return float((2 * min(qt.q)) ** 2)


def dequantize(qb, qt: QuantTable) -> DctBlock:
    return DctBlock(np.asarray(qb, dtype=np.int64).reshape(64) * qt.as_array())


def idct_8x8(b: DctBlock) -> np.ndarray:
    """Reference inverse DCT of one block -> (8, 8) uint8 samples, level shift included."""
    return idct_to_samples(b.coef.reshape(1, 64))[0]


def forward_dct_8x8(pixels) -> np.ndarray:
    """Unquantized forward DCT of an (8, 8) sample block, natural order, float."""
    p = np.asarray(pixels, dtype=np.float64).reshape(8, 8) - 128.0
    return forward_dct(p).reshape(64)


def classify_blocks(coef, params: ClassifierParams, qt: QuantTable | None = None) -> np.ndarray:
    """Vectorised :func:`classify_block` over ``(..., 64)`` dequantized coefficients."""
    coef = np.asarray(coef)
    shape = coef.shape[:-1]
    c = coef.reshape(-1, 64)
    if c.dtype.kind != "f":
        c = c.astype(np.int64)  # squares of 11-bit values times 8-bit steps fit easily
    ac = c[:, 1:]
    energy = np.einsum("ij,ij->i", ac, ac)
    f10 = -c[:, F10] if params.invert_f10_sign else c[:, F10]
    eps = params.f10_dead_zone
    spread = np.where(np.abs(c[:, F11]) > eps, _FULL, _INTERIOR)
    out = np.where(np.abs(f10) > eps, np.where(f10 < 0, _TOP, _BOTTOM), spread)
    out[energy <= params.energy_threshold(qt)] = _EMPTY
    return out.astype(np.int8).reshape(shape)


def classify_block(b: DctBlock, params: ClassifierParams, qt: QuantTable | None = None) -> BlockCategory:
    energy = float(np.sum(b.coef[1:].astype(np.float64) ** 2))
    if energy <= params.energy_threshold(qt):
        return BlockCategory.EMPTY
    f10 = -b.f10() if params.invert_f10_sign else b.f10()
    if abs(f10) > params.f10_dead_zone:
        return BlockCategory.TOP_INK if f10 < 0 else BlockCategory.BOTTOM_INK
    if abs(b.f11()) > params.f10_dead_zone:
        return BlockCategory.FULL_INK
    return BlockCategory.INTERIOR
