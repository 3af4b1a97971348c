"""Baseline JPEG <-> quantized DCT coefficients."""

import numpy as np

from ..dct import idct_to_samples
from .decoder import parse_jpeg
from .encoder import encode_coefficients, encode_jpeg_grayscale, quantize_image
from .image import (BadHuffman, BadMarker, CoefficientImage, InvalidQuality,
                    JpegError, PixelImage, QuantTable, TruncatedStream,
                    UnsupportedMode)


def decode_pixels(ci: CoefficientImage) -> PixelImage:
    """Full decompression: dequantize and inverse-transform every block, then crop."""
    bh, bw = ci.blocks_high, ci.blocks_wide
    deq = ci.coef.reshape(-1, 64) * ci.quant_table.as_array().astype(np.float64)
    tiles = idct_to_samples(deq).reshape(bh, bw, 8, 8)
    raster = tiles.transpose(0, 2, 1, 3).reshape(bh * 8, bw * 8)
    return PixelImage(ci.width_px, ci.height_px, raster[:ci.height_px, :ci.width_px])


__all__ = [
    "BadHuffman", "BadMarker", "CoefficientImage", "InvalidQuality", "JpegError",
    "PixelImage", "QuantTable", "TruncatedStream", "UnsupportedMode",
    "decode_pixels", "encode_coefficients", "encode_jpeg_grayscale", "parse_jpeg",
    "quantize_image",
]
