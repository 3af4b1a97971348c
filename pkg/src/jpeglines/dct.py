"""Double-precision 8x8 DCT-II / DCT-III in separable matrix form.

``BASIS[k, n] = C(k) / 2 * cos((2n + 1) k pi / 16)`` with ``C(0) = 1/sqrt(2)``,
so ``F = BASIS @ f @ BASIS.T`` is exactly the JPEG forward transform and
``f = BASIS.T @ F @ BASIS`` its inverse.  No fast-path approximations.
"""

import threading

import numpy as np

_k = np.arange(8)[:, None]
_n = np.arange(8)[None, :]
BASIS = np.where(_k == 0, 1 / np.sqrt(2), 1.0) / 2 * np.cos((2 * _n + 1) * _k * np.pi / 16)
BASIS_T = np.ascontiguousarray(BASIS.T)
# KRON[(v, u), (y, x)] = BASIS[v, y] * BASIS[u, x]: the whole 2-D inverse as one 64x64 product
KRON = np.kron(BASIS, BASIS)
_BYTE_SUM = np.uint64(0x0101010101010101)


class IdctCounter:
    """Counts inverse transforms, one per 8x8 block."""

    def __init__(self):
        self._lock = threading.Lock()
        self.count = 0

    def add(self, n):
        with self._lock:
            self.count += n

    def reset(self):
        with self._lock:
            self.count = 0


idct_calls = IdctCounter()


def forward_dct(pixels):
    """Forward DCT of ``(..., 8, 8)`` level-shifted samples."""
    f = np.asarray(pixels, dtype=np.float64)
    return BASIS @ f @ BASIS_T


def inverse_dct(coef):
    """Inverse DCT of ``(..., 8, 8)`` dequantized coefficients, unrounded."""
    c = np.asarray(coef, dtype=np.float64)
    return BASIS_T @ c @ BASIS


def _idct_batch(d):
    """(N, 64) or (N, 8, 8) dequantized blocks -> (N, 8, 8) unrounded samples, one BLAS product."""
    n = d.shape[0]
    return (d.reshape(n, 64) @ KRON).reshape(n, 8, 8)


def idct_to_samples(dequantized):
    """Dequantized ``(N, 64)`` blocks -> ``(N, 8, 8)`` uint8 samples.

    Rounds half up, adds the +128 level shift and clamps to [0, 255].
    """
    d = np.asarray(dequantized, dtype=np.float64)
    n = d.shape[0]
    idct_calls.add(n)
    if n == 0:
        return np.empty((0, 8, 8), dtype=np.uint8)
    out = np.floor(_idct_batch(d) + 128.5)
    np.clip(out, 0, 255, out=out)
    return out.astype(np.uint8)


def idct_below(dequantized, level):
    """Boolean ``(N, 8, 8)`` mask of samples ``idct_to_samples`` would put below ``level``.

    ``floor(x) < level`` iff ``x < level`` for integer ``level``, so the
    rounding and clamping are skipped.
    """
    d = np.asarray(dequantized, dtype=np.float64)
    n = d.shape[0]
    idct_calls.add(n)
    if n == 0:
        return np.empty((0, 8, 8), dtype=bool)
    return _idct_batch(d) + 128.5 < level


def idct_row_ink(dequantized, level, cols=None):
    """``(N, 8)`` count of samples below ``level`` in each sample row of each block.

    ``cols`` optionally limits block ``i`` to its first ``cols[i]`` columns
    (blocks hanging over the right image edge).  Same threshold semantics as
    ``idct_below``.
    """
    d = np.asarray(dequantized, dtype=np.float64)
    n = d.shape[0]
    idct_calls.add(n)
    if n == 0:
        return np.empty((0, 8), dtype=np.int64)
    dark = d.reshape(n, 64) @ KRON < level - 128.5
    if cols is not None:
        cols = np.asarray(cols)
        cut = np.flatnonzero(cols < 8)
        if len(cut):
            d3 = dark.reshape(n, 8, 8)
            d3[cut] &= (np.arange(8) < cols[cut, None])[:, None, :]
    # each row is 8 bytes of 0/1; the top byte of row * 0x0101..01 is their sum
    return ((dark.view(np.uint64) * _BYTE_SUM) >> np.uint64(56)).astype(np.int64)
