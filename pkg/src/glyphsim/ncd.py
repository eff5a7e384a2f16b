"""Normalized Compression Distance over glyph bitmaps, LZMA-backed.

Bitmaps are serialized as raw row-major 8-bit grayscale bytes; an image
container would dominate the compressed size at 64x64. The distance is

    NCD(x, y) = (C(x.y) - min(C(x), C(y))) / max(C(x), C(y))

with C the LZMA-compressed length and x.y byte concatenation, computed
in the given order without symmetrization.
"""

from __future__ import annotations

import lzma

from .errors import DataError
from .render import GlyphBitmap

LZMA_PRESET = 6
BACKEND_TAG = f"ncd-lzma-preset{LZMA_PRESET}"


def compressed_size(data: bytes) -> int:
    """Length in bytes of the LZMA-compressed stream (preset 6)."""
    return len(lzma.compress(data, preset=LZMA_PRESET))


def ncd(x: GlyphBitmap, y: GlyphBitmap) -> float:
    """Compression distance between two equal-size bitmaps."""
    if x.pixels.shape != y.pixels.shape:
        raise DataError(
            f"bitmap dimension mismatch: {x.pixels.shape} vs {y.pixels.shape}"
        )
    bx, by = x.to_bytes(), y.to_bytes()
    cx, cy = compressed_size(bx), compressed_size(by)
    cxy = compressed_size(bx + by)
    return (cxy - min(cx, cy)) / max(cx, cy)
