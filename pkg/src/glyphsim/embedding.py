"""Unit-normalized embedding vectors per codepoint.

Two backends share one store type: a built-in bitmap baseline (mean-pooled,
centered, normalized rasters) and externally trained vectors loaded from
HGEM files. Cosine similarity over a store reduces to a dot product
because vectors are normalized at the store boundary.

HGEM file layout (little-endian): magic ``HGEM``, u32 version=1,
u32 count, u32 dim, then count records of {u32 codepoint, dim x float32},
sorted ascending by codepoint.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .codepoints import check_scalar, to_hex
from .errors import DataError, DegenerateError
from .render import GlyphBitmap

BITMAP_EMBED_DIM = 256  # 16x16 mean-pooled canvas
_POOL = 4  # 64 / 16

HGEM_MAGIC = b"HGEM"
HGEM_VERSION = 1
_NORM_ATOL = 1e-6  # vector invariant
_LOAD_NORM_ATOL = 1e-3  # re-normalization window at load time


@dataclass(frozen=True)
class EmbeddingVector:
    """One codepoint's unit-norm feature vector."""

    values: np.ndarray
    codepoint: int

    def __post_init__(self):
        check_scalar(self.codepoint)
        if self.values.ndim != 1:
            raise DataError("embedding vector must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise DataError(f"non-finite embedding for U+{to_hex(self.codepoint)}")
        norm = float(np.linalg.norm(self.values))
        if abs(norm - 1.0) > _NORM_ATOL:
            raise DataError(
                f"embedding for U+{to_hex(self.codepoint)} is not unit length "
                f"(norm={norm!r})"
            )

    @property
    def dim(self) -> int:
        return self.values.shape[0]


class EmbeddingStore:
    """Immutable map codepoint -> EmbeddingVector with a shared dimension."""

    def __init__(self, vectors: list[EmbeddingVector], backend_tag: str):
        if not vectors:
            raise DataError("embedding store cannot be empty")
        dims = {v.dim for v in vectors}
        if len(dims) != 1:
            raise DataError(f"mixed embedding dimensions in store: {sorted(dims)}")
        self.dimension = dims.pop()
        self.backend_tag = backend_tag
        self._by_codepoint: dict[int, EmbeddingVector] = {}
        for v in vectors:
            if v.codepoint in self._by_codepoint:
                raise DataError(f"duplicate codepoint U+{to_hex(v.codepoint)} in store")
            self._by_codepoint[v.codepoint] = v

    def __len__(self):
        return len(self._by_codepoint)

    def __contains__(self, codepoint: int) -> bool:
        return codepoint in self._by_codepoint

    def get(self, codepoint: int) -> EmbeddingVector:
        try:
            return self._by_codepoint[codepoint]
        except KeyError:
            raise DataError(f"no embedding for U+{to_hex(codepoint)}") from None

    def codepoints(self) -> list[int]:
        return sorted(self._by_codepoint)

    def matrix(self, codepoints: list[int]) -> np.ndarray:
        """Row-stacked float32 vectors in the given codepoint order."""
        return np.stack(
            [self.get(c).values.astype(np.float32) for c in codepoints], axis=0
        )


def bitmap_embed(bitmap: GlyphBitmap) -> EmbeddingVector:
    """Baseline embedding: 4x4 mean pooling to 16x16, centered, unit norm.

    Rejects constant bitmaps (no direction after centering). The photographic
    negative of a bitmap embeds to the exact antipode.
    """
    px = bitmap.pixels.astype(np.float64)
    pooled = px.reshape(16, _POOL, 16, _POOL).mean(axis=(1, 3))
    flat = pooled.reshape(BITMAP_EMBED_DIM)
    centered = flat - flat.mean()
    norm = np.linalg.norm(centered)
    if norm == 0.0:
        raise DegenerateError(
            f"constant bitmap for U+{to_hex(bitmap.codepoint)}: no embedding direction"
        )
    return EmbeddingVector(values=(centered / norm), codepoint=bitmap.codepoint)


def cosine_similarity(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """Dot product of unit vectors, clamped to [-1, 1] against rounding."""
    if u.dim != v.dim:
        raise DataError(f"dimension mismatch: {u.dim} vs {v.dim}")
    return float(np.clip(np.dot(u.values, v.values), -1.0, 1.0))


def save_embeddings(store: EmbeddingStore, path: str | Path) -> None:
    """Write the store as an HGEM file (records sorted by codepoint)."""
    codepoints = store.codepoints()
    with open(path, "wb") as fh:
        fh.write(HGEM_MAGIC)
        fh.write(struct.pack("<III", HGEM_VERSION, len(codepoints), store.dimension))
        for c in codepoints:
            fh.write(struct.pack("<I", c))
            fh.write(store.get(c).values.astype("<f4").tobytes())


def load_embeddings(path: str | Path, backend_tag: str = "file") -> EmbeddingStore:
    """Read an HGEM file into a store.

    Vectors within 1e-3 of unit norm are re-normalized; anything further
    off is rejected. Duplicate codepoints and non-finite values are
    integrity errors.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read embeddings file {path}: {exc}") from exc
    if len(blob) < 16 or blob[:4] != HGEM_MAGIC:
        raise DataError(f"bad magic in embeddings file {path}")
    version, count, dim = struct.unpack_from("<III", blob, 4)
    if version != HGEM_VERSION:
        raise DataError(f"unsupported HGEM version {version} in {path}")
    record = 4 + 4 * dim
    expected = 16 + count * record
    if len(blob) != expected:
        raise DataError(
            f"truncated embeddings file {path}: expected {expected} bytes, "
            f"got {len(blob)}"
        )
    vectors = []
    seen: set[int] = set()
    prev = -1
    for i in range(count):
        off = 16 + i * record
        (codepoint,) = struct.unpack_from("<I", blob, off)
        values = np.frombuffer(blob, dtype="<f4", count=dim, offset=off + 4).astype(
            np.float64
        )
        if codepoint in seen:
            raise DataError(f"duplicate codepoint U+{to_hex(codepoint)} in {path}")
        if codepoint < prev:
            raise DataError(f"records not sorted by codepoint in {path}")
        seen.add(codepoint)
        prev = codepoint
        if not np.all(np.isfinite(values)):
            raise DataError(f"non-finite value for U+{to_hex(codepoint)} in {path}")
        norm = float(np.linalg.norm(values))
        if abs(norm - 1.0) > _LOAD_NORM_ATOL:
            raise DataError(
                f"vector for U+{to_hex(codepoint)} in {path} is not unit length "
                f"(norm={norm:.6f})"
            )
        vectors.append(EmbeddingVector(values=values / norm, codepoint=codepoint))
    return EmbeddingStore(vectors, backend_tag=backend_tag)


class SimilarityMatrix:
    """Dense pairwise cosine matrix over an ordered codepoint list."""

    def __init__(self, codepoints: list[int], rows: np.ndarray):
        n = len(codepoints)
        if rows.shape != (n, n):
            raise DataError(f"similarity matrix shape {rows.shape} != ({n}, {n})")
        self.codepoints = list(codepoints)
        self.rows = rows

    def __len__(self):
        return len(self.codepoints)


def similarity_matrix(store: EmbeddingStore, codepoints: list[int]) -> SimilarityMatrix:
    """Full cosine matrix: symmetric, unit diagonal, values in [-1, 1]."""
    vecs = store.matrix(codepoints)
    rows = np.clip(vecs @ vecs.T, -1.0, 1.0).astype(np.float32)
    np.fill_diagonal(rows, 1.0)
    return SimilarityMatrix(codepoints, rows)


def similarity_row_blocks(
    store: EmbeddingStore, codepoints: list[int], block_size: int
) -> Iterator[tuple[int, np.ndarray]]:
    """Streamed row blocks of the cosine matrix.

    Yields (start_row, block) where block has shape (<=block_size, N).
    Memory stays O(block_size * N); blocks are independent and their
    contents match the dense matrix exactly.
    """
    if block_size < 1:
        raise DataError(f"block size must be positive, got {block_size}")
    vecs = store.matrix(codepoints)
    n = vecs.shape[0]
    for start in range(0, n, block_size):
        block = np.clip(vecs[start : start + block_size] @ vecs.T, -1.0, 1.0).astype(
            np.float32
        )
        for i in range(block.shape[0]):
            block[i, start + i] = 1.0
        yield start, block
