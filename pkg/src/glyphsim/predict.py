"""Homoglyph set prediction by similarity-matrix thresholding.

Every matrix row whose above-threshold entries extend beyond the
diagonal self-match contributes a candidate set; overlapping candidate
sets merge transitively so the output is a list of disjoint sets.
Members absent from the ground-truth universe are the novel predictions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from PIL import Image, ImageDraw

from .codepoints import to_hex
from .confusables import GroundTruth
from .embedding import SimilarityMatrix
from .errors import DataError, DegenerateError
from .render import CANVAS_SIZE, FontCollection, render

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PredictionReport:
    """Predicted homoglyph sets at one threshold, with novelty split."""

    alpha: float
    predicted_sets: tuple[frozenset[int], ...]
    novel_homoglyphs: frozenset[int]

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "predicted_sets": [
                [to_hex(c) for c in sorted(s)] for s in self.predicted_sets
            ],
            "novel_homoglyphs": [to_hex(c) for c in sorted(self.novel_homoglyphs)],
            "set_count": len(self.predicted_sets),
            "predicted_codepoints": sum(len(s) for s in self.predicted_sets),
            # counts distinct codepoints, not per-set memberships
            "novel_count": len(self.novel_homoglyphs),
        }


def _check_alpha(alpha: float) -> None:
    if not (-1.0 < alpha < 1.0):
        raise DataError(f"alpha must lie in (-1, 1), got {alpha}")


def _merge_sets(row_sets: Iterable[frozenset[int]]) -> list[frozenset[int]]:
    """Transitive merge of overlapping sets into disjoint sets."""
    from .unionfind import UnionFind

    uf = UnionFind()
    for s in row_sets:
        first = None
        for c in s:
            if first is None:
                first = c
                uf.find(c)
            else:
                uf.union(first, c)
    groups = uf.groups()
    groups.sort(key=min)
    return [frozenset(g) for g in groups]


def threshold_rows(matrix: SimilarityMatrix, alpha: float) -> list[frozenset[int]]:
    """Row sets {j : A[i][j] > alpha} with at least two members, merged
    transitively into disjoint codepoint sets (sorted by smallest member)."""
    _check_alpha(alpha)
    codepoints = np.asarray(matrix.codepoints)
    row_sets = []
    for i in range(len(matrix)):
        hits = np.flatnonzero(matrix.rows[i] > alpha)
        if hits.size >= 2:
            row_sets.append(frozenset(int(codepoints[j]) for j in hits))
    return _merge_sets(row_sets)


def threshold_row_blocks(
    blocks: Iterator[tuple[int, np.ndarray]],
    codepoints: list[int],
    alpha: float,
) -> list[frozenset[int]]:
    """threshold_rows over streamed row blocks; memory stays O(block)."""
    _check_alpha(alpha)
    cps = np.asarray(codepoints)
    row_sets = []
    for start, block in blocks:
        for offset in range(block.shape[0]):
            hits = np.flatnonzero(block[offset] > alpha)
            if hits.size >= 2:
                row_sets.append(frozenset(int(cps[j]) for j in hits))
    return _merge_sets(row_sets)


def membership_count(matrix: SimilarityMatrix, alpha: float) -> int:
    """Total pre-merge memberships sum |S_i|, used by the alpha sweep."""
    _check_alpha(alpha)
    per_row = (matrix.rows > alpha).sum(axis=1)
    return int(per_row[per_row >= 2].sum())


def find_novel(
    sets: list[frozenset[int]], gt: GroundTruth, alpha: float
) -> PredictionReport:
    """Split predicted-set members into known (in the ground-truth
    universe) and novel codepoints."""
    novel: set[int] = set()
    for s in sets:
        novel |= s - gt.universe
    return PredictionReport(
        alpha=alpha,
        predicted_sets=tuple(sorted((frozenset(s) for s in sets), key=min)),
        novel_homoglyphs=frozenset(novel),
    )


def render_set_sheet(
    members: Iterable[int], fc: FontCollection
) -> Image.Image:
    """Inspection sheet: one row per codepoint, hex label next to glyph.

    Unrenderable members are skipped with a warning; an effectively empty
    set is an error.
    """
    members = sorted(set(members))
    if not members:
        raise DegenerateError("cannot render a sheet for an empty set")
    label_width = 96
    pad = 4
    row_height = CANVAS_SIZE + pad
    rows = []
    for c in members:
        try:
            bitmap = render(c, fc)
        except (DataError, DegenerateError) as exc:
            log.warning("skipping U+%s in sheet: %s", to_hex(c), exc)
            continue
        rows.append((c, bitmap))
    if not rows:
        raise DegenerateError("no renderable members in set")
    sheet = Image.new("L", (label_width + CANVAS_SIZE + pad, row_height * len(rows)), 255)
    draw = ImageDraw.Draw(sheet)
    for r, (c, bitmap) in enumerate(rows):
        y = r * row_height
        draw.text((pad, y + CANVAS_SIZE // 3), f"U+{to_hex(c)}", fill=0)
        glyph = Image.fromarray(
            (255 - np.round(bitmap.pixels * 255.0)).astype(np.uint8), mode="L"
        )
        sheet.paste(glyph, (label_width, y))
    return sheet
