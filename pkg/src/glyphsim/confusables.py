"""Unicode confusables database parsing and ground-truth construction.

The input is the UTS #39 confusables file: one mapping per line,
``<hex[ hex...]> ; <hex[ hex...]> ; <tag> # comment``. Single-codepoint
entries whose source and prototype both render are grouped into
equivalence classes by transitive closure over the source-prototype
edges; only classes with two or more members are kept.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .codepoints import parse_hex, to_hex
from .errors import DataError
from .render import FontCollection, is_renderable
from .unionfind import UnionFind


@dataclass(frozen=True)
class ConfusableEntry:
    """One parsed data line: source maps to its prototype string."""

    source: tuple[int, ...]
    prototype: tuple[int, ...]
    raw_line: str

    def __post_init__(self):
        if not self.source or not self.prototype:
            raise DataError(f"empty codepoint sequence in entry: {self.raw_line!r}")


@dataclass(frozen=True)
class EquivalenceClass:
    """A set of mutually confusable codepoints."""

    members: frozenset[int]
    class_id: int

    def __post_init__(self):
        if len(self.members) < 1:
            raise DataError("equivalence class must have at least one member")

    @property
    def non_trivial(self) -> bool:
        return len(self.members) >= 2

    def sorted_members(self) -> list[int]:
        return sorted(self.members)


@dataclass(frozen=True)
class GroundTruth:
    """Non-trivial equivalence classes over the renderable universe."""

    classes: tuple[EquivalenceClass, ...]
    universe: frozenset[int]
    source_checksum: str = ""

    def __post_init__(self):
        seen: set[int] = set()
        for cls in self.classes:
            if not cls.non_trivial:
                raise DataError(f"trivial class in ground truth: id={cls.class_id}")
            if cls.members & seen:
                overlap = sorted(cls.members & seen)
                raise DataError(f"classes overlap on {[to_hex(c) for c in overlap]}")
            if not cls.members <= self.universe:
                raise DataError(f"class {cls.class_id} not contained in universe")
            seen |= cls.members

    @property
    def n(self) -> int:
        return len(self.classes)

    def class_of(self, codepoint: int) -> int | None:
        """class_id containing the codepoint, or None."""
        for cls in self.classes:
            if codepoint in cls.members:
                return cls.class_id
        return None

    def to_json_dict(self) -> dict:
        return {
            "classes": [[to_hex(c) for c in cls.sorted_members()] for cls in self.classes],
            "universe": [to_hex(c) for c in sorted(self.universe)],
            "source_checksum": self.source_checksum,
        }


def parse_confusables(text: str) -> list[ConfusableEntry]:
    """Parse confusables database file contents.

    Skips comments and blank lines, tolerates a leading BOM, and raises
    DataError with a 1-based line number on malformed data lines.
    """
    entries = []
    text = text.lstrip("﻿")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(";")]
        if len(fields) < 3:
            raise DataError(
                f"line {lineno}: expected 'source ; prototype ; tag', got {raw!r}"
            )
        try:
            source = tuple(parse_hex(tok) for tok in fields[0].split())
            prototype = tuple(parse_hex(tok) for tok in fields[1].split())
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
        if not source or not prototype:
            raise DataError(f"line {lineno}: missing codepoint field in {raw!r}")
        entries.append(ConfusableEntry(source=source, prototype=prototype, raw_line=raw))
    return entries


def checksum_text(text: str) -> str:
    """sha256 hex digest of the database file contents."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def build_ground_truth(
    entries: list[ConfusableEntry],
    fc: FontCollection,
    source_checksum: str = "",
) -> GroundTruth:
    """Equivalence classes over single-codepoint, renderable entries.

    Entries with a multi-codepoint source or prototype are excluded, as
    are entries where either side fails renderability. Surviving
    source-prototype pairs are merged transitively; classes with fewer
    than two members are dropped. Class ids are assigned in order of each
    class's smallest member.
    """
    renderable_cache: dict[int, bool] = {}

    def ok(c: int) -> bool:
        if c not in renderable_cache:
            renderable_cache[c] = is_renderable(c, fc)
        return renderable_cache[c]

    uf = UnionFind()
    for entry in entries:
        if len(entry.source) != 1 or len(entry.prototype) != 1:
            continue
        src, proto = entry.source[0], entry.prototype[0]
        if not ok(src) or not ok(proto):
            continue
        uf.union(src, proto)

    groups = [g for g in uf.groups() if len(g) >= 2]
    groups.sort(key=min)
    classes = tuple(
        EquivalenceClass(members=frozenset(g), class_id=i)
        for i, g in enumerate(groups)
    )
    universe = frozenset().union(*(c.members for c in classes)) if classes else frozenset()
    return GroundTruth(classes=classes, universe=universe, source_checksum=source_checksum)


def cardinality_histogram(gt: GroundTruth) -> dict[str, int]:
    """Counts of classes per cardinality bucket (2-10, 11-20, ...)."""
    hist: dict[str, int] = {}
    for cls in gt.classes:
        size = len(cls.members)
        if size <= 10:
            label = "2-10"
        else:
            lo = ((size - 1) // 10) * 10 + 1
            label = f"{lo}-{lo + 9}"
        hist[label] = hist.get(label, 0) + 1
    return dict(sorted(hist.items(), key=lambda kv: int(kv[0].split("-")[0])))


def augment_universe(
    gt: GroundTruth, k: int, fc: FontCollection, seed: int
) -> GroundTruth:
    """Grow the universe by k renderable codepoints outside it.

    Additions are sampled uniformly without replacement (seeded); classes
    are unchanged, so the additions act purely as negatives.
    """
    if k < 0:
        raise DataError(f"augmentation count must be non-negative, got {k}")
    if k == 0:
        return gt
    candidates = sorted(fc.supported_codepoints() - gt.universe)
    if len(candidates) < k:
        raise DataError(
            f"need {k} renderable codepoints outside the universe, "
            f"only {len(candidates)} available"
        )
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(candidates), size=k, replace=False)
    additions = {candidates[i] for i in picked}
    return GroundTruth(
        classes=gt.classes,
        universe=gt.universe | additions,
        source_checksum=gt.source_checksum,
    )
