"""Cluster-quality metrics against the confusables ground truth.

For every ground-truth class the best-matching predicted cluster is the
one with the largest intersection (ties break to the smallest predicted
index). mBIOU averages intersection-over-union against that best match;
the companion mean-best-precision metric ships in two modes because the
as-printed definition coincides with mBIOU while a strict precision
reading divides by the predicted cluster size instead of the union.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .clustering import ClusterParams, ClusterSet, singleton_partition
from .confusables import GroundTruth
from .errors import DataError


@dataclass(frozen=True)
class ClassRow:
    """Per-ground-truth-class evaluation detail."""

    class_id: int
    best_predicted_index: int
    iou: float
    bp: float


@dataclass(frozen=True)
class ClusterEvalReport:
    """mBIOU / mBP summary for one dataset."""

    mbiou: float
    mbp_as_printed: float
    mbp_precision: float
    per_class: tuple[ClassRow, ...]
    dataset_tag: str
    backend_tag: str = ""

    def to_json_dict(self) -> dict:
        return {
            "dataset": self.dataset_tag,
            "backend": self.backend_tag,
            "mbiou": self.mbiou,
            "mbp_as_printed": self.mbp_as_printed,
            "mbp_precision": self.mbp_precision,
            "classes": len(self.per_class),
        }

    def write_per_class_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["class_id", "best_predicted_index", "iou", "bp"])
            for row in self.per_class:
                writer.writerow(
                    [row.class_id, row.best_predicted_index, row.iou, row.bp]
                )


def best_match(gt_members: frozenset[int], cs: ClusterSet) -> int:
    """Index of the predicted cluster with the largest intersection.

    Ties break to the smallest index; an all-zero intersection still has
    an argmax (index 0).
    """
    if cs.k == 0:
        raise DataError("cannot match against an empty cluster set")
    best_idx = 0
    best_inter = -1
    for j, cls in enumerate(cs.clusters):
        inter = len(gt_members & cls.members)
        if inter > best_inter:
            best_idx, best_inter = j, inter
    return best_idx


def evaluate_clusters(
    gt: GroundTruth,
    cs: ClusterSet,
    dataset_tag: str = "custom",
    backend_tag: str = "",
) -> ClusterEvalReport:
    """Full per-class evaluation: one row per ground-truth class.

    Uses an inverted codepoint->cluster index, which agrees with the
    best_match scan: same intersection argmax, same smallest-index
    tie-break, index 0 when every intersection is empty.
    """
    if gt.n == 0:
        raise DataError("ground truth has no classes to evaluate")
    if cs.k == 0:
        raise DataError("cannot evaluate an empty cluster set")
    owner = cs.membership()
    rows = []
    iou_sum = 0.0
    prec_sum = 0.0
    for cls in gt.classes:
        hits: dict[int, int] = {}
        for c in cls.members:
            j = owner.get(c)
            if j is not None:
                hits[j] = hits.get(j, 0) + 1
        if hits:
            best_inter = max(hits.values())
            j = min(idx for idx, cnt in hits.items() if cnt == best_inter)
        else:
            best_inter = 0
            j = 0
        predicted = cs.clusters[j].members
        inter = best_inter
        union = len(cls.members | predicted)
        iou = inter / union
        bp = inter / len(predicted)
        rows.append(
            ClassRow(class_id=cls.class_id, best_predicted_index=j, iou=iou, bp=bp)
        )
        iou_sum += iou
        prec_sum += bp
    n = gt.n
    mbiou_value = iou_sum / n
    return ClusterEvalReport(
        mbiou=mbiou_value,
        mbp_as_printed=mbiou_value,
        mbp_precision=prec_sum / n,
        per_class=tuple(rows),
        dataset_tag=dataset_tag,
        backend_tag=backend_tag,
    )


def mbiou(gt: GroundTruth, cs: ClusterSet) -> float:
    """Mean best intersection-over-union across ground-truth classes."""
    return evaluate_clusters(gt, cs).mbiou


def mbp(gt: GroundTruth, cs: ClusterSet, mode: str = "as-printed") -> float:
    """Mean best precision.

    ``as-printed`` reproduces the published definition, which is
    identical to mBIOU; ``precision`` divides the intersection by the
    predicted cluster size.
    """
    report = evaluate_clusters(gt, cs)
    if mode == "as-printed":
        return report.mbp_as_printed
    if mode == "precision":
        return report.mbp_precision
    raise DataError(f"unknown mbp mode: {mode!r}")


def naive_baseline(universe: frozenset[int] | set[int]) -> ClusterSet:
    """One singleton predicted class per universe codepoint."""
    return singleton_partition(sorted(universe), ClusterParams(assign_threshold=1.0))
