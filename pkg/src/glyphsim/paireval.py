"""Pairwise homoglyph identification protocol.

n/2 positive pairs (same ground-truth class) and n/2 negative pairs
(different classes, or class vs. non-homoglyph) are sampled with
replacement, scored by some similarity backend, and classified by an
optimal-threshold rule: on a single score feature a linear large-margin
classifier reduces to a threshold, found by exhaustive sweep minimizing
misclassifications with ties broken toward the widest margin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .confusables import GroundTruth
from .errors import DataError, DegenerateError


@dataclass
class LabeledPair:
    """One sampled codepoint pair with its backend similarity score."""

    a: int
    b: int
    positive: bool
    score: float = float("nan")


@dataclass(frozen=True)
class ThresholdClassifier:
    """sign(weight * score + bias) predicts the positive label."""

    weight: float
    bias: float

    def predict(self, scores: np.ndarray) -> np.ndarray:
        return self.weight * np.asarray(scores) + self.bias > 0

    @property
    def threshold(self) -> float:
        return -self.bias / self.weight


@dataclass(frozen=True)
class PairEvalReport:
    """Accuracy / PR / AP summary of one pairwise evaluation."""

    n: int
    accuracy: float
    holdout_accuracy: float
    average_precision: float
    pr_points: tuple[tuple[float, float], ...]  # (recall, precision)
    classifier: ThresholdClassifier
    backend_tag: str
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "holdout_accuracy": self.holdout_accuracy,
            "average_precision": self.average_precision,
            "classifier": {
                "weight": self.classifier.weight,
                "bias": self.classifier.bias,
            },
            "backend": self.backend_tag,
            "seed": self.seed,
            "pr_points": [[r, p] for r, p in self.pr_points],
        }


def sample_pairs(gt: GroundTruth, n: int, seed: int) -> list[LabeledPair]:
    """Balanced sample: n/2 positives uniform over ordered same-class
    pairs, n/2 negatives by rejection from uniform universe pairs."""
    if n % 2 != 0:
        raise DataError(f"pair count must be even, got {n}")
    classes = [cls for cls in gt.classes if len(cls.members) >= 2]
    if not classes:
        raise DataError("ground truth has no non-trivial class to sample from")
    rng = np.random.default_rng(seed)
    universe = sorted(gt.universe)
    class_of = {}
    for cls in gt.classes:
        for c in cls.members:
            class_of[c] = cls.class_id

    members = [cls.sorted_members() for cls in classes]
    # ordered-pair count per class makes the pair choice uniform over P
    weights = np.array([len(m) * (len(m) - 1) for m in members], dtype=np.float64)
    weights /= weights.sum()

    pairs = []
    for _ in range(n // 2):
        idx = rng.choice(len(classes), p=weights)
        group = members[idx]
        a, b = rng.choice(len(group), size=2, replace=False)
        pairs.append(LabeledPair(a=group[a], b=group[b], positive=True))
    for _ in range(n // 2):
        while True:
            i, j = rng.integers(0, len(universe), size=2)
            a, b = universe[i], universe[j]
            if a == b:
                continue
            ca, cb = class_of.get(a), class_of.get(b)
            if ca is not None and ca == cb:
                continue
            pairs.append(LabeledPair(a=a, b=b, positive=False))
            break
    return pairs


def score_pairs(
    pairs: Sequence[LabeledPair], scorer: Callable[[int, int], float]
) -> list[LabeledPair]:
    """Apply a similarity scorer (higher = more similar) to every pair."""
    return [
        LabeledPair(a=p.a, b=p.b, positive=p.positive, score=float(scorer(p.a, p.b)))
        for p in pairs
    ]


def fit_threshold_classifier(pairs: Sequence[LabeledPair]) -> ThresholdClassifier:
    """Optimal threshold on the scalar score, large-margin tie-break.

    Sweeps midpoints between adjacent distinct scores (plus outer
    sentinels) in both orientations, minimizing training
    misclassifications; among minimizers prefers the widest gap, then the
    lower threshold, then positive orientation.
    """
    scores = np.array([p.score for p in pairs], dtype=np.float64)
    labels = np.array([p.positive for p in pairs], dtype=bool)
    if not np.all(np.isfinite(scores)):
        raise DataError("pair scores must be finite")
    if labels.all() or not labels.any():
        raise DataError("both labels must be present to fit a classifier")
    distinct = np.unique(scores)
    if distinct.size == 1:
        raise DegenerateError("all scores identical: threshold is undefined")
    gaps = np.diff(distinct)
    midpoints = distinct[:-1] + gaps / 2
    span = distinct[-1] - distinct[0]
    candidates = np.concatenate(
        [[distinct[0] - span], midpoints, [distinct[-1] + span]]
    )
    widths = np.concatenate([[0.0], gaps, [0.0]])

    best = None  # (errors, -width, threshold, orientation)
    for orientation in (1.0, -1.0):
        predictions = orientation * (scores[None, :] - candidates[:, None]) > 0
        errors = (predictions != labels[None, :]).sum(axis=1)
        for t_idx in range(candidates.size):
            key = (int(errors[t_idx]), -widths[t_idx], candidates[t_idx], -orientation)
            if best is None or key < best:
                best = key
    _, _, threshold, neg_orientation = best
    orientation = -neg_orientation
    return ThresholdClassifier(weight=orientation, bias=-orientation * threshold)


def precision_recall_sweep(
    scores: np.ndarray, labels: np.ndarray
) -> tuple[list[tuple[float, float, float]], float]:
    """PR operating points over all distinct score thresholds.

    Predicts positive at score >= threshold, sweeping thresholds from
    high to low so recall is non-decreasing. Returns (threshold, recall,
    precision) triples and the step-sum average precision
    AP = sum (R_i - R_{i-1}) * P_i.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    total_pos = int(labels.sum())
    if total_pos == 0:
        raise DataError("no positive labels: PR curve undefined")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels)
    predicted = np.arange(1, len(scores) + 1)
    # last index of each distinct-score run = one operating point
    boundary = np.ones(len(scores), dtype=bool)
    boundary[:-1] = sorted_scores[:-1] != sorted_scores[1:]
    points = []
    ap = 0.0
    prev_recall = 0.0
    for idx in np.flatnonzero(boundary):
        precision = tp[idx] / predicted[idx]
        recall = tp[idx] / total_pos
        points.append((float(sorted_scores[idx]), float(recall), float(precision)))
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return points, float(ap)


def evaluate_pairs(
    pairs: Sequence[LabeledPair],
    classifier: ThresholdClassifier,
    backend_tag: str = "",
    seed: int = 0,
) -> PairEvalReport:
    """Accuracy of the fitted classifier plus PR curve and AP.

    Accuracy is training-set accuracy (fit and evaluated on the same
    sample); a held-out 50/50 split accuracy is reported alongside.
    """
    scores = np.array([p.score for p in pairs], dtype=np.float64)
    labels = np.array([p.positive for p in pairs], dtype=bool)
    accuracy = float((classifier.predict(scores) == labels).mean())

    points, ap = precision_recall_sweep(scores, labels)
    pr_points = tuple((r, p) for _, r, p in points)

    holdout = _holdout_accuracy(scores, labels, seed)
    return PairEvalReport(
        n=len(pairs),
        accuracy=accuracy,
        holdout_accuracy=holdout,
        average_precision=ap,
        pr_points=pr_points,
        classifier=classifier,
        backend_tag=backend_tag,
        seed=seed,
    )


def _holdout_accuracy(scores: np.ndarray, labels: np.ndarray, seed: int) -> float:
    """Fit on a seeded half, report accuracy on the other half."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(scores))
    half = len(scores) // 2
    train, test = order[:half], order[half:]
    train_pairs = [
        LabeledPair(a=0, b=1, positive=bool(labels[i]), score=float(scores[i]))
        for i in train
    ]
    try:
        clf = fit_threshold_classifier(train_pairs)
    except (DataError, DegenerateError):
        return float("nan")
    return float((clf.predict(scores[test]) == labels[test]).mean())
