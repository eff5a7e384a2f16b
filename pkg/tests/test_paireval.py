import numpy as np
import pytest

from glyphsim.clustering import ClusterParams
from glyphsim.confusables import EquivalenceClass, GroundTruth
from glyphsim.errors import DataError, DegenerateError
from glyphsim.paireval import (
    LabeledPair,
    evaluate_pairs,
    fit_threshold_classifier,
    precision_recall_sweep,
    sample_pairs,
    score_pairs,
)


def gt_from_sets(*member_sets, extra_universe=()):
    classes = tuple(
        EquivalenceClass(members=frozenset(s), class_id=i)
        for i, s in enumerate(member_sets)
    )
    universe = frozenset().union(*member_sets) | frozenset(extra_universe)
    return GroundTruth(classes=classes, universe=universe)


def pairs_from(scores_pos, scores_neg):
    out = [LabeledPair(a=1, b=2, positive=True, score=s) for s in scores_pos]
    out += [LabeledPair(a=3, b=4, positive=False, score=s) for s in scores_neg]
    return out


A, B, C, D, E, F = range(0x41, 0x47)


class TestSamplePairs:
    def test_balanced_split(self):
        gt = gt_from_sets({A, B}, {C, D, E}, extra_universe={F})
        pairs = sample_pairs(gt, 200, seed=0)
        assert len(pairs) == 200
        assert sum(p.positive for p in pairs) == 100

    def test_single_class_positives_forced(self):
        gt = gt_from_sets({A, B}, extra_universe={C, D})
        pairs = sample_pairs(gt, 50, seed=1)
        for p in pairs:
            if p.positive:
                assert {p.a, p.b} == {A, B}

    def test_deterministic(self):
        gt = gt_from_sets({A, B}, {C, D, E})
        p1 = sample_pairs(gt, 100, seed=9)
        p2 = sample_pairs(gt, 100, seed=9)
        assert [(p.a, p.b, p.positive) for p in p1] == [
            (p.a, p.b, p.positive) for p in p2
        ]

    def test_odd_count_rejected(self):
        gt = gt_from_sets({A, B})
        with pytest.raises(DataError, match="even"):
            sample_pairs(gt, 3, seed=0)

    def test_no_nontrivial_class_rejected(self):
        gt = GroundTruth(classes=(), universe=frozenset({A, B}))
        with pytest.raises(DataError, match="non-trivial"):
            sample_pairs(gt, 2, seed=0)

    def test_labels_consistent_with_ground_truth(self):
        gt = gt_from_sets({A, B}, {C, D, E}, extra_universe={F})
        owner = {}
        for cls in gt.classes:
            for cp in cls.members:
                owner[cp] = cls.class_id
        for p in sample_pairs(gt, 400, seed=3):
            assert p.a != p.b
            same = owner.get(p.a) is not None and owner.get(p.a) == owner.get(p.b)
            assert same == p.positive

    def test_positive_pair_uniformity_over_ordered_pairs(self):
        # class {A,B} has 2 ordered pairs, {C,D,E} has 6: the bigger class
        # should soak up ~3/4 of positives
        gt = gt_from_sets({A, B}, {C, D, E})
        pairs = sample_pairs(gt, 4000, seed=5)
        big = sum(1 for p in pairs if p.positive and p.a in {C, D, E})
        assert 0.70 <= big / 2000 <= 0.80


class TestFitThresholdClassifier:
    def test_separable_midpoint(self):
        pairs = pairs_from([0.8, 0.9], [0.1, 0.2])
        clf = fit_threshold_classifier(pairs)
        assert clf.threshold == pytest.approx(0.5)
        scores = np.array([p.score for p in pairs])
        labels = np.array([p.positive for p in pairs])
        assert (clf.predict(scores) == labels).all()

    def test_anticorrelated_scores_learn_negative_weight(self):
        pairs = pairs_from([0.1, 0.2], [0.8, 0.9])
        clf = fit_threshold_classifier(pairs)
        assert clf.weight < 0
        scores = np.array([p.score for p in pairs])
        labels = np.array([p.positive for p in pairs])
        assert (clf.predict(scores) == labels).all()

    def test_label_independent_noise_near_chance(self):
        accuracies = []
        for seed in range(30):
            rng = np.random.default_rng(seed)
            scores = rng.random(2000)
            labels = np.arange(2000) % 2 == 0
            pairs = [
                LabeledPair(a=1, b=2, positive=bool(l), score=float(s))
                for s, l in zip(scores, labels)
            ]
            clf = fit_threshold_classifier(pairs)
            acc = (clf.predict(scores) == labels).mean()
            accuracies.append(acc)
        mean_acc = float(np.mean(accuracies))
        assert 0.45 <= mean_acc <= 0.55

    def test_accuracy_at_least_majority_vote(self):
        rng = np.random.default_rng(17)
        scores = rng.random(300)
        labels = rng.random(300) < 0.7
        pairs = [
            LabeledPair(a=1, b=2, positive=bool(l), score=float(s))
            for s, l in zip(scores, labels)
        ]
        clf = fit_threshold_classifier(pairs)
        acc = (clf.predict(scores) == labels).mean()
        assert acc >= max(labels.mean(), 1 - labels.mean())

    def test_identical_scores_degenerate(self):
        pairs = pairs_from([0.5, 0.5], [0.5, 0.5])
        with pytest.raises(DegenerateError, match="identical"):
            fit_threshold_classifier(pairs)

    def test_single_label_rejected(self):
        pairs = [LabeledPair(a=1, b=2, positive=True, score=0.5)]
        with pytest.raises(DataError, match="both labels"):
            fit_threshold_classifier(pairs)


def reversed_oracle_ap(n_pos: int, n_neg: int) -> float:
    """Step-sum AP when every negative outranks every positive."""
    ap = 0.0
    for i in range(1, n_pos + 1):
        precision = i / (n_neg + i)
        ap += (1 / n_pos) * precision
    return ap


class TestEvaluatePairs:
    def test_oracle_scores_perfect(self):
        pairs = pairs_from([1.0] * 50, [0.0] * 50)
        clf = fit_threshold_classifier(pairs)
        report = evaluate_pairs(pairs, clf, backend_tag="oracle", seed=0)
        assert report.accuracy == 1.0
        assert report.average_precision == 1.0

    def test_reversed_oracle_ap_matches_hand_sum(self):
        pos = list(np.linspace(0.0, 0.4, 40))
        neg = list(np.linspace(0.6, 1.0, 40))
        pairs = pairs_from(pos, neg)
        scores = np.array([p.score for p in pairs])
        labels = np.array([p.positive for p in pairs])
        _, ap = precision_recall_sweep(scores, labels)
        assert ap == pytest.approx(reversed_oracle_ap(40, 40), abs=1e-12)
        assert 0.2 <= ap <= 0.5  # near the balanced-prior baseline

    def test_recall_monotone_and_reaches_one(self):
        rng = np.random.default_rng(2)
        pairs = pairs_from(rng.random(30), rng.random(30))
        scores = np.array([p.score for p in pairs])
        labels = np.array([p.positive for p in pairs])
        points, _ = precision_recall_sweep(scores, labels)
        recalls = [r for _, r, _ in points]
        assert recalls == sorted(recalls)
        assert recalls[-1] == 1.0
        assert len(points) == 60  # all-distinct scores: one point per score

    def test_ap_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(6)
        scores = rng.normal(size=80)
        labels = rng.random(80) < 0.5
        if not labels.any() or labels.all():
            labels[0], labels[1] = True, False
        _, ap1 = precision_recall_sweep(scores, labels)
        _, ap2 = precision_recall_sweep(np.exp(scores), labels)
        assert ap1 == pytest.approx(ap2, abs=1e-12)

    def test_holdout_reported(self):
        rng = np.random.default_rng(3)
        pairs = pairs_from(0.6 + 0.4 * rng.random(100), 0.4 * rng.random(100))
        clf = fit_threshold_classifier(pairs)
        report = evaluate_pairs(pairs, clf, backend_tag="t", seed=3)
        assert report.holdout_accuracy == pytest.approx(1.0)

    def test_score_pairs_applies_scorer(self):
        pairs = [LabeledPair(a=A, b=B, positive=True)]
        scored = score_pairs(pairs, lambda a, b: a + b)
        assert scored[0].score == A + B


class TestOracleScorerOnFixtureGt(object):
    def test_oracle_scorer_end_to_end(self, fixture_gt):
        owner = {}
        for cls in fixture_gt.classes:
            for cp in cls.members:
                owner[cp] = cls.class_id

        def oracle(a, b):
            return 1.0 if owner.get(a) == owner.get(b) else 0.0

        pairs = score_pairs(sample_pairs(fixture_gt, 120, seed=11), oracle)
        clf = fit_threshold_classifier(pairs)
        report = evaluate_pairs(pairs, clf, backend_tag="oracle", seed=11)
        assert report.accuracy == 1.0
        assert report.average_precision == 1.0
