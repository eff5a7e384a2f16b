"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass/fail
line per criterion. The real-data criteria use the pinned confusables
snapshot and the bundled Noto collection under data/.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import store_from_rows
from glyphsim.clustering import ClusterParams, cluster
from glyphsim.confusables import (
    augment_universe,
    build_ground_truth,
    checksum_text,
    parse_confusables,
)
from glyphsim.embedding import EmbeddingStore, bitmap_embed, similarity_matrix
from glyphsim.metrics import evaluate_clusters, mbiou, naive_baseline
from glyphsim.ncd import ncd
from glyphsim.paireval import (
    evaluate_pairs,
    fit_threshold_classifier,
    precision_recall_sweep,
    sample_pairs,
    score_pairs,
)
from glyphsim.predict import membership_count, threshold_rows
from glyphsim.render import load_fonts, render
from test_metrics import brute_force_mbiou, cs_from_sets, gt_from_sets, random_instance

REPO_ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = REPO_ROOT / "data"


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def noto_fc():
    return load_fonts(sorted((DATA_DIR / "fonts").glob("*.ttf")))


@pytest.fixture(scope="module")
def snapshot_gt(noto_fc):
    text = (DATA_DIR / "confusables.txt").read_text(encoding="utf-8")
    return build_ground_truth(
        parse_confusables(text), noto_fc, source_checksum=checksum_text(text)
    )


@pytest.fixture(scope="module")
def snapshot_bitmap_store(noto_fc, snapshot_gt):
    codepoints = sorted(snapshot_gt.universe)
    vectors = [bitmap_embed(render(c, noto_fc)) for c in codepoints]
    return EmbeddingStore(vectors, backend_tag="bitmap")


class TestMbiouOracleEquivalence:
    def test_500_random_instances_exact(self):
        start = time.monotonic()
        rng = np.random.default_rng(20_24)
        checked = 0
        while checked < 500:
            instance = random_instance(rng)
            if instance is None:
                continue
            gt, cs = instance
            assert mbiou(gt, cs) == brute_force_mbiou(gt, cs)
            checked += 1
        elapsed = time.monotonic() - start
        report(
            "mBIOU oracle equivalence: 500 random instances, zero tolerance",
            elapsed < 10.0,
            f"{elapsed:.2f}s",
        )


class TestSingletonBaselineIdentity:
    def test_identity_formula_exact(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            sizes = rng.integers(2, 9, size=int(rng.integers(1, 6)))
            start, sets = 0x1000, []
            for s in sizes:
                sets.append(set(range(start, start + int(s))))
                start += int(s)
            gt = gt_from_sets(*sets)
            value = mbiou(gt, naive_baseline(gt.universe))
            expected = sum(1 / len(c.members) for c in gt.classes) / gt.n
            assert value == expected
        report("singleton baseline equals mean 1/|class| exactly", True)

    def test_two_three_class_sizes(self):
        gt = gt_from_sets({0x41, 0x42}, {0x43, 0x44, 0x45})
        value = mbiou(gt, naive_baseline(gt.universe))
        report(
            "singleton baseline on class sizes {2,3} equals 5/12",
            value == (1 / 2 + 1 / 3) / 2,
            f"value={value}",
        )

    def test_pinned_snapshot_band(self, snapshot_gt):
        value = mbiou(snapshot_gt, naive_baseline(snapshot_gt.universe))
        report(
            "singleton baseline on pinned snapshot in [0.41, 0.45]",
            0.41 <= value <= 0.45,
            f"value={value:.5f}, classes={snapshot_gt.n}, universe={len(snapshot_gt.universe)}",
        )

    def test_identical_across_augmentations(self, snapshot_gt, noto_fc):
        base = mbiou(snapshot_gt, naive_baseline(snapshot_gt.universe))
        u2 = augment_universe(snapshot_gt, 1000, noto_fc, seed=1007)
        u3 = augment_universe(snapshot_gt, 3000, noto_fc, seed=1008)
        v2 = mbiou(u2, naive_baseline(u2.universe))
        v3 = mbiou(u3, naive_baseline(u3.universe))
        report(
            "singleton baseline identical on U'' and U''' (exact)",
            v2 == base and v3 == base,
            f"U'={base:.5f} U''={v2:.5f} U'''={v3:.5f}",
        )


class TestPairwiseProtocolSanity:
    def test_oracle_scorer_perfect(self, snapshot_gt):
        owner = {}
        for cls in snapshot_gt.classes:
            for c in cls.members:
                owner[c] = cls.class_id

        def oracle(a, b):
            return 1.0 if owner.get(a) == owner.get(b) else 0.0

        pairs = score_pairs(sample_pairs(snapshot_gt, 2000, seed=7), oracle)
        clf = fit_threshold_classifier(pairs)
        rep = evaluate_pairs(pairs, clf, backend_tag="oracle", seed=7)
        report(
            "oracle scorer: accuracy and AP exactly 1.0",
            rep.accuracy == 1.0 and rep.average_precision == 1.0,
            f"acc={rep.accuracy} ap={rep.average_precision}",
        )

    def test_random_scorer_mean_ap_near_half(self, snapshot_gt):
        pairs = sample_pairs(snapshot_gt, 2000, seed=7)
        labels = np.array([p.positive for p in pairs])
        aps = []
        for seed in range(30):
            scores = np.random.default_rng(seed).random(len(pairs))
            _, ap = precision_recall_sweep(scores, labels)
            aps.append(ap)
        mean_ap = float(np.mean(aps))
        report(
            "label-independent random scorer: mean AP over 30 seeds in [0.45, 0.55]",
            0.45 <= mean_ap <= 0.55,
            f"mean AP={mean_ap:.4f}",
        )


class TestNcdBaselineBand:
    def test_ncd_accuracy_and_ap_bands(self, noto_fc, snapshot_gt):
        start = time.monotonic()
        pairs = sample_pairs(snapshot_gt, 2000, seed=7)
        cache = {}

        def rendered(c):
            if c not in cache:
                cache[c] = render(c, noto_fc)
            return cache[c]

        scored = score_pairs(pairs, lambda a, b: -ncd(rendered(a), rendered(b)))
        clf = fit_threshold_classifier(scored)
        rep = evaluate_pairs(scored, clf, backend_tag="ncd", seed=7)
        elapsed = time.monotonic() - start
        report(
            "NCD baseline: accuracy in [0.55, 0.75], AP in [0.60, 0.85], < 10 min",
            0.55 <= rep.accuracy <= 0.75
            and 0.60 <= rep.average_precision <= 0.85
            and elapsed < 600,
            f"acc={rep.accuracy:.4f} ap={rep.average_precision:.4f} elapsed={elapsed:.0f}s",
        )


class TestClusteringExactness:
    def test_separable_blobs_exact_recovery(self):
        rng = np.random.default_rng(99)
        dim, n_blobs, per_blob = 32, 10, 5
        basis, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        rows, labels = {}, {}
        cp = 0x2000
        for b in range(n_blobs):
            for _ in range(per_blob):
                v = basis[b] + 0.01 * rng.normal(size=dim)
                rows[cp] = v / np.linalg.norm(v)
                labels[cp] = b
                cp += 1
        store = store_from_rows(rows)
        codepoints = sorted(rows)
        vecs = store.matrix(codepoints)
        sims = vecs @ vecs.T
        same = np.equal.outer(
            [labels[c] for c in codepoints], [labels[c] for c in codepoints]
        )
        assert sims[same].min() >= 0.99 and sims[~same].max() <= 0.2

        cs = cluster(
            codepoints,
            store,
            ClusterParams(
                assign_threshold=0.9,
                merge_mean_threshold=0.9,
                merge_var_threshold=0.01,
            ),
        )
        predicted = {frozenset(c.members) for c in cs.clusters}
        expected = {
            frozenset(c for c in codepoints if labels[c] == b) for b in range(n_blobs)
        }
        gt = gt_from_sets(*expected)
        value = mbiou(gt, cs)
        report(
            "separable blobs: exact partition recovery, mBIOU = 1.0",
            predicted == expected and value == 1.0,
            f"k={cs.k} mbiou={value}",
        )


class TestBitmapBackendFloor:
    def test_full_pipeline_beats_singleton_baseline(
        self, snapshot_gt, snapshot_bitmap_store
    ):
        codepoints = sorted(snapshot_gt.universe)
        cs = cluster(codepoints, snapshot_bitmap_store, ClusterParams())
        pipeline = evaluate_clusters(snapshot_gt, cs, dataset_tag="U'").mbiou
        baseline = evaluate_clusters(
            snapshot_gt, naive_baseline(snapshot_gt.universe), dataset_tag="U'"
        ).mbiou
        report(
            "bitmap pipeline mBIOU strictly above singleton baseline on U'",
            pipeline > baseline,
            f"pipeline={pipeline:.4f} baseline={baseline:.4f}",
        )


class TestPredictionMonotonicity:
    def test_memberships_non_increasing_and_high_alpha_empty(self):
        rng = np.random.default_rng(555)
        rows = {0x3000 + i: rng.normal(size=16) for i in range(200)}
        store = store_from_rows(rows)
        codepoints = sorted(rows)
        matrix = similarity_matrix(store, codepoints)
        alphas = np.linspace(-0.5, 0.999, 20)
        counts = [membership_count(matrix, float(a)) for a in alphas]
        non_increasing = all(a >= b for a, b in zip(counts, counts[1:]))
        empty_at_top = threshold_rows(matrix, 0.999) == []
        report(
            "prediction: memberships non-increasing over 20-point alpha sweep; "
            "alpha=0.999 yields zero sets",
            non_increasing and empty_at_top,
            f"counts {counts[0]} .. {counts[-1]}",
        )


class TestCliDeterminism:
    @pytest.fixture()
    def small_config(self, tmp_path, alpha_path, beta_path):
        from conftest import FIXTURE_CONFUSABLES

        (tmp_path / "confusables.txt").write_text(FIXTURE_CONFUSABLES)
        config = {
            "font_paths": [str(alpha_path), str(beta_path)],
            "confusables_path": "confusables.txt",
            "backend": "bitmap",
            "seed": 5,
            "n_pairs": 40,
            "augment_counts": [1, 2],
            "alpha": 0.8,
            "assign_threshold": 0.8,
            "merge_mean_threshold": 0.78,
            "merge_var_threshold": 0.02,
            "sheet_count": 1,
            "output_dir": str(tmp_path / "unused"),
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        return tmp_path, path

    def test_byte_identical_reports_for_equal_fingerprints(self, small_config):
        from glyphsim.cli import main

        tmp, config = small_config
        commands = [
            ("render", ["render"]),
            ("eval-pairs", ["eval-pairs"]),
            ("cluster-eval", ["cluster-eval"]),
            ("predict", ["predict"]),
            ("predict-sweep", ["predict", "--sweep", "4"]),
        ]
        all_equal = True
        for name, args in commands:
            out1, out2 = tmp / f"{name}_1", tmp / f"{name}_2"
            assert main(["--config", str(config), "--out", str(out1), *args]) == 0
            assert main(["--config", str(config), "--out", str(out2), *args]) == 0
            for f1 in sorted(out1.glob("*.json")):
                f2 = out2 / f1.name
                if f1.read_bytes() != f2.read_bytes():
                    all_equal = False
        report(
            "determinism: equal config fingerprints give byte-identical reports",
            all_equal,
        )
