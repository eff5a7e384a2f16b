import numpy as np
import pytest

from conftest import store_from_rows
from glyphsim.clustering import (
    ClusterParams,
    assign_pass,
    cluster,
    merge_pass,
    singleton_partition,
)
from glyphsim.errors import DataError


def vectors_with_cosines(c_ab: float, c_bc: float, c_ac: float) -> dict[int, np.ndarray]:
    """Three explicit unit vectors realizing the given pairwise cosines."""
    gram = np.array(
        [
            [1.0, c_ab, c_ac],
            [c_ab, 1.0, c_bc],
            [c_ac, c_bc, 1.0],
        ]
    )
    chol = np.linalg.cholesky(gram)  # rows are the unit vectors
    return {0x41 + i: chol[i] for i in range(3)}


def orthogonal_store(n: int, dim: int = 8):
    rows = {0x41 + i: np.eye(dim)[i] for i in range(n)}
    return store_from_rows(rows)


class TestAssignPass:
    def test_orthogonal_vectors_stay_apart(self):
        store = orthogonal_store(3)
        clusters = assign_pass([0x41, 0x42, 0x43], store, 0.5)
        assert clusters == [[0x41], [0x42], [0x43]]

    def test_identical_pair_joins(self):
        rows = {0x41: np.array([1.0, 0.0]), 0x42: np.array([1.0, 0.0]),
                0x43: np.array([0.0, 1.0])}
        store = store_from_rows(rows)
        clusters = assign_pass([0x41, 0x42, 0x43], store, 0.9)
        assert clusters == [[0x41, 0x42], [0x43]]

    def test_chain_fails_all_members_rule(self):
        # a.b = 0.95, b.c = 0.95, a.c = 0.85: c clears the gate against b
        # alone but not against a, so the ALL-members rule keeps it out.
        # (Unit-vector geometry caps a.c at cos(2*arccos(0.95)) ~ 0.805
        # from below, so a feasible sub-threshold value must be >= that.)
        store = store_from_rows(vectors_with_cosines(0.95, 0.95, 0.85))
        clusters = assign_pass([0x41, 0x42, 0x43], store, 0.9)
        assert clusters == [[0x41, 0x42], [0x43]]

    def test_first_qualifying_cluster_wins(self):
        # two clusters both qualify for the candidate; creation order decides
        rows = {
            0x41: np.array([1.0, 0.0, 0.0]),
            0x42: np.array([0.0, 1.0, 0.0]),
            0x43: np.array([1.0, 0.0, 0.0]),
        }
        store = store_from_rows(rows)
        clusters = assign_pass([0x41, 0x42, 0x43], store, 0.99)
        assert clusters == [[0x41, 0x43], [0x42]]

    def test_empty_input(self):
        store = orthogonal_store(1)
        assert assign_pass([], store, 0.5) == []

    def test_missing_embedding(self):
        store = orthogonal_store(1)
        with pytest.raises(DataError, match="missing embeddings"):
            assign_pass([0x41, 0x5A], store, 0.5)

    def test_exclusive_threshold_one_gives_singletons(self):
        rows = {0x41: np.array([1.0, 0.0]), 0x42: np.array([1.0, 0.0])}
        store = store_from_rows(rows)
        clusters = assign_pass([0x41, 0x42], store, 1.0)
        assert clusters == [[0x41], [0x42]]


class TestMergePass:
    def test_unachievable_mean_threshold_is_identity(self):
        store = store_from_rows(vectors_with_cosines(0.99, 0.99, 0.99))
        before = [[0x41], [0x42], [0x43]]
        assert merge_pass(before, store, 1.0, 0.1) == before

    def test_two_singletons_merge(self):
        store = store_from_rows(vectors_with_cosines(0.99, 0.0, 0.0))
        merged = merge_pass([[0x41], [0x42], [0x43]], store, 0.9, 0.1)
        assert merged == [[0x41, 0x42], [0x43]]

    def test_enlarged_cluster_used_for_later_comparisons(self):
        # C1={a}, C2={b} merge (cos 0.95). Pairwise b.c = 0.90 would clear
        # the 0.85 gate, but the enlarged {a,b} vs {c} mean (0.75+0.90)/2
        # = 0.825 does not: the merged cluster is what c is compared to.
        store = store_from_rows(vectors_with_cosines(0.95, 0.9, 0.75))
        merged = merge_pass([[0x41], [0x42], [0x43]], store, 0.85, 1.0)
        assert merged == [[0x41, 0x42], [0x43]]

    def test_variance_gate_blocks_merge(self):
        # cross-cosines {a.c = 0.35, b.c = 0.98}: mean 0.665 clears a 0.6
        # gate but population variance ~0.099 trips the 0.01 bound
        store = store_from_rows(vectors_with_cosines(0.5, 0.98, 0.35))
        clusters = [[0x41, 0x42], [0x43]]
        assert merge_pass(clusters, store, 0.6, 0.01) == clusters
        # with a lenient variance bound the same pair merges
        assert merge_pass(clusters, store, 0.6, 0.2) == [[0x41, 0x42, 0x43]]

    def test_merge_propagates_down_the_list(self):
        dim = 4
        rows = {
            0x41: np.eye(dim)[0],
            0x42: np.eye(dim)[0],
            0x43: np.eye(dim)[0],
            0x5A: np.eye(dim)[1],
        }
        store = store_from_rows(rows)
        merged = merge_pass([[0x41], [0x5A], [0x42], [0x43]], store, 0.9, 0.1)
        assert merged == [[0x41, 0x42, 0x43], [0x5A]]

    def test_empty(self):
        store = orthogonal_store(1)
        assert merge_pass([], store, 0.9, 0.01) == []


def make_blobs(
    n_blobs: int, per_blob: int, dim: int, seed: int, noise: float = 0.01
):
    """Seeded unit-sphere blobs: orthonormal centers + small perturbations."""
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    rows = {}
    labels = {}
    cp = 0x4E00
    for b in range(n_blobs):
        center = basis[b]
        for _ in range(per_blob):
            v = center + noise * rng.normal(size=dim)
            rows[cp] = v / np.linalg.norm(v)
            labels[cp] = b
            cp += 1
    return rows, labels


class TestCluster:
    def test_empty_input(self):
        store = orthogonal_store(1)
        cs = cluster([], store, ClusterParams())
        assert cs.k == 0

    def test_separable_blobs_recovered_exactly(self):
        rows, labels = make_blobs(n_blobs=10, per_blob=5, dim=32, seed=2024)
        store = store_from_rows(rows)
        codepoints = sorted(rows)
        vecs = store.matrix(codepoints)
        sims = vecs @ vecs.T
        same = np.equal.outer(
            [labels[c] for c in codepoints], [labels[c] for c in codepoints]
        )
        assert sims[same].min() >= 0.99  # within-blob cosine floor
        assert sims[~same].max() <= 0.2  # across-blob ceiling

        params = ClusterParams(
            assign_threshold=0.9, merge_mean_threshold=0.9, merge_var_threshold=0.01
        )
        cs = cluster(codepoints, store, params)
        predicted = {frozenset(c.members) for c in cs.clusters}
        expected = {
            frozenset(c for c in codepoints if labels[c] == b) for b in range(10)
        }
        assert predicted == expected

    def test_partition_property(self):
        rng = np.random.default_rng(5)
        rows = {0x100 + i: rng.normal(size=6) for i in range(40)}
        store = store_from_rows(rows)
        codepoints = sorted(rows)
        cs = cluster(codepoints, store, ClusterParams(0.3, 0.3, 0.5))
        seen = [c for cl in cs.clusters for c in cl.sorted_members()]
        assert sorted(seen) == codepoints

    def test_merge_never_increases_k(self):
        rng = np.random.default_rng(9)
        rows = {0x200 + i: rng.normal(size=5) for i in range(30)}
        store = store_from_rows(rows)
        codepoints = sorted(rows)
        assigned = assign_pass(codepoints, store, 0.4)
        merged = merge_pass(assigned, store, 0.4, 0.5)
        assert len(merged) <= len(assigned)

    def test_deterministic(self):
        rng = np.random.default_rng(11)
        rows = {0x300 + i: rng.normal(size=8) for i in range(25)}
        store = store_from_rows(rows)
        codepoints = sorted(rows)
        params = ClusterParams(0.5, 0.5, 0.2)
        a = cluster(codepoints, store, params)
        b = cluster(codepoints, store, params)
        assert [c.sorted_members() for c in a.clusters] == [
            c.sorted_members() for c in b.clusters
        ]

    def test_singleton_partition(self):
        cs = singleton_partition([0x43, 0x41, 0x42])
        assert cs.k == 3
        assert [c.sorted_members() for c in cs.clusters] == [[0x41], [0x42], [0x43]]

    def test_params_validation(self):
        with pytest.raises(DataError):
            ClusterParams(assign_threshold=-1.0)
        with pytest.raises(DataError):
            ClusterParams(merge_var_threshold=-0.1)
        ClusterParams(assign_threshold=1.0)  # the singleton-baseline setting
