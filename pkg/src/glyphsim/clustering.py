"""Two-pass threshold clustering of codepoint embeddings.

Pass one walks the codepoints in the given order and assigns each to the
first existing cluster (in creation order) whose members are all more
similar than the assignment threshold, else opens a new cluster. Pass two
walks cluster pairs (i, k>i) and merges k into i when the cross-pair
cosine mean clears the merge threshold and the variance stays under the
variance bound; a merged cluster keeps absorbing later candidates in the
same sweep.

With an exclusive assignment test, a threshold of 1.0 yields all
singletons, which is exactly the naive baseline partition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .confusables import EquivalenceClass
from .embedding import EmbeddingStore
from .errors import DataError


@dataclass(frozen=True)
class ClusterParams:
    """Thresholds for the assignment and merge passes."""

    assign_threshold: float = 0.93
    merge_mean_threshold: float = 0.90
    merge_var_threshold: float = 0.01

    def __post_init__(self):
        for name in ("assign_threshold", "merge_mean_threshold"):
            value = getattr(self, name)
            if not (-1.0 < value <= 1.0):
                raise DataError(f"{name} must lie in (-1, 1], got {value}")
        if self.merge_var_threshold < 0:
            raise DataError(
                f"merge_var_threshold must be non-negative, "
                f"got {self.merge_var_threshold}"
            )

    def to_json_dict(self) -> dict:
        return {
            "assign_threshold": self.assign_threshold,
            "merge_mean_threshold": self.merge_mean_threshold,
            "merge_var_threshold": self.merge_var_threshold,
        }


@dataclass(frozen=True)
class ClusterSet:
    """Predicted partition of the input codepoints."""

    clusters: tuple[EquivalenceClass, ...]
    params: ClusterParams

    @property
    def k(self) -> int:
        return len(self.clusters)

    def membership(self) -> dict[int, int]:
        """codepoint -> cluster index."""
        out = {}
        for idx, cls in enumerate(self.clusters):
            for c in cls.members:
                out[c] = idx
        return out

    def to_json_dict(self) -> dict:
        from .codepoints import to_hex

        return {
            "params": self.params.to_json_dict(),
            "clusters": [
                [to_hex(c) for c in cls.sorted_members()] for cls in self.clusters
            ],
        }


def _check_embeddings(codepoints, store):
    missing = [c for c in codepoints if c not in store]
    if missing:
        from .codepoints import to_hex

        raise DataError(
            f"missing embeddings for {len(missing)} codepoints, "
            f"first U+{to_hex(missing[0])}"
        )


def assign_pass(
    codepoints: list[int], store: EmbeddingStore, assign_threshold: float
) -> list[list[int]]:
    """Single left-to-right assignment sweep; returns clusters as lists
    of codepoints in creation order."""
    _check_embeddings(codepoints, store)
    n = len(codepoints)
    if n == 0:
        return []
    vecs = store.matrix(codepoints)
    # cluster id per already-placed position; ids are creation-ordered, so
    # the first qualifying cluster is the lowest id whose members all pass.
    cluster_of = np.empty(n, dtype=np.int64)
    sizes: list[int] = []
    clusters: list[list[int]] = []
    for i in range(n):
        if clusters:
            sims = vecs[:i] @ vecs[i]
            passing = sims > assign_threshold
            k = len(clusters)
            pass_counts = np.bincount(
                cluster_of[:i][passing], minlength=k
            )
            all_pass = np.flatnonzero(pass_counts == np.asarray(sizes))
            if all_pass.size:
                target = int(all_pass[0])
                clusters[target].append(codepoints[i])
                sizes[target] += 1
                cluster_of[i] = target
                continue
        cluster_of[i] = len(clusters)
        clusters.append([codepoints[i]])
        sizes.append(1)
    return clusters


def merge_pass(
    clusters: list[list[int]],
    store: EmbeddingStore,
    merge_mean_threshold: float,
    merge_var_threshold: float,
) -> list[list[int]]:
    """Mean/variance-gated merge sweep over cluster pairs (i, k>i).

    Sequential semantics: after k merges into i, the enlarged cluster i is
    what later candidates are compared against. The scan over candidates
    for a fixed i is vectorized; it restarts from the merge position with
    the enlarged cluster, which reproduces the element-by-element walk.
    """
    if not clusters:
        return []
    flat = [c for cl in clusters for c in cl]
    _check_embeddings(flat, store)
    index = {c: i for i, c in enumerate(flat)}
    vecs = store.matrix(flat)
    sims = np.clip(vecs @ vecs.T, -1.0, 1.0).astype(np.float64)

    work = [list(cl) for cl in clusters]
    members = [np.array([index[c] for c in cl], dtype=np.intp) for cl in work]

    def first_merge_candidate(i: int, start: int) -> int | None:
        """Lowest k >= start whose gate fires against cluster i, else None."""
        later = members[start:]
        if not later:
            return None
        a = members[i]
        row_sum = sims[a].sum(axis=0)
        row_sumsq = (sims[a] ** 2).sum(axis=0)
        cat = np.concatenate(later)
        bounds = np.cumsum([0] + [m.size for m in later])[:-1]
        counts = a.size * np.diff(np.append(bounds, cat.size))
        cross_sum = np.add.reduceat(row_sum[cat], bounds)
        cross_sumsq = np.add.reduceat(row_sumsq[cat], bounds)
        means = cross_sum / counts
        variances = np.maximum(cross_sumsq / counts - means**2, 0.0)
        hits = np.flatnonzero(
            (means > merge_mean_threshold) & (variances < merge_var_threshold)
        )
        return start + int(hits[0]) if hits.size else None

    i = 0
    while i < len(work):
        start = i + 1
        while True:
            k = first_merge_candidate(i, start)
            if k is None:
                break
            work[i].extend(work[k])
            members[i] = np.concatenate([members[i], members[k]])
            del work[k]
            del members[k]
            start = k  # the scan resumes at the element that slid into k
        i += 1
    return work


def cluster(
    codepoints: list[int], store: EmbeddingStore, params: ClusterParams
) -> ClusterSet:
    """Assignment pass followed by the merge pass; deterministic given
    the input order."""
    assigned = assign_pass(codepoints, store, params.assign_threshold)
    merged = merge_pass(
        assigned, store, params.merge_mean_threshold, params.merge_var_threshold
    )
    classes = tuple(
        EquivalenceClass(members=frozenset(cl), class_id=i)
        for i, cl in enumerate(merged)
    )
    return ClusterSet(clusters=classes, params=params)


def singleton_partition(codepoints: list[int], params: ClusterParams | None = None) -> ClusterSet:
    """One cluster per codepoint, in sorted order."""
    params = params or ClusterParams(assign_threshold=1.0)
    classes = tuple(
        EquivalenceClass(members=frozenset([c]), class_id=i)
        for i, c in enumerate(sorted(codepoints))
    )
    return ClusterSet(clusters=classes, params=params)
