"""Disjoint-set forest with path compression and union by rank."""


class UnionFind:
    """Maintains disjoint sets of hashable items.

    Elements are registered lazily on first find/union. Grouping output is
    independent of the order unions are applied.
    """

    def __init__(self):
        self.parent = {}
        self.rank = {}

    def find(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.rank[x] = 0
            return x
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1

    def groups(self):
        """All current sets, as a list of sets."""
        by_root = {}
        for x in self.parent:
            by_root.setdefault(self.find(x), set()).add(x)
        return list(by_root.values())
