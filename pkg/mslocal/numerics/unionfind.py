from collections import Counter
from typing import Dict, Hashable, List


class UnionFind:
    """
    Disjoint sets with union by rank and path compression.

    Unknown elements are created on first `find`. Roots are the smallest
    element of each set, so component output does not depend on union order.

    Examples
    --------
    >>> uf = UnionFind()
    >>> uf.union(1, 2)
    >>> uf.union(5, 4)
    >>> uf.find(2), uf.find(5)
    (1, 4)
    """

    def __init__(self):
        self.parent: Dict[Hashable, Hashable] = {}
        self.rank = Counter()
        self._least: Dict[Hashable, Hashable] = {}

    def _root(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self._least[x] = x
            return x
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        # path compression
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def find(self, x):
        return self._least[self._root(x)]

    def add(self, x) -> None:
        self._root(x)

    def union(self, x, y) -> None:
        px, py = self._root(x), self._root(y)
        if px == py:
            return
        if self.rank[px] < self.rank[py]:
            px, py = py, px
        self.parent[py] = px
        if self.rank[px] == self.rank[py]:
            self.rank[px] += 1
        self._least[px] = min(self._least[px], self._least[py])

    def components(self) -> List[List]:
        """All sets, each sorted, ordered by their smallest element."""
        groups: Dict[Hashable, List] = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return [sorted(groups[k]) for k in sorted(groups)]
