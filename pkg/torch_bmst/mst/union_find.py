import numpy as np


class UnionFind:
    """
    Disjoint-set forest with union by size and path halving.
    Plain lists: the scalar find/union loops dominate Kruskal.
    """

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union_roots(self, ra, rb):
        """ Links two distinct roots, returns the surviving root. """
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return ra

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.union_roots(ra, rb)
        return True

    def roots(self):
        """ Root of every element, by vectorized pointer jumping. """
        parent = np.asarray(self.parent, dtype=np.int64)
        while True:
            grand = parent[parent]
            if np.array_equal(grand, parent):
                return parent
            parent = grand
