"""Stallings folding for finitely generated subgroups of free groups.

A folded graph decides membership, yields a basis and the rank, and its
cyclic core classifies the subgroup up to conjugacy.
"""

from collections import deque

from .words import inverse, letter_key, multiply, reduce_word


class FoldedGraph:
    def __init__(self, words):
        self.words = [reduce_word(w) for w in words]
        self._fold()

    def _fold(self):
        n_v = 1
        edges = []
        for w in self.words:
            if not w:
                continue
            cur = 0
            for k, x in enumerate(w):
                nxt = 0 if k == len(w) - 1 else n_v
                if nxt:
                    n_v += 1
                edges.append((cur, x, nxt))
                cur = nxt
        parent = list(range(n_v))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        while True:
            # normalise to positive letters and current representatives
            norm = set()
            for u, x, v in edges:
                u, v = find(u), find(v)
                norm.add((u, x, v) if x > 0 else (v, -x, u))
            edges = list(norm)
            targets = {}
            clash = None
            for u, x, v in edges:
                for key, t in (((u, x), v), ((v, -x), u)):
                    old = targets.setdefault(key, t)
                    if old != t:
                        clash = (old, t)
                        break
                if clash:
                    break
            if clash is None:
                break
            a, b = find(clash[0]), find(clash[1])
            if b == 0 or (a != 0 and b < a):
                a, b = b, a
            parent[b] = a
        # relabel vertices 0..V-1 with the base at 0
        verts = sorted({find(0)} | {u for u, _, _ in edges} | {v for _, _, v in edges})
        base = find(0)
        verts.remove(base)
        verts = [base] + verts
        ren = {v: i for i, v in enumerate(verts)}
        self.n_vertices = len(verts)
        self.edges = sorted((ren[u], x, ren[v]) for u, x, v in edges)
        self.out = [dict() for _ in range(self.n_vertices)]
        for u, x, v in self.edges:
            self.out[u][x] = v
            self.out[v][-x] = u

    # ------------------------------------------------------------------
    @property
    def rank(self):
        return len(self.edges) - self.n_vertices + 1

    def read(self, w, start=0):
        """End vertex of the path labelled w from ``start``, or None."""
        v = start
        for x in reduce_word(w):
            v = self.out[v].get(x)
            if v is None:
                return None
        return v

    def accepts(self, w):
        return self.read(w) == 0

    def _tree_paths(self, start=0):
        """Shortlex BFS tree: label of the tree path from start to each vertex."""
        path = {start: ()}
        q = deque([start])
        while q:
            v = q.popleft()
            for x in sorted(self.out[v], key=letter_key):
                t = self.out[v][x]
                if t not in path:
                    path[t] = path[v] + (x,)
                    q.append(t)
        return path

    def basis(self):
        path = self._tree_paths()
        tree = set()
        for v, p in path.items():
            if p:
                u = self.read(p[:-1])
                tree.add((u, p[-1], v) if p[-1] > 0 else (v, -p[-1], u))
        out = []
        for u, x, v in self.edges:
            if (u, x, v) in tree:
                continue
            out.append(reduce_word(path[u] + (x,) + inverse(path[v])))
        return out

    def core(self):
        """Vertices of the cyclic core (repeatedly prune degree-1 vertices)."""
        deg = [len(o) for o in self.out]
        alive = [True] * self.n_vertices
        q = deque(v for v in range(self.n_vertices) if deg[v] <= 1)
        while q:
            v = q.popleft()
            if not alive[v]:
                continue
            alive[v] = False
            for t in self.out[v].values():
                if alive[t]:
                    deg[t] -= 1
                    if deg[t] <= 1:
                        q.append(t)
        return {v for v in range(self.n_vertices) if alive[v]}

    def hair(self):
        """Label of the path from the base to the core (empty if base in core)."""
        core = self.core()
        if not core:
            return None
        path = self._tree_paths()
        best = min(core, key=lambda v: (len(path[v]), [letter_key(x) for x in path[v]]))
        return path[best]

    def _encode_from(self, s, core):
        num = {s: 0}
        order = [s]
        code = []
        i = 0
        while i < len(order):
            v = order[i]
            for x in sorted(self.out[v], key=letter_key):
                t = self.out[v][x]
                if t not in core:
                    continue
                if t not in num:
                    num[t] = len(order)
                    order.append(t)
                code.append((num[v], x, num[t]))
            i += 1
        return tuple(code)

    def core_signature(self):
        """Canonical code of the labelled cyclic core: equal iff conjugate."""
        core = self.core()
        if not core:
            return ()
        return min((self._encode_from(s, core), s) for s in sorted(core))

    def path_label(self, u, v, within=None):
        """Label of a shortlex BFS path u -> v (restricted to ``within``)."""
        path = {u: ()}
        q = deque([u])
        while q:
            a = q.popleft()
            if a == v:
                return path[a]
            for x in sorted(self.out[a], key=letter_key):
                t = self.out[a][x]
                if within is not None and t not in within:
                    continue
                if t not in path:
                    path[t] = path[a] + (x,)
                    q.append(t)
        return None


def conjugator(H, K):
    """g with K = g H g^-1 for folded graphs H, K, or None."""
    sH, sK = H.core_signature(), K.core_signature()
    if not sH or not sK:
        if H.rank == 0 and K.rank == 0:
            return ()
        return None
    if sH[0] != sK[0]:
        return None
    coreH, coreK = H.core(), K.core()
    h = H.path_label(0, sH[1])
    k = K.path_label(0, sK[1])
    return multiply(k, inverse(h))


def subgroup_equal(G1, G2):
    return all(G2.accepts(w) for w in G1.basis()) and all(G1.accepts(w) for w in G2.basis())
