"""Minimal connectors joining finite point sets.

Each set is treated as one blob: a connector is a forest of geodesic trees
whose union with the sets is connected.  On 0-hyperbolic graph backends with
connected sets the construction is exact (the minimal subtree spanning the
union, minus the edges lying inside a set).  Elsewhere a spanning tree of
bridges is improved by median insertions.
"""

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from .coarse import QuasiParams, bridge, concat_paths, hausdorff, is_quasigeodesic
from .errors import PreconditionError
from .space import PathSample
from .words import multiply

EXACT_KINDS = ("tree", "free_cayley")


@dataclass
class TreeComponent:
    vertices: list  # branch endpoints: terminals, Steiner points and leaves
    edges: list  # geodesic PathSamples between vertices
    terminals: list  # (point, set index)

    @property
    def length(self):
        return sum(e.length for e in self.edges)

    def points(self):
        out = {}
        for e in self.edges:
            out.update(dict.fromkeys(e.points))
        return list(out)


@dataclass
class Connector:
    components: list
    sets: list
    exact: bool
    merged: list = field(default_factory=list)  # groups of input indices merged into one set

    @property
    def perimeter(self):
        return sum(c.length for c in self.components)

    @property
    def terminal_count(self):
        return sum(len(c.terminals) for c in self.components)

    def set_index(self):
        idx = {}
        for i, A in enumerate(self.sets):
            for p in A:
                idx.setdefault(p, i)
        return idx


def perimeter(conn):
    return conn.perimeter


# ----------------------------------------------------------------------------
# input handling


def _merge_overlapping(space, sets):
    n = len(sets)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner = {}
    for i, A in enumerate(sets):
        for p in A:
            if p in owner:
                a, b = find(owner[p]), find(i)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                owner[p] = i
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out, merged = [], []
    for root in sorted(groups):
        idx = groups[root]
        pts = space.canonical(p for i in idx for p in sets[i])
        out.append(pts)
        if len(idx) > 1:
            merged.append(idx)
    return out, merged


def _neighbors(space, p):
    if space.backend_kind == "tree":
        return space.backend.adj[p]
    return [multiply(p, (x,)) for x in space.alphabet.letters()]


def _is_connected(space, A):
    A = set(A)
    start = next(iter(A))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in _neighbors(space, v):
            if w in A and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(A)


def minimal_connector(space, sets, exact=None):
    """Connector for the given sets; overlapping sets are merged first."""
    if len(sets) < 2:
        raise PreconditionError("a connector needs at least two sets")
    sets = [list(A) for A in sets]
    if any(not A for A in sets):
        raise PreconditionError("empty set")
    sets, merged = _merge_overlapping(space, sets)
    if len(sets) == 1:
        return Connector([], sets, True, merged)
    can_exact = (space.backend_kind in EXACT_KINDS and space.delta == 0
                 and all(_is_connected(space, A) for A in sets))
    if exact is None:
        exact = can_exact
    if exact and not can_exact:
        raise PreconditionError("exact connectors need connected sets in a tree-like backend")
    comps = _exact_forest(space, sets) if exact else _heuristic(space, sets)
    conn = Connector(comps, sets, exact, merged)
    _assert_invariants(space, conn)
    return conn


# ----------------------------------------------------------------------------
# exact construction in trees


def _exact_forest(space, sets):
    owner = {}
    for i, A in enumerate(sets):
        for p in A:
            owner[p] = i
    pts = [p for A in sets for p in A]
    root = pts[0]
    edges = set()
    seen = {root}
    for q in pts[1:]:
        if q in seen:
            continue
        # walk back from q until the already-built subtree is reached
        path = space.geodesic(q, root).points
        for u, v in zip(path, path[1:]):
            edges.add((u, v) if space.sort_key(u) <= space.sort_key(v) else (v, u))
            if v in seen:
                break
            seen.add(v)
        seen.add(q)
    cedges = [(u, v) for u, v in edges
              if not (u in owner and v in owner and owner[u] == owner[v])]
    return _components_from_edges(space, cedges, owner)


def _components_from_edges(space, cedges, owner):
    adj = {}
    for u, v in cedges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for v in adj:
        adj[v].sort(key=space.sort_key)
    comps = []
    done = set()
    for start in sorted(adj, key=space.sort_key):
        if start in done:
            continue
        comp = []
        stack = [start]
        done.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if w not in done:
                    done.add(w)
                    stack.append(w)
        comps.append(_branches(space, comp, adj, owner))
    comps.sort(key=lambda c: space.sort_key(c.vertices[0]))
    return comps


def _branches(space, comp, adj, owner):
    nodes = space.canonical(v for v in comp if v in owner or len(adj[v]) != 2)
    nodeset = set(nodes)
    edges = []
    used = set()
    for a in nodes:
        for b in adj[a]:
            if (a, b) in used:
                continue
            path = [a, b]
            while path[-1] not in nodeset:
                prev, cur = path[-2], path[-1]
                path.append(next(w for w in adj[cur] if w != prev))
            for u, v in zip(path, path[1:]):
                used.add((u, v))
                used.add((v, u))
            edges.append(PathSample(path, [float(i) for i in range(len(path))], 1.0))
    terms = [(v, owner[v]) for v in nodes if v in owner]
    return TreeComponent(nodes, edges, terms)


# ----------------------------------------------------------------------------
# heuristic construction


def _heuristic(space, sets):
    n = len(sets)
    B = {}
    for i, j in itertools.combinations(range(n), 2):
        B[i, j] = bridge(space, sets[i], sets[j])
    # Kruskal on bridge lengths, ties by index
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    tree = []
    for (i, j), br in sorted(B.items(), key=lambda kv: (kv[1].length, kv[0])):
        a, b = find(i), find(j)
        if a != b:
            parent[max(a, b)] = min(a, b)
            tree.append((i, j, br.a, br.b))
    # a component is (list of (point, set) terminals, optional Steiner point)
    comps = [([(a, i), (b, j)], None) for i, j, a, b in tree]
    improved = True
    while improved:
        improved = False
        for x, y in itertools.combinations(range(len(comps)), 2):
            new = _try_tripod(space, sets, comps[x], comps[y])
            if new is not None:
                comps = [c for k, c in enumerate(comps) if k not in (x, y)] + [new]
                improved = True
                break
    out = []
    for terms, center in comps:
        out.append(_star(space, terms, center))
    out.sort(key=lambda c: space.sort_key(c.vertices[0]))
    return out


def _comp_len(space, terms, center):
    if center is None:
        return space.dist(terms[0][0], terms[1][0])
    return sum(space.dist(center, p) for p, _ in terms)


def _try_tripod(space, sets, c1, c2):
    """Join two 2-terminal components sharing a set through a median point."""
    if c1[1] is not None or c2[1] is not None:
        return None
    s1 = {i for _, i in c1[0]}
    s2 = {i for _, i in c2[0]}
    shared = s1 & s2
    if len(shared) != 1:
        return None
    k = shared.pop()
    (b, ib), = [t for t in c1[0] if t[1] != k]
    (c, ic), = [t for t in c2[0] if t[1] != k]
    old = _comp_len(space, *c1) + _comp_len(space, *c2)
    best = None
    # attachment points near the old ones on the shared set
    near = [t[0] for t in c1[0] + c2[0] if t[1] == k]
    A = sets[k]
    D = space.dist_matrix(near, A).min(axis=0)
    cand_a = [p for _, p in sorted(zip(D, range(len(A))))[:8]]
    for ai in cand_a:
        a = A[ai]
        cands = {}
        for p, q in ((a, b), (a, c), (b, c)):
            cands.update(dict.fromkeys(space.geodesic(p, q).points))
        cands = space.canonical(cands)
        tot = space.dist_matrix(cands, [a, b, c]).sum(axis=1)
        m = int(np.argmin(tot))
        if best is None or tot[m] < best[0] - 1e-9:
            best = (float(tot[m]), a, cands[m])
    # improvement threshold of one internal unit
    if best is None or best[0] >= old - space.unit_scale:
        return None
    _, a, m = best
    return ([(a, k), (b, ib), (c, ic)], m)


def _star(space, terms, center):
    terms = sorted(terms, key=lambda t: t[1])
    if center is None or any(center == p for p, _ in terms):
        if center is None:
            edges = [space.geodesic(terms[0][0], terms[1][0])]
        else:
            edges = [space.geodesic(center, p) for p, _ in terms if p != center]
        verts = space.canonical(p for p, _ in terms)
        return TreeComponent(verts, edges, terms)
    edges = [space.geodesic(center, p) for p, _ in terms]
    verts = space.canonical([center] + [p for p, _ in terms])
    return TreeComponent(verts, edges, terms)


# ----------------------------------------------------------------------------
# invariants and checks


def _assert_invariants(space, conn):
    for comp in conn.components:
        idx = [i for _, i in comp.terminals]
        if len(idx) != len(set(idx)):
            raise AssertionError("terminals of one component lie in the same set")
    n = len(conn.sets)
    if conn.terminal_count > 2 * (n - 1):
        raise AssertionError("more than 2(n-1) terminals")
    if not edges_are_minimal(conn):
        raise AssertionError("connector has a redundant edge")


def edges_are_minimal(conn):
    """Every edge is a bridge of the union graph (sets contracted to nodes)."""
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner = conn.set_index()
    node = lambda p: ("set", owner[p]) if p in owner else ("pt", p)
    for comp in conn.components:
        for e in comp.edges:
            a, b = find(node(e.points[0])), find(node(e.points[-1]))
            if a == b:
                return False
            parent[a] = b
    return True


def is_connecting(conn):
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            x = parent[x]
        return x

    owner = conn.set_index()
    node = lambda p: ("set", owner[p]) if p in owner else ("pt", p)
    for comp in conn.components:
        for e in comp.edges:
            a, b = find(node(e.points[0])), find(node(e.points[-1]))
            if a != b:
                parent[a] = b
    roots = {find(("set", i)) for i in range(len(conn.sets))}
    return len(roots) == 1


def recheck_components(space, conn):
    """Each component against a fresh connector on its own terminals.

    Returns a list of (component perimeter, rebuilt perimeter, ok).
    """
    out = []
    for comp in conn.components:
        pts = [[p] for p, _ in comp.terminals]
        if len(pts) < 2:
            out.append((comp.length, 0.0, comp.length <= 1))
            continue
        again = minimal_connector(space, pts).perimeter
        out.append((comp.length, again, comp.length <= again + space.unit_scale + 1e-9))
    return out


# ----------------------------------------------------------------------------
# paths through the connector


@dataclass
class OmegaGeodesic:
    segments: list  # (kind, PathSample) with kind "set" or "tree", alternating
    total_len: float

    def path(self):
        return concat_paths(*[p for _, p in self.segments])


def omega_geodesic(space, conn, x, y):
    owner = conn.set_index()
    tree_adj = {}
    for ci, comp in enumerate(conn.components):
        for e in comp.edges:
            a, b = e.points[0], e.points[-1]
            tree_adj.setdefault(a, []).append((b, e, ci))
            tree_adj.setdefault(b, []).append((a, e.__class__(e.points[::-1],
                                                               [e.length - s for s in e.arclens[::-1]],
                                                               e.step), ci))
    for p in (x, y):
        if p not in owner and p not in tree_adj:
            raise PreconditionError("point %r is not on the connector or a set" % (p,))
    nodes = space.canonical(list(tree_adj) + [x, y])
    by_set = {}
    for p in nodes:
        if p in owner:
            by_set.setdefault(owner[p], []).append(p)
    key = {p: k for k, p in enumerate(nodes)}
    dist = {x: 0.0}
    prev = {}
    heap = [(0.0, key[x], x)]
    while heap:
        d, _, u = heapq.heappop(heap)
        if d > dist.get(u, float("inf")) + 1e-12:
            continue
        if u == y:
            break
        steps = [(v, e.length, ("tree", e)) for v, e, _ in tree_adj.get(u, [])]
        if u in owner:
            steps += [(v, space.dist(u, v), ("set", None)) for v in by_set[owner[u]] if v != u]
        for v, w, how in steps:
            nd = d + w
            if nd < dist.get(v, float("inf")) - 1e-12:
                dist[v] = nd
                prev[v] = (u, how)
                heapq.heappush(heap, (nd, key[v], v))
    if y not in dist:
        raise PreconditionError("x and y are not joined by the connector")
    hops = []
    v = y
    while v != x:
        u, how = prev[v]
        hops.append((u, v, how))
        v = u
    hops.reverse()
    segs = []
    if not hops or hops[0][2][0] == "tree":
        segs.append(("set", space.geodesic(x, x)))
    for u, v, (kind, e) in hops:
        piece = space.geodesic(u, v) if kind == "set" else e
        if kind == "tree" and segs and segs[-1][0] == "tree":
            # two components meeting in one set point: empty in-set hop
            segs.append(("set", space.geodesic(u, u)))
        if segs and segs[-1][0] == kind:
            segs[-1] = (kind, concat_paths(segs[-1][1], piece))
        else:
            segs.append((kind, piece))
    if segs[-1][0] == "tree":
        segs.append(("set", space.geodesic(y, y)))
    return OmegaGeodesic(segs, dist[y])


def connector_diagnostics(space, conn, registry=None):
    us = space.unit_scale
    rep = {"perimeter": conn.perimeter / us, "components": len(conn.components),
           "terminals": conn.terminal_count, "bridge_gaps": [], "omega": []}
    for comp in conn.components:
        for (p, i), (q, j) in itertools.combinations(comp.terminals, 2):
            br = bridge(space, conn.sets[i], conn.sets[j])
            rep["bridge_gaps"].append((i, j, abs(space.dist(p, q) - br.length) / us))
    reps = [A[0] for A in conn.sets]
    worst_lam = 1.0
    worst_eps = 0.0
    for i, j in itertools.combinations(range(len(conn.sets)), 2):
        og = omega_geodesic(space, conn, reps[i], reps[j])
        path = og.path()
        if len(path.points) < 2:
            continue
        lam = _achieved_lambda(space, path)
        eps = is_quasigeodesic(space, path, QuasiParams(1.0, 0.0)).achieved_eps / us
        rep["omega"].append((i, j, lam, eps))
        worst_lam, worst_eps = max(worst_lam, lam), max(worst_eps, eps)
    rep["worst_lambda"] = worst_lam
    rep["worst_eps"] = worst_eps
    if registry is not None:
        n = len(conn.sets)
        rep["K3"] = float(registry.get("K3", n))
    if all(len(A) == 1 for A in conn.sets):
        geo = {}
        for (p,), (q,) in itertools.combinations(conn.sets, 2):
            geo.update(dict.fromkeys(space.geodesic(p, q).points))
        om = {p: None for A in conn.sets for p in A}
        for comp in conn.components:
            om.update(dict.fromkeys(comp.points()))
        rep["hausdorff_to_geodesics"] = hausdorff(space, list(om), list(geo)) / us
    return rep


def _achieved_lambda(space, path):
    D = space.dist_matrix(path.points, path.points)
    s = np.asarray(path.arclens, dtype=float)
    S = np.abs(s[:, None] - s[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        R = np.where(D > 1e-9, S / np.where(D > 1e-9, D, 1.0), 1.0)
    return float(max(R.max(), 1.0))
