"""Independent brute-force oracles used by the tests."""

import itertools

import networkx as nx


def random_word(rng, n, letters=(1, -1, 2, -2)):
    out = []
    while len(out) < n:
        x = rng.choice(letters)
        if out and out[-1] == -x:
            continue
        out.append(x)
    return tuple(out)


def _reach(adj_mask, allowed, start):
    seen = start
    frontier = start
    while frontier:
        nxt = 0
        m = frontier
        while m:
            low = m & -m
            nxt |= adj_mask[low.bit_length() - 1]
            m ^= low
        nxt &= allowed & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def steiner_bruteforce(n, edges, sets):
    """Fewest edges outside the sets whose union with the sets is connected.

    Scans subsets of non-set vertices in popcount order; the first subset
    whose induced subgraph (with the sets) is connected is optimal, since an
    induced subgraph of a tree is a forest.
    """
    adj = [0] * n
    for u, v in edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    base = 0
    for S in sets:
        for v in S:
            base |= 1 << v
    inner = sum(len(S) - 1 for S in sets)
    free = [v for v in range(n) if not base >> v & 1]
    start = 1 << next(iter(sets[0]))
    for r in range(len(free) + 1):
        for extra in itertools.combinations(free, r):
            allowed = base
            for v in extra:
                allowed |= 1 << v
            if _reach(adj, allowed, start) == allowed:
                return bin(allowed).count("1") - 1 - inner
    raise AssertionError("tree is disconnected")


def steiner_union_of_paths(n, edges, sets):
    """Second oracle: edges on paths between set representatives, minus set edges."""
    G = nx.Graph(edges)
    reps = [next(iter(S)) for S in sets]
    used = set()
    for a, b in itertools.combinations(reps, 2):
        p = nx.shortest_path(G, a, b)
        used.update(frozenset(e) for e in zip(p, p[1:]))
    inside = set()
    for S in sets:
        inside.update(frozenset((u, v)) for u, v in edges if u in S and v in S)
    # the union of paths covers each set's internal edges only where needed
    return len(used - inside)


def _set_candidates(n, edges):
    return [frozenset([v]) for v in range(n)] + [frozenset(e) for e in edges]


def connector_cases(max_vertices=12, max_sets=4, cap=10 ** 5):
    """(n, edges, sets) over all trees up to ``max_vertices`` vertices and all
    families of 2..max_sets pairwise disjoint singleton/edge sets, taken
    round-robin over the trees until ``cap`` cases."""
    gens = []
    for n in range(2, max_vertices + 1):
        for T in nx.nonisomorphic_trees(n):
            edges = sorted(tuple(sorted(e)) for e in T.edges())
            gens.append(_configs(n, edges, max_sets))
    count = 0
    while gens and count < cap:
        alive = []
        for g in gens:
            item = next(g, None)
            if item is None:
                continue
            alive.append(g)
            yield item
            count += 1
            if count >= cap:
                return
        gens = alive


def _configs(n, edges, max_sets):
    cands = _set_candidates(n, edges)
    for k in range(2, max_sets + 1):
        for combo in itertools.combinations(cands, k):
            seen = set()
            ok = True
            for S in combo:
                if seen & S:
                    ok = False
                    break
                seen |= S
            if ok:
                yield n, edges, [sorted(S) for S in combo]


def shuffled(rng, xs):
    xs = list(xs)
    rng.shuffle(xs)
    return xs

